#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace kc {

/// Dense row-major double matrix. Rows are samples, columns are features.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Sorted, duplicate-free set of 0-based column indices.
using IndexSet = std::vector<std::size_t>;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Rows of `m` selected by `rows`, in the given order.
Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows);
Vector take_rows(const Vector& v, const std::vector<std::size_t>& rows);

/// Columns of `m` selected by `cols`, in the given order.
Matrix take_cols(const Matrix& m, const IndexSet& cols);

/// [a, b] side by side. Row counts must agree.
Matrix hstack(const Matrix& a, const Matrix& b);

}  // namespace kc
