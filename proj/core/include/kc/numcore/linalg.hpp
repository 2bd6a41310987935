#pragma once

#include "kc/numcore/matrix.hpp"

namespace kc {

/// Pivots at or below this threshold reject a matrix as not positive definite.
inline constexpr double kCholeskyPivotFloor = 1e-12;

/// Lower-triangular L with L * L^T = m. Throws NotPositiveDefinite when a
/// pivot falls to kCholeskyPivotFloor or below; callers typically respond
/// by shrinking the matrix.
Matrix cholesky_spd(const Matrix& m);

/// Solves (L L^T) X = B given the lower factor L.
Matrix cholesky_solve(const Matrix& lower, const Matrix& rhs);
Vector cholesky_solve(const Matrix& lower, const Vector& rhs);

/// All eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
/// Throws NoConvergence if off-diagonal mass does not vanish within the sweep cap.
Vector symmetric_eigenvalues(const Matrix& m);

double min_eigenvalue(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = 1e-12);

}  // namespace kc
