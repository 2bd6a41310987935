#pragma once

#include "kc/numcore/matrix.hpp"

namespace kc {

inline constexpr double kDefaultShrinkage = 0.05;

struct Covariance {
  Matrix sigma;
  double shrinkage = 0.0;

  Eigen::Index dim() const { return sigma.rows(); }
};

/// Empirical covariance with 1/(n-1) normalization.
Matrix empirical_covariance(const Matrix& samples);

/// (1 - intensity) * S + intensity * diag(S). Throws DegenerateData on a
/// zero-variance column and NotPositiveDefinite if the result still fails
/// Cholesky.
Covariance shrink_covariance(const Matrix& samples, double intensity = kDefaultShrinkage);

/// Per-column affine map to mean 0 and unit sample standard deviation.
struct Standardization {
  Vector mean;
  Vector scale;

  Matrix apply(const Matrix& m) const;
  Matrix invert(const Matrix& m) const;
};

struct Standardized {
  Matrix values;
  Standardization map;
};

Standardized standardize_columns(const Matrix& m);

}  // namespace kc
