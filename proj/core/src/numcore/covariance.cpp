#include "kc/numcore/covariance.hpp"

#include "kc/numcore/error.hpp"
#include "kc/numcore/linalg.hpp"

#include <cmath>
#include <string>

namespace kc {
namespace {

void require_rows(const Matrix& m, const char* who) {
  if (m.rows() < 2) {
    throw Error(ErrorCode::InsufficientData, std::string(who) + ": need at least 2 rows");
  }
}

}  // namespace

Matrix empirical_covariance(const Matrix& samples) {
  require_rows(samples, "empirical_covariance");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Matrix centered = samples.rowwise() - mean;
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(samples.rows() - 1);
  // Symmetrize exactly; the product is symmetric only up to rounding.
  return 0.5 * (cov + cov.transpose());
}

Covariance shrink_covariance(const Matrix& samples, double intensity) {
  if (!(intensity >= 0.0 && intensity <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "shrink_covariance: intensity outside [0, 1]");
  }
  Matrix s = empirical_covariance(samples);
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    if (!(s(j, j) > 0.0)) {
      throw Error(ErrorCode::DegenerateData, "shrink_covariance: zero variance in column " + std::to_string(j));
    }
  }
  Matrix shrunk = (1.0 - intensity) * s;
  shrunk.diagonal() = s.diagonal();
  (void)cholesky_spd(shrunk);
  return Covariance{std::move(shrunk), intensity};
}

Matrix Standardization::apply(const Matrix& m) const {
  if (m.cols() != mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Standardization::apply: column count differs");
  }
  Matrix out = m.rowwise() - mean.transpose();
  return out.array().rowwise() / scale.transpose().array();
}

Matrix Standardization::invert(const Matrix& m) const {
  if (m.cols() != mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Standardization::invert: column count differs");
  }
  Matrix out = m.array().rowwise() * scale.transpose().array();
  return out.rowwise() + mean.transpose();
}

Standardized standardize_columns(const Matrix& m) {
  require_rows(m, "standardize_columns");
  const double n = static_cast<double>(m.rows());
  Standardization map;
  map.mean = m.colwise().mean().transpose();
  map.scale.resize(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double ss = (m.col(j).array() - map.mean(j)).square().sum();
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw Error(ErrorCode::DegenerateData, "standardize_columns: zero variance in column " + std::to_string(j));
    }
    map.scale(j) = sd;
  }
  Matrix values = map.apply(m);
  return Standardized{std::move(values), std::move(map)};
}

}  // namespace kc
