#include "kc/bench/synthetic.hpp"

#include "kc/numcore/error.hpp"
#include "kc/numcore/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kc::bench {

SparseGroundTruth generate_sparse_beta(std::size_t p, std::size_t k, double amplitude, std::size_t m, RngStream& rng) {
  if (k > p) {
    throw Error(ErrorCode::InvalidArity,
                "generate_sparse_beta: k = " + std::to_string(k) + " exceeds p = " + std::to_string(p));
  }
  if (!(amplitude > 0.0) || m == 0) {
    throw Error(ErrorCode::InvalidArgument, "generate_sparse_beta: amplitude and m must be positive");
  }
  SparseGroundTruth truth;
  truth.amplitude = amplitude;
  truth.m = m;
  truth.k = k;
  truth.beta = Vector::Zero(static_cast<Eigen::Index>(p));
  const double magnitude = amplitude / std::sqrt(static_cast<double>(m));
  auto support = rng.sample_without_replacement(p, k);
  for (auto j : support) truth.beta(static_cast<Eigen::Index>(j)) = rng.bernoulli(0.5) ? magnitude : -magnitude;
  std::sort(support.begin(), support.end());
  truth.h1 = support;
  for (std::size_t j = 0; j < p; ++j) {
    if (truth.beta(static_cast<Eigen::Index>(j)) == 0.0) truth.h0.push_back(j);
  }
  return truth;
}

Vector generate_labels(const Matrix& z, const SparseGroundTruth& truth, RngStream& rng, LabelNoise noise) {
  if (z.cols() != truth.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "generate_labels: concept width does not match beta");
  }
  const Vector signal = z * truth.beta;
  Vector y(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double eps = rng.normal();
    const double u = signal(i) + (noise == LabelNoise::StandardNormal ? eps : 0.0);
    y(i) = u > 0.0 ? 1.0 : 0.0;
  }
  return y;
}

FdpPower fdp_and_power(const IndexSet& selected, const SparseGroundTruth& truth) {
  if (truth.h1.empty()) throw Error(ErrorCode::EmptyH1, "fdp_and_power: power is undefined without important concepts");
  std::size_t false_hits = 0;
  std::size_t true_hits = 0;
  for (auto j : selected) {
    if (j >= static_cast<std::size_t>(truth.dim())) {
      throw Error(ErrorCode::PreconditionViolated, "fdp_and_power: selected index out of range");
    }
    if (truth.beta(static_cast<Eigen::Index>(j)) == 0.0) {
      ++false_hits;
    } else {
      ++true_hits;
    }
  }
  FdpPower out;
  out.fdp = static_cast<double>(false_hits) / static_cast<double>(std::max<std::size_t>(1, selected.size()));
  out.power = static_cast<double>(true_hits) / static_cast<double>(truth.h1.size());
  return out;
}

Matrix random_correlation(std::size_t p, RngStream& rng, double factor_scale) {
  const std::size_t rank = std::max<std::size_t>(1, p / 4);
  const Matrix factors = gaussian_draws(rng, p, rank) * factor_scale;
  Matrix sigma = factors * factors.transpose();
  sigma.diagonal().array() += 1.0;
  const Vector inv_sd = sigma.diagonal().array().rsqrt();
  sigma = inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal();
  sigma.diagonal().setOnes();
  return sigma;
}

Matrix sample_gaussian(const Matrix& sigma, std::size_t m, RngStream& rng) {
  const Matrix chol = cholesky_spd(sigma);
  return gaussian_draws(rng, m, static_cast<std::size_t>(sigma.rows())) * chol.transpose();
}

}  // namespace kc::bench
