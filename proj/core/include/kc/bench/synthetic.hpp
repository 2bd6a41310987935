#pragma once

#include "kc/numcore/matrix.hpp"
#include "kc/numcore/rng.hpp"

#include <cstddef>

namespace kc::bench {

struct SparseGroundTruth {
  Vector beta;
  IndexSet h0;  // null concepts, beta_j == 0
  IndexSet h1;  // important concepts
  double amplitude = 0.0;
  std::size_t m = 0;
  std::size_t k = 0;

  Eigen::Index dim() const { return beta.size(); }
};

/// k support indices uniform without replacement, each nonzero +-a/sqrt(m)
/// with a fair sign. Throws InvalidArity when k > p.
SparseGroundTruth generate_sparse_beta(std::size_t p, std::size_t k, double amplitude, std::size_t m, RngStream& rng);

enum class LabelNoise { StandardNormal, None };

/// y_i = 1 when beta^T z_i + eps_i > 0, else 0; each row consumes one normal
/// draw, in row order, even when the noise is switched off.
Vector generate_labels(const Matrix& z, const SparseGroundTruth& truth, RngStream& rng,
                       LabelNoise noise = LabelNoise::StandardNormal);

struct FdpPower {
  double fdp = 0.0;
  double power = 0.0;
};

/// Throws EmptyH1 when the truth has no important concepts.
FdpPower fdp_and_power(const IndexSet& selected, const SparseGroundTruth& truth);

/// Random correlation matrix with mild dependence: a rank-p/4 factor model
/// plus identity, rescaled to unit diagonal.
Matrix random_correlation(std::size_t p, RngStream& rng, double factor_scale = 0.2);

/// m rows from N(0, sigma).
Matrix sample_gaussian(const Matrix& sigma, std::size_t m, RngStream& rng);

}  // namespace kc::bench
