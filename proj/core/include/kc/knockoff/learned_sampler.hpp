#pragma once

#include "kc/knockoff/knockoff.hpp"
#include "kc/nn/mlp.hpp"
#include "kc/numcore/covariance.hpp"

#include <cstddef>
#include <vector>

namespace kc::knockoff {

struct LearnedSamplerOptions {
  std::size_t epochs = 200;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 512;
  /// Hidden width as a multiple of the concept dimension.
  std::size_t hidden_multiplier = 4;
  /// Global gradient-norm cap per step; the moment loss is quartic in the
  /// generator output, so unclipped steps can run away. 0 disables.
  double clip_norm = 1.0;
};

struct TrainingReport {
  std::vector<double> epoch_loss;
  double final_loss = 0.0;
  /// Max-abs second-moment gap on the full training set after training.
  double second_moment_gap = 0.0;
};

/// Moment-matching knockoff generator: a one-hidden-layer tanh network
/// mapping (standardized z, noise) to a standardized knockoff. Training
/// matches only the first two moments of [Z, Z~] to the equi-correlated
/// Gaussian target; higher moments are unconstrained, so FDR control is
/// approximate for non-Gaussian concepts.
struct LearnedSampler {
  nn::Mlp generator;
  Covariance target_covariance;  // correlation-scale target used in training
  Standardization input_map;      // data units <-> standardized units
  Vector s_standardized;
  TrainingReport report;

  Eigen::Index dim() const { return input_map.mean.size(); }
};

/// Trains by minibatch SGD on ||Cov([Z, g]) - G||_F^2 + ||mean(g) - mean(Z)||^2.
/// Throws InsufficientData when n < 10 p and NonFiniteLoss on divergence.
LearnedSampler train_learned_sampler(const Matrix& z, RngStream& rng, const LearnedSamplerOptions& options = {});

/// Draws one knockoff row per input row with fresh generator noise.
KnockoffPair sample_learned(const LearnedSampler& sampler, const Matrix& z, RngStream& rng);

}  // namespace kc::knockoff
