#pragma once

#include "kc/concepts/losses.hpp"

#include <cstddef>
#include <set>
#include <vector>

namespace kc::concepts {

struct TrainOptions {
  std::size_t epochs = 20;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  /// Rescale the minibatch gradient to this global norm when it exceeds it; 0 disables.
  double clip_norm = 0.0;
};

struct TrainResult {
  ConceptModel model;
  std::vector<double> loss_history;  // mean minibatch objective per epoch
};

/// Minibatch SGD with momentum on the smooth part of the objective, followed
/// after every step by the proximal soft-threshold of the L1 term on the
/// head, which produces exact zeros. Throws NonFiniteLoss on divergence.
TrainResult train(ConceptModel model, const Batch& dataset, const TrainOptions& options, RngStream& rng);

/// Throws MissingLabels when the dataset lacks data an active term needs.
void check_data_requirements(const MethodConfig& config, const Batch& batch);

struct GradientCheckOptions {
  double step = 1e-5;
  std::size_t max_parameters = 200;
  std::set<ParameterGroup> frozen;
  /// Denominator floor of the relative error.
  double scale_floor = 1e-6;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

/// Compares the analytic gradient of the configured objective against
/// central differences. Heads entries that sit exactly at zero are checked
/// one-sided against the subgradient bounds of the L1 term.
GradientCheckReport gradient_check(const ConceptModel& model, const Batch& batch, const MethodConfig& config,
                                   RngStream& rng, const GradientCheckOptions& options = {});

}  // namespace kc::concepts
