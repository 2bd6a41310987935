#include "kc/concepts/trainer.hpp"

#include "kc/numcore/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kc::concepts {
namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

void clip(std::vector<std::span<double>>& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (auto s : grads) {
    for (double g : s) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (auto s : grads) {
    for (double& g : s) g *= scale;
  }
}

}  // namespace

void check_data_requirements(const MethodConfig& config, const Batch& batch) {
  if (config.weights.concept_term > 0.0 && !batch.concepts) {
    throw Error(ErrorCode::MissingLabels, config.name() + " needs concept labels");
  }
  if (config.weights.label > 0.0 && !batch.labels) {
    throw Error(ErrorCode::MissingLabels, config.name() + " needs class labels");
  }
}

TrainResult train(ConceptModel model, const Batch& dataset, const TrainOptions& options, RngStream& rng) {
  validate(model.config);
  check_data_requirements(model.config, dataset);
  TrainResult result;
  if (options.epochs == 0 || dataset.size() == 0) {
    result.model = std::move(model);
    return result;
  }
  const auto n = static_cast<std::size_t>(dataset.size());
  const std::size_t batch = std::clamp<std::size_t>(options.batch_size, 1, n);
  const auto p = static_cast<std::size_t>(model.latent_dim());
  const LossWeights& weights = model.config.weights;

  nn::MomentumSgd optimizer(options.learning_rate, options.momentum);
  ModelGradients grads = ModelGradients::like(model);
  std::vector<std::span<double>> params;
  for (auto& [group, span] : parameter_blocks(model)) params.push_back(span);
  auto grad_spans = grads.spans();
  const EvaluateOptions smooth_only{.include_l1_gradient = false};
  const double prox_step = options.learning_rate * weights.sparsity;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto order = rng.permutation(n);
    double epoch_total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Batch mb = dataset.slice(rows);
      const Matrix noise = gaussian_draws(rng, rows.size(), p);
      grads.set_zero();
      const LossBreakdown loss = evaluate_loss(model, mb, weights, noise, &grads, smooth_only);
      if (!std::isfinite(loss.total)) {
        throw Error(ErrorCode::NonFiniteLoss, "train: objective diverged in epoch " + std::to_string(epoch) +
                                                  "; lower the learning rate");
      }
      clip(grad_spans, options.clip_norm);
      optimizer.step(params, grad_spans);
      if (prox_step > 0.0) {
        for (Eigen::Index j = 0; j < model.head.size(); ++j) model.head(j) = soft_threshold(model.head(j), prox_step);
      }
      epoch_total += loss.total;
      ++steps;
    }
    const double mean_loss = epoch_total / static_cast<double>(steps);
    if (!std::isfinite(mean_loss)) throw Error(ErrorCode::NonFiniteLoss, "train: non-finite epoch loss");
    result.loss_history.push_back(mean_loss);
  }
  result.model = std::move(model);
  return result;
}

GradientCheckReport gradient_check(const ConceptModel& model, const Batch& batch, const MethodConfig& config,
                                   RngStream& rng, const GradientCheckOptions& options) {
  check_data_requirements(config, batch);
  const LossWeights& weights = config.weights;
  const Matrix noise = gaussian_draws(rng, static_cast<std::size_t>(batch.size()), static_cast<std::size_t>(model.latent_dim()));

  ConceptModel probe = model;
  ModelGradients analytic = ModelGradients::like(probe);
  // Smooth part only; the L1 part is added per coordinate below.
  (void)evaluate_loss(probe, batch, weights, noise, &analytic, EvaluateOptions{.include_l1_gradient = false});

  auto blocks = parameter_blocks(probe);
  auto grad_blocks = analytic.spans();

  struct Coordinate {
    std::size_t block;
    std::size_t index;
  };
  std::vector<Coordinate> coords;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (options.frozen.count(blocks[b].first) > 0) continue;
    for (std::size_t i = 0; i < blocks[b].second.size(); ++i) coords.push_back({b, i});
  }
  if (coords.size() > options.max_parameters) {
    const auto picks = rng.sample_without_replacement(coords.size(), options.max_parameters);
    std::vector<Coordinate> subset;
    for (auto k : picks) subset.push_back(coords[k]);
    coords = std::move(subset);
  }

  const std::size_t head_block = blocks.size() - 2;
  auto loss_at = [&](double& slot, double value) {
    const double saved = slot;
    slot = value;
    const double total = evaluate_loss(probe, batch, weights, noise, nullptr).total;
    slot = saved;
    return total;
  };
  auto relative = [&](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), options.scale_floor});
  };

  GradientCheckReport report;
  const double h = options.step;
  for (const auto& c : coords) {
    double& slot = blocks[c.block].second[c.index];
    const double x0 = slot;
    const double smooth = grad_blocks[c.block][c.index];
    const bool l1_coordinate = c.block == head_block && weights.sparsity > 0.0;
    if (l1_coordinate && x0 == 0.0) {
      // Kink of |x|: the right derivative is smooth + alpha5, the left smooth - alpha5.
      const double f0 = loss_at(slot, x0);
      const double right = (loss_at(slot, x0 + h) - f0) / h;
      const double left = (f0 - loss_at(slot, x0 - h)) / h;
      report.max_relative_error = std::max({report.max_relative_error, relative(smooth + weights.sparsity, right),
                                            relative(smooth - weights.sparsity, left)});
    } else {
      const double analytic_value = smooth + (l1_coordinate ? weights.sparsity * (x0 > 0.0 ? 1.0 : -1.0) : 0.0);
      const double numeric = (loss_at(slot, x0 + h) - loss_at(slot, x0 - h)) / (2.0 * h);
      report.max_relative_error = std::max(report.max_relative_error, relative(analytic_value, numeric));
    }
    ++report.checked;
  }
  return report;
}

}  // namespace kc::concepts
