#pragma once

#include "kc/concepts/model.hpp"

#include <optional>

namespace kc::concepts {

/// Images are b x d with values in [0, 1]. Concept labels are b x p
/// {0, 1} targets; labels are binary class labels.
struct Batch {
  Matrix images;
  std::optional<Matrix> concepts;
  std::optional<Vector> labels;

  Eigen::Index size() const { return images.rows(); }
  Batch slice(const std::vector<std::size_t>& rows) const;
};

/// Raw objective terms and their weighted total.
struct LossBreakdown {
  double total = 0.0;
  double reconstruction = 0.0;  // mean squared error per pixel
  double kl = 0.0;              // KL(N(mu, sigma^2) || N(0, I)), batch mean
  double concept_term = 0.0;    // mean squared error of z against concept labels
  double label = 0.0;           // binary cross-entropy of the linear head
  double sparsity = 0.0;        // ||head||_1
};

struct ModelGradients {
  nn::MlpGradients encoder;
  nn::MlpGradients decoder;
  Vector head;
  double head_intercept = 0.0;

  static ModelGradients like(const ConceptModel& model);
  void set_zero();
  /// Same order as parameter_blocks().
  std::vector<std::span<double>> spans();
};

struct EvaluateOptions {
  /// Add alpha_5 sign(head) to the head gradient. Training leaves this off
  /// and applies the L1 term as a proximal step instead.
  bool include_l1_gradient = true;
};

/// Evaluates the weighted objective with fixed reparameterization noise
/// (b x p) and, when `grads` is given, accumulates its exact gradient.
/// Terms with zero weight are not differentiated. Throws MissingLabels when
/// a weighted term has no data.
LossBreakdown evaluate_loss(const ConceptModel& model, const Batch& batch, const LossWeights& weights,
                            const Matrix& noise, ModelGradients* grads, const EvaluateOptions& options = {});

/// alpha_1 L_R + alpha_2 L_D with the model's weights.
LossBreakdown vae_loss(const ConceptModel& model, const Batch& batch, RngStream& rng);
/// alpha_3 L_C + alpha_4 L_Y with the model's weights. Throws MissingLabels.
LossBreakdown cbm_loss(const ConceptModel& model, const Batch& batch, RngStream& rng);
/// Full five-term objective with the model's weights.
LossBreakdown unified_loss(const ConceptModel& model, const Batch& batch, RngStream& rng);

}  // namespace kc::concepts
