#include "kc/concepts/losses.hpp"

#include "kc/numcore/error.hpp"

#include <cmath>
#include <string>

namespace kc::concepts {
namespace {

double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }
double sigmoid(double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); }

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Batch Batch::slice(const std::vector<std::size_t>& rows) const {
  Batch out;
  out.images = take_rows(images, rows);
  if (concepts) out.concepts = take_rows(*concepts, rows);
  if (labels) out.labels = take_rows(*labels, rows);
  return out;
}

ModelGradients ModelGradients::like(const ConceptModel& model) {
  ModelGradients g;
  g.encoder = model.encoder.make_gradients();
  g.decoder = model.decoder.make_gradients();
  g.head = Vector::Zero(model.head.size());
  return g;
}

void ModelGradients::set_zero() {
  encoder.set_zero();
  decoder.set_zero();
  head.setZero();
  head_intercept = 0.0;
}

std::vector<std::span<double>> ModelGradients::spans() {
  std::vector<std::span<double>> out = encoder.spans();
  for (auto s : decoder.spans()) out.push_back(s);
  out.emplace_back(head.data(), static_cast<std::size_t>(head.size()));
  out.emplace_back(&head_intercept, 1);
  return out;
}

LossBreakdown evaluate_loss(const ConceptModel& model, const Batch& batch, const LossWeights& weights,
                            const Matrix& noise, ModelGradients* grads, const EvaluateOptions& options) {
  const Eigen::Index b = batch.size();
  const Eigen::Index p = model.latent_dim();
  if (b == 0) throw Error(ErrorCode::InvalidArgument, "evaluate_loss: empty batch");
  if (batch.images.cols() != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "evaluate_loss: image width differs from encoder input");
  }
  if (noise.rows() != b || noise.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "evaluate_loss: noise must be batch x latent");
  }
  if (weights.concept_term > 0.0 && !batch.concepts) {
    throw Error(ErrorCode::MissingLabels, "concept supervision is weighted but the batch has no concept labels");
  }
  if (weights.label > 0.0 && !batch.labels) {
    throw Error(ErrorCode::MissingLabels, "label prediction is weighted but the batch has no class labels");
  }
  if (batch.concepts && (batch.concepts->rows() != b || batch.concepts->cols() != p)) {
    throw Error(ErrorCode::DimensionMismatch, "evaluate_loss: concept labels must be batch x latent");
  }
  if (batch.labels && batch.labels->size() != b) {
    throw Error(ErrorCode::DimensionMismatch, "evaluate_loss: label count differs from batch size");
  }

  const double nb = static_cast<double>(b);
  nn::MlpTrace enc_trace;
  const Matrix enc_out = grads ? model.encoder.forward(batch.images, enc_trace) : model.encoder.forward(batch.images);
  const Matrix mean = enc_out.leftCols(p);
  const Matrix raw_logvar = enc_out.rightCols(p);
  const Matrix logvar = raw_logvar.cwiseMax(kLogVarMin).cwiseMin(kLogVarMax);
  const Matrix sigma = (0.5 * logvar.array()).exp().matrix();
  const Matrix z = mean.array() + sigma.array() * noise.array();

  LossBreakdown out;
  Matrix grad_z = Matrix::Zero(b, p);
  Matrix grad_mean = Matrix::Zero(b, p);
  Matrix grad_logvar = Matrix::Zero(b, p);

  if (weights.reconstruction > 0.0 || grads == nullptr) {
    nn::MlpTrace dec_trace;
    const Matrix recon = grads ? model.decoder.forward(z, dec_trace) : model.decoder.forward(z);
    const Matrix diff = recon - batch.images;
    const double count = nb * static_cast<double>(batch.images.cols());
    out.reconstruction = diff.squaredNorm() / count;
    if (grads && weights.reconstruction > 0.0) {
      const Matrix grad_recon = (2.0 * weights.reconstruction / count) * diff;
      grad_z += model.decoder.backward(dec_trace, grad_recon, grads->decoder);
    }
  }

  out.kl = 0.5 * (mean.array().square() + logvar.array().exp() - logvar.array() - 1.0).sum() / nb;
  if (grads && weights.kl > 0.0) {
    grad_mean += (weights.kl / nb) * mean;
    grad_logvar.array() += (0.5 * weights.kl / nb) * (logvar.array().exp() - 1.0);
  }

  if (batch.concepts) {
    const Matrix diff = z - *batch.concepts;
    const double count = nb * static_cast<double>(p);
    out.concept_term = diff.squaredNorm() / count;
    if (grads && weights.concept_term > 0.0) grad_z += (2.0 * weights.concept_term / count) * diff;
  }

  if (batch.labels) {
    const Vector logits = (z * model.head).array() + model.head_intercept;
    const Vector& y = *batch.labels;
    Vector residual(b);
    double bce = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
      bce += softplus(logits(i)) - y(i) * logits(i);
      residual(i) = sigmoid(logits(i)) - y(i);
    }
    out.label = bce / nb;
    if (grads && weights.label > 0.0) {
      const Vector grad_logit = (weights.label / nb) * residual;
      grads->head.noalias() += z.transpose() * grad_logit;
      grads->head_intercept += grad_logit.sum();
      grad_z.noalias() += grad_logit * model.head.transpose();
    }
  }

  out.sparsity = model.head.lpNorm<1>();
  if (grads && weights.sparsity > 0.0 && options.include_l1_gradient) {
    grads->head += weights.sparsity * model.head.unaryExpr(&sign);
  }

  out.total = weights.reconstruction * out.reconstruction + weights.kl * out.kl + weights.concept_term * out.concept_term +
              weights.label * out.label + weights.sparsity * out.sparsity;

  if (grads) {
    grad_mean += grad_z;
    grad_logvar.array() += grad_z.array() * 0.5 * sigma.array() * noise.array();
    // The clamp passes gradient only strictly inside its bounds.
    grad_logvar.array() *= (raw_logvar.array() > kLogVarMin && raw_logvar.array() < kLogVarMax).cast<double>();
    Matrix grad_out(b, 2 * p);
    grad_out << grad_mean, grad_logvar;
    model.encoder.backward(enc_trace, grad_out, grads->encoder);
  }
  return out;
}

LossBreakdown vae_loss(const ConceptModel& model, const Batch& batch, RngStream& rng) {
  LossWeights w;
  w.reconstruction = model.config.weights.reconstruction;
  w.kl = model.config.weights.kl;
  const Matrix noise = gaussian_draws(rng, static_cast<std::size_t>(batch.size()), static_cast<std::size_t>(model.latent_dim()));
  return evaluate_loss(model, batch, w, noise, nullptr);
}

LossBreakdown cbm_loss(const ConceptModel& model, const Batch& batch, RngStream& rng) {
  if (!batch.concepts || !batch.labels) {
    throw Error(ErrorCode::MissingLabels, "cbm_loss: needs concept labels and class labels");
  }
  LossWeights w;
  w.concept_term = model.config.weights.concept_term;
  w.label = model.config.weights.label;
  const Matrix noise = gaussian_draws(rng, static_cast<std::size_t>(batch.size()), static_cast<std::size_t>(model.latent_dim()));
  return evaluate_loss(model, batch, w, noise, nullptr);
}

LossBreakdown unified_loss(const ConceptModel& model, const Batch& batch, RngStream& rng) {
  const Matrix noise = gaussian_draws(rng, static_cast<std::size_t>(batch.size()), static_cast<std::size_t>(model.latent_dim()));
  return evaluate_loss(model, batch, model.config.weights, noise, nullptr);
}

}  // namespace kc::concepts
