#pragma once

#include "kc/concepts/method.hpp"
#include "kc/nn/mlp.hpp"
#include "kc/numcore/matrix.hpp"
#include "kc/numcore/rng.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace kc::concepts {

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

struct Architecture {
  std::size_t input_dim = 0;
  std::size_t latent_dim = 16;
  std::size_t hidden_width = 256;
  std::size_t hidden_layers = 2;
};

/// Encoder phi (image -> [mu, logvar]), decoder theta (latent -> image in
/// [0, 1]), and the linear head on the latents that predicts the binary label.
struct ConceptModel {
  nn::Mlp encoder;
  nn::Mlp decoder;
  Vector head;
  double head_intercept = 0.0;
  MethodConfig config;

  Eigen::Index latent_dim() const { return head.size(); }
  Eigen::Index input_dim() const { return encoder.input_dim(); }
  std::size_t parameter_count() const { return encoder.parameter_count() + decoder.parameter_count() + head.size() + 1; }
};

/// Randomly initialized model; leaky-rectifier hidden layers, sigmoid decoder output.
ConceptModel make_concept_model(const Architecture& arch, const MethodConfig& config, RngStream& rng);
/// Same shapes with all weights and biases zero.
ConceptModel make_zero_model(const Architecture& arch, const MethodConfig& config);

enum class EncodeMode { Deterministic, Sample };

struct Encoding {
  Matrix mean;
  Matrix logvar;  // clamped to [kLogVarMin, kLogVarMax]
  Matrix z;
};

/// Deterministic mode returns z = mu. Sample mode returns mu + exp(logvar/2) xi
/// with xi drawn from `rng`, which is then required.
Encoding encode(const ConceptModel& model, const Matrix& x, EncodeMode mode, RngStream* rng = nullptr);
Matrix encode_mean(const ConceptModel& model, const Matrix& x);
Matrix decode(const ConceptModel& model, const Matrix& z);
/// Probability of the positive class from the linear head.
Vector predict_label(const ConceptModel& model, const Matrix& z);

enum class ParameterGroup { Encoder, Decoder, Head };

/// Every parameter block of the model together with its group, in a fixed
/// order shared with ModelGradients::spans.
std::vector<std::pair<ParameterGroup, std::span<double>>> parameter_blocks(ConceptModel& model);

/// Checkpoint directory: model.json (shapes, activations, weights alpha,
/// method) plus one KCMX file per parameter block.
void save_checkpoint(const std::filesystem::path& dir, const ConceptModel& model);
ConceptModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace kc::concepts
