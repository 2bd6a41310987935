#pragma once

#include "kc/numcore/matrix.hpp"
#include "kc/numcore/rng.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace kc::nn {

enum class Activation { Identity, Tanh, LeakyRelu, Sigmoid };

inline constexpr double kLeakySlope = 0.01;

std::string_view to_string(Activation a) noexcept;
Activation activation_from_string(std::string_view name);

struct DenseLayer {
  Matrix weight;  // in x out
  Vector bias;    // out
  Activation activation = Activation::Identity;

  Eigen::Index in_dim() const { return weight.rows(); }
  Eigen::Index out_dim() const { return weight.cols(); }
};

/// Per-layer gradient buffers with the same shapes as an Mlp's parameters.
struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  void set_zero();
  std::vector<std::span<double>> spans();
};

/// Intermediate values recorded by a forward pass for backpropagation.
struct MlpTrace {
  std::vector<Matrix> inputs;       // input to each layer
  std::vector<Matrix> activations;  // output of each layer, after activation
};

/// Fully connected feed-forward network acting on row batches.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  /// Zero weights and biases. widths has one more entry than activations.
  static Mlp zeros(const std::vector<std::size_t>& widths, const std::vector<Activation>& activations);
  /// Scaled-uniform initialization (He for leaky units, Glorot otherwise), zero biases.
  static Mlp random(const std::vector<std::size_t>& widths, const std::vector<Activation>& activations,
                    RngStream& rng);

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  std::size_t parameter_count() const;

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, MlpTrace& trace) const;

  /// Adds dL/dparams into `grads` and returns dL/dx for the traced batch.
  Matrix backward(const MlpTrace& trace, const Matrix& grad_output, MlpGradients& grads) const;

  MlpGradients make_gradients() const;

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  /// Weight then bias of every layer, in layer order. Matches MlpGradients::spans.
  std::vector<std::span<double>> parameter_spans();

 private:
  std::vector<DenseLayer> layers_;
};

/// Stochastic gradient descent with heavy-ball momentum over parallel span lists.
class MomentumSgd {
 public:
  MomentumSgd(double learning_rate, double momentum) : lr_(learning_rate), momentum_(momentum) {}

  void step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads);
  double learning_rate() const noexcept { return lr_; }
  void set_learning_rate(double lr) noexcept { lr_ = lr; }

 private:
  double lr_;
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

}  // namespace kc::nn
