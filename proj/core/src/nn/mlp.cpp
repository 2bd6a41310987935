#include "kc/nn/mlp.hpp"

#include "kc/numcore/error.hpp"

#include <cmath>
#include <string>

namespace kc::nn {
namespace {

void apply_activation(Matrix& m, Activation a) {
  switch (a) {
    case Activation::Identity:
      return;
    case Activation::Tanh:
      m = m.array().tanh().matrix();
      return;
    case Activation::LeakyRelu:
      m = m.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
      return;
    case Activation::Sigmoid:
      m = m.unaryExpr([](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
      return;
  }
}

// Multiplies the upstream gradient by the activation derivative, expressed
// in terms of the activation output (every supported activation allows it).
void apply_derivative(Matrix& grad, const Matrix& out, Activation a) {
  switch (a) {
    case Activation::Identity:
      return;
    case Activation::Tanh:
      grad.array() *= 1.0 - out.array().square();
      return;
    case Activation::LeakyRelu:
      grad.array() *= out.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; }).array();
      return;
    case Activation::Sigmoid:
      grad.array() *= out.array() * (1.0 - out.array());
      return;
  }
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "leaky_relu") return Activation::LeakyRelu;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw Error(ErrorCode::FormatError, "unknown activation '" + std::string(name) + "'");
}

void MlpGradients::set_zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

std::vector<std::span<double>> MlpGradients::spans() {
  std::vector<std::span<double>> out;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out.emplace_back(weight[i].data(), static_cast<std::size_t>(weight[i].size()));
    out.emplace_back(bias[i].data(), static_cast<std::size_t>(bias[i].size()));
  }
  return out;
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].bias.size() != layers_[i].out_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "Mlp: bias length differs from layer width");
    }
    if (i > 0 && layers_[i].in_dim() != layers_[i - 1].out_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "Mlp: consecutive layer widths disagree");
    }
  }
}

Mlp Mlp::zeros(const std::vector<std::size_t>& widths, const std::vector<Activation>& activations) {
  if (widths.size() != activations.size() + 1) {
    throw Error(ErrorCode::InvalidArgument, "Mlp::zeros: need one activation per layer");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < activations.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(widths[i]);
    const auto out = static_cast<Eigen::Index>(widths[i + 1]);
    layers.push_back(DenseLayer{Matrix::Zero(in, out), Vector::Zero(out), activations[i]});
  }
  return Mlp(std::move(layers));
}

Mlp Mlp::random(const std::vector<std::size_t>& widths, const std::vector<Activation>& activations,
                RngStream& rng) {
  Mlp net = zeros(widths, activations);
  for (auto& layer : net.layers_) {
    const double fan_in = static_cast<double>(layer.in_dim());
    const double fan_out = static_cast<double>(layer.out_dim());
    const double bound = layer.activation == Activation::LeakyRelu ? std::sqrt(6.0 / fan_in)
                                                                    : std::sqrt(6.0 / (fan_in + fan_out));
    double* w = layer.weight.data();
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) w[k] = rng.uniform(-bound, bound);
  }
  return net;
}

Eigen::Index Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
Eigen::Index Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (const auto& l : layers_) count += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return count;
}

Matrix Mlp::forward(const Matrix& x) const {
  if (x.cols() != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "Mlp::forward: expected " + std::to_string(input_dim()) + " inputs, got " + std::to_string(x.cols()));
  }
  Matrix h = x;
  for (const auto& layer : layers_) {
    Matrix next = h * layer.weight;
    next.rowwise() += layer.bias.transpose();
    apply_activation(next, layer.activation);
    h = std::move(next);
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x, MlpTrace& trace) const {
  if (x.cols() != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "Mlp::forward: expected " + std::to_string(input_dim()) + " inputs, got " + std::to_string(x.cols()));
  }
  trace.inputs.clear();
  trace.activations.clear();
  Matrix h = x;
  for (const auto& layer : layers_) {
    trace.inputs.push_back(h);
    Matrix next = h * layer.weight;
    next.rowwise() += layer.bias.transpose();
    apply_activation(next, layer.activation);
    trace.activations.push_back(next);
    h = std::move(next);
  }
  return h;
}

Matrix Mlp::backward(const MlpTrace& trace, const Matrix& grad_output, MlpGradients& grads) const {
  Matrix grad = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& layer = layers_[i];
    apply_derivative(grad, trace.activations[i], layer.activation);
    grads.weight[i].noalias() += trace.inputs[i].transpose() * grad;
    grads.bias[i] += grad.colwise().sum().transpose();
    Matrix upstream = grad * layer.weight.transpose();
    grad = std::move(upstream);
  }
  return grad;
}

MlpGradients Mlp::make_gradients() const {
  MlpGradients g;
  for (const auto& l : layers_) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

std::vector<std::span<double>> Mlp::parameter_spans() {
  std::vector<std::span<double>> out;
  for (auto& l : layers_) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return out;
}

void MomentumSgd::step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::DimensionMismatch, "MomentumSgd::step: parameter and gradient lists differ");
  }
  if (velocity_.empty()) {
    velocity_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) velocity_[i].assign(params[i].size(), 0.0);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& v = velocity_[i];
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      v[k] = momentum_ * v[k] - lr_ * grads[i][k];
      params[i][k] += v[k];
    }
  }
}

}  // namespace kc::nn
