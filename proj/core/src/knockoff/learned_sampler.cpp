#include "kc/knockoff/learned_sampler.hpp"

#include "kc/numcore/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kc::knockoff {
namespace {

struct MomentLoss {
  double value = 0.0;
  Matrix grad;  // dL/d(generator output)
};

// Second-moment discrepancy of a batch [x, g] against the joint target
// [[sigma, sigma - D], [sigma - D, sigma]], plus the mean-matching term.
MomentLoss moment_loss(const Matrix& x, const Matrix& g, const Matrix& sigma, const Vector& s) {
  const double b = static_cast<double>(x.rows());
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const Eigen::RowVectorXd g_mean = g.colwise().mean();
  const Matrix xc = x.rowwise() - x_mean;
  const Matrix gc = g.rowwise() - g_mean;

  Matrix cross_target = sigma;
  cross_target.diagonal() -= s;
  const Matrix e_xx = xc.transpose() * xc / (b - 1.0) - sigma;
  const Matrix e_xg = xc.transpose() * gc / (b - 1.0) - cross_target;
  const Matrix e_gg = gc.transpose() * gc / (b - 1.0) - sigma;
  const Eigen::RowVectorXd mean_gap = g_mean - x_mean;

  MomentLoss out;
  out.value = e_xx.squaredNorm() + 2.0 * e_xg.squaredNorm() + e_gg.squaredNorm() + mean_gap.squaredNorm();
  out.grad = (4.0 / (b - 1.0)) * (xc * e_xg + gc * e_gg);
  out.grad.rowwise() += (2.0 / b) * mean_gap;
  return out;
}

Matrix generate(const nn::Mlp& generator, const Matrix& zs, RngStream& rng) {
  const Matrix noise = gaussian_draws(rng, static_cast<std::size_t>(zs.rows()), static_cast<std::size_t>(zs.cols()));
  return generator.forward(hstack(zs, noise));
}

}  // namespace

LearnedSampler train_learned_sampler(const Matrix& z, RngStream& rng, const LearnedSamplerOptions& options) {
  const Eigen::Index n = z.rows();
  const Eigen::Index p = z.cols();
  if (p == 0 || n < 10 * p) {
    throw Error(ErrorCode::InsufficientData, "train_learned_sampler: need n >= 10 p, got n=" + std::to_string(n) +
                                                 " p=" + std::to_string(p));
  }
  Standardized standardized = standardize_columns(z);
  const Matrix& zs = standardized.values;
  Matrix sigma = empirical_covariance(zs);
  sigma.diagonal().setOnes();

  LearnedSampler sampler;
  sampler.input_map = standardized.map;
  sampler.target_covariance = Covariance{sigma, 0.0};
  sampler.s_standardized = equicorrelated_s(sampler.target_covariance);

  const auto hidden = static_cast<std::size_t>(p) * std::max<std::size_t>(options.hidden_multiplier, 1);
  sampler.generator = nn::Mlp::random({2 * static_cast<std::size_t>(p), hidden, static_cast<std::size_t>(p)},
                                      {nn::Activation::Tanh, nn::Activation::Identity}, rng);

  nn::MomentumSgd optimizer(options.learning_rate, options.momentum);
  nn::MlpGradients grads = sampler.generator.make_gradients();
  nn::MlpTrace trace;
  const auto batch = static_cast<std::size_t>(std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(options.batch_size), std::min<Eigen::Index>(n, 2), n));

  const double pi = std::acos(-1.0);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const double progress = static_cast<double>(epoch) / static_cast<double>(options.epochs);
    optimizer.set_learning_rate(options.learning_rate * 0.5 * (1.0 + std::cos(pi * progress)));
    const auto order = rng.permutation(static_cast<std::size_t>(n));
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start + batch <= order.size(); start += batch) {
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(start + batch));
      const Matrix x = take_rows(zs, rows);
      const Matrix noise = gaussian_draws(rng, batch, static_cast<std::size_t>(p));
      const Matrix g = sampler.generator.forward(hstack(x, noise), trace);
      const MomentLoss loss = moment_loss(x, g, sigma, sampler.s_standardized);
      if (!std::isfinite(loss.value)) {
        throw Error(ErrorCode::NonFiniteLoss, "train_learned_sampler: loss diverged at epoch " + std::to_string(epoch));
      }
      grads.set_zero();
      sampler.generator.backward(trace, loss.grad, grads);
      if (options.clip_norm > 0.0) {
        auto spans = grads.spans();
        double sq = 0.0;
        for (const auto& sp : spans) {
          for (double v : sp) sq += v * v;
        }
        const double norm = std::sqrt(sq);
        if (norm > options.clip_norm) {
          const double scale = options.clip_norm / norm;
          for (auto& sp : spans) {
            for (double& v : sp) v *= scale;
          }
        }
      }
      optimizer.step(sampler.generator.parameter_spans(), grads.spans());
      epoch_loss += loss.value;
      ++batches;
    }
    sampler.report.epoch_loss.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(batches, 1)));
  }
  sampler.report.final_loss = sampler.report.epoch_loss.empty() ? 0.0 : sampler.report.epoch_loss.back();

  const Matrix knock = generate(sampler.generator, zs, rng);
  const Matrix joint = empirical_covariance(hstack(zs, knock));
  sampler.report.second_moment_gap = (joint - joint_target(sigma, sampler.s_standardized)).cwiseAbs().maxCoeff();
  if (!std::isfinite(sampler.report.second_moment_gap)) {
    throw Error(ErrorCode::NonFiniteLoss, "train_learned_sampler: generator output is not finite");
  }
  return sampler;
}

KnockoffPair sample_learned(const LearnedSampler& sampler, const Matrix& z, RngStream& rng) {
  if (z.cols() != sampler.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "sample_learned: sampler trained for p=" + std::to_string(sampler.dim()) +
                                                  ", data has p=" + std::to_string(z.cols()));
  }
  const Matrix zs = sampler.input_map.apply(z);
  KnockoffPair pair;
  pair.originals = z;
  pair.knockoffs = sampler.input_map.invert(generate(sampler.generator, zs, rng));
  pair.kind = SamplerKind::Learned;
  pair.s = sampler.s_standardized.cwiseProduct(sampler.input_map.scale.cwiseAbs2());
  pair.seed = rng.seed();
  return pair;
}

}  // namespace kc::knockoff
