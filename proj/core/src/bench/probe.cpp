#include "kc/bench/probe.hpp"

#include "kc/bench/sweep.hpp"
#include "kc/numcore/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kc::bench {

std::vector<int> ProbeClassifier::predict(const Matrix& images) const {
  const Matrix logits = net.forward(images);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double ProbeClassifier::accuracy(const Matrix& images, const Vector& classes) const {
  const auto pred = predict(images);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == static_cast<int>(classes(static_cast<Eigen::Index>(i)));
  return pred.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(pred.size());
}

ProbeClassifier train_probe(const Matrix& images, const Vector& classes, std::size_t num_classes, RngStream& rng,
                            const ProbeOptions& options) {
  if (images.rows() != classes.size()) throw Error(ErrorCode::DimensionMismatch, "train_probe: row counts differ");
  const auto d = static_cast<std::size_t>(images.cols());
  ProbeClassifier probe;
  probe.net = nn::Mlp::random({d, options.hidden_width, num_classes},
                              {nn::Activation::LeakyRelu, nn::Activation::Identity}, rng);
  nn::MomentumSgd sgd(options.learning_rate, options.momentum);
  auto grads = probe.net.make_gradients();
  const auto n = static_cast<std::size_t>(images.rows());
  const std::size_t batch = std::clamp<std::size_t>(options.batch_size, 1, std::max<std::size_t>(n, 1));
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto order = rng.permutation(n);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch)));
      const Matrix x = take_rows(images, rows);
      nn::MlpTrace trace;
      const Matrix logits = probe.net.forward(x, trace);
      Matrix grad = logits;
      for (Eigen::Index i = 0; i < grad.rows(); ++i) {
        const double top = grad.row(i).maxCoeff();
        grad.row(i) = (grad.row(i).array() - top).exp();
        grad.row(i) /= grad.row(i).sum();
        grad(i, static_cast<Eigen::Index>(classes(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)])))) -= 1.0;
      }
      grad /= static_cast<double>(rows.size());
      grads.set_zero();
      probe.net.backward(trace, grad, grads);
      sgd.step(probe.net.parameter_spans(), grads.spans());
    }
  }
  return probe;
}

std::vector<double> intervention_grid(std::size_t count, double lo, double hi) {
  if (count == 0) return {};
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return grid;
}

Vector change_rate_probe(const concepts::ConceptModel& model, const ProbeClassifier& probe, const Matrix& images,
                         const std::vector<double>& grid) {
  if (images.cols() != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "change_rate_probe: image width does not match the encoder");
  }
  if (probe.net.input_dim() != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "change_rate_probe: probe input width does not match the decoder");
  }
  const Eigen::Index p = model.latent_dim();
  Vector rates = Vector::Zero(p);
  if (images.rows() == 0 || grid.empty()) return rates;
  const Matrix z = concepts::encode_mean(model, images);
  const auto base = probe.predict(concepts::decode(model, z));
  const double pairs = static_cast<double>(images.rows()) * static_cast<double>(grid.size());
  for (Eigen::Index j = 0; j < p; ++j) {
    std::size_t changed = 0;
    for (double v : grid) {
      Matrix moved = z;
      moved.col(j).setConstant(v);
      const auto cls = probe.predict(concepts::decode(model, moved));
      for (std::size_t i = 0; i < cls.size(); ++i) changed += cls[i] != base[i];
    }
    rates(j) = static_cast<double>(changed) / pairs;
  }
  return rates;
}

ChangeRateReport change_rate_study(const concepts::ConceptModel& model, const ProbeClassifier& probe,
                                   const Matrix& images, const Vector& labels, const ChangeRateOptions& options,
                                   std::uint64_t seed) {
  if (options.runs == 0) throw Error(ErrorCode::InvalidArgument, "change_rate_study: runs must be positive");
  const Eigen::Index p = model.latent_dim();
  ChangeRateReport report;
  report.mean_change_rate = Vector::Zero(p);
  report.selection_frequency = Vector::Zero(p);
  const Matrix z = concepts::encode_mean(model, images);
  const auto n = static_cast<std::size_t>(images.rows());
  double selected_sum = 0.0;
  double unselected_sum = 0.0;
  for (std::size_t run = 0; run < options.runs; ++run) {
    RngStream rng(seed, run);
    RngStream select_rng = rng.child(1);
    RngStream pick_rng = rng.child(2);
    const auto result = select_concepts(z, labels, Selector::Knockoff, options.select, select_rng);
    const auto rows = pick_rng.sample_without_replacement(n, std::min(n, options.images_per_run));
    const Vector rates = change_rate_probe(model, probe, take_rows(images, rows), options.grid);
    report.mean_change_rate += rates;
    std::vector<char> chosen(static_cast<std::size_t>(p), 0);
    for (auto j : result.selected) {
      chosen[j] = 1;
      report.selection_frequency(static_cast<Eigen::Index>(j)) += 1.0;
    }
    report.selections.push_back(result.selected);
    const auto k = static_cast<Eigen::Index>(result.selected.size());
    if (k > 0 && k < p) {
      double in = 0.0, out = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) (chosen[static_cast<std::size_t>(j)] ? in : out) += rates(j);
      selected_sum += in / static_cast<double>(k);
      unselected_sum += out / static_cast<double>(p - k);
      ++report.compared_runs;
    }
  }
  const double runs = static_cast<double>(options.runs);
  report.mean_change_rate /= runs;
  report.selection_frequency /= runs;
  if (report.compared_runs > 0) {
    report.selected_mean = selected_sum / static_cast<double>(report.compared_runs);
    report.unselected_mean = unselected_sum / static_cast<double>(report.compared_runs);
  } else {
    report.selected_mean = report.unselected_mean = std::nan("");
  }
  return report;
}

std::string change_rate_csv(const ChangeRateReport& report) {
  std::ostringstream out;
  out << kChangeRateCsvHeader << '\n';
  for (Eigen::Index j = 0; j < report.mean_change_rate.size(); ++j) {
    out << j << ',' << format_double(report.mean_change_rate(j)) << ',' << format_double(report.selection_frequency(j))
        << '\n';
  }
  return out.str();
}

}  // namespace kc::bench
