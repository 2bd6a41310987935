#include "kc/bench/pipeline.hpp"

#include "kc/numcore/covariance.hpp"
#include "kc/numcore/error.hpp"

#include <string>

namespace kc::bench {

std::string_view to_string(Selector s) noexcept { return s == Selector::Knockoff ? "knockoff" : "l1"; }

Selector selector_from_string(std::string_view name) {
  if (name == "knockoff") return Selector::Knockoff;
  if (name == "l1") return Selector::L1;
  throw Error(ErrorCode::InvalidArgument, "unknown selector '" + std::string(name) + "' (expected knockoff or l1)");
}

selection::SelectionResult select_concepts(const Matrix& z, const Vector& y, Selector selector,
                                           const SelectOptions& options, RngStream& rng) {
  if (!(options.q > 0.0 && options.q < 1.0)) {
    throw Error(ErrorCode::InvalidLevel, "select_concepts: q must lie in (0, 1)");
  }
  if (z.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "select_concepts: z and y disagree on rows");
  const selection::LossKind loss = options.loss.value_or(selection::default_loss_for(y));
  const Matrix zs = standardize_columns(z).values;
  const auto p = zs.cols();

  selection::SelectionResult result;
  result.q = options.q;
  if (selector == Selector::L1) {
    const double lambda = options.l1_lambda_ratio > 0.0 ? options.l1_lambda_ratio * selection::lambda_max(y, zs)
                                                        : selection::select_lambda(y, zs, loss, rng);
    const auto fit = selection::fit_lasso(y, zs, lambda, loss);
    result.w = fit.coefficients;
    result.tau = selection::kNonzeroTolerance;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (std::abs(fit.coefficients(j)) > selection::kNonzeroTolerance) result.selected.push_back(static_cast<std::size_t>(j));
    }
    return result;
  }

  knockoff::KnockoffPair pair;
  if (options.sampler == knockoff::SamplerKind::Learned) {
    const Matrix bounded = knockoff::bound_with_tanh(zs);
    const auto sampler = knockoff::train_learned_sampler(bounded, rng, options.learned);
    pair = knockoff::sample_learned(sampler, bounded, rng);
  } else {
    const Covariance sigma = shrink_covariance(zs, options.shrinkage);
    const Vector s = knockoff::equicorrelated_s(sigma);
    pair = knockoff::sample_gaussian_knockoffs(zs, sigma, s, rng);
  }
  const Matrix augmented = hstack(pair.originals, pair.knockoffs);
  const double lambda = selection::select_lambda(y, augmented, loss, rng);
  const auto fit = selection::fit_lasso(y, augmented, lambda, loss);
  result.w = selection::compute_w(fit);
  const auto threshold = selection::knockoff_threshold(result.w, options.q);
  result.tau = threshold.tau;
  result.selected = threshold.selected;
  return result;
}

knockoff::SamplerKind default_sampler(const concepts::MethodConfig& config) {
  return config.cbm_family() ? knockoff::SamplerKind::Learned : knockoff::SamplerKind::GaussianSecondOrder;
}

PipelineResult run_concept_selection(const concepts::Batch& dataset, const PipelineOptions& options, RngStream& rng) {
  const auto n = static_cast<std::size_t>(dataset.size());
  if (n < 2) throw Error(ErrorCode::InsufficientData, "run_concept_selection: dataset needs at least two rows");
  if (!dataset.labels) throw Error(ErrorCode::MissingLabels, "run_concept_selection: selection needs class labels");
  concepts::check_data_requirements(options.config, dataset);

  PipelineResult out;
  const auto order = rng.permutation(n);
  out.learn_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n / 2));
  out.select_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n / 2), order.end());
  const concepts::Batch learn = dataset.slice(out.learn_rows);
  const concepts::Batch held = dataset.slice(out.select_rows);

  concepts::Architecture arch = options.architecture;
  arch.input_dim = static_cast<std::size_t>(dataset.images.cols());
  RngStream init = rng.child(1);
  RngStream training = rng.child(2);
  RngStream selecting = rng.child(3);
  auto model = concepts::make_concept_model(arch, options.config, init);
  out.model = concepts::train(std::move(model), learn, options.train, training).model;

  SelectOptions select = options.select;
  out.sampler = options.sampler.value_or(default_sampler(options.config));
  select.sampler = out.sampler;
  const Matrix z = concepts::encode_mean(out.model, held.images);
  out.selection = select_concepts(z, *held.labels, options.selector, select, selecting);
  return out;
}

}  // namespace kc::bench
