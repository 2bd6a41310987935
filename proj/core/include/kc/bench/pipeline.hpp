#pragma once

#include "kc/concepts/trainer.hpp"
#include "kc/knockoff/knockoff.hpp"
#include "kc/knockoff/learned_sampler.hpp"
#include "kc/selection/filter.hpp"

#include <optional>
#include <string_view>

namespace kc::bench {

enum class Selector { Knockoff, L1 };

std::string_view to_string(Selector s) noexcept;
Selector selector_from_string(std::string_view name);

struct SelectOptions {
  double q = 0.1;
  knockoff::SamplerKind sampler = knockoff::SamplerKind::GaussianSecondOrder;
  /// Loss of the lasso fit; unset picks logistic for binary responses.
  std::optional<selection::LossKind> loss;
  double shrinkage = kDefaultShrinkage;
  /// L1 selector penalty as a fraction of lambda_max; 0 cross-validates it.
  double l1_lambda_ratio = 0.0;
  knockoff::LearnedSamplerOptions learned;
};

/// Steps of the filter from standardized concepts to the selected set:
/// knockoffs, lasso on [Z, Z~] with a cross-validated penalty, W, threshold.
/// The L1 selector instead keeps the nonzero columns of a lasso on Z alone
/// and reports the coefficients as w.
selection::SelectionResult select_concepts(const Matrix& z, const Vector& y, Selector selector,
                                           const SelectOptions& options, RngStream& rng);

struct PipelineOptions {
  concepts::MethodConfig config;
  concepts::Architecture architecture;
  concepts::TrainOptions train;
  Selector selector = Selector::Knockoff;
  SelectOptions select;
  /// Unset picks the learned sampler for concept-supervised methods and the
  /// Gaussian sampler otherwise.
  std::optional<knockoff::SamplerKind> sampler;
};

struct PipelineResult {
  selection::SelectionResult selection;
  concepts::ConceptModel model;
  std::vector<std::size_t> learn_rows;
  std::vector<std::size_t> select_rows;
  knockoff::SamplerKind sampler = knockoff::SamplerKind::GaussianSecondOrder;
};

knockoff::SamplerKind default_sampler(const concepts::MethodConfig& config);

/// Shuffled 50/50 split into a learning half and a selection half, training
/// on the first, then selection on the encoded second half against its labels.
PipelineResult run_concept_selection(const concepts::Batch& dataset, const PipelineOptions& options, RngStream& rng);

}  // namespace kc::bench
