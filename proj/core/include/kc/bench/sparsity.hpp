#pragma once

#include "kc/bench/glyphs.hpp"
#include "kc/bench/pipeline.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kc::bench {

/// Glyph-scale training and selection settings. The KL weight is far below
/// the generic default, which collapses the posterior on 12x12 glyphs, and
/// q = 0.5 lets knockoff+ return selections as small as two latents.
inline constexpr double kGlyphKlWeight = 0.001;
inline constexpr double kGlyphLearningRate = 0.1;
inline constexpr std::size_t kGlyphEpochs = 30;
inline constexpr double kGlyphQ = 0.5;

/// configure_method(method) with the glyph-scale overrides above applied.
PipelineOptions glyph_pipeline_options(std::string_view method);

struct SparsitySweepConfig {
  std::vector<double> alpha5_grid{0.0, 0.001, 0.01};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  /// Method, weights other than alpha_5, architecture, training and selection.
  PipelineOptions base;
};

struct SparsityRecord {
  double alpha5 = 0.0;
  std::uint64_t seed = 0;
  std::string method;
  double selection_rate = 0.0;
  double acc_all = 0.0;
  double acc_selected = 0.0;
  std::string status = "ok";
};

/// Accuracy on `test` of a logistic fit of the labels on encoded selection
/// concepts restricted to `columns`; the majority class when none are given.
double concept_accuracy(const concepts::ConceptModel& model, const concepts::Batch& fit_data,
                        const concepts::Batch& test, const IndexSet& columns);

/// For each alpha_5 and seed: train, select, and score on the test set. The
/// same seed gives the same split and initialization at every alpha_5.
std::vector<SparsityRecord> sparsity_sweep(const concepts::Batch& train, const concepts::Batch& test,
                                           const SparsitySweepConfig& config);

inline constexpr std::string_view kSparsityCsvHeader = "alpha5,seed,method,selection_rate,acc_all,acc_selected";
std::string sparsity_csv(const std::vector<SparsityRecord>& records);

}  // namespace kc::bench
