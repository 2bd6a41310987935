#include "kc/bench/sparsity.hpp"

#include "kc/bench/sweep.hpp"
#include "kc/numcore/covariance.hpp"
#include "kc/numcore/error.hpp"

#include <sstream>

namespace kc::bench {

PipelineOptions glyph_pipeline_options(std::string_view method) {
  PipelineOptions opts;
  opts.config = concepts::configure_method(method);
  if (opts.config.active()[1]) opts.config.weights.kl = kGlyphKlWeight;
  opts.train.epochs = kGlyphEpochs;
  opts.train.learning_rate = kGlyphLearningRate;
  opts.select.q = kGlyphQ;
  return opts;
}

double concept_accuracy(const concepts::ConceptModel& model, const concepts::Batch& fit_data,
                        const concepts::Batch& test, const IndexSet& columns) {
  if (!fit_data.labels || !test.labels) throw Error(ErrorCode::MissingLabels, "concept_accuracy needs labels");
  const Vector& y = *fit_data.labels;
  const Vector& y_test = *test.labels;
  auto score = [&](const Vector& prob) {
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < prob.size(); ++i) hits += (prob(i) >= 0.5 ? 1.0 : 0.0) == y_test(i);
    return prob.size() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(prob.size());
  };
  if (columns.empty()) return score(Vector::Constant(y_test.size(), y.mean() >= 0.5 ? 1.0 : 0.0));
  const auto fit_z = standardize_columns(take_cols(concepts::encode_mean(model, fit_data.images), columns));
  const Matrix test_z = fit_z.map.apply(take_cols(concepts::encode_mean(model, test.images), columns));
  const auto fit = selection::fit_lasso(y, fit_z.values, 1e-4 * selection::lambda_max(y, fit_z.values),
                                        selection::LossKind::Logistic);
  const Vector eta = (test_z * fit.coefficients).array() + fit.intercept;
  return score((1.0 / (1.0 + (-eta.array()).exp())).matrix());
}

std::vector<SparsityRecord> sparsity_sweep(const concepts::Batch& train, const concepts::Batch& test,
                                           const SparsitySweepConfig& config) {
  std::vector<SparsityRecord> out;
  for (double alpha5 : config.alpha5_grid) {
    for (std::uint64_t seed : config.seeds) {
      SparsityRecord rec;
      rec.alpha5 = alpha5;
      rec.seed = seed;
      rec.method = config.base.config.name();
      try {
        PipelineOptions opts = config.base;
        opts.config = concepts::with_sparsity(opts.config, alpha5);
        RngStream rng(seed, 0);
        const auto result = run_concept_selection(train, opts, rng);
        const auto p = static_cast<std::size_t>(result.model.latent_dim());
        rec.selection_rate = static_cast<double>(result.selection.selected.size()) / static_cast<double>(p);
        const concepts::Batch held = train.slice(result.select_rows);
        IndexSet all(p);
        for (std::size_t j = 0; j < p; ++j) all[j] = j;
        rec.acc_all = concept_accuracy(result.model, held, test, all);
        rec.acc_selected = concept_accuracy(result.model, held, test, result.selection.selected);
      } catch (const std::exception& e) {
        rec.status = std::string("failed: ") + e.what();
        rec.selection_rate = rec.acc_all = rec.acc_selected = std::nan("");
      }
      out.push_back(rec);
    }
  }
  return out;
}

std::string sparsity_csv(const std::vector<SparsityRecord>& records) {
  std::ostringstream out;
  out << kSparsityCsvHeader << '\n';
  for (const auto& r : records) {
    out << format_double(r.alpha5) << ',' << r.seed << ',' << r.method << ',' << format_double(r.selection_rate) << ','
        << format_double(r.acc_all) << ',' << format_double(r.acc_selected) << '\n';
  }
  return out.str();
}

}  // namespace kc::bench
