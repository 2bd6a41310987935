#include "commands.hpp"

#include "manifest.hpp"

#include "kc/bench/glyphs.hpp"
#include "kc/bench/pipeline.hpp"
#include "kc/bench/probe.hpp"
#include "kc/bench/sparsity.hpp"
#include "kc/bench/sweep.hpp"
#include "kc/knockoff/knockoff.hpp"
#include "kc/knockoff/learned_sampler.hpp"
#include "kc/numcore/covariance.hpp"
#include "kc/numcore/error.hpp"
#include "kc/numcore/kcmx.hpp"
#include "kc/numcore/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace kc::cli {

std::size_t thread_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("KC_THREADS")) {
    const std::string_view text(env);
    std::size_t cap = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec != std::errc() || end != text.data() + text.size() || cap == 0) {
      throw ConfigError("KC_THREADS", "must be a positive integer, got '" + std::string(text) + "'");
    }
    n = std::min(n, cap);
  }
  return n;
}

namespace {

using nlohmann::json;

concepts::MethodConfig method_config(const RunConfig& c) {
  concepts::MethodConfig m = concepts::configure_method(c.method);
  m.weights = {*c.alpha1, *c.alpha2, *c.alpha3, *c.alpha4, *c.alpha5};
  concepts::validate(m);
  return m;
}

bench::PipelineOptions pipeline_options(const RunConfig& c) {
  bench::PipelineOptions o = bench::glyph_pipeline_options(c.method);
  o.config = method_config(c);
  o.architecture.latent_dim = c.latent_dim;
  o.train.epochs = *c.epochs;
  o.train.learning_rate = *c.learning_rate;
  o.train.batch_size = c.batch_size;
  o.selector = bench::selector_from_string(*c.selector);
  o.select.q = *c.q;
  o.select.shrinkage = c.shrinkage;
  return o;
}

/// Concept-supervised latents are the annotated concepts, one per column.
void fit_latents_to_concepts(bench::PipelineOptions& o, const concepts::Batch& data) {
  if (o.config.needs_concept_labels() && data.concepts) {
    o.architecture.latent_dim = static_cast<std::size_t>(data.concepts->cols());
  }
}

bench::GlyphDataset glyphs_for(const RunConfig& c, std::size_t n, std::uint64_t stream) {
  RngStream rng(c.seed, stream);
  return bench::generate_glyph_dataset(n, c.image_size, rng);
}

bench::GlyphDataset training_glyphs(const RunConfig& c) {
  if (c.dataset_dir) return bench::load_glyph_dataset(*c.dataset_dir);
  return glyphs_for(c, c.n, 1);
}

concepts::Batch training_batch(const RunConfig& c, bool with_concepts) {
  if (c.dataset_dir) {
    concepts::Batch b = bench::load_batch(*c.dataset_dir);
    if (!with_concepts) b.concepts.reset();
    return b;
  }
  return glyphs_for(c, c.n, 1).batch(with_concepts);
}

void adopt_dir(OutputSet& out, const std::filesystem::path& relative) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(out.root() / relative)) {
    if (entry.is_regular_file()) files.push_back(relative / entry.path().filename());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.adopt(f);
}

std::string vector_csv_row(const Vector& v) {
  std::string s;
  for (Eigen::Index j = 0; j < v.size(); ++j) s += (j ? "," : "") + bench::format_double(v(j));
  return s;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int synth_fdr(const RunConfig& c, OutputSet& out, std::ostream& log) {
  bench::SweepConfig sc;
  sc.p = c.p;
  sc.k = c.k;
  sc.m = c.m;
  sc.amplitudes = c.amplitudes;
  sc.trials = c.trials;
  sc.q = *c.q;
  sc.methods = {"gaussian/" + c.loss};
  if (c.concept_pool) {
    sc.concept_pool = load_kcmx(*c.concept_pool);
    sc.methods.push_back("encoder/" + c.loss);
  }
  if (c.selector) {
    sc.selectors = {bench::selector_from_string(*c.selector)};
  }
  sc.l1_lambda_ratios = c.l1_lambda_ratios;
  sc.shrinkage = c.shrinkage;
  sc.seed = c.seed;
  sc.threads = thread_count();
  const auto records = bench::amplitude_sweep(sc);
  const auto groups = bench::summarize(records);
  out.write("trial_results.csv", bench::trial_records_csv(records));
  out.write("summary.json", bench::summary_json(groups).dump(2) + "\n");

  std::size_t failed = 0;
  for (const auto& r : records) failed += r.ok() ? 0 : 1;
  for (const auto& g : groups) {
    log << g.method << ' ' << bench::to_string(g.selector) << " a=" << g.amplitude << " fdp=" << g.mean_fdp
        << " power=" << g.mean_power << " (" << g.completed << " trials)\n";
  }
  if (failed > 0) log << failed << " of " << records.size() << " trials failed; see the status column\n";
  return failed > 0 ? kExitPartialFailure : kExitOk;
}

int make_glyphs(const RunConfig& c, OutputSet& out, std::ostream& log) {
  const auto data = glyphs_for(c, c.n, 1);
  bench::save_glyph_dataset(out.root(), data);
  for (const char* f : {"images.kcmx", "factors.kcmx", "labels.kcmx", "classes.kcmx", "concepts.kcmx"}) out.adopt(f);
  log << "wrote " << data.size() << " glyphs of " << c.image_size << "x" << c.image_size << " to "
      << out.root().string() << '\n';
  return kExitOk;
}

int train_concepts(const RunConfig& c, OutputSet& out, std::ostream& log) {
  auto opts = pipeline_options(c);
  const concepts::Batch data = training_batch(c, opts.config.needs_concept_labels());
  fit_latents_to_concepts(opts, data);
  opts.architecture.input_dim = static_cast<std::size_t>(data.images.cols());
  RngStream root(c.seed, 0);
  RngStream init = root.child(1);
  RngStream training = root.child(2);
  auto model = concepts::make_concept_model(opts.architecture, opts.config, init);
  const auto result = concepts::train(std::move(model), data, opts.train, training);

  concepts::save_checkpoint(out.root() / "checkpoint", result.model);
  adopt_dir(out, "checkpoint");
  std::string history = "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    history += std::to_string(e) + ',' + bench::format_double(result.loss_history[e]) + '\n';
  }
  out.write("loss_history.csv", history);
  std::ostringstream encoded;
  write_kcmx(encoded, concepts::encode_mean(result.model, data.images));
  out.write("encoded.kcmx", encoded.str());
  if (!result.loss_history.empty()) log << "final epoch loss " << result.loss_history.back() << '\n';
  return kExitOk;
}

int select(const RunConfig& c, OutputSet& out, std::ostream& log) {
  auto opts = pipeline_options(c);
  selection::SelectionResult result;
  if (c.checkpoint) {
    const auto model = concepts::load_checkpoint(*c.checkpoint);
    const concepts::Batch data = bench::load_batch(*c.dataset_dir);
    if (!data.labels) throw Error(ErrorCode::MissingLabels, "dataset has no labels.kcmx");
    bench::SelectOptions so = opts.select;
    so.sampler = bench::default_sampler(model.config);
    RngStream rng(c.seed, 0);
    result = bench::select_concepts(concepts::encode_mean(model, data.images), *data.labels, opts.selector, so, rng);
  } else {
    const concepts::Batch data = training_batch(c, opts.config.needs_concept_labels());
    fit_latents_to_concepts(opts, data);
    RngStream rng(c.seed, 0);
    const auto run = bench::run_concept_selection(data, opts, rng);
    concepts::save_checkpoint(out.root() / "checkpoint", run.model);
    adopt_dir(out, "checkpoint");
    result = run.selection;
  }
  out.write("selection.json", selection::selection_to_json(result) + "\n");
  log << "selected " << result.selected.size() << " of " << result.w.size() << " concepts:";
  for (auto j : result.selected) log << ' ' << j;
  log << '\n';
  return kExitOk;
}

int sparsity_sweep(const RunConfig& c, OutputSet& out, std::ostream& log) {
  bench::SparsitySweepConfig sc;
  sc.base = pipeline_options(c);
  sc.alpha5_grid = c.alpha5_grid;
  sc.seeds = c.seeds;
  const concepts::Batch train = training_batch(c, sc.base.config.needs_concept_labels());
  fit_latents_to_concepts(sc.base, train);
  const concepts::Batch test = glyphs_for(c, c.n_test, 2).batch(sc.base.config.needs_concept_labels());
  const auto records = bench::sparsity_sweep(train, test, sc);
  out.write("sparsity.csv", bench::sparsity_csv(records));

  std::map<double, std::vector<const bench::SparsityRecord*>> by_alpha;
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (r.status == "ok") {
      by_alpha[r.alpha5].push_back(&r);
    } else {
      ++failed;
      log << "alpha5=" << r.alpha5 << " seed=" << r.seed << ' ' << r.status << '\n';
    }
  }
  json groups = json::array();
  for (const auto& [alpha5, rs] : by_alpha) {
    double rate = 0.0, all = 0.0, sel = 0.0;
    for (const auto* r : rs) {
      rate += r->selection_rate;
      all += r->acc_all;
      sel += r->acc_selected;
    }
    const double n = static_cast<double>(rs.size());
    groups.push_back({{"alpha5", alpha5},
                      {"completed", rs.size()},
                      {"mean_selection_rate", rate / n},
                      {"mean_acc_all", all / n},
                      {"mean_acc_selected", sel / n}});
    log << "alpha5=" << alpha5 << " selection rate " << rate / n << " acc_all " << all / n << " acc_selected "
        << sel / n << '\n';
  }
  out.write("sparsity_summary.json", json{{"groups", groups}, {"failed", failed}}.dump(2) + "\n");
  return failed > 0 ? kExitPartialFailure : kExitOk;
}

int change_rate(const RunConfig& c, OutputSet& out, std::ostream& log) {
  concepts::ConceptModel model;
  bench::GlyphDataset probe_data;
  bench::GlyphDataset eval_data;
  RngStream root(c.seed, 0);
  if (c.checkpoint) {
    if (!std::filesystem::exists(*c.checkpoint / "model.json")) {
      throw Error(ErrorCode::IoError, "checkpoint not found: " + (*c.checkpoint / "model.json").string());
    }
    model = concepts::load_checkpoint(*c.checkpoint);
    probe_data = eval_data = bench::load_glyph_dataset(*c.dataset_dir);
  } else {
    auto opts = pipeline_options(c);
    const bench::GlyphDataset data = training_glyphs(c);
    const concepts::Batch batch = data.batch(opts.config.needs_concept_labels());
    fit_latents_to_concepts(opts, batch);
    RngStream pipeline_rng = root.child(1);
    const auto run = bench::run_concept_selection(batch, opts, pipeline_rng);
    model = run.model;
    probe_data = data.subset(run.learn_rows);
    eval_data = data.subset(run.select_rows);
    concepts::save_checkpoint(out.root() / "checkpoint", model);
    adopt_dir(out, "checkpoint");
  }
  RngStream probe_rng = root.child(2);
  const auto probe = bench::train_probe(probe_data.images, probe_data.class_labels, bench::kGlyphShapes, probe_rng);

  bench::ChangeRateOptions co;
  co.runs = c.runs;
  co.images_per_run = c.images_per_run;
  co.select = pipeline_options(c).select;
  co.select.sampler = bench::default_sampler(model.config);
  const auto report =
      bench::change_rate_study(model, probe, eval_data.images, eval_data.binary_labels(), co, mix_seed(c.seed, 3));
  out.write("change_rates.csv", bench::change_rate_csv(report));
  json selections = json::array();
  for (const auto& s : report.selections) selections.push_back(s);
  const json summary = {{"selected_mean_change_rate", finite_or_null(report.selected_mean)},
                        {"unselected_mean_change_rate", finite_or_null(report.unselected_mean)},
                        {"compared_runs", report.compared_runs},
                        {"runs", c.runs},
                        {"probe_accuracy", probe.accuracy(eval_data.images, eval_data.class_labels)},
                        {"selections", selections}};
  out.write("change_rate_summary.json", summary.dump(2) + "\n");
  log << "selected latents mean change rate " << report.selected_mean << ", unselected " << report.unselected_mean
      << " over " << report.compared_runs << " runs\n";
  return kExitOk;
}

int diagnose_knockoffs(const RunConfig& c, OutputSet& out, std::ostream& log) {
  const Matrix z = standardize_columns(load_kcmx(*c.concepts)).values;
  const Covariance sigma = shrink_covariance(z, c.shrinkage);
  const Vector s = knockoff::equicorrelated_s(sigma);
  const double lambda_min = min_eigenvalue(sigma.sigma);
  RngStream root(c.seed, 0);

  auto score = [&](knockoff::KnockoffPair pair) {
    if (c.inject_identity) pair.knockoffs = pair.originals;
    return knockoff::exchangeability_diagnostic(pair);
  };
  RngStream gaussian_rng = root.child(1);
  const double gaussian_score = score(knockoff::sample_gaussian_knockoffs(z, sigma, s, gaussian_rng));

  json learned = nullptr;
  json learned_s = nullptr;
  try {
    RngStream train_rng = root.child(2);
    RngStream draw_rng = root.child(3);
    const Matrix bounded = knockoff::bound_with_tanh(z);
    const auto sampler = knockoff::train_learned_sampler(bounded, train_rng);
    const auto pair = knockoff::sample_learned(sampler, bounded, draw_rng);
    learned = score(pair);
    learned_s = vector_json(pair.s);
    log << "learned sampler score " << learned.get<double>() << " (max s " << pair.s.maxCoeff() << ")\n";
  } catch (const Error& e) {
    learned = std::string("unavailable: ") + e.what();
    log << "learned sampler " << learned.get<std::string>() << '\n';
  }
  log << "gaussian sampler score " << gaussian_score << " (max s " << s.maxCoeff() << ")\n";
  log << "lambda_min " << bench::format_double(lambda_min) << '\n';
  log << "s " << vector_csv_row(s) << '\n';
  const json report = {{"gaussian_score", gaussian_score},
                       {"learned_score", learned},
                       {"learned_s", learned_s},
                       {"lambda_min", lambda_min},
                       {"s", vector_json(s)},
                       {"inject_identity", c.inject_identity},
                       {"rows", z.rows()},
                       {"dim", z.cols()}};
  out.write("diagnostics.json", report.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  OutputSet out(config.out_dir);
  int code = kExitOk;
  switch (config.command) {
    case Command::SynthFdr: code = synth_fdr(config, out, log); break;
    case Command::SparsitySweep: code = sparsity_sweep(config, out, log); break;
    case Command::TrainConcepts: code = train_concepts(config, out, log); break;
    case Command::Select: code = select(config, out, log); break;
    case Command::ChangeRate: code = change_rate(config, out, log); break;
    case Command::DiagnoseKnockoffs: code = diagnose_knockoffs(config, out, log); break;
    case Command::MakeGlyphs: code = make_glyphs(config, out, log); break;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.write_manifest(to_json(config), seconds);
  return code;
}

}  // namespace kc::cli
