#include "config.hpp"

#include "kc/bench/pipeline.hpp"
#include "kc/bench/sparsity.hpp"
#include "kc/concepts/method.hpp"
#include "kc/numcore/error.hpp"
#include "kc/numcore/io.hpp"
#include "kc/selection/lasso.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace kc::cli {

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::SynthFdr: return "synth-fdr";
    case Command::SparsitySweep: return "sparsity-sweep";
    case Command::TrainConcepts: return "train-concepts";
    case Command::Select: return "select";
    case Command::ChangeRate: return "change-rate";
    case Command::DiagnoseKnockoffs: return "diagnose-knockoffs";
    case Command::MakeGlyphs: return "make-glyphs";
  }
  return "synth-fdr";
}

Command command_from_string(std::string_view name) {
  for (auto c : {Command::SynthFdr, Command::SparsitySweep, Command::TrainConcepts, Command::Select,
                 Command::ChangeRate, Command::DiagnoseKnockoffs, Command::MakeGlyphs}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("command", "unknown command '" + std::string(name) + "'");
}

namespace {

using nlohmann::json;

double get_real(const std::string& field, const json& v) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const std::string& field, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) throw ConfigError(field, "must not be negative");
  throw ConfigError(field, "expected a non-negative integer");
}

std::string get_string(const std::string& field, const json& v) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const std::string& field, const json& v) {
  if (!v.is_boolean()) throw ConfigError(field, "expected true or false");
  return v.get<bool>();
}

std::vector<double> get_reals(const std::string& field, const json& v) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(get_real(field, e));
  return out;
}

std::vector<std::uint64_t> get_counts(const std::string& field, const json& v) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of non-negative integers");
  std::vector<std::uint64_t> out;
  for (const auto& e : v) out.push_back(get_count(field, e));
  return out;
}

template <class T, class Get>
void set_optional(std::optional<T>& slot, const std::string& field, const json& v, Get get) {
  if (v.is_null()) {
    slot.reset();
  } else {
    slot = get(field, v);
  }
}

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"command",
       [](RunConfig& c, const std::string& f, const json& v) {
         if (command_from_string(get_string(f, v)) != c.command) {
           throw ConfigError(f, "config file is for '" + v.get<std::string>() + "', not '" +
                                    std::string(to_string(c.command)) + "'");
         }
       }},
      {"q", [](RunConfig& c, const std::string& f, const json& v) { set_optional(c.q, f, v, get_real); }},
      {"seed", [](RunConfig& c, const std::string& f, const json& v) { c.seed = get_count(f, v); }},
      {"method", [](RunConfig& c, const std::string& f, const json& v) { c.method = get_string(f, v); }},
      {"selector", [](RunConfig& c, const std::string& f, const json& v) { set_optional(c.selector, f, v, get_string); }},
      {"p", [](RunConfig& c, const std::string& f, const json& v) { c.p = get_count(f, v); }},
      {"k", [](RunConfig& c, const std::string& f, const json& v) { c.k = get_count(f, v); }},
      {"m", [](RunConfig& c, const std::string& f, const json& v) { c.m = get_count(f, v); }},
      {"amplitudes", [](RunConfig& c, const std::string& f, const json& v) { c.amplitudes = get_reals(f, v); }},
      {"trials", [](RunConfig& c, const std::string& f, const json& v) { c.trials = get_count(f, v); }},
      {"l1_lambda_ratios",
       [](RunConfig& c, const std::string& f, const json& v) { c.l1_lambda_ratios = get_reals(f, v); }},
      {"loss", [](RunConfig& c, const std::string& f, const json& v) { c.loss = get_string(f, v); }},
      {"shrinkage", [](RunConfig& c, const std::string& f, const json& v) { c.shrinkage = get_real(f, v); }},
      {"concept_pool",
       [](RunConfig& c, const std::string& f, const json& v) {
         set_optional(c.concept_pool, f, v, [](const std::string& ff, const json& vv) {
           return std::filesystem::path(get_string(ff, vv));
         });
       }},
      {"alpha1", [](RunConfig& c, const std::string& f, const json& v) { set_optional(c.alpha1, f, v, get_real); }},
      {"alpha2", [](RunConfig& c, const std::string& f, const json& v) { set_optional(c.alpha2, f, v, get_real); }},
      {"alpha3", [](RunConfig& c, const std::string& f, const json& v) { set_optional(c.alpha3, f, v, get_real); }},
      {"alpha4", [](RunConfig& c, const std::string& f, const json& v) { set_optional(c.alpha4, f, v, get_real); }},
      {"alpha5", [](RunConfig& c, const std::string& f, const json& v) { set_optional(c.alpha5, f, v, get_real); }},
      {"alpha5_grid", [](RunConfig& c, const std::string& f, const json& v) { c.alpha5_grid = get_reals(f, v); }},
      {"seeds", [](RunConfig& c, const std::string& f, const json& v) { c.seeds = get_counts(f, v); }},
      {"epochs",
       [](RunConfig& c, const std::string& f, const json& v) {
         set_optional(c.epochs, f, v, [](const std::string& ff, const json& vv) {
           return static_cast<std::size_t>(get_count(ff, vv));
         });
       }},
      {"learning_rate",
       [](RunConfig& c, const std::string& f, const json& v) { set_optional(c.learning_rate, f, v, get_real); }},
      {"latent_dim", [](RunConfig& c, const std::string& f, const json& v) { c.latent_dim = get_count(f, v); }},
      {"batch_size", [](RunConfig& c, const std::string& f, const json& v) { c.batch_size = get_count(f, v); }},
      {"n", [](RunConfig& c, const std::string& f, const json& v) { c.n = get_count(f, v); }},
      {"n_test", [](RunConfig& c, const std::string& f, const json& v) { c.n_test = get_count(f, v); }},
      {"image_size", [](RunConfig& c, const std::string& f, const json& v) { c.image_size = get_count(f, v); }},
      {"runs", [](RunConfig& c, const std::string& f, const json& v) { c.runs = get_count(f, v); }},
      {"images_per_run", [](RunConfig& c, const std::string& f, const json& v) { c.images_per_run = get_count(f, v); }},
      {"out_dir", [](RunConfig& c, const std::string& f, const json& v) { c.out_dir = get_string(f, v); }},
      {"dataset_dir",
       [](RunConfig& c, const std::string& f, const json& v) {
         set_optional(c.dataset_dir, f, v, [](const std::string& ff, const json& vv) {
           return std::filesystem::path(get_string(ff, vv));
         });
       }},
      {"checkpoint",
       [](RunConfig& c, const std::string& f, const json& v) {
         set_optional(c.checkpoint, f, v, [](const std::string& ff, const json& vv) {
           return std::filesystem::path(get_string(ff, vv));
         });
       }},
      {"concepts",
       [](RunConfig& c, const std::string& f, const json& v) {
         set_optional(c.concepts, f, v, [](const std::string& ff, const json& vv) {
           return std::filesystem::path(get_string(ff, vv));
         });
       }},
      {"train_on_the_fly",
       [](RunConfig& c, const std::string& f, const json& v) { c.train_on_the_fly = get_bool(f, v); }},
      {"inject_identity",
       [](RunConfig& c, const std::string& f, const json& v) { c.inject_identity = get_bool(f, v); }},
  };
  return table;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

bool glyph_command(Command c) {
  return c == Command::SparsitySweep || c == Command::Select || c == Command::ChangeRate ||
         c == Command::TrainConcepts;
}

}  // namespace

void apply_json(RunConfig& config, const nlohmann::json& object) {
  if (!object.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  const auto& table = setters();
  for (const auto& [key, value] : object.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown key");
    it->second(config, key, value);
  }
}

RunConfig load_config_file(const std::filesystem::path& path, Command command) {
  RunConfig config;
  config.command = command;
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError("config", e.what());
  }
  nlohmann::json object;
  try {
    object = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", path.string() + " is not valid JSON: " + e.what());
  }
  apply_json(config, object);
  return config;
}

void resolve(RunConfig& c) {
  if (!c.q) c.q = glyph_command(c.command) ? bench::kGlyphQ : 0.1;
  require(*c.q > 0.0 && *c.q < 1.0, "q", "must lie in (0, 1)");

  concepts::MethodConfig method;
  try {
    method = concepts::configure_method(c.method);
  } catch (const Error&) {
    throw ConfigError("method", "unknown method '" + c.method + "'; expected beta-vae, csr-vae, cbm, full-vae or csr-cbm");
  }
  if (c.selector) {
    try {
      bench::selector_from_string(*c.selector);
    } catch (const Error&) {
      throw ConfigError("selector", "unknown selector '" + *c.selector + "'; expected knockoff or l1");
    }
  } else if (c.command != Command::SynthFdr) {
    c.selector = "knockoff";
  }

  require(c.p >= 1, "p", "must be at least 1");
  require(c.k >= 1 && c.k <= c.p, "k", "must lie in [1, p]");
  require(c.m >= 10, "m", "must be at least 10");
  require(!c.amplitudes.empty(), "amplitudes", "must not be empty");
  for (double a : c.amplitudes) require(finite_nonneg(a), "amplitudes", "entries must be finite and non-negative");
  require(c.trials >= 1, "trials", "must be at least 1");
  require(!c.l1_lambda_ratios.empty(), "l1_lambda_ratios", "must not be empty");
  for (double r : c.l1_lambda_ratios) require(r > 0.0 && r <= 1.0, "l1_lambda_ratios", "entries must lie in (0, 1]");
  try {
    selection::loss_kind_from_string(c.loss);
  } catch (const Error&) {
    throw ConfigError("loss", "expected logistic or squared");
  }
  require(c.shrinkage >= 0.0 && c.shrinkage < 1.0, "shrinkage", "must lie in [0, 1)");

  const auto active = method.active();
  std::optional<double>* alphas[5] = {&c.alpha1, &c.alpha2, &c.alpha3, &c.alpha4, &c.alpha5};
  for (std::size_t i = 0; i < 5; ++i) {
    const std::string field = "alpha" + std::to_string(i + 1);
    if (!alphas[i]->has_value()) continue;
    require(finite_nonneg(**alphas[i]), field, "must be finite and non-negative");
    require(active[i] || **alphas[i] == 0.0, field, "is not part of the " + c.method + " objective");
  }
  if (c.command == Command::SparsitySweep) {
    require(method.is_csr(), "method", "sparsity-sweep needs a method with the sparsity term (csr-vae or csr-cbm)");
  }
  require(!c.alpha5_grid.empty(), "alpha5_grid", "must not be empty");
  for (double a : c.alpha5_grid) require(finite_nonneg(a), "alpha5_grid", "entries must be finite and non-negative");
  require(!c.seeds.empty(), "seeds", "must not be empty");

  if (!c.epochs) c.epochs = bench::kGlyphEpochs;
  if (!c.learning_rate) c.learning_rate = bench::kGlyphLearningRate;
  require(std::isfinite(*c.learning_rate) && *c.learning_rate > 0.0, "learning_rate", "must be positive");
  require(c.latent_dim >= 1, "latent_dim", "must be at least 1");
  require(c.batch_size >= 1, "batch_size", "must be at least 1");

  require(c.n >= 40, "n", "must be at least 40");
  require(c.n_test >= 1, "n_test", "must be at least 1");
  require(c.image_size >= 12, "image_size", "must be at least 12");
  require(c.runs >= 1, "runs", "must be at least 1");
  require(c.images_per_run >= 1, "images_per_run", "must be at least 1");
  require(!c.out_dir.empty(), "out_dir", "must not be empty");

  // Resolve the objective weights so the snapshot is complete.
  concepts::MethodConfig weights = method;
  if (active[1]) weights.weights.kl = bench::kGlyphKlWeight;
  if (c.alpha5 && active[4]) weights = concepts::with_sparsity(weights, *c.alpha5);
  if (c.alpha1) weights.weights.reconstruction = *c.alpha1;
  if (c.alpha2) weights.weights.kl = *c.alpha2;
  if (c.alpha3) weights.weights.concept_term = *c.alpha3;
  if (c.alpha4) weights.weights.label = *c.alpha4;
  const auto w = weights.weights.as_array();
  for (std::size_t i = 0; i < 5; ++i) *alphas[i] = w[i];

  switch (c.command) {
    case Command::DiagnoseKnockoffs:
      require(c.concepts.has_value(), "concepts", "diagnose-knockoffs needs a KCMX concept matrix (--concepts)");
      break;
    case Command::ChangeRate:
      require(c.checkpoint.has_value() || c.train_on_the_fly, "checkpoint",
              "change-rate needs --checkpoint or --train-on-the-fly");
      if (c.checkpoint) require(c.dataset_dir.has_value(), "dataset_dir", "a checkpoint needs the glyph dataset it is probed on");
      break;
    case Command::Select:
      if (c.checkpoint) require(c.dataset_dir.has_value(), "dataset_dir", "selection from a checkpoint needs a dataset");
      break;
    default:
      break;
  }
}

nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  auto opt_path = [](const std::optional<std::filesystem::path>& p) { return p ? json(p->string()) : json(nullptr); };
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  return json{
      {"command", std::string(to_string(c.command))},
      {"q", opt(c.q)},
      {"seed", c.seed},
      {"method", c.method},
      {"selector", opt(c.selector)},
      {"p", c.p},
      {"k", c.k},
      {"m", c.m},
      {"amplitudes", c.amplitudes},
      {"trials", c.trials},
      {"l1_lambda_ratios", c.l1_lambda_ratios},
      {"loss", c.loss},
      {"shrinkage", c.shrinkage},
      {"concept_pool", opt_path(c.concept_pool)},
      {"alpha1", opt(c.alpha1)},
      {"alpha2", opt(c.alpha2)},
      {"alpha3", opt(c.alpha3)},
      {"alpha4", opt(c.alpha4)},
      {"alpha5", opt(c.alpha5)},
      {"alpha5_grid", c.alpha5_grid},
      {"seeds", c.seeds},
      {"epochs", opt(c.epochs)},
      {"learning_rate", opt(c.learning_rate)},
      {"latent_dim", c.latent_dim},
      {"batch_size", c.batch_size},
      {"n", c.n},
      {"n_test", c.n_test},
      {"image_size", c.image_size},
      {"runs", c.runs},
      {"images_per_run", c.images_per_run},
      {"out_dir", c.out_dir.string()},
      {"dataset_dir", opt_path(c.dataset_dir)},
      {"checkpoint", opt_path(c.checkpoint)},
      {"concepts", opt_path(c.concepts)},
      {"train_on_the_fly", c.train_on_the_fly},
      {"inject_identity", c.inject_identity},
  };
}

}  // namespace kc::cli
