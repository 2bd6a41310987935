#include "kc/bench/sweep.hpp"

#include "kc/numcore/error.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

namespace kc::bench {
namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string clean_reason(std::string reason) {
  for (char& c : reason) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
  }
  return reason;
}

struct Job {
  std::string method;
  MethodSpec spec;
  Selector selector;
  double l1_ratio;
};

std::vector<Job> expand_jobs(const SweepConfig& config) {
  std::vector<Job> jobs;
  for (const auto& text : config.methods) {
    const MethodSpec spec = parse_method_spec(text);
    for (Selector sel : config.selectors) {
      if (sel == Selector::Knockoff) {
        jobs.push_back({spec.name(), spec, sel, 0.0});
      } else {
        for (double ratio : config.l1_lambda_ratios) {
          jobs.push_back({spec.name() + "/lambda=" + shortest(ratio), spec, sel, ratio});
        }
      }
    }
  }
  return jobs;
}

bool record_less(const TrialRecord& a, const TrialRecord& b) {
  return std::tie(a.amplitude, a.trial, a.method, a.selector) < std::tie(b.amplitude, b.trial, b.method, b.selector);
}

void validate(const SweepConfig& c) {
  if (c.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");
  if (!(c.q > 0.0 && c.q < 1.0)) throw Error(ErrorCode::InvalidLevel, "q must lie in (0, 1)");
  if (c.k > c.p) throw Error(ErrorCode::InvalidArity, "k exceeds p");
  if (c.amplitudes.empty()) throw Error(ErrorCode::InvalidArgument, "amplitudes must not be empty");
  for (double a : c.amplitudes) {
    if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "amplitudes must be positive");
  }
}

}  // namespace

std::string MethodSpec::name() const { return source + "/" + std::string(selection::to_string(loss)); }

MethodSpec parse_method_spec(std::string_view text) {
  const auto slash = text.find('/');
  MethodSpec spec;
  spec.source = std::string(text.substr(0, slash));
  if (spec.source != "gaussian" && spec.source != "encoder") {
    throw Error(ErrorCode::InvalidArgument, "unknown concept source '" + spec.source + "' (expected gaussian or encoder)");
  }
  if (slash != std::string_view::npos) spec.loss = selection::loss_kind_from_string(text.substr(slash + 1));
  return spec;
}

std::uint64_t trial_seed(std::uint64_t sweep_seed, std::size_t amplitude_index, std::size_t trial) {
  return mix_seed(mix_seed(sweep_seed, amplitude_index), trial);
}

std::vector<TrialRecord> run_trial_cell(const SweepConfig& config, std::size_t amplitude_index, std::size_t trial) {
  const double amplitude = config.amplitudes.at(amplitude_index);
  const std::uint64_t seed = trial_seed(config.seed, amplitude_index, trial);
  const auto jobs = expand_jobs(config);
  std::vector<TrialRecord> out;

  // Data per concept source, shared by every job of the cell.
  std::map<std::string, std::tuple<Matrix, SparseGroundTruth, Vector>> data;
  std::map<std::string, std::string> data_error;
  for (const auto& job : jobs) {
    const auto& source = job.spec.source;
    if (data.count(source) > 0 || data_error.count(source) > 0) continue;
    try {
      RngStream root(seed, fnv1a(source));
      Matrix z;
      std::size_t p = config.p;
      if (source == "gaussian") {
        RngStream sigma_rng = root.child(1);
        RngStream z_rng = root.child(2);
        const Matrix sigma = random_correlation(config.p, sigma_rng);
        z = sample_gaussian(sigma, config.m, z_rng);
      } else {
        if (!config.concept_pool) throw Error(ErrorCode::MissingLabels, "encoder source needs a concept pool");
        const Matrix& pool = *config.concept_pool;
        if (static_cast<std::size_t>(pool.rows()) < config.m) {
          throw Error(ErrorCode::InsufficientData, "concept pool has fewer rows than m");
        }
        RngStream pick = root.child(2);
        z = take_rows(pool, pick.sample_without_replacement(static_cast<std::size_t>(pool.rows()), config.m));
        p = static_cast<std::size_t>(pool.cols());
        z = standardize_columns(z).values;
      }
      RngStream truth_rng = root.child(3);
      RngStream label_rng = root.child(4);
      auto truth = generate_sparse_beta(p, std::min(config.k, p), amplitude, config.m, truth_rng);
      Vector y = generate_labels(z, truth, label_rng);
      data.emplace(source, std::make_tuple(std::move(z), std::move(truth), std::move(y)));
    } catch (const std::exception& e) {
      data_error.emplace(source, clean_reason(e.what()));
    }
  }

  for (const auto& job : jobs) {
    TrialRecord rec;
    rec.amplitude = amplitude;
    rec.trial = trial;
    rec.method = job.method;
    rec.selector = job.selector;
    rec.seed = seed;
    if (auto it = data_error.find(job.spec.source); it != data_error.end()) {
      rec.status = "failed: " + it->second;
      rec.fdp = rec.power = std::nan("");
      out.push_back(rec);
      continue;
    }
    try {
      const auto& [z, truth, y] = data.at(job.spec.source);
      SelectOptions opts;
      opts.q = config.q;
      opts.loss = job.spec.loss;
      opts.shrinkage = config.shrinkage;
      opts.l1_lambda_ratio = job.l1_ratio;
      RngStream rng(seed, fnv1a(job.method + "|" + std::string(to_string(job.selector))));
      const auto result = select_concepts(z, y, job.selector, opts, rng);
      const auto metrics = fdp_and_power(result.selected, truth);
      rec.n_selected = result.selected.size();
      rec.fdp = metrics.fdp;
      rec.power = metrics.power;
    } catch (const std::exception& e) {
      rec.status = "failed: " + clean_reason(e.what());
      rec.fdp = rec.power = std::nan("");
    }
    out.push_back(rec);
  }
  std::stable_sort(out.begin(), out.end(), record_less);
  return out;
}

std::vector<TrialRecord> amplitude_sweep(const SweepConfig& config) {
  validate(config);
  expand_jobs(config);
  const std::size_t cells = config.amplitudes.size() * config.trials;
  std::vector<std::vector<TrialRecord>> results(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells; c = next++) {
      results[c] = run_trial_cell(config, c / config.trials, c % config.trials);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, cells);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<TrialRecord> all;
  for (auto& r : results) all.insert(all.end(), r.begin(), r.end());
  std::stable_sort(all.begin(), all.end(), record_less);
  return all;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trial_records_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream out;
  out << kTrialCsvHeader << '\n';
  for (const auto& r : records) {
    out << format_double(r.amplitude) << ',' << r.trial << ',' << r.method << ',' << to_string(r.selector) << ','
        << r.n_selected << ',' << format_double(r.fdp) << ',' << format_double(r.power) << ',' << r.seed << ','
        << r.status << '\n';
  }
  return out.str();
}

std::vector<TrialRecord> parse_trial_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTrialCsvHeader) {
    throw Error(ErrorCode::FormatError, "trial CSV: unexpected header");
  }
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (int i = 0; i < 8; ++i) {
      const auto comma = line.find(',', start);
      if (comma == std::string::npos) throw Error(ErrorCode::FormatError, "trial CSV: short row");
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    cells.push_back(line.substr(start));
    TrialRecord r;
    r.amplitude = std::stod(cells[0]);
    r.trial = std::stoull(cells[1]);
    r.method = cells[2];
    r.selector = selector_from_string(cells[3]);
    r.n_selected = std::stoull(cells[4]);
    r.fdp = std::stod(cells[5]);
    r.power = std::stod(cells[6]);
    r.seed = std::stoull(cells[7]);
    r.status = cells[8];
    out.push_back(r);
  }
  return out;
}

std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records) {
  using Key = std::tuple<double, std::string, Selector>;
  std::map<Key, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) groups[{r.amplitude, r.method, r.selector}].push_back(&r);
  std::vector<GroupSummary> out;
  for (const auto& [key, rows] : groups) {
    GroupSummary g;
    std::tie(g.amplitude, g.method, g.selector) = key;
    std::vector<double> fdp, power, count;
    for (const auto* r : rows) {
      if (!r->ok()) {
        ++g.failed;
        continue;
      }
      fdp.push_back(r->fdp);
      power.push_back(r->power);
      count.push_back(static_cast<double>(r->n_selected));
    }
    g.completed = fdp.size();
    auto mean_se = [](const std::vector<double>& v) -> std::pair<double, double> {
      if (v.empty()) return {std::nan(""), std::nan("")};
      const double n = static_cast<double>(v.size());
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
      if (v.size() < 2) return {mean, 0.0};
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return {mean, std::sqrt(ss / (n - 1.0) / n)};
    };
    std::tie(g.mean_fdp, g.se_fdp) = mean_se(fdp);
    std::tie(g.mean_power, g.se_power) = mean_se(power);
    g.mean_selected = mean_se(count).first;
    out.push_back(g);
  }
  return out;
}

nlohmann::json summary_json(const std::vector<GroupSummary>& groups) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& g : groups) {
    arr.push_back({{"amplitude", g.amplitude},
                   {"method", g.method},
                   {"selector", to_string(g.selector)},
                   {"completed", g.completed},
                   {"failed", g.failed},
                   {"mean_fdp", num(g.mean_fdp)},
                   {"se_fdp", num(g.se_fdp)},
                   {"mean_power", num(g.mean_power)},
                   {"se_power", num(g.se_power)},
                   {"mean_selected", num(g.mean_selected)}});
  }
  return {{"groups", arr}};
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw Error(ErrorCode::DimensionMismatch, "spearman: need paired samples");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace kc::bench
