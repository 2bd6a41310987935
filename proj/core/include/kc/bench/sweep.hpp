#pragma once

#include "kc/bench/pipeline.hpp"
#include "kc/bench/synthetic.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kc::bench {

struct TrialRecord {
  double amplitude = 0.0;
  std::size_t trial = 0;
  std::string method;
  Selector selector = Selector::Knockoff;
  std::size_t n_selected = 0;
  double fdp = 0.0;
  double power = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// A sweep method is "<source>/<loss>": source "gaussian" draws concepts from
/// N(0, Sigma) with a random correlation Sigma per trial, source "encoder"
/// subsamples rows of a supplied concept pool; loss is "logistic" or "squared".
struct MethodSpec {
  std::string source = "gaussian";
  selection::LossKind loss = selection::LossKind::Logistic;

  std::string name() const;
};

MethodSpec parse_method_spec(std::string_view text);

struct SweepConfig {
  std::size_t p = 40;
  std::size_t k = 10;
  std::size_t m = 1000;
  std::vector<double> amplitudes{2, 5, 10, 15, 20, 25, 30};
  std::size_t trials = 100;
  double q = 0.1;
  std::vector<std::string> methods{"gaussian/logistic"};
  std::vector<Selector> selectors{Selector::Knockoff, Selector::L1};
  /// Fixed penalties of the L1 selector as fractions of lambda_max.
  std::vector<double> l1_lambda_ratios{0.1, 0.01, 0.001};
  double shrinkage = kDefaultShrinkage;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Row pool for the "encoder" source.
  std::optional<Matrix> concept_pool;
};

/// Seed of the data of one (amplitude, trial) cell. All methods and selectors
/// of a cell see the same concepts, truth and labels.
std::uint64_t trial_seed(std::uint64_t sweep_seed, std::size_t amplitude_index, std::size_t trial);

/// One record per (amplitude, trial, method, selector[, lambda]); failures are
/// recorded in the status column and never stop the sweep. Records come back
/// sorted by (amplitude, trial, method, selector) whatever the thread count.
std::vector<TrialRecord> amplitude_sweep(const SweepConfig& config);

/// Reruns a single cell; equal to the matching records of the full sweep.
std::vector<TrialRecord> run_trial_cell(const SweepConfig& config, std::size_t amplitude_index, std::size_t trial);

inline constexpr std::string_view kTrialCsvHeader = "amplitude,trial,method,selector,n_selected,fdp,power,seed,status";

std::string format_double(double v);
std::string trial_records_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> parse_trial_records_csv(const std::string& text);

struct GroupSummary {
  double amplitude = 0.0;
  std::string method;
  Selector selector = Selector::Knockoff;
  std::size_t completed = 0;
  std::size_t failed = 0;
  double mean_fdp = 0.0;
  double se_fdp = 0.0;
  double mean_power = 0.0;
  double se_power = 0.0;
  double mean_selected = 0.0;
};

/// Means and standard errors over completed trials per (amplitude, method, selector).
std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records);
nlohmann::json summary_json(const std::vector<GroupSummary>& groups);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace kc::bench
