#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kc::cli {

enum class Command { SynthFdr, SparsitySweep, TrainConcepts, Select, ChangeRate, DiagnoseKnockoffs, MakeGlyphs };

std::string_view to_string(Command c) noexcept;
Command command_from_string(std::string_view name);

/// A configuration value failed validation; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Every knob of every command. Unset optionals fall back to per-command
/// defaults in resolve(); after resolve() every value used is present.
struct RunConfig {
  Command command = Command::SynthFdr;
  std::optional<double> q;
  std::uint64_t seed = 0;
  std::string method = "csr-vae";
  std::optional<std::string> selector;

  // synthetic sweep
  std::size_t p = 40;
  std::size_t k = 10;
  std::size_t m = 1000;
  std::vector<double> amplitudes{2, 5, 10, 15, 20, 25, 30};
  std::size_t trials = 100;
  std::vector<double> l1_lambda_ratios{0.1, 0.01, 0.001};
  std::string loss = "logistic";
  double shrinkage = 0.05;
  std::optional<std::filesystem::path> concept_pool;

  // concept training
  std::optional<double> alpha1, alpha2, alpha3, alpha4, alpha5;
  std::vector<double> alpha5_grid{0.0, 0.001, 0.01};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::size_t latent_dim = 16;
  std::size_t batch_size = 64;

  // glyph data and probes
  std::size_t n = 6000;
  std::size_t n_test = 2000;
  std::size_t image_size = 12;
  std::size_t runs = 10;
  std::size_t images_per_run = 200;

  // paths and switches
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> dataset_dir;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> concepts;
  bool train_on_the_fly = false;
  bool inject_identity = false;
};

/// Overlays the keys of a JSON object onto `config`. Unknown keys and
/// mistyped values throw ConfigError.
void apply_json(RunConfig& config, const nlohmann::json& object);
RunConfig load_config_file(const std::filesystem::path& path, Command command);

/// Fills command-dependent defaults and validates every field.
void resolve(RunConfig& config);

/// Complete snapshot of the resolved config; apply_json accepts it back.
nlohmann::json to_json(const RunConfig& config);

}  // namespace kc::cli
