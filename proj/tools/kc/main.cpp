#include "commands.hpp"
#include "config.hpp"

#include "kc/numcore/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using kc::cli::Command;
using kc::cli::RunConfig;

/// Flag values; each one set on the command line overrides the config file.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<double> q;
  std::optional<std::string> out_dir;
  std::optional<std::string> method;
  std::optional<std::string> selector;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> n;
  std::optional<std::size_t> epochs;
  std::optional<double> alpha5;
  std::optional<std::string> dataset_dir;
  std::optional<std::string> checkpoint;
  std::optional<std::string> concepts;
  bool train_on_the_fly = false;
  bool inject_identity = false;
};

void add_common(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON config file; flags given here override its values");
  sub.add_option("--seed", f.seed, "Root seed");
  sub.add_option("--q", f.q, "Target FDR level in (0, 1)");
  sub.add_option("--out-dir", f.out_dir, "Output directory");
  sub.add_option("--method", f.method, "beta-vae | csr-vae | cbm | full-vae | csr-cbm");
  sub.add_option("--selector", f.selector, "knockoff | l1");
}

RunConfig build_config(Command command, const Flags& f) {
  RunConfig c = f.config ? kc::cli::load_config_file(*f.config, command) : RunConfig{};
  c.command = command;
  if (f.seed) c.seed = *f.seed;
  if (f.q) c.q = *f.q;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.method) c.method = *f.method;
  if (f.selector) c.selector = *f.selector;
  if (f.trials) c.trials = *f.trials;
  if (f.n) c.n = *f.n;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.alpha5) c.alpha5 = *f.alpha5;
  if (f.dataset_dir) c.dataset_dir = *f.dataset_dir;
  if (f.checkpoint) c.checkpoint = *f.checkpoint;
  if (f.concepts) c.concepts = *f.concepts;
  if (f.train_on_the_fly) c.train_on_the_fly = true;
  if (f.inject_identity) c.inject_identity = true;
  kc::cli::resolve(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept selection with knockoff filters: synthetic FDR sweeps and glyph concept experiments"};
  app.require_subcommand(1);
  Flags flags;

  struct Entry {
    Command command;
    const char* help;
  };
  const Entry entries[] = {
      {Command::SynthFdr, "Amplitude sweep of FDP and power on synthetic concepts"},
      {Command::SparsitySweep, "Selection rate and accuracy over a grid of sparsity weights"},
      {Command::TrainConcepts, "Train a concept model and write a checkpoint"},
      {Command::Select, "Run concept selection, from a checkpoint or end to end"},
      {Command::ChangeRate, "Latent intervention change rates against selection frequency"},
      {Command::DiagnoseKnockoffs, "Exchangeability diagnostic of both knockoff samplers"},
      {Command::MakeGlyphs, "Generate a glyph dataset"},
  };
  std::optional<Command> chosen;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(std::string(kc::cli::to_string(e.command)), e.help);
    add_common(*sub, flags);
    switch (e.command) {
      case Command::SynthFdr:
        sub->add_option("--trials", flags.trials, "Trials per amplitude");
        break;
      case Command::SparsitySweep:
      case Command::TrainConcepts:
      case Command::Select:
      case Command::ChangeRate:
        sub->add_option("--dataset-dir", flags.dataset_dir, "Dataset directory of KCMX files");
        sub->add_option("--n", flags.n, "Glyphs to generate when no dataset is given");
        sub->add_option("--epochs", flags.epochs, "Training epochs");
        sub->add_option("--alpha5", flags.alpha5, "Sparsity weight on the linear head");
        if (e.command == Command::Select || e.command == Command::ChangeRate) {
          sub->add_option("--checkpoint", flags.checkpoint, "Checkpoint directory of a trained model");
        }
        if (e.command == Command::ChangeRate) {
          sub->add_flag("--train-on-the-fly", flags.train_on_the_fly, "Train a model instead of loading one");
        }
        break;
      case Command::DiagnoseKnockoffs:
        sub->add_option("--concepts", flags.concepts, "KCMX concept matrix");
        sub->add_flag("--inject-identity", flags.inject_identity, "Replace knockoffs by the originals");
        break;
      case Command::MakeGlyphs:
        sub->add_option("--n", flags.n, "Number of glyphs");
        break;
    }
    sub->callback([&chosen, c = e.command] { chosen = c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kc::cli::kExitConfigError;
  }

  try {
    const RunConfig config = build_config(*chosen, flags);
    return kc::cli::run_command(config, std::cout);
  } catch (const kc::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kc::cli::kExitConfigError;
  } catch (const kc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kc::cli::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kc::cli::kExitConfigError;
  }
}
