#include "commands.hpp"
#include "config.hpp"
#include "manifest.hpp"

#include "kc/numcore/io.hpp"
#include "kc/numcore/kcmx.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace kc::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kc_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_kc(const std::string& args) {
  const std::string cmd = std::string(KC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

const char* kTinySynth = R"({"p": 10, "k": 3, "m": 200, "amplitudes": [10], "trials": 2})";

}  // namespace

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Config, SnapshotRoundTrips) {
  for (auto command : {Command::SynthFdr, Command::SparsitySweep, Command::TrainConcepts, Command::MakeGlyphs}) {
    RunConfig c;
    c.command = command;
    c.seed = 77;
    c.q = 0.3;
    resolve(c);
    const auto snapshot = to_json(c);
    RunConfig back;
    back.command = command;
    apply_json(back, snapshot);
    resolve(back);
    EXPECT_EQ(to_json(back), snapshot) << to_string(command);
  }
}

TEST(Config, PerCommandLevelDefaults) {
  RunConfig synth;
  synth.command = Command::SynthFdr;
  resolve(synth);
  EXPECT_EQ(*synth.q, 0.1);
  RunConfig sweep;
  sweep.command = Command::SparsitySweep;
  resolve(sweep);
  EXPECT_EQ(*sweep.q, 0.5);
}

TEST(Config, ValidationNamesTheField) {
  RunConfig c;
  c.q = 1.5;
  try {
    resolve(c);
    FAIL() << "q = 1.5 accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "q");
  }
  RunConfig u;
  EXPECT_THROW(apply_json(u, nlohmann::json{{"no_such_key", 1}}), ConfigError);
  EXPECT_THROW(apply_json(u, nlohmann::json{{"trials", "many"}}), ConfigError);
  RunConfig inactive;
  inactive.method = "beta-vae";
  inactive.alpha5 = 0.1;
  inactive.command = Command::TrainConcepts;
  EXPECT_THROW(resolve(inactive), ConfigError);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  EXPECT_EQ(run_kc("synth-fdr --q 1.5 --out-dir " + dir.string()), kExitConfigError);
  EXPECT_EQ(run_kc("synth-fdr --q abc"), kExitConfigError);
  EXPECT_EQ(run_kc("no-such-command"), kExitConfigError);
  EXPECT_EQ(run_kc("--help"), kExitOk);

  write_text(dir / "bad_magic.kcmx", "KCMY\x01\x00\x00\x00\x01\x00\x00\x00");
  EXPECT_EQ(run_kc("diagnose-knockoffs --concepts " + (dir / "bad_magic.kcmx").string() + " --out-dir " +
                   (dir / "diag").string()),
            kExitConfigError);

  write_text(dir / "unknown.json", R"({"bogus": 1})");
  EXPECT_EQ(run_kc("synth-fdr --config " + (dir / "unknown.json").string()), kExitConfigError);

  // A concept pool with fewer rows than m fails every encoder trial.
  kc::save_kcmx(dir / "pool.kcmx", kc::Matrix::Random(5, 4));
  write_text(dir / "partial.json", std::string(R"({"p": 10, "k": 3, "m": 200, "amplitudes": [10], "trials": 2, )") +
                                       R"("concept_pool": ")" + (dir / "pool.kcmx").string() + "\"}");
  EXPECT_EQ(run_kc("synth-fdr --config " + (dir / "partial.json").string() + " --out-dir " + (dir / "partial").string()),
            kExitPartialFailure);
  EXPECT_TRUE(fs::exists(dir / "partial" / "manifest.json"));
  fs::remove_all(dir);
}

TEST(Cli, ManifestDigestsMatchFiles) {
  const fs::path dir = scratch("manifest");
  write_text(dir / "synth.json", kTinySynth);
  ASSERT_EQ(run_kc("synth-fdr --seed 3 --config " + (dir / "synth.json").string() + " --out-dir " +
                   (dir / "out").string()),
            kExitOk);
  const auto manifest = nlohmann::json::parse(kc::read_file(dir / "out" / "manifest.json"));
  ASSERT_FALSE(manifest.at("outputs").empty());
  for (const auto& entry : manifest.at("outputs")) {
    const auto path = dir / "out" / entry.at("path").get<std::string>();
    EXPECT_EQ(sha256_hex(kc::read_file(path)), entry.at("sha256").get<std::string>()) << path;
  }
  EXPECT_EQ(manifest.at("config").at("seed"), 3);
  EXPECT_EQ(manifest.at("config").at("trials"), 2);

  const auto csv = kc::read_file(dir / "out" / "trial_results.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "amplitude,trial,method,selector,n_selected,fdp,power,seed,status");
  fs::remove_all(dir);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path dir = scratch("override");
  write_text(dir / "synth.json", std::string(R"({"p": 10, "k": 3, "m": 200, "amplitudes": [10], "trials": 2, "q": 0.2})"));
  ASSERT_EQ(run_kc("synth-fdr --q 0.3 --trials 1 --config " + (dir / "synth.json").string() + " --out-dir " +
                   (dir / "out").string()),
            kExitOk);
  const auto manifest = nlohmann::json::parse(kc::read_file(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("q"), 0.3);
  EXPECT_EQ(manifest.at("config").at("trials"), 1);
  EXPECT_EQ(manifest.at("config").at("p"), 10);
  fs::remove_all(dir);
}

TEST(Cli, SynthOutputByteDeterministic) {
  const fs::path dir = scratch("determinism");
  write_text(dir / "synth.json", kTinySynth);
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(run_kc("synth-fdr --seed 9 --config " + (dir / "synth.json").string() + " --out-dir " +
                     (dir / out).string()),
              kExitOk);
  }
  for (const char* file : {"trial_results.csv", "summary.json"}) {
    EXPECT_EQ(kc::read_file(dir / "a" / file), kc::read_file(dir / "b" / file)) << file;
  }
  fs::remove_all(dir);
}

TEST(Cli, ThreadCapValidated) {
  ::setenv("KC_THREADS", "2", 1);
  EXPECT_EQ(thread_count() <= 2, true);
  EXPECT_GE(thread_count(), 1u);
  ::setenv("KC_THREADS", "zero", 1);
  EXPECT_THROW(thread_count(), ConfigError);
  ::unsetenv("KC_THREADS");
}
