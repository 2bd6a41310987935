#include "kc/bench/glyphs.hpp"
#include "kc/bench/sweep.hpp"
#include "kc/concepts/losses.hpp"
#include "kc/concepts/model.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_TrialCell(benchmark::State& state) {
  kc::bench::SweepConfig config;
  config.amplitudes = {10.0};
  config.trials = 1;
  for (auto _ : state) benchmark::DoNotOptimize(kc::bench::run_trial_cell(config, 0, 0));
}
BENCHMARK(BM_TrialCell)->Unit(benchmark::kMillisecond);

void BM_RenderGlyphs(benchmark::State& state) {
  for (auto _ : state) {
    kc::RngStream rng(20, 0);
    benchmark::DoNotOptimize(kc::bench::generate_glyph_dataset(256, 12, rng));
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_RenderGlyphs)->Unit(benchmark::kMillisecond);

void BM_UnifiedLossGradient(benchmark::State& state) {
  kc::RngStream rng(21, 0);
  const auto data = kc::bench::generate_glyph_dataset(64, 12, rng);
  const auto batch = data.batch(false);
  kc::concepts::Architecture arch;
  arch.input_dim = static_cast<std::size_t>(data.images.cols());
  const auto model = kc::concepts::make_concept_model(arch, kc::concepts::configure_method("csr-vae"), rng);
  const kc::Matrix noise = kc::gaussian_draws(rng, 64, arch.latent_dim);
  auto grads = kc::concepts::ModelGradients::like(model);
  for (auto _ : state) {
    grads.set_zero();
    benchmark::DoNotOptimize(kc::concepts::evaluate_loss(model, batch, model.config.weights, noise, &grads));
  }
}
BENCHMARK(BM_UnifiedLossGradient)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
