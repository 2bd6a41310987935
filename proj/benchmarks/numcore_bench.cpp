#include "kc/bench/synthetic.hpp"
#include "kc/knockoff/knockoff.hpp"
#include "kc/numcore/covariance.hpp"
#include "kc/numcore/linalg.hpp"

#include <benchmark/benchmark.h>

namespace {

kc::Matrix correlation(std::size_t p) {
  kc::RngStream rng(1, p);
  return kc::bench::random_correlation(p, rng);
}

void BM_Cholesky(benchmark::State& state) {
  const kc::Matrix sigma = correlation(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kc::cholesky_spd(sigma));
}
BENCHMARK(BM_Cholesky)->Arg(16)->Arg(40)->Arg(160);

void BM_MinEigenvalue(benchmark::State& state) {
  const kc::Matrix sigma = correlation(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kc::min_eigenvalue(sigma));
}
BENCHMARK(BM_MinEigenvalue)->Arg(16)->Arg(40)->Arg(80);

void BM_ShrinkCovariance(benchmark::State& state) {
  kc::RngStream rng(2, 0);
  const kc::Matrix z = kc::gaussian_draws(rng, 1000, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kc::shrink_covariance(z));
}
BENCHMARK(BM_ShrinkCovariance)->Arg(16)->Arg(40);

void BM_GaussianKnockoffs(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const kc::Matrix sigma = correlation(p);
  kc::RngStream data(3, 0);
  const kc::Matrix z = kc::bench::sample_gaussian(sigma, 1000, data);
  const kc::Covariance cov{sigma, 0.0};
  const kc::Vector s = kc::knockoff::equicorrelated_s(cov);
  kc::RngStream rng(3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kc::knockoff::sample_gaussian_knockoffs(z, cov, s, rng));
}
BENCHMARK(BM_GaussianKnockoffs)->Arg(16)->Arg(40);

void BM_GaussianDraws(benchmark::State& state) {
  kc::RngStream rng(4, 0);
  for (auto _ : state) benchmark::DoNotOptimize(kc::gaussian_draws(rng, 1000, 40));
  state.SetItemsProcessed(state.iterations() * 40000);
}
BENCHMARK(BM_GaussianDraws);

}  // namespace
