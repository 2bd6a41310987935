#pragma once

#include "kc/numcore/matrix.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace kc {

/// Deterministic random stream keyed by (seed, stream id).
///
/// The generator is xoshiro256** seeded through SplitMix64 from both keys,
/// so distinct stream ids give statistically independent sequences and any
/// stream can be recreated without replaying another. Normal draws use the
/// Box-Muller transform implemented here rather than std::normal_distribution,
/// whose output is not specified across standard libraries.
///
/// Not thread-safe: one stream per thread or trial.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n) noexcept;
  /// k distinct indices drawn uniformly from 0..n-1, in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) noexcept;

  /// Independent child stream. Does not advance this stream.
  RngStream child(std::uint64_t id) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes any number of keys into one 64-bit seed, used to derive per-trial seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

/// count x dim matrix of iid standard normal draws, filled row by row.
Matrix gaussian_draws(RngStream& rng, std::size_t count, std::size_t dim);

}  // namespace kc
