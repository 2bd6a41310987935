#pragma once

#include "config.hpp"

#include <iosfwd>

namespace kc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitPartialFailure = 2;

/// Worker threads for trial parallelism: hardware concurrency, capped by
/// KC_THREADS when set. Throws ConfigError on a malformed KC_THREADS.
std::size_t thread_count();

/// Runs a resolved config, writes its outputs and the manifest, and returns
/// the exit code. Human-readable progress goes to `log`.
int run_command(const RunConfig& config, std::ostream& log);

}  // namespace kc::cli
