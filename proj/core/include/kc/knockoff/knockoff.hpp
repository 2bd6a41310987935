#pragma once

#include "kc/numcore/covariance.hpp"
#include "kc/numcore/matrix.hpp"
#include "kc/numcore/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>

namespace kc::knockoff {

enum class SamplerKind { GaussianSecondOrder, Learned };

std::string_view to_string(SamplerKind kind) noexcept;
SamplerKind sampler_kind_from_string(std::string_view name);

/// Original concepts, their knockoff copies, and the decorrelation vector s
/// (in the units of the originals) that defines the target joint covariance.
struct KnockoffPair {
  Matrix originals;
  Matrix knockoffs;
  SamplerKind kind = SamplerKind::GaussianSecondOrder;
  Vector s;
  std::uint64_t seed = 0;
};

/// Below this smallest eigenvalue the covariance is treated as collinear.
inline constexpr double kMinEigenvalueFloor = 1e-10;

/// Equi-correlated decorrelation for a correlation-scaled covariance
/// (unit diagonal): s_j = min(2 lambda_min, 1), scaled by the largest
/// gamma in (0, 1] for which the joint matrix still factors.
Vector equicorrelated_s(const Covariance& sigma);

/// [[Sigma, Sigma - D], [Sigma - D, Sigma]] with D = diag(s).
Matrix joint_target(const Matrix& sigma, const Vector& s);

/// Second-order Gaussian knockoffs: each row is drawn from the conditional
/// law of a knockoff given the original row. Never reads a response.
KnockoffPair sample_gaussian_knockoffs(const Matrix& z, const Covariance& sigma, const Vector& s, RngStream& rng);

/// Elementwise tanh, bounding every entry into (-1, 1).
Matrix bound_with_tanh(const Matrix& z);

/// Max-abs gap between the empirical covariance of [Z, Z~] and the joint
/// target built from the empirical covariance of Z and diag(s). Requires at
/// least 100 rows.
double exchangeability_diagnostic(const KnockoffPair& pair);

/// Writes originals.kcmx, knockoffs.kcmx and knockoffs.json into `dir`.
void save_pair(const std::filesystem::path& dir, const KnockoffPair& pair);
KnockoffPair load_pair(const std::filesystem::path& dir);

}  // namespace kc::knockoff
