#include "kc/knockoff/knockoff.hpp"

#include "kc/numcore/error.hpp"
#include "kc/numcore/io.hpp"
#include "kc/numcore/kcmx.hpp"
#include "kc/numcore/linalg.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>

namespace kc::knockoff {
namespace {

bool factors(const Matrix& m) {
  try {
    (void)cholesky_spd(m);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotPositiveDefinite) return false;
    throw;
  }
}

}  // namespace

std::string_view to_string(SamplerKind kind) noexcept {
  return kind == SamplerKind::Learned ? "learned" : "gaussian-second-order";
}

SamplerKind sampler_kind_from_string(std::string_view name) {
  if (name == "gaussian-second-order") return SamplerKind::GaussianSecondOrder;
  if (name == "learned") return SamplerKind::Learned;
  throw Error(ErrorCode::FormatError, "unknown sampler kind '" + std::string(name) + "'");
}

Vector equicorrelated_s(const Covariance& sigma) {
  const Matrix& cov = sigma.sigma;
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "equicorrelated_s: covariance must be square and non-empty");
  }
  for (Eigen::Index j = 0; j < cov.rows(); ++j) {
    if (std::abs(cov(j, j) - 1.0) > 1e-6) {
      throw Error(ErrorCode::PreconditionViolated, "equicorrelated_s: covariance must have unit diagonal");
    }
  }
  const double lambda_min = min_eigenvalue(cov);
  if (lambda_min <= kMinEigenvalueFloor) {
    throw Error(ErrorCode::DegenerateCovariance,
                "equicorrelated_s: smallest eigenvalue " + std::to_string(lambda_min) + " indicates collinear concepts");
  }
  const Vector nominal = Vector::Constant(cov.rows(), std::min(2.0 * lambda_min, 1.0));
  if (factors(joint_target(cov, nominal))) return nominal;

  // 2 lambda_min puts the joint matrix exactly on the PSD boundary, so the
  // nominal s often fails in floating point; back off by bisection.
  double lo = 0.0;
  double hi = 1.0;
  for (int step = 0; step < 20; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (factors(joint_target(cov, mid * nominal))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo * nominal;
}

Matrix joint_target(const Matrix& sigma, const Vector& s) {
  const Eigen::Index p = sigma.rows();
  if (s.size() != p) throw Error(ErrorCode::DimensionMismatch, "joint_target: s length differs from dimension");
  Matrix off = sigma;
  off.diagonal() -= s;
  Matrix g(2 * p, 2 * p);
  g << sigma, off, off, sigma;
  return g;
}

KnockoffPair sample_gaussian_knockoffs(const Matrix& z, const Covariance& sigma, const Vector& s, RngStream& rng) {
  const Eigen::Index p = z.cols();
  if (sigma.sigma.rows() != p || s.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "sample_gaussian_knockoffs: dimension mismatch");
  }
  const Matrix lower = cholesky_spd(sigma.sigma);
  const Matrix d = s.asDiagonal();
  const Matrix sigma_inv_d = cholesky_solve(lower, d);

  // Conditional mean z - D Sigma^-1 z, written row-wise.
  const Matrix mean = z - z * sigma_inv_d;
  Matrix v = 2.0 * d - d * sigma_inv_d;
  v = 0.5 * (v + v.transpose());
  const Matrix v_lower = cholesky_spd(v);

  const Matrix noise = gaussian_draws(rng, static_cast<std::size_t>(z.rows()), static_cast<std::size_t>(p));
  KnockoffPair pair;
  pair.originals = z;
  pair.knockoffs = mean + noise * v_lower.transpose();
  pair.kind = SamplerKind::GaussianSecondOrder;
  pair.s = s;
  pair.seed = rng.seed();
  return pair;
}

Matrix bound_with_tanh(const Matrix& z) { return z.array().tanh().matrix(); }

double exchangeability_diagnostic(const KnockoffPair& pair) {
  if (pair.originals.rows() < 100) {
    throw Error(ErrorCode::PreconditionViolated, "exchangeability_diagnostic: need at least 100 rows");
  }
  if (pair.originals.rows() != pair.knockoffs.rows() || pair.originals.cols() != pair.knockoffs.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "exchangeability_diagnostic: originals and knockoffs differ in shape");
  }
  const Matrix joint = empirical_covariance(hstack(pair.originals, pair.knockoffs));
  const Matrix sigma = joint.topLeftCorner(pair.originals.cols(), pair.originals.cols());
  return (joint - joint_target(sigma, pair.s)).cwiseAbs().maxCoeff();
}

void save_pair(const std::filesystem::path& dir, const KnockoffPair& pair) {
  save_kcmx(dir / "originals.kcmx", pair.originals);
  save_kcmx(dir / "knockoffs.kcmx", pair.knockoffs);
  nlohmann::ordered_json meta;
  meta["sampler_kind"] = std::string(to_string(pair.kind));
  meta["s"] = std::vector<double>(pair.s.data(), pair.s.data() + pair.s.size());
  meta["seed"] = pair.seed;
  write_file_atomic(dir / "knockoffs.json", meta.dump(2) + "\n");
}

KnockoffPair load_pair(const std::filesystem::path& dir) {
  KnockoffPair pair;
  pair.originals = load_kcmx(dir / "originals.kcmx");
  pair.knockoffs = load_kcmx(dir / "knockoffs.kcmx");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(dir / "knockoffs.json"));
    pair.kind = sampler_kind_from_string(meta.at("sampler_kind").get<std::string>());
    const auto s = meta.at("s").get<std::vector<double>>();
    pair.s = Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
    pair.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("knockoffs.json: ") + e.what());
  }
  return pair;
}

}  // namespace kc::knockoff
