#include "kc/selection/beta_phi.hpp"

#include "kc/numcore/error.hpp"
#include "kc/numcore/linalg.hpp"

namespace kc::selection {

ConceptEffect estimate_beta_phi(const Matrix& z, const Vector& y) {
  if (z.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "estimate_beta_phi: row count differs from y");
  const double n = static_cast<double>(z.rows());
  Matrix gram = z.transpose() * z / n;
  gram = 0.5 * (gram + gram.transpose());
  Matrix lower;
  try {
    lower = cholesky_spd(gram);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    throw Error(ErrorCode::SingularGram, std::string("estimate_beta_phi: ") + e.what());
  }
  ConceptEffect effect;
  effect.beta_phi = cholesky_solve(lower, Vector(z.transpose() * y / n));
  const Vector eig = symmetric_eigenvalues(gram);
  effect.gram_condition = eig(eig.size() - 1) / eig(0);
  return effect;
}

}  // namespace kc::selection
