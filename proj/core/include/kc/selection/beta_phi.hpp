#pragma once

#include "kc/numcore/matrix.hpp"

namespace kc::selection {

struct ConceptEffect {
  Vector beta_phi;
  /// Ratio of largest to smallest eigenvalue of z^T z / n.
  double gram_condition = 0.0;
};

/// Plug-in estimate (z^T z / n)^{-1} (z^T y / n) of the population linear
/// effect of concepts on the response. Throws SingularGram when the Gram
/// matrix does not factor.
ConceptEffect estimate_beta_phi(const Matrix& z, const Vector& y);

}  // namespace kc::selection
