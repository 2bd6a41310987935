#pragma once

#include "kc/numcore/matrix.hpp"
#include "kc/selection/lasso.hpp"

#include <limits>
#include <string>

namespace kc::selection {

inline constexpr double kInfiniteThreshold = std::numeric_limits<double>::infinity();

struct Threshold {
  double tau = kInfiniteThreshold;
  IndexSet selected;
};

struct SelectionResult {
  Vector w;
  double tau = kInfiniteThreshold;
  IndexSet selected;
  double q = 0.1;
};

/// W_j = |b_j| - |b_{j+p}| for a fit on the augmented design [Z, Z~].
Vector compute_w(const LassoFit& fit);
Vector compute_w(const Vector& augmented_coefficients);

/// Knockoff+ threshold: the smallest t among the nonzero |w_j| with
/// (1 + #{w_j <= -t}) / max(1, #{w_j >= t}) <= q. Infinite (and nothing
/// selected) when no candidate qualifies. Throws InvalidLevel unless 0 < q < 1.
Threshold knockoff_threshold(const Vector& w, double q);

/// (1 + #{w_j <= -t}) / max(1, #{w_j >= t}).
double knockoff_ratio(const Vector& w, double t);

/// Lasso on z alone; selects every column with |b_j| above 1e-10.
IndexSet l1_baseline_select(const Vector& y, const Matrix& z, double lambda, LossKind loss);

inline constexpr double kNonzeroTolerance = 1e-10;

/// {"q", "tau", "w", "selected"} with an infinite tau written as "inf".
std::string selection_to_json(const SelectionResult& result);
SelectionResult selection_from_json(const std::string& text);

}  // namespace kc::selection
