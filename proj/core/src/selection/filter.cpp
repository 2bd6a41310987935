#include "kc/selection/filter.hpp"

#include "kc/numcore/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace kc::selection {

Vector compute_w(const Vector& augmented_coefficients) {
  if (augmented_coefficients.size() % 2 != 0) {
    throw Error(ErrorCode::DimensionMismatch, "compute_w: coefficient vector must have even length 2p");
  }
  const Eigen::Index p = augmented_coefficients.size() / 2;
  return augmented_coefficients.head(p).cwiseAbs() - augmented_coefficients.tail(p).cwiseAbs();
}

Vector compute_w(const LassoFit& fit) { return compute_w(fit.coefficients); }

double knockoff_ratio(const Vector& w, double t) {
  const auto negatives = (w.array() <= -t).count();
  const auto positives = (w.array() >= t).count();
  return (1.0 + static_cast<double>(negatives)) / static_cast<double>(std::max<Eigen::Index>(1, positives));
}

Threshold knockoff_threshold(const Vector& w, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::InvalidLevel, "knockoff_threshold: q must lie in (0, 1)");

  // Sweep candidates in increasing order of |w|. Counts of w_j >= t and
  // w_j <= -t only shrink as t grows, so both are maintained by popping
  // entries off sorted arrays.
  std::vector<double> positive, negative_magnitude;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w(j) > 0.0) positive.push_back(w(j));
    if (w(j) < 0.0) negative_magnitude.push_back(-w(j));
  }
  std::vector<double> candidates = positive;
  candidates.insert(candidates.end(), negative_magnitude.begin(), negative_magnitude.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::sort(positive.begin(), positive.end());
  std::sort(negative_magnitude.begin(), negative_magnitude.end());

  Threshold out;
  std::size_t pos_below = 0;  // positives strictly below t
  std::size_t neg_below = 0;
  for (double t : candidates) {
    while (pos_below < positive.size() && positive[pos_below] < t) ++pos_below;
    while (neg_below < negative_magnitude.size() && negative_magnitude[neg_below] < t) ++neg_below;
    const double hits = static_cast<double>(positive.size() - pos_below);
    const double misses = static_cast<double>(negative_magnitude.size() - neg_below);
    if ((1.0 + misses) / std::max(1.0, hits) <= q) {
      out.tau = t;
      break;
    }
  }
  if (std::isfinite(out.tau)) {
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      if (w(j) >= out.tau) out.selected.push_back(static_cast<std::size_t>(j));
    }
  }
  return out;
}

IndexSet l1_baseline_select(const Vector& y, const Matrix& z, double lambda, LossKind loss) {
  const LassoFit fit = fit_lasso(y, z, lambda, loss);
  IndexSet selected;
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    if (std::abs(fit.coefficients(j)) > kNonzeroTolerance) selected.push_back(static_cast<std::size_t>(j));
  }
  return selected;
}

std::string selection_to_json(const SelectionResult& result) {
  nlohmann::ordered_json j;
  j["q"] = result.q;
  if (std::isfinite(result.tau)) {
    j["tau"] = result.tau;
  } else {
    j["tau"] = "inf";
  }
  j["w"] = std::vector<double>(result.w.data(), result.w.data() + result.w.size());
  j["selected"] = result.selected;
  return j.dump(2) + "\n";
}

SelectionResult selection_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SelectionResult out;
    out.q = j.at("q").get<double>();
    const auto& tau = j.at("tau");
    if (tau.is_string()) {
      if (tau.get<std::string>() != "inf") throw Error(ErrorCode::FormatError, "selection JSON: bad tau string");
      out.tau = kInfiniteThreshold;
    } else {
      out.tau = tau.get<double>();
    }
    const auto w = j.at("w").get<std::vector<double>>();
    out.w = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    out.selected = j.at("selected").get<IndexSet>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("selection JSON: ") + e.what());
  }
}

}  // namespace kc::selection
