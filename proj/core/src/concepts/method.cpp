#include "kc/concepts/method.hpp"

#include "kc/numcore/error.hpp"

#include <cmath>

namespace kc::concepts {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::BetaVae: return "beta-vae";
    case Method::CsrVae: return "csr-vae";
    case Method::Cbm: return "cbm";
    case Method::FullVae: return "full-vae";
    case Method::CsrCbm: return "csr-cbm";
  }
  return "beta-vae";
}

Method method_from_string(std::string_view name) {
  if (name == "beta-vae") return Method::BetaVae;
  if (name == "csr-vae") return Method::CsrVae;
  if (name == "cbm") return Method::Cbm;
  if (name == "full-vae") return Method::FullVae;
  if (name == "csr-cbm") return Method::CsrCbm;
  throw Error(ErrorCode::UnknownMethod, "unknown concept method '" + std::string(name) + "'");
}

std::array<bool, 5> MethodConfig::active() const {
  switch (method) {
    case Method::BetaVae: return {true, true, false, false, false};
    case Method::CsrVae: return {true, true, false, true, true};
    case Method::Cbm: return {false, false, true, true, false};
    case Method::FullVae: return {true, true, true, false, false};
    case Method::CsrCbm: return {false, false, true, true, true};
  }
  return {};
}

MethodConfig configure_method(Method method) {
  MethodConfig config;
  config.method = method;
  const auto on = config.active();
  auto& w = config.weights;
  w.reconstruction = on[0] ? kDefaultReconstructionWeight : 0.0;
  w.kl = on[1] ? kDefaultKlWeight : 0.0;
  w.concept_term = on[2] ? kDefaultConceptWeight : 0.0;
  w.label = on[3] ? kDefaultLabelWeight : 0.0;
  w.sparsity = 0.0;
  if (config.is_csr()) config = with_sparsity(config, kDefaultSparsityWeight);
  return config;
}

MethodConfig configure_method(std::string_view name) { return configure_method(method_from_string(name)); }

MethodConfig with_sparsity(MethodConfig config, double alpha5) {
  if (!config.active()[4]) {
    throw Error(ErrorCode::InvalidArgument, config.name() + " has no concept sparsity term");
  }
  if (!(alpha5 >= 0.0) || !std::isfinite(alpha5)) {
    throw Error(ErrorCode::InvalidArgument, "alpha5 must be finite and non-negative");
  }
  config.weights.sparsity = alpha5;
  config.weights.label = kLabelToSparsityRatio * alpha5;
  return config;
}

void validate(const MethodConfig& config) {
  const auto on = config.active();
  const auto w = config.weights.as_array();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) {
      throw Error(ErrorCode::InvalidArgument, "alpha" + std::to_string(i + 1) + " must be finite and non-negative");
    }
    if (!on[i] && w[i] != 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "alpha" + std::to_string(i + 1) + " is not part of the " + config.name() + " objective");
    }
  }
}

}  // namespace kc::concepts
