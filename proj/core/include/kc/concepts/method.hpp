#pragma once

#include <array>
#include <string>
#include <string_view>

namespace kc::concepts {

enum class Method { BetaVae, CsrVae, Cbm, FullVae, CsrCbm };

std::string_view to_string(Method m) noexcept;
/// Throws UnknownMethod.
Method method_from_string(std::string_view name);

/// Weights of the five objective terms, in objective order: reconstruction,
/// KL divergence, concept supervision, label prediction, and the L1 penalty
/// on the linear head.
struct LossWeights {
  double reconstruction = 0.0;  // alpha_1
  double kl = 0.0;              // alpha_2
  double concept_term = 0.0;    // alpha_3
  double label = 0.0;           // alpha_4
  double sparsity = 0.0;        // alpha_5

  std::array<double, 5> as_array() const { return {reconstruction, kl, concept_term, label, sparsity}; }
};

inline constexpr double kDefaultReconstructionWeight = 1.0;
inline constexpr double kDefaultKlWeight = 4.0;
inline constexpr double kDefaultConceptWeight = 1.0;
inline constexpr double kDefaultLabelWeight = 1.0;
inline constexpr double kDefaultSparsityWeight = 0.01;
/// CSR methods tie the label weight to the sparsity weight.
inline constexpr double kLabelToSparsityRatio = 100.0;

struct MethodConfig {
  Method method = Method::BetaVae;
  LossWeights weights;

  /// Which of alpha_1..alpha_5 the method may set, per the method table.
  std::array<bool, 5> active() const;
  bool is_csr() const { return method == Method::CsrVae || method == Method::CsrCbm; }
  /// Concept-label supervised (CBM-style) concepts; their distribution is
  /// uncontrolled, so selection uses the learned knockoff sampler.
  bool cbm_family() const { return method == Method::Cbm || method == Method::CsrCbm; }
  bool needs_concept_labels() const { return active()[2]; }
  bool needs_class_labels() const { return active()[3]; }
  std::string name() const { return std::string(to_string(method)); }
};

/// Default weights for a method; CSR methods get alpha_4 = 100 alpha_5.
MethodConfig configure_method(std::string_view name);
MethodConfig configure_method(Method method);

/// Sets alpha_5, recoupling alpha_4 = 100 alpha_5 for CSR methods.
/// Throws InvalidArgument for a method without the sparsity term.
MethodConfig with_sparsity(MethodConfig config, double alpha5);

/// Throws InvalidArgument if a weight is negative, non-finite, or set on
/// a term the method does not use.
void validate(const MethodConfig& config);

}  // namespace kc::concepts
