#pragma once

#include "kc/bench/pipeline.hpp"
#include "kc/nn/mlp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kc::bench {

struct ProbeOptions {
  std::size_t epochs = 30;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  std::size_t hidden_width = 64;
};

/// Small feed-forward classifier with a softmax output, used to read the
/// class of decoded images.
struct ProbeClassifier {
  nn::Mlp net;

  std::vector<int> predict(const Matrix& images) const;
  double accuracy(const Matrix& images, const Vector& classes) const;
};

/// Softmax cross-entropy by minibatch SGD with momentum. classes holds ids
/// in 0..num_classes-1.
ProbeClassifier train_probe(const Matrix& images, const Vector& classes, std::size_t num_classes, RngStream& rng,
                            const ProbeOptions& options = {});

/// count values evenly spaced on [lo, hi].
std::vector<double> intervention_grid(std::size_t count = 13, double lo = -3.0, double hi = 3.0);

/// For latent j: the fraction of (image, grid value) pairs whose probe class
/// after setting z_j to the value and decoding differs from the class of the
/// unaltered reconstruction. z is the encoder mean.
Vector change_rate_probe(const concepts::ConceptModel& model, const ProbeClassifier& probe, const Matrix& images,
                         const std::vector<double>& grid);

struct ChangeRateOptions {
  std::size_t runs = 10;
  std::size_t images_per_run = 200;
  std::vector<double> grid = intervention_grid();
  SelectOptions select;
};

struct ChangeRateReport {
  Vector mean_change_rate;     // per latent, averaged over runs
  Vector selection_frequency;  // fraction of runs that selected each latent
  std::vector<IndexSet> selections;
  /// Means over the runs whose selection split the latents into two
  /// nonempty groups of the per-run group mean change rates.
  double selected_mean = 0.0;
  double unselected_mean = 0.0;
  std::size_t compared_runs = 0;
};

/// Run r uses the stream (seed, r): knockoff selection of the encoded
/// evaluation images against their labels, then change rates on a random
/// subset of those images.
ChangeRateReport change_rate_study(const concepts::ConceptModel& model, const ProbeClassifier& probe,
                                   const Matrix& images, const Vector& labels, const ChangeRateOptions& options,
                                   std::uint64_t seed);

inline constexpr std::string_view kChangeRateCsvHeader = "latent_index,mean_change_rate,selection_frequency";
std::string change_rate_csv(const ChangeRateReport& report);

}  // namespace kc::bench
