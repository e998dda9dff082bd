#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dcl/feature_core.hpp"
#include "dcl/losses.hpp"

namespace dcl {

struct HistoryEntry {
  std::size_t step = 0;
  double l_a = 0.0;   // squared-distance alignment
  double l_u = 0.0;   // uniformity under the run's LossConfig
  double loss = 0.0;  // weighted objective
};

/// Free unit-norm embeddings optimized by projected gradient descent.
struct OptimState {
  ViewPairBatch embeddings;
  std::size_t step = 0;
  double lr = 0.05;
  std::vector<HistoryEntry> history;
};

constexpr double kDefaultViewNoise = 0.05;

/// Gaussian view-a embeddings, normalized; view b is view a plus Gaussian
/// noise of scale `noise`, re-normalized.
OptimState init_random(std::size_t n, std::size_t hw, std::size_t d,
                       std::uint64_t seed, double noise = kDefaultViewNoise,
                       double lr = 0.05);

/// `steps` rounds of: gradient of the weighted objective, a step of size
/// lr, projection back onto the sphere. The history receives the initial
/// point (when empty) and every new iterate.
OptimState run(OptimState state, std::size_t steps, const LossWeights &weights,
               const LossConfig &cfg,
               ContrastiveVariant variant = ContrastiveVariant::Dense);

/// Mean cosine between view a and view b at every position.
double mean_positive_cosine(const ViewPairBatch &batch);

std::string history_csv(const std::vector<HistoryEntry> &history);

} // namespace dcl
