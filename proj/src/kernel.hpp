#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "events.hpp"
#include "rng.hpp"

namespace tpp {

// Gaussian kernel k(t, u) = exp(-(t - u)^2 / (2 sigma^2))
struct KernelConfig {
  double sigma = 1.0;
};

double kernel_value(double t, double u, const KernelConfig& cfg);

// Median of the nonzero pairwise absolute differences between event times.
// When the pool exceeds max_points the median is taken over a uniformly
// subsampled set of that size, drawn deterministically from (seed, stream).
KernelConfig median_bandwidth(const Dataset& data, std::size_t max_points = 2000,
                              std::uint64_t seed = 0,
                              std::uint64_t stream = streams::kBandwidth);

// Squared kernel mean discrepancy between the two empirical event-time
// embeddings (V-statistic, diagonal included).  Symmetric, nonnegative up to
// rounding, exactly zero for identical datasets, and bit-identical for any
// thread count.
double mmd_squared(const Dataset& expert, const Dataset& learner,
                   const KernelConfig& cfg, int threads = 1);

// Signed reward profile: expert kernel embedding (averaged over sequences)
// minus learner embedding.  With exclude set, the learner side averages the
// other M - 1 sequences, which keeps the reward independent of the sequence
// being scored.
class RewardEstimator {
 public:
  RewardEstimator(const Dataset& expert, const Dataset& learner,
                  KernelConfig cfg);

  double reward_at(double t,
                   std::optional<std::size_t> exclude = std::nullopt) const;

  std::vector<std::pair<double, double>> reward_profile(
      const std::vector<double>& grid) const;

  const KernelConfig& config() const { return cfg_; }

 private:
  std::vector<double> expert_times_;
  std::vector<std::vector<double>> learner_;
  std::size_t expert_sequences_ = 0;
  KernelConfig cfg_;
};

// One fused pass over all kernel sums a training iteration needs:
// leave-one-out rewards at every learner event plus the full-batch
// discrepancy.  mmd2 here is bit-identical to mmd_squared on the same pair.
struct BatchRewards {
  std::vector<std::vector<double>> rewards;
  double mmd2 = 0.0;
};

BatchRewards leave_one_out_batch(const Dataset& expert, const Dataset& learner,
                                 const KernelConfig& cfg, int threads = 1);

}  // namespace tpp
