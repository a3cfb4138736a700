#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "events.hpp"
#include "kernel.hpp"
#include "policy.hpp"

namespace tpp {

enum class Optimizer { Sgd, Adam };
enum class VarianceReduction { FullReturn, RewardToGo, RewardToGoBaseline };
enum class KernelSource { MedianTrick, Fixed };

struct TrainConfig {
  int hidden_dim = 64;
  GapDist dist = GapDist::Exponential;
  double init_scale = 0.1;
  std::size_t expert_batch = 32;   // L, sampled with replacement
  std::size_t rollout_batch = 32;  // M
  std::size_t iterations = 2000;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  VarianceReduction variance_reduction = VarianceReduction::RewardToGoBaseline;
  KernelSource kernel_source = KernelSource::MedianTrick;
  double kernel_sigma = 1.0;        // used when kernel_source == Fixed
  bool normalize_reward = false;    // scale rewards by 1/sqrt(mmd^2)
  std::size_t checkpoint_interval = 0;  // 0 = only the final checkpoint
  std::uint64_t seed = 0;
  int threads = 1;
};

struct TrainTraceRow {
  std::size_t iteration = 0;
  double mmd2 = 0.0;
  double mean_return = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
};
using TrainTrace = std::vector<TrainTraceRow>;

// Everything needed to continue a run bit-identically: weights, first and
// second Adam moments, and the number of completed iterations.
struct TrainState {
  PolicyParams params;
  PolicyGrad adam_m;
  PolicyGrad adam_v;
  std::size_t iteration = 0;
};

TrainState init_train_state(const TrainConfig& cfg);

// Per-rollout step weights G_i from the leave-one-out rewards, under the
// configured variance-reduction scheme.
std::vector<std::vector<double>> return_weights(
    const std::vector<std::vector<double>>& rewards, VarianceReduction vr);

// Score-function estimate: (1/M) sum_m sum_i grad log pi(a_i | .) * G_i.
// rewards[m][i] is the reward at rollout m's i-th event.
PolicyGrad policy_gradient(const PolicyParams& params,
                           const std::vector<RolloutSample>& rollouts,
                           const std::vector<std::vector<double>>& rewards,
                           VarianceReduction vr, int threads = 1);

// Spec'd entry point: computes the bandwidth and leave-one-out rewards
// from the given batches, then the estimate above.
PolicyGrad policy_gradient(const Dataset& expert_batch,
                           const std::vector<RolloutSample>& rollouts,
                           const PolicyParams& params, const TrainConfig& cfg);

// One mini-batch iteration: draw L expert sequences with replacement and M
// rollouts, estimate rewards, take an ascent step on the expected return
// (descending the discrepancy).  Streams are derived from (seed, iteration)
// so a resumed run continues exactly.
TrainTraceRow train_step(TrainState& state, const Dataset& expert,
                         const TrainConfig& cfg);

// Full loop; on_checkpoint fires every checkpoint_interval iterations (when
// nonzero) with the state after the update.
std::pair<PolicyParams, TrainTrace> train(
    const Dataset& expert, const TrainConfig& cfg,
    const std::function<void(const TrainState&)>& on_checkpoint = {});

// continue a run restored from a checkpoint for cfg.iterations total
TrainTrace train_resume(TrainState& state, const Dataset& expert,
                        const TrainConfig& cfg,
                        const std::function<void(const TrainState&)>& on_checkpoint = {});

}  // namespace tpp
