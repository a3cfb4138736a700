#include "train.hpp"

#include <chrono>
#include <cmath>

#include "errors.hpp"
#include "threading.hpp"

namespace tpp {
namespace {

void require_config(const TrainConfig& cfg) {
  if (cfg.expert_batch < 1)
    fail(ErrorCode::InvalidArgument, "expert batch must be at least 1");
  if (cfg.rollout_batch < 2)
    fail(ErrorCode::InvalidArgument, "rollout batch must be at least 2");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    fail(ErrorCode::InvalidArgument, "learning rate must be nonnegative");
  if (cfg.kernel_source == KernelSource::Fixed && !(cfg.kernel_sigma > 0.0))
    fail(ErrorCode::InvalidArgument, "fixed kernel bandwidth must be positive");
}

Dataset gather_batch(const Dataset& expert, std::size_t count, RngStream& rng) {
  Dataset batch;
  batch.window_end = expert.window_end;
  batch.sequences.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    batch.sequences.push_back(
        expert.sequences[rng.next_below(expert.sequences.size())]);
  return batch;
}

Dataset rollouts_to_dataset(const std::vector<RolloutSample>& rollouts,
                            double window_end) {
  Dataset d;
  d.window_end = window_end;
  d.sequences.reserve(rollouts.size());
  for (const auto& r : rollouts) d.sequences.push_back(r.sequence);
  return d;
}

KernelConfig pick_bandwidth(const Dataset& expert_batch, const TrainConfig& cfg,
                            std::uint64_t iteration) {
  if (cfg.kernel_source == KernelSource::Fixed)
    return KernelConfig{cfg.kernel_sigma};
  return median_bandwidth(expert_batch, 2000, cfg.seed,
                          streams::train(iteration, 1));
}

void adam_update(TrainState& state, const PolicyGrad& grad,
                 const TrainConfig& cfg) {
  // ascent step; t counts completed updates
  double t = static_cast<double>(state.iteration + 1);
  double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  double bias1 = 1.0 - std::pow(b1, t);
  double bias2 = 1.0 - std::pow(b2, t);
  auto update = [&](auto& m, auto& v, const auto& g, auto& x) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    x += cfg.learning_rate *
         (m / bias1)
             .cwiseQuotient(((v / bias2).cwiseSqrt().array() + cfg.adam_epsilon)
                                .matrix());
  };
  update(state.adam_m.V, state.adam_v.V, grad.V, state.params.V);
  update(state.adam_m.W, state.adam_v.W, grad.W, state.params.W);
  update(state.adam_m.u, state.adam_v.u, grad.u, state.params.u);
  double mc = state.adam_m.c = b1 * state.adam_m.c + (1.0 - b1) * grad.c;
  double vc = state.adam_v.c = b2 * state.adam_v.c + (1.0 - b2) * grad.c * grad.c;
  state.params.c += cfg.learning_rate * (mc / bias1) /
                    (std::sqrt(vc / bias2) + cfg.adam_epsilon);
}

void sgd_update(TrainState& state, const PolicyGrad& grad,
                const TrainConfig& cfg) {
  state.params.V += cfg.learning_rate * grad.V;
  state.params.W += cfg.learning_rate * grad.W;
  state.params.u += cfg.learning_rate * grad.u;
  state.params.c += cfg.learning_rate * grad.c;
}

}  // namespace

TrainState init_train_state(const TrainConfig& cfg) {
  require_config(cfg);
  TrainState state;
  state.params = init_policy(cfg.hidden_dim, cfg.dist, cfg.init_scale, cfg.seed);
  state.adam_m = PolicyGrad::zero(cfg.hidden_dim);
  state.adam_v = PolicyGrad::zero(cfg.hidden_dim);
  state.iteration = 0;
  return state;
}

std::vector<std::vector<double>> return_weights(
    const std::vector<std::vector<double>>& rewards, VarianceReduction vr) {
  std::size_t m = rewards.size();
  std::vector<std::vector<double>> weights(m);

  // reward-to-go: suffix sums per rollout
  std::size_t longest = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& r = rewards[j];
    weights[j].resize(r.size());
    double suffix = 0.0;
    for (std::size_t i = r.size(); i-- > 0;) {
      suffix += r[i];
      weights[j][i] = suffix;
    }
    longest = std::max(longest, r.size());
  }

  if (vr == VarianceReduction::FullReturn) {
    for (auto& w : weights) {
      double total = w.empty() ? 0.0 : w.front();
      std::fill(w.begin(), w.end(), total);
    }
    return weights;
  }
  if (vr == VarianceReduction::RewardToGo) return weights;

  // baseline: mean reward-to-go at each step index over the rollouts that
  // reach it; shorter rollouts contribute nothing at later steps
  for (std::size_t i = 0; i < longest; ++i) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& w : weights)
      if (i < w.size()) {
        sum += w[i];
        ++count;
      }
    double baseline = sum / static_cast<double>(count);
    for (auto& w : weights)
      if (i < w.size()) w[i] -= baseline;
  }
  return weights;
}

PolicyGrad policy_gradient(const PolicyParams& params,
                           const std::vector<RolloutSample>& rollouts,
                           const std::vector<std::vector<double>>& rewards,
                           VarianceReduction vr, int threads) {
  if (rollouts.size() < 2)
    fail(ErrorCode::InvalidArgument, "policy gradient needs at least 2 rollouts");
  if (rewards.size() != rollouts.size())
    fail(ErrorCode::InvalidArgument, "one reward vector per rollout required");

  std::vector<std::vector<double>> weights = return_weights(rewards, vr);
  std::vector<PolicyGrad> per(rollouts.size());
  parallel_for(rollouts.size(), threads, [&](std::size_t j) {
    per[j] = backprop(params, rollouts[j].gaps.gaps, weights[j]);
  });

  PolicyGrad total = PolicyGrad::zero(params.hidden_dim());
  for (const auto& g : per) total.add_scaled(g, 1.0);
  total.scale(1.0 / static_cast<double>(rollouts.size()));
  return total;
}

PolicyGrad policy_gradient(const Dataset& expert_batch,
                           const std::vector<RolloutSample>& rollouts,
                           const PolicyParams& params, const TrainConfig& cfg) {
  KernelConfig kcfg = cfg.kernel_source == KernelSource::Fixed
                          ? KernelConfig{cfg.kernel_sigma}
                          : median_bandwidth(expert_batch);
  BatchRewards batch = leave_one_out_batch(
      expert_batch, rollouts_to_dataset(rollouts, expert_batch.window_end),
      kcfg, cfg.threads);
  if (cfg.normalize_reward && batch.mmd2 > 0.0) {
    double scale = 1.0 / std::sqrt(batch.mmd2);
    for (auto& r : batch.rewards)
      for (double& x : r) x *= scale;
  }
  return policy_gradient(params, rollouts, batch.rewards,
                         cfg.variance_reduction, cfg.threads);
}

TrainTraceRow train_step(TrainState& state, const Dataset& expert,
                         const TrainConfig& cfg) {
  require_config(cfg);
  require_valid(expert);
  auto started = std::chrono::steady_clock::now();
  std::uint64_t k = state.iteration;

  RngStream pick(cfg.seed, streams::train(k, 0));
  Dataset expert_batch = gather_batch(expert, cfg.expert_batch, pick);

  std::vector<RolloutSample> rollouts(cfg.rollout_batch);
  parallel_for(cfg.rollout_batch, cfg.threads, [&](std::size_t m) {
    RngStream rng(cfg.seed, streams::train(k, 2 + m));
    rollouts[m] = rollout(state.params, expert.window_end, rng);
  });

  KernelConfig kcfg = pick_bandwidth(expert_batch, cfg, k);
  BatchRewards batch = leave_one_out_batch(
      expert_batch, rollouts_to_dataset(rollouts, expert.window_end), kcfg,
      cfg.threads);
  if (cfg.normalize_reward && batch.mmd2 > 0.0) {
    double scale = 1.0 / std::sqrt(batch.mmd2);
    for (auto& r : batch.rewards)
      for (double& x : r) x *= scale;
  }

  double mean_return = 0.0;
  for (const auto& r : batch.rewards)
    for (double x : r) mean_return += x;
  mean_return /= static_cast<double>(cfg.rollout_batch);

  PolicyGrad grad = policy_gradient(state.params, rollouts, batch.rewards,
                                    cfg.variance_reduction, cfg.threads);

  if (cfg.optimizer == Optimizer::Adam)
    adam_update(state, grad, cfg);
  else
    sgd_update(state, grad, cfg);
  state.iteration += 1;

  if (!state.params.V.allFinite() || !state.params.W.allFinite() ||
      !state.params.u.allFinite() || !std::isfinite(state.params.c))
    fail(ErrorCode::NonFiniteUpdate,
         "non-finite weight after iteration " + std::to_string(state.iteration));

  TrainTraceRow row;
  row.iteration = state.iteration - 1;
  row.mmd2 = batch.mmd2;
  row.mean_return = mean_return;
  row.grad_norm = std::sqrt(grad.squared_norm());
  row.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();
  return row;
}

TrainTrace train_resume(TrainState& state, const Dataset& expert,
                        const TrainConfig& cfg,
                        const std::function<void(const TrainState&)>& on_checkpoint) {
  require_config(cfg);
  TrainTrace trace;
  while (state.iteration < cfg.iterations) {
    trace.push_back(train_step(state, expert, cfg));
    if (cfg.checkpoint_interval != 0 && on_checkpoint &&
        state.iteration % cfg.checkpoint_interval == 0 &&
        state.iteration < cfg.iterations)
      on_checkpoint(state);
  }
  return trace;
}

std::pair<PolicyParams, TrainTrace> train(
    const Dataset& expert, const TrainConfig& cfg,
    const std::function<void(const TrainState&)>& on_checkpoint) {
  TrainState state = init_train_state(cfg);
  TrainTrace trace = train_resume(state, expert, cfg, on_checkpoint);
  return {state.params, std::move(trace)};
}

}  // namespace tpp
