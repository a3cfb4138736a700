#include "kernel.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "threading.hpp"

namespace tpp {
namespace {

// Scalar on purpose: small-case results are pinned exactly in the tests, and
// a vectorized exp would round differently.
double kernel_sum(const std::vector<double>& pts, double t, double inv2s2) {
  double s = 0.0;
  for (double p : pts) {
    double d = t - p;
    s += std::exp(-d * d * inv2s2);
  }
  return s;
}

void require_sigma(const KernelConfig& cfg) {
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma))
    fail(ErrorCode::InvalidArgument, "kernel bandwidth must be positive");
}

void require_pair(const Dataset& expert, const Dataset& learner) {
  require_valid(expert);
  require_valid(learner);
  if (expert.window_end != learner.window_end)
    fail(ErrorCode::InvalidArgument, "datasets must share one window");
}

}  // namespace

double kernel_value(double t, double u, const KernelConfig& cfg) {
  require_sigma(cfg);
  double d = t - u;
  return std::exp(-d * d / (2.0 * cfg.sigma * cfg.sigma));
}

KernelConfig median_bandwidth(const Dataset& data, std::size_t max_points,
                              std::uint64_t seed, std::uint64_t stream) {
  if (max_points < 2)
    fail(ErrorCode::InvalidArgument, "max_points must be at least 2");
  std::vector<double> pts = pooled_times(data);
  if (pts.size() < 2)
    fail(ErrorCode::DegenerateData,
         "bandwidth selection needs at least two event times");

  if (pts.size() > max_points) {
    // partial Fisher-Yates: the first max_points entries become a uniform
    // subsample without replacement
    RngStream rng(seed, stream);
    for (std::size_t i = 0; i < max_points; ++i) {
      std::size_t j =
          i + static_cast<std::size_t>(rng.next_below(pts.size() - i));
      std::swap(pts[i], pts[j]);
    }
    pts.resize(max_points);
  }

  std::vector<double> diffs;
  diffs.reserve(pts.size() * (pts.size() - 1) / 2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double d = std::abs(pts[i] - pts[j]);
      if (d > 0.0) diffs.push_back(d);
    }
  if (diffs.empty())
    fail(ErrorCode::DegenerateData,
         "all event times coincide; no usable pairwise distances");

  std::size_t n = diffs.size();
  std::size_t mid = n / 2;
  std::nth_element(diffs.begin(), diffs.begin() + mid, diffs.end());
  double med = diffs[mid];
  if (n % 2 == 0) {
    // even count: average the two central order statistics
    double lower = *std::max_element(diffs.begin(), diffs.begin() + mid);
    med = 0.5 * (lower + med);
  }
  return KernelConfig{med};
}

double mmd_squared(const Dataset& expert, const Dataset& learner,
                   const KernelConfig& cfg, int threads) {
  require_sigma(cfg);
  require_pair(expert, learner);

  std::vector<double> e = pooled_times(expert);
  std::vector<double> l = pooled_times(learner);
  double inv2s2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);

  // per-target slots, then a fixed-shape reduction: bit-stable under any
  // thread count
  std::vector<double> see(e.size()), sel(e.size()), sll(l.size());
  parallel_for(e.size(), threads, [&](std::size_t i) {
    see[i] = kernel_sum(e, e[i], inv2s2);
    sel[i] = kernel_sum(l, e[i], inv2s2);
  });
  parallel_for(l.size(), threads, [&](std::size_t i) {
    sll[i] = kernel_sum(l, l[i], inv2s2);
  });

  double ne = static_cast<double>(expert.size());
  double nl = static_cast<double>(learner.size());
  double tee = pairwise_sum(see) / (ne * ne);
  double tll = pairwise_sum(sll) / (nl * nl);
  double tel = pairwise_sum(sel) / (ne * nl);
  return tee + tll - 2.0 * tel;
}

RewardEstimator::RewardEstimator(const Dataset& expert, const Dataset& learner,
                                 KernelConfig cfg)
    : cfg_(cfg) {
  require_sigma(cfg_);
  require_pair(expert, learner);
  if (learner.size() < 2)
    fail(ErrorCode::InvalidArgument,
         "leave-one-out rewards need at least two learner sequences");
  expert_times_ = pooled_times(expert);
  expert_sequences_ = expert.size();
  learner_.reserve(learner.size());
  for (const auto& s : learner.sequences) learner_.push_back(s.times);
}

double RewardEstimator::reward_at(double t,
                                  std::optional<std::size_t> exclude) const {
  if (exclude && *exclude >= learner_.size())
    fail(ErrorCode::InvalidArgument, "excluded index out of range");
  double inv2s2 = 1.0 / (2.0 * cfg_.sigma * cfg_.sigma);
  double pos = kernel_sum(expert_times_, t, inv2s2) /
               static_cast<double>(expert_sequences_);
  double neg = 0.0;
  std::size_t m = learner_.size();
  for (std::size_t j = 0; j < m; ++j) {
    if (exclude && *exclude == j) continue;
    neg += kernel_sum(learner_[j], t, inv2s2);
  }
  double denom = static_cast<double>(exclude ? m - 1 : m);
  return pos - neg / denom;
}

std::vector<std::pair<double, double>> RewardEstimator::reward_profile(
    const std::vector<double>& grid) const {
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back({t, reward_at(t)});
  return out;
}

BatchRewards leave_one_out_batch(const Dataset& expert, const Dataset& learner,
                                 const KernelConfig& cfg, int threads) {
  require_sigma(cfg);
  require_pair(expert, learner);
  if (learner.size() < 2)
    fail(ErrorCode::InvalidArgument,
         "leave-one-out rewards need at least two learner sequences");

  std::vector<double> e = pooled_times(expert);
  std::vector<double> l = pooled_times(learner);
  double inv2s2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);

  std::vector<double> see(e.size()), sel(e.size());
  parallel_for(e.size(), threads, [&](std::size_t i) {
    see[i] = kernel_sum(e, e[i], inv2s2);
    sel[i] = kernel_sum(l, e[i], inv2s2);
  });

  // at learner targets: expert mass and full learner mass
  std::vector<double> le(l.size()), ll(l.size());
  parallel_for(l.size(), threads, [&](std::size_t i) {
    le[i] = kernel_sum(e, l[i], inv2s2);
    ll[i] = kernel_sum(l, l[i], inv2s2);
  });

  std::size_t m = learner.size();
  double ne = static_cast<double>(expert.size());
  double nloo = static_cast<double>(m - 1);

  BatchRewards out;
  out.rewards.resize(m);
  std::size_t base = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& own = learner.sequences[j].times;
    out.rewards[j].resize(own.size());
    for (std::size_t i = 0; i < own.size(); ++i) {
      double other = ll[base + i] - kernel_sum(own, own[i], inv2s2);
      out.rewards[j][i] = le[base + i] / ne - other / nloo;
    }
    base += own.size();
  }

  double nl = static_cast<double>(m);
  double tee = pairwise_sum(see) / (ne * ne);
  double tll = pairwise_sum(ll) / (nl * nl);
  double tel = pairwise_sum(sel) / (ne * nl);
  out.mmd2 = tee + tll - 2.0 * tel;
  return out;
}

}  // namespace tpp
