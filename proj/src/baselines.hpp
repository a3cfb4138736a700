#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "events.hpp"
#include "policy.hpp"
#include "rng.hpp"

namespace tpp {

// lambda(t) = mu + alpha * sum_{t_i < t} e^{-(t - t_i)}; decay fixed at 1
struct HawkesFit {
  double mu = 0.0;
  double alpha = 0.0;
  double decay = 1.0;
  double loglik = 0.0;
  std::size_t iterations = 0;
};

struct GaussianComponent {
  double weight = 0.0;  // >= 0
  double center = 0.0;  // fixed on a uniform grid over [0, T)
  double width = 1.0;   // > 0
};

// history-free rate lambda(t) = sum_k w_k exp(-(t - c_k)^2 / (2 s_k^2))
struct GaussianMixtureIntensity {
  std::vector<GaussianComponent> components;

  double value(double t) const;
  // closed form via the error function
  double integral(double t0, double t1) const;
};

struct GaussianMixtureFit {
  GaussianMixtureIntensity intensity;
  double loglik = 0.0;
  std::size_t iterations = 0;
};

// lambda(t) = exp(mu t - alpha N(t-))
struct SelfCorrectingFit {
  double mu = 0.0;
  double alpha = 0.0;
  double loglik = 0.0;
  std::size_t iterations = 0;
};

// direct log-likelihood evaluations (event log-intensities minus the
// compensator), exposed for the fitters' tests
double hawkes_loglik(const Dataset& data, double mu, double alpha);
double self_correcting_loglik(const Dataset& data, double mu, double alpha);
double mixture_loglik(const Dataset& data, const GaussianMixtureIntensity& mix);

// Projected gradient ascent with backtracking line search; stops when the
// projected gradient of the per-event mean log-likelihood has norm <= tol,
// a scale-free stationarity measure.
HawkesFit fit_hawkes(const Dataset& data,
                     std::optional<std::pair<double, double>> init = std::nullopt,
                     double tol = 1e-6, std::size_t max_iterations = 20000);

// Centers stay on the K-point uniform grid; weights and widths are
// optimized from 3 fixed starts and the best final likelihood wins.  A start
// that exhausts max_iterations is dropped; all three failing raises
// NonConvergence.
GaussianMixtureFit fit_inhomogeneous_poisson(const Dataset& data, int components,
                                             double tol = 1e-6,
                                             std::size_t max_iterations = 20000);

SelfCorrectingFit fit_self_correcting(const Dataset& data, double tol = 1e-6,
                                      std::size_t max_iterations = 20000);

struct PolicyMleConfig {
  int hidden_dim = 64;
  GapDist dist = GapDist::Exponential;
  double init_scale = 0.1;
  std::size_t iterations = 2000;
  double learning_rate = 1e-2;
  std::size_t batch = 32;  // sequences per iteration; 0 = full data
  bool freeze_recurrent = false;  // train only u and c
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct PolicyMleResult {
  PolicyParams params;
  double loglik = 0.0;  // censored log-likelihood over the full dataset
};

// Adam ascent on the censored log-likelihood (the survival term of the
// last, unfinished interval is included, unlike the RL objective).
// objective_trace, when given, receives the full-data censored
// log-likelihood after every iteration.
PolicyMleResult fit_policy_mle(const Dataset& data, const PolicyMleConfig& cfg,
                               std::vector<double>* objective_trace = nullptr);

// resimulation draws for the fitted baselines
EventSequence simulate_mixture(const GaussianMixtureIntensity& mix,
                               double window_end, RngStream& rng);
Dataset simulate_mixture_dataset(const GaussianMixtureIntensity& mix,
                                 double window_end, std::size_t n,
                                 std::uint64_t seed, int threads = 1);

// rollout-based sampling from a fitted policy; sequence i uses stream i
Dataset policy_rollout_dataset(const PolicyParams& params, double window_end,
                               std::size_t n, std::uint64_t seed,
                               int threads = 1);

}  // namespace tpp
