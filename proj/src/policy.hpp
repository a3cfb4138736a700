#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "events.hpp"
#include "rng.hpp"

namespace tpp {

enum class GapDist { Exponential, Rayleigh };

GapDist gap_dist_from_name(const std::string& name);
const char* gap_dist_name(GapDist dist);

// hazard floor added after the softplus head, keeping log-densities finite
inline constexpr double kThetaFloor = 1e-6;

// rollout event cap; hitting it signals a degenerate policy
inline constexpr std::size_t kMaxRolloutEvents = 10000;

// Recurrent gap policy.  State update h_i = tanh(V a_i + W h_{i-1}) from
// h_0 = 0; the next gap is drawn from the chosen family with parameter
// Theta(h) = softplus(u . h + c) + floor.
struct PolicyParams {
  GapDist dist = GapDist::Exponential;
  Eigen::VectorXd V;
  Eigen::MatrixXd W;
  Eigen::VectorXd u;
  double c = 0.0;

  int hidden_dim() const { return static_cast<int>(V.size()); }
  // d^2 + 2d + 1, enumerating W, V, u, c
  std::size_t parameter_count() const;
};

// weights drawn i.i.d. uniform(-scale, scale) in the order V, W (row-major),
// u, c; reproducible from (seed, policy-init stream)
PolicyParams init_policy(int hidden_dim, GapDist dist, double scale,
                         std::uint64_t seed);

double softplus(double z);
double sigmoid(double z);

// gap parameter at hidden state h
double theta_of(const PolicyParams& p, const Eigen::VectorXd& h);

// inverse-CDF draw: Exponential a = -ln(U)/theta, Rayleigh a = sqrt(-2 ln(U)/theta)
double gap_from_uniform(double theta, GapDist dist, double u);
double sample_gap(double theta, GapDist dist, RngStream& rng);

// densities and tail terms of the two families, as functions of theta
double log_density(GapDist dist, double theta, double a);
double dlog_density_dtheta(GapDist dist, double theta, double a);
double log_survival(GapDist dist, double theta, double a);
double dlog_survival_dtheta(GapDist dist, double theta, double a);

struct RolloutSample {
  EventSequence sequence;
  InterEventTimes gaps;
  std::vector<Eigen::VectorXd> hidden;  // h_0 .. h_N
  std::vector<double> thetas;           // Theta(h_0) .. Theta(h_N)
};

// one sampled trajectory on [0, T); the event crossing T is censored away
RolloutSample rollout(const PolicyParams& p, double window_end, RngStream& rng);

// deterministic state recursion over an observed gap sequence
struct ForwardPass {
  std::vector<Eigen::VectorXd> hidden;  // h_0 .. h_N
  std::vector<double> pre;              // u . h_i + c
  std::vector<double> thetas;           // Theta(h_i)
};

ForwardPass forward(const PolicyParams& p, const std::vector<double>& gaps);

// sum_i log pi(a_i | Theta(h_{i-1})); no censoring term
double log_likelihood(const PolicyParams& p, const EventSequence& seq);

// adds log S(T - t_N | Theta(h_N)), the proper-MLE censoring term
double log_likelihood_censored(const PolicyParams& p, const EventSequence& seq);

struct PolicyGrad {
  Eigen::VectorXd V;
  Eigen::MatrixXd W;
  Eigen::VectorXd u;
  double c = 0.0;

  static PolicyGrad zero(int d);
  void add_scaled(const PolicyGrad& g, double a);  // this += a * g
  void scale(double a);
  double squared_norm() const;
  bool all_finite() const;
};

// Gradient of sum_i weights[i] * log pi(a_i | Theta(h_{i-1}))
//   (+ survival_weight * log S(tail | Theta(h_N)) when survival_weight != 0)
// by full backpropagation through time.  The gaps are treated as observed
// constants: no derivative flows through the sampling step.
PolicyGrad backprop(const PolicyParams& p, const std::vector<double>& gaps,
                    const std::vector<double>& weights, double tail = 0.0,
                    double survival_weight = 0.0);

// gradient of log_likelihood at the rollout's own gaps
PolicyGrad grad_log_likelihood(const PolicyParams& p, const RolloutSample& s);

// gradient of log_likelihood_censored on observed data
PolicyGrad grad_log_likelihood_censored(const PolicyParams& p,
                                        const EventSequence& seq);

// hazard of the next-gap distribution at time t, given the events before it:
// Exponential -> Theta, Rayleigh -> Theta * (t - t_last)
double implied_intensity(const PolicyParams& p, const EventSequence& seq,
                         double t);

}  // namespace tpp
