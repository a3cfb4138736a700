#include "policy.hpp"

#include <cmath>

#include "errors.hpp"

namespace tpp {

GapDist gap_dist_from_name(const std::string& name) {
  if (name == "exponential") return GapDist::Exponential;
  if (name == "rayleigh") return GapDist::Rayleigh;
  fail(ErrorCode::InvalidArgument, "unknown gap distribution: " + name);
}

const char* gap_dist_name(GapDist dist) {
  return dist == GapDist::Exponential ? "exponential" : "rayleigh";
}

std::size_t PolicyParams::parameter_count() const {
  return static_cast<std::size_t>(V.size()) +
         static_cast<std::size_t>(W.size()) +
         static_cast<std::size_t>(u.size()) + 1;
}

PolicyParams init_policy(int hidden_dim, GapDist dist, double scale,
                         std::uint64_t seed) {
  if (hidden_dim < 1)
    fail(ErrorCode::InvalidArgument, "hidden_dim must be at least 1");
  if (!(scale >= 0.0) || !std::isfinite(scale))
    fail(ErrorCode::InvalidArgument, "init scale must be nonnegative");
  RngStream rng(seed, streams::kPolicyInit);
  auto draw = [&] { return scale * (2.0 * rng.uniform() - 1.0); };
  PolicyParams p;
  p.dist = dist;
  p.V.resize(hidden_dim);
  p.W.resize(hidden_dim, hidden_dim);
  p.u.resize(hidden_dim);
  for (int i = 0; i < hidden_dim; ++i) p.V[i] = draw();
  for (int r = 0; r < hidden_dim; ++r)
    for (int col = 0; col < hidden_dim; ++col) p.W(r, col) = draw();
  for (int i = 0; i < hidden_dim; ++i) p.u[i] = draw();
  p.c = draw();
  return p;
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double theta_of(const PolicyParams& p, const Eigen::VectorXd& h) {
  return softplus(p.u.dot(h) + p.c) + kThetaFloor;
}

double gap_from_uniform(double theta, GapDist dist, double u) {
  if (!(theta > 0.0))
    fail(ErrorCode::InvalidArgument, "theta must be positive");
  if (!(u > 0.0 && u < 1.0))
    fail(ErrorCode::InvalidArgument, "u must lie in (0, 1)");
  double e = -std::log(u);
  return dist == GapDist::Exponential ? e / theta
                                      : std::sqrt(2.0 * e / theta);
}

double sample_gap(double theta, GapDist dist, RngStream& rng) {
  return gap_from_uniform(theta, dist, rng.uniform_open());
}

double log_density(GapDist dist, double theta, double a) {
  if (dist == GapDist::Exponential) return std::log(theta) - theta * a;
  return std::log(theta) + std::log(a) - 0.5 * theta * a * a;
}

double dlog_density_dtheta(GapDist dist, double theta, double a) {
  if (dist == GapDist::Exponential) return 1.0 / theta - a;
  return 1.0 / theta - 0.5 * a * a;
}

double log_survival(GapDist dist, double theta, double a) {
  if (dist == GapDist::Exponential) return -theta * a;
  return -0.5 * theta * a * a;
}

double dlog_survival_dtheta(GapDist dist, double theta, double a) {
  if (dist == GapDist::Exponential) return -a;
  return -0.5 * a * a;
}

RolloutSample rollout(const PolicyParams& p, double window_end, RngStream& rng) {
  if (!(window_end > 0.0))
    fail(ErrorCode::InvalidArgument, "window_end must be positive");
  RolloutSample s;
  s.sequence.window_end = window_end;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(p.hidden_dim());
  s.hidden.push_back(h);
  s.thetas.push_back(theta_of(p, h));
  double t = 0.0;
  for (;;) {
    double a = sample_gap(s.thetas.back(), p.dist, rng);
    if (!(t + a < window_end)) break;  // censor the crossing event
    if (s.sequence.times.size() >= kMaxRolloutEvents)
      fail(ErrorCode::RolloutOverflow,
           "rollout exceeded " + std::to_string(kMaxRolloutEvents) + " events");
    t += a;
    s.sequence.times.push_back(t);
    s.gaps.gaps.push_back(a);
    h = (p.V * a + p.W * h).array().tanh().matrix();
    s.hidden.push_back(h);
    s.thetas.push_back(theta_of(p, h));
  }
  return s;
}

ForwardPass forward(const PolicyParams& p, const std::vector<double>& gaps) {
  ForwardPass f;
  f.hidden.reserve(gaps.size() + 1);
  f.pre.reserve(gaps.size() + 1);
  f.thetas.reserve(gaps.size() + 1);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(p.hidden_dim());
  f.hidden.push_back(h);
  f.pre.push_back(p.u.dot(h) + p.c);
  f.thetas.push_back(softplus(f.pre.back()) + kThetaFloor);
  for (double a : gaps) {
    h = (p.V * a + p.W * h).array().tanh().matrix();
    f.hidden.push_back(h);
    f.pre.push_back(p.u.dot(h) + p.c);
    f.thetas.push_back(softplus(f.pre.back()) + kThetaFloor);
  }
  return f;
}

double log_likelihood(const PolicyParams& p, const EventSequence& seq) {
  InterEventTimes gaps = to_gaps(seq);
  ForwardPass f = forward(p, gaps.gaps);
  double ll = 0.0;
  for (std::size_t i = 0; i < gaps.gaps.size(); ++i)
    ll += log_density(p.dist, f.thetas[i], gaps.gaps[i]);
  return ll;
}

double log_likelihood_censored(const PolicyParams& p, const EventSequence& seq) {
  InterEventTimes gaps = to_gaps(seq);
  ForwardPass f = forward(p, gaps.gaps);
  double ll = 0.0;
  for (std::size_t i = 0; i < gaps.gaps.size(); ++i)
    ll += log_density(p.dist, f.thetas[i], gaps.gaps[i]);
  double last = seq.times.empty() ? 0.0 : seq.times.back();
  ll += log_survival(p.dist, f.thetas.back(), seq.window_end - last);
  return ll;
}

PolicyGrad PolicyGrad::zero(int d) {
  PolicyGrad g;
  g.V = Eigen::VectorXd::Zero(d);
  g.W = Eigen::MatrixXd::Zero(d, d);
  g.u = Eigen::VectorXd::Zero(d);
  g.c = 0.0;
  return g;
}

void PolicyGrad::add_scaled(const PolicyGrad& g, double a) {
  V += a * g.V;
  W += a * g.W;
  u += a * g.u;
  c += a * g.c;
}

void PolicyGrad::scale(double a) {
  V *= a;
  W *= a;
  u *= a;
  c *= a;
}

double PolicyGrad::squared_norm() const {
  return V.squaredNorm() + W.squaredNorm() + u.squaredNorm() + c * c;
}

bool PolicyGrad::all_finite() const {
  return V.allFinite() && W.allFinite() && u.allFinite() && std::isfinite(c);
}

PolicyGrad backprop(const PolicyParams& p, const std::vector<double>& gaps,
                    const std::vector<double>& weights, double tail,
                    double survival_weight) {
  if (weights.size() != gaps.size())
    fail(ErrorCode::InvalidArgument, "one weight per gap required");
  int d = p.hidden_dim();
  ForwardPass f = forward(p, gaps);
  std::size_t n = gaps.size();

  PolicyGrad g = PolicyGrad::zero(d);
  Eigen::VectorXd dh = Eigen::VectorXd::Zero(d);
  for (std::size_t j = n + 1; j-- > 0;) {
    // Theta(h_j) parameterizes gap j (0-based) and, at j = n, the censored tail
    double dtheta = 0.0;
    if (j < n) dtheta += weights[j] * dlog_density_dtheta(p.dist, f.thetas[j], gaps[j]);
    if (j == n && survival_weight != 0.0)
      dtheta += survival_weight * dlog_survival_dtheta(p.dist, f.thetas[j], tail);
    double dz = dtheta * sigmoid(f.pre[j]);
    g.u += dz * f.hidden[j];
    g.c += dz;
    dh += dz * p.u;
    if (j == 0) break;
    // h_j = tanh(V a_j + W h_{j-1})
    Eigen::VectorXd dg =
        dh.cwiseProduct((1.0 - f.hidden[j].array().square()).matrix());
    g.V += dg * gaps[j - 1];
    g.W += dg * f.hidden[j - 1].transpose();
    dh = p.W.transpose() * dg;
  }
  return g;
}

PolicyGrad grad_log_likelihood(const PolicyParams& p, const RolloutSample& s) {
  std::vector<double> ones(s.gaps.gaps.size(), 1.0);
  return backprop(p, s.gaps.gaps, ones);
}

PolicyGrad grad_log_likelihood_censored(const PolicyParams& p,
                                        const EventSequence& seq) {
  InterEventTimes gaps = to_gaps(seq);
  std::vector<double> ones(gaps.gaps.size(), 1.0);
  double last = seq.times.empty() ? 0.0 : seq.times.back();
  return backprop(p, gaps.gaps, ones, seq.window_end - last, 1.0);
}

double implied_intensity(const PolicyParams& p, const EventSequence& seq,
                         double t) {
  require_valid(seq);
  double last = seq.times.empty() ? 0.0 : seq.times.back();
  if (!(t >= last) || !(t < seq.window_end))
    fail(ErrorCode::InvalidArgument,
         "t must lie between the last event and the window end");
  InterEventTimes gaps = to_gaps(seq);
  ForwardPass f = forward(p, gaps.gaps);
  double theta = f.thetas.back();
  return p.dist == GapDist::Exponential ? theta : theta * (t - last);
}

}  // namespace tpp
