#include "baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "errors.hpp"
#include "simulate.hpp"
#include "threading.hpp"

namespace tpp {
namespace {

constexpr double kRoot2 = 1.4142135623730951;
constexpr double kRootHalfPi = 1.2533141373155003;  // sqrt(pi / 2)

struct AscentResult {
  Eigen::VectorXd x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Projected gradient ascent with doubling/backtracking line search.
// Convergence: || project(x + g) - x || <= tol, the projected-gradient
// stationarity measure (equals ||g|| away from the constraints).
AscentResult ascend(const std::function<double(const Eigen::VectorXd&)>& value,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
                    const std::function<void(Eigen::VectorXd&)>& project,
                    Eigen::VectorXd x0, double tol, std::size_t max_iterations) {
  Eigen::VectorXd x = std::move(x0);
  project(x);
  double f = value(x);
  double step = 1.0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd g = gradient(x);
    Eigen::VectorXd probe = x + g;
    project(probe);
    if ((probe - x).norm() <= tol) return {x, f, it, true};

    step = std::min(step * 2.0, 1e8);
    bool moved = false;
    while (step >= 1e-18) {
      Eigen::VectorXd xt = x + step * g;
      project(xt);
      double ft = value(xt);
      if (std::isfinite(ft) && ft > f + 1e-4 * g.dot(xt - x)) {
        x = std::move(xt);
        f = ft;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    // no representable improving step remains
    if (!moved) return {x, f, it, true};
  }
  return {x, f, max_iterations, false};
}

// per-sequence cached statistics for the Hawkes likelihood
struct HawkesCache {
  std::vector<double> excitation;  // A_i = sum_{j<i} e^{-(t_i - t_j)}
  double tail_sum = 0.0;           // sum_i (1 - e^{-(T - t_i)})
  std::size_t events = 0;
  double window = 0.0;
};

std::vector<HawkesCache> hawkes_cache(const Dataset& data) {
  std::vector<HawkesCache> caches;
  caches.reserve(data.sequences.size());
  for (const auto& seq : data.sequences) {
    HawkesCache c;
    c.events = seq.size();
    c.window = seq.window_end;
    c.excitation.resize(seq.size());
    double a = 0.0;
    for (std::size_t i = 0; i < seq.times.size(); ++i) {
      if (i > 0) a = std::exp(-(seq.times[i] - seq.times[i - 1])) * (1.0 + a);
      c.excitation[i] = a;
      c.tail_sum += 1.0 - std::exp(-(seq.window_end - seq.times[i]));
    }
    caches.push_back(std::move(c));
  }
  return caches;
}

double hawkes_value(const std::vector<HawkesCache>& caches, double mu,
                    double alpha) {
  double ll = 0.0;
  for (const auto& c : caches) {
    for (double a : c.excitation) ll += std::log(mu + alpha * a);
    ll -= mu * c.window + alpha * c.tail_sum;
  }
  return ll;
}

Eigen::VectorXd hawkes_grad(const std::vector<HawkesCache>& caches, double mu,
                            double alpha) {
  double dmu = 0.0, dalpha = 0.0;
  for (const auto& c : caches) {
    for (double a : c.excitation) {
      double lam = mu + alpha * a;
      dmu += 1.0 / lam;
      dalpha += a / lam;
    }
    dmu -= c.window;
    dalpha -= c.tail_sum;
  }
  Eigen::VectorXd g(2);
  g << dmu, dalpha;
  return g;
}

// self-correcting likelihood: events contribute mu t_i - (i) alpha with i
// prior events; the compensator integrates e^{mu t} piecewise
double sc_value(const Dataset& data, double mu, double alpha) {
  double ll = 0.0;
  for (const auto& seq : data.sequences) {
    double comp = 0.0;
    double lo = 0.0;
    double elo = 1.0;  // e^{mu * 0}
    for (std::size_t i = 0; i < seq.times.size(); ++i) {
      double n = static_cast<double>(i);
      ll += mu * seq.times[i] - alpha * n;
      double ehi = std::exp(mu * seq.times[i]);
      comp += std::exp(-n * alpha) * (ehi - elo) / mu;
      lo = seq.times[i];
      elo = ehi;
    }
    double n = static_cast<double>(seq.times.size());
    comp += std::exp(-n * alpha) *
            (std::exp(mu * seq.window_end) - elo) / mu;
    ll -= comp;
    (void)lo;
  }
  return ll;
}

Eigen::VectorXd sc_grad(const Dataset& data, double mu, double alpha) {
  double dmu = 0.0, dalpha = 0.0;
  for (const auto& seq : data.sequences) {
    double lo = 0.0;
    double elo = 1.0;
    for (std::size_t i = 0; i <= seq.times.size(); ++i) {
      double n = static_cast<double>(i);
      double hi = i < seq.times.size() ? seq.times[i] : seq.window_end;
      double ehi = std::exp(mu * hi);
      double en = std::exp(-n * alpha);
      double seg = en * (ehi - elo) / mu;
      // d/dmu [e^{-na} (e^{mu hi} - e^{mu lo}) / mu]
      dmu -= en * (hi * ehi - lo * elo) / mu - seg / mu;
      dalpha += n * seg;
      if (i < seq.times.size()) {
        dmu += seq.times[i];
        dalpha -= n;
        lo = hi;
        elo = ehi;
      }
    }
  }
  Eigen::VectorXd g(2);
  g << dmu, dalpha;
  return g;
}

double mean_rate(const Dataset& data) {
  return static_cast<double>(data.total_events()) /
         (static_cast<double>(data.size()) * data.window_end);
}

}  // namespace

double GaussianMixtureIntensity::value(double t) const {
  double v = 0.0;
  for (const auto& c : components) {
    double z = (t - c.center) / c.width;
    v += c.weight * std::exp(-0.5 * z * z);
  }
  return v;
}

double GaussianMixtureIntensity::integral(double t0, double t1) const {
  double v = 0.0;
  for (const auto& c : components) {
    double a = (t0 - c.center) / (kRoot2 * c.width);
    double b = (t1 - c.center) / (kRoot2 * c.width);
    v += c.weight * c.width * kRootHalfPi * (std::erf(b) - std::erf(a));
  }
  return v;
}

double hawkes_loglik(const Dataset& data, double mu, double alpha) {
  require_valid(data);
  return hawkes_value(hawkes_cache(data), mu, alpha);
}

double self_correcting_loglik(const Dataset& data, double mu, double alpha) {
  require_valid(data);
  return sc_value(data, mu, alpha);
}

double mixture_loglik(const Dataset& data, const GaussianMixtureIntensity& mix) {
  require_valid(data);
  double ll = 0.0;
  for (const auto& seq : data.sequences) {
    for (double t : seq.times) ll += std::log(mix.value(t));
    ll -= mix.integral(0.0, seq.window_end);
  }
  return ll;
}

HawkesFit fit_hawkes(const Dataset& data,
                     std::optional<std::pair<double, double>> init, double tol,
                     std::size_t max_iterations) {
  require_valid(data);
  if (data.total_events() < 2)
    fail(ErrorCode::DegenerateData, "hawkes fit needs at least two events");
  auto caches = hawkes_cache(data);

  double rate = mean_rate(data);
  Eigen::VectorXd x0(2);
  if (init)
    x0 << init->first, init->second;
  else
    x0 << 0.5 * rate, 0.5;

  // optimize the per-event mean so tol is scale-free across dataset sizes
  double scale = static_cast<double>(data.total_events());
  auto project = [](Eigen::VectorXd& x) {
    x[0] = std::clamp(x[0], 1e-8, 1e8);
    x[1] = std::clamp(x[1], 1e-10, 1.0 - 1e-10);
  };
  AscentResult r = ascend(
      [&](const Eigen::VectorXd& x) {
        return hawkes_value(caches, x[0], x[1]) / scale;
      },
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return hawkes_grad(caches, x[0], x[1]) / scale;
      },
      project, x0, tol, max_iterations);
  if (!r.converged)
    fail(ErrorCode::NonConvergence, "hawkes fit did not converge");

  HawkesFit fit;
  fit.mu = r.x[0];
  fit.alpha = r.x[1];
  fit.loglik = r.value * scale;
  fit.iterations = r.iterations;
  return fit;
}

SelfCorrectingFit fit_self_correcting(const Dataset& data, double tol,
                                      std::size_t max_iterations) {
  require_valid(data);
  double rate = std::max(mean_rate(data), 1e-6);
  // exp(mu T) must stay representable during the search
  double mu_cap = 600.0 / data.window_end;

  Eigen::VectorXd x0(2);
  x0 << std::min(1.0, 0.5 * mu_cap), std::clamp(1.0 / rate, 1e-6, 50.0);
  double scale = std::max<double>(1.0, static_cast<double>(data.total_events()));
  auto project = [&](Eigen::VectorXd& x) {
    x[0] = std::clamp(x[0], 1e-8, mu_cap);
    x[1] = std::clamp(x[1], 1e-10, 50.0);
  };
  AscentResult r = ascend(
      [&](const Eigen::VectorXd& x) { return sc_value(data, x[0], x[1]) / scale; },
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return sc_grad(data, x[0], x[1]) / scale;
      },
      project, x0, tol, max_iterations);
  if (!r.converged)
    fail(ErrorCode::NonConvergence, "self-correcting fit did not converge");

  SelfCorrectingFit fit;
  fit.mu = r.x[0];
  fit.alpha = r.x[1];
  fit.loglik = r.value * scale;
  fit.iterations = r.iterations;
  return fit;
}

GaussianMixtureFit fit_inhomogeneous_poisson(const Dataset& data, int components,
                                             double tol,
                                             std::size_t max_iterations) {
  require_valid(data);
  if (components < 1)
    fail(ErrorCode::InvalidArgument, "need at least one mixture component");
  if (data.total_events() == 0)
    fail(ErrorCode::DegenerateData, "mixture fit needs events");

  double t_end = data.window_end;
  std::size_t k = static_cast<std::size_t>(components);
  double rate = mean_rate(data);
  std::vector<double> centers(k);
  for (std::size_t j = 0; j < k; ++j)
    centers[j] = (static_cast<double>(j) + 0.5) * t_end / static_cast<double>(k);

  auto unpack = [&](const Eigen::VectorXd& x) {
    GaussianMixtureIntensity mix;
    mix.components.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      mix.components[j].weight = x[static_cast<int>(j)];
      mix.components[j].center = centers[j];
      mix.components[j].width = x[static_cast<int>(k + j)];
    }
    return mix;
  };

  double scale = static_cast<double>(data.total_events());
  auto value = [&](const Eigen::VectorXd& x) {
    return mixture_loglik(data, unpack(x)) / scale;
  };
  auto gradient = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    GaussianMixtureIntensity mix = unpack(x);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * static_cast<int>(k));
    double n_seq = static_cast<double>(data.size());
    for (const auto& seq : data.sequences)
      for (double t : seq.times) {
        double lam = mix.value(t);
        for (std::size_t j = 0; j < k; ++j) {
          const auto& c = mix.components[j];
          double z = (t - c.center) / c.width;
          double bump = std::exp(-0.5 * z * z);
          g[static_cast<int>(j)] += bump / lam;
          g[static_cast<int>(k + j)] += c.weight * bump * z * z / (c.width * lam);
        }
      }
    for (std::size_t j = 0; j < k; ++j) {
      const auto& c = mix.components[j];
      double a = (0.0 - c.center) / (kRoot2 * c.width);
      double b = (t_end - c.center) / (kRoot2 * c.width);
      double unit_integral = c.width * kRootHalfPi * (std::erf(b) - std::erf(a));
      g[static_cast<int>(j)] -= n_seq * unit_integral;
      // d/ds of the per-weight integral: I/s - sqrt(2)(b e^{-b^2} - a e^{-a^2})
      double dint = unit_integral / c.width -
                    kRoot2 * (b * std::exp(-b * b) - a * std::exp(-a * a));
      g[static_cast<int>(k + j)] -= n_seq * c.weight * dint;
    }
    return g / scale;
  };
  auto project = [&](Eigen::VectorXd& x) {
    for (std::size_t j = 0; j < k; ++j) {
      x[static_cast<int>(j)] = std::clamp(x[static_cast<int>(j)], 0.0, 1e8);
      x[static_cast<int>(k + j)] =
          std::clamp(x[static_cast<int>(k + j)], 1e-3 * t_end, 10.0 * t_end);
    }
  };

  // three deterministic starts over width scales; best final likelihood wins
  const double width_scales[3] = {1.0, 0.5, 2.0};
  std::optional<AscentResult> best;
  for (double ws : width_scales) {
    double width = ws * t_end / static_cast<double>(k);
    double weight = rate * t_end /
                    (static_cast<double>(k) * width * kRootHalfPi * kRoot2);
    Eigen::VectorXd x0(2 * k);
    for (std::size_t j = 0; j < k; ++j) {
      x0[static_cast<int>(j)] = weight;
      x0[static_cast<int>(k + j)] = width;
    }
    AscentResult r = ascend(value, gradient, project, x0, tol, max_iterations);
    // a start that exhausts its budget is dropped; the others still compete
    if (!r.converged) continue;
    if (!best || r.value > best->value) best = std::move(r);
  }
  if (!best)
    fail(ErrorCode::NonConvergence, "no mixture start converged");

  GaussianMixtureFit fit;
  fit.intensity = unpack(best->x);
  fit.loglik = best->value * scale;
  fit.iterations = best->iterations;
  return fit;
}

PolicyMleResult fit_policy_mle(const Dataset& data, const PolicyMleConfig& cfg,
                               std::vector<double>* objective_trace) {
  require_valid(data);
  if (!(cfg.learning_rate >= 0.0))
    fail(ErrorCode::InvalidArgument, "learning rate must be nonnegative");

  PolicyParams params =
      init_policy(cfg.hidden_dim, cfg.dist, cfg.init_scale, cfg.seed);
  PolicyGrad m = PolicyGrad::zero(cfg.hidden_dim);
  PolicyGrad v = PolicyGrad::zero(cfg.hidden_dim);

  std::size_t batch = cfg.batch == 0 ? data.size() : std::min(cfg.batch, data.size());
  bool full = batch == data.size();

  std::vector<InterEventTimes> gaps;
  std::vector<double> tails;
  gaps.reserve(data.size());
  for (const auto& seq : data.sequences) {
    gaps.push_back(to_gaps(seq));
    double last = seq.times.empty() ? 0.0 : seq.times.back();
    tails.push_back(seq.window_end - last);
  }

  auto full_loglik = [&] {
    std::vector<double> per(data.size());
    parallel_for(data.size(), cfg.threads, [&](std::size_t i) {
      per[i] = log_likelihood_censored(params, data.sequences[i]);
    });
    return pairwise_sum(per);
  };

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::vector<std::size_t> idx(batch);
    if (full) {
      for (std::size_t i = 0; i < batch; ++i) idx[i] = i;
    } else {
      RngStream rng(cfg.seed, streams::fit(it));
      for (std::size_t i = 0; i < batch; ++i)
        idx[i] = rng.next_below(data.size());
    }

    std::vector<PolicyGrad> per(batch);
    parallel_for(batch, cfg.threads, [&](std::size_t i) {
      std::size_t s = idx[i];
      std::vector<double> ones(gaps[s].gaps.size(), 1.0);
      per[i] = backprop(params, gaps[s].gaps, ones, tails[s], 1.0);
    });
    PolicyGrad grad = PolicyGrad::zero(cfg.hidden_dim);
    for (const auto& g : per) grad.add_scaled(g, 1.0);
    grad.scale(1.0 / static_cast<double>(batch));
    if (cfg.freeze_recurrent) {
      grad.V.setZero();
      grad.W.setZero();
    }

    double t = static_cast<double>(it + 1);
    double bias1 = 1.0 - std::pow(cfg.adam_beta1, t);
    double bias2 = 1.0 - std::pow(cfg.adam_beta2, t);
    auto update = [&](auto& mm, auto& vv, const auto& g, auto& x) {
      mm = cfg.adam_beta1 * mm + (1.0 - cfg.adam_beta1) * g;
      vv = cfg.adam_beta2 * vv + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
      x += cfg.learning_rate *
           (mm / bias1)
               .cwiseQuotient(
                   ((vv / bias2).cwiseSqrt().array() + cfg.adam_epsilon)
                       .matrix());
    };
    update(m.V, v.V, grad.V, params.V);
    update(m.W, v.W, grad.W, params.W);
    update(m.u, v.u, grad.u, params.u);
    m.c = cfg.adam_beta1 * m.c + (1.0 - cfg.adam_beta1) * grad.c;
    v.c = cfg.adam_beta2 * v.c + (1.0 - cfg.adam_beta2) * grad.c * grad.c;
    params.c += cfg.learning_rate * (m.c / bias1) /
                (std::sqrt(v.c / bias2) + cfg.adam_epsilon);

    if (!params.V.allFinite() || !params.W.allFinite() ||
        !params.u.allFinite() || !std::isfinite(params.c))
      fail(ErrorCode::NonFiniteUpdate,
           "non-finite weight after iteration " + std::to_string(it + 1));
    if (objective_trace) objective_trace->push_back(full_loglik());
  }

  PolicyMleResult result;
  result.params = std::move(params);
  result.loglik = 0.0;
  {
    std::vector<double> per(data.size());
    parallel_for(data.size(), cfg.threads, [&](std::size_t i) {
      per[i] = log_likelihood_censored(result.params, data.sequences[i]);
    });
    result.loglik = pairwise_sum(per);
  }
  return result;
}

EventSequence simulate_mixture(const GaussianMixtureIntensity& mix,
                               double window_end, RngStream& rng) {
  if (!(window_end > 0.0))
    fail(ErrorCode::InvalidArgument, "window_end must be positive");
  // sum of weights dominates the mixture everywhere
  double bound = 0.0;
  for (const auto& c : mix.components) bound += c.weight;
  EventSequence seq;
  seq.window_end = window_end;
  if (bound <= 0.0) return seq;
  if (bound > kMaxDominatingRate)
    fail(ErrorCode::DominatingRateOverflow, "mixture rate bound too large");
  double t = 0.0;
  for (;;) {
    t += rng.exponential() / bound;
    if (t >= window_end) break;
    if (rng.uniform() * bound <= mix.value(t)) seq.times.push_back(t);
  }
  return seq;
}

Dataset simulate_mixture_dataset(const GaussianMixtureIntensity& mix,
                                 double window_end, std::size_t n,
                                 std::uint64_t seed, int threads) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "need at least one sequence");
  Dataset out;
  out.window_end = window_end;
  out.sequences.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    RngStream rng(seed, streams::dataset_sequence(i));
    out.sequences[i] = simulate_mixture(mix, window_end, rng);
  });
  return out;
}

Dataset policy_rollout_dataset(const PolicyParams& params, double window_end,
                               std::size_t n, std::uint64_t seed, int threads) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "need at least one sequence");
  Dataset out;
  out.window_end = window_end;
  out.sequences.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    RngStream rng(seed, streams::dataset_sequence(i));
    out.sequences[i] = rollout(params, window_end, rng).sequence;
  });
  return out;
}

}  // namespace tpp
