#include "simulate.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "threading.hpp"

namespace tpp {
namespace {

// earliest structural breakpoint after s (piecewise-linear knots); the
// dominating bound below is only trusted up to this horizon
double refresh_horizon(const IntensitySpec& spec, double s, double t_end) {
  if (const auto* pw = std::get_if<PiecewiseLinearIntensity>(&spec.value)) {
    for (double k : pw->knots)
      if (k > s) return std::min(k, t_end);
    return t_end;
  }
  if (const auto* sum = std::get_if<SumIntensity>(&spec.value)) {
    double h = t_end;
    for (const auto& c : sum->components)
      h = std::min(h, refresh_horizon(c, s, t_end));
    return h;
  }
  return t_end;
}

// sup of the intensity over (s, e] given the history so far; e must not
// cross a breakpoint
double dominating_bound(const IntensitySpec& spec,
                        const std::vector<double>& history, double s, double e) {
  if (const auto* lin = std::get_if<LinearIntensity>(&spec.value)) {
    return std::max(lin->slope * s + lin->intercept,
                    lin->slope * e + lin->intercept);
  }
  if (std::holds_alternative<PiecewiseLinearIntensity>(spec.value)) {
    return std::max(intensity_at(spec, history, s), intensity_at(spec, history, e));
  }
  if (const auto* hk = std::get_if<HawkesIntensity>(&spec.value)) {
    // the excitation only decays between events, so the sup on (s, e] is the
    // value just after s, including a possible event at s itself
    double sum = 0.0;
    for (double ti : history) {
      if (ti > s) break;
      sum += std::exp(-hk->decay * (s - ti));
    }
    return hk->mu + hk->alpha * hk->decay * sum;
  }
  if (std::holds_alternative<SelfCorrectingIntensity>(spec.value)) {
    fail(ErrorCode::InvalidArgument,
         "self-correcting intensities are simulated by inversion, not thinning");
  }
  const auto& sum = std::get<SumIntensity>(spec.value);
  double b = 0.0;
  for (const auto& c : sum.components)
    b += dominating_bound(c, history, s, e);
  return b;
}

EventSequence simulate_thinning(const IntensitySpec& spec, double t_end,
                                RngStream& rng) {
  EventSequence seq;
  seq.window_end = t_end;
  double s = 0.0;
  while (s < t_end) {
    double horizon = refresh_horizon(spec, s, t_end);
    double bar = dominating_bound(spec, seq.times, s, horizon);
    if (bar > kMaxDominatingRate)
      fail(ErrorCode::DominatingRateOverflow,
           "dominating rate " + std::to_string(bar) + " exceeds " +
               std::to_string(kMaxDominatingRate));
    if (bar <= 0.0) {
      s = horizon;
      continue;
    }
    double candidate = s + rng.exponential() / bar;
    if (candidate > horizon) {
      s = horizon;
      continue;
    }
    if (candidate >= t_end) break;
    double lambda = intensity_at(spec, seq.times, candidate);
    if (rng.uniform() * bar <= lambda) seq.times.push_back(candidate);
    s = candidate;
  }
  return seq;
}

// The compensator between events is e^{-n alpha} (e^{mu t} - e^{mu s}) / mu,
// so a unit-exponential draw E maps to the next event in closed form.
EventSequence simulate_self_correcting(const SelfCorrectingIntensity& sc,
                                       double t_end, RngStream& rng) {
  EventSequence seq;
  seq.window_end = t_end;
  double s = 0.0;
  double n = 0.0;
  for (;;) {
    double e = rng.exponential();
    double x = std::exp(sc.mu * s) + sc.mu * e * std::exp(n * sc.alpha);
    double t = std::log(x) / sc.mu;
    if (!(t < t_end)) break;
    seq.times.push_back(t);
    s = t;
    n += 1.0;
  }
  return seq;
}

}  // namespace

EventSequence simulate(const IntensitySpec& spec, double window_end,
                       RngStream& rng) {
  validate_spec(spec, window_end);
  if (const auto* sc = std::get_if<SelfCorrectingIntensity>(&spec.value))
    return simulate_self_correcting(*sc, window_end, rng);
  return simulate_thinning(spec, window_end, rng);
}

Dataset simulate_dataset(const IntensitySpec& spec, double window_end,
                         std::size_t n, std::uint64_t seed, int threads) {
  if (n == 0)
    fail(ErrorCode::InvalidArgument, "need at least one sequence");
  validate_spec(spec, window_end);
  Dataset out;
  out.window_end = window_end;
  out.sequences.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    RngStream rng(seed, streams::dataset_sequence(i));
    out.sequences[i] = simulate(spec, window_end, rng);
  });
  return out;
}

}  // namespace tpp
