#include "intensity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "errors.hpp"

namespace tpp {
namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x))
    fail(ErrorCode::InvalidArgument, std::string(what) + " must be finite");
}

// value of the piecewise-linear rate at t (t >= 0)
double pw_value(const PiecewiseLinearIntensity& p, double t) {
  double v = p.intercept;
  double prev = 0.0;
  for (std::size_t j = 0; j < p.knots.size(); ++j) {
    if (t <= p.knots[j]) return v + p.slopes[j] * (t - prev);
    v += p.slopes[j] * (p.knots[j] - prev);
    prev = p.knots[j];
  }
  return v + p.slopes.back() * (t - prev);
}

[[noreturn]] void fail_negative(double at) {
  fail(ErrorCode::NegativeIntensity,
       "intensity goes negative at t=" + std::to_string(at));
}

double checked(double v, double t) {
  if (v < 0.0) fail_negative(t);
  return v;
}

double hawkes_excitation(const HawkesIntensity& h,
                         const std::vector<double>& history, double t) {
  double s = 0.0;
  for (double ti : history) {
    if (ti >= t) break;
    s += std::exp(-h.decay * (t - ti));
  }
  return h.alpha * h.decay * s;
}

std::size_t count_before(const std::vector<double>& times, double t) {
  return static_cast<std::size_t>(
      std::lower_bound(times.begin(), times.end(), t) - times.begin());
}

}  // namespace

void validate_spec(const IntensitySpec& spec, double window_end) {
  if (!(window_end > 0.0) || !std::isfinite(window_end))
    fail(ErrorCode::InvalidArgument, "window_end must be positive and finite");

  if (const auto* lin = std::get_if<LinearIntensity>(&spec.value)) {
    require_finite(lin->slope, "slope");
    require_finite(lin->intercept, "intercept");
    if (lin->intercept < 0.0) fail_negative(0.0);
    double end = lin->slope * window_end + lin->intercept;
    if (end < 0.0) fail_negative(-lin->intercept / lin->slope);
  } else if (const auto* pw = std::get_if<PiecewiseLinearIntensity>(&spec.value)) {
    if (pw->slopes.size() != pw->knots.size() + 1)
      fail(ErrorCode::InvalidArgument, "need one slope per piece");
    require_finite(pw->intercept, "intercept");
    for (double s : pw->slopes) require_finite(s, "slope");
    double prev = 0.0;
    for (double k : pw->knots) {
      require_finite(k, "knot");
      if (!(k > prev))
        fail(ErrorCode::InvalidArgument, "knots must be positive and strictly increasing");
      prev = k;
    }
    // piecewise linear, so the minimum over [0, T] is attained at a breakpoint
    double at = 0.0;
    double v = pw->intercept;
    if (v < 0.0) fail_negative(0.0);
    for (std::size_t j = 0; j <= pw->knots.size(); ++j) {
      double next = j < pw->knots.size() ? std::min(pw->knots[j], window_end)
                                         : window_end;
      if (next <= at) break;
      double nv = v + pw->slopes[j] * (next - at);
      if (nv < 0.0) fail_negative(at - v / pw->slopes[j]);
      at = next;
      v = nv;
    }
  } else if (const auto* hk = std::get_if<HawkesIntensity>(&spec.value)) {
    require_finite(hk->mu, "mu");
    require_finite(hk->alpha, "alpha");
    require_finite(hk->decay, "decay");
    if (hk->mu < 0.0)
      fail(ErrorCode::InvalidArgument, "hawkes mu must be nonnegative");
    if (!(hk->alpha >= 0.0 && hk->alpha < 1.0))
      fail(ErrorCode::InvalidArgument,
           "hawkes branching ratio must lie in [0, 1) for stability");
    if (!(hk->decay > 0.0))
      fail(ErrorCode::InvalidArgument, "hawkes decay must be positive");
  } else if (const auto* sc = std::get_if<SelfCorrectingIntensity>(&spec.value)) {
    require_finite(sc->mu, "mu");
    require_finite(sc->alpha, "alpha");
    if (!(sc->mu > 0.0) || !(sc->alpha > 0.0))
      fail(ErrorCode::InvalidArgument,
           "self-correcting mu and alpha must be positive");
  } else {
    const auto& sum = std::get<SumIntensity>(spec.value);
    if (sum.components.empty())
      fail(ErrorCode::InvalidArgument, "sum needs at least one component");
    for (const auto& c : sum.components) validate_spec(c, window_end);
  }
}

double intensity_at(const IntensitySpec& spec, const std::vector<double>& history,
                    double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    fail(ErrorCode::InvalidArgument, "intensity requires t >= 0");

  if (const auto* lin = std::get_if<LinearIntensity>(&spec.value)) {
    return checked(lin->slope * t + lin->intercept, t);
  }
  if (const auto* pw = std::get_if<PiecewiseLinearIntensity>(&spec.value)) {
    return checked(pw_value(*pw, t), t);
  }
  if (const auto* hk = std::get_if<HawkesIntensity>(&spec.value)) {
    return hk->mu + hawkes_excitation(*hk, history, t);
  }
  if (const auto* sc = std::get_if<SelfCorrectingIntensity>(&spec.value)) {
    double n = static_cast<double>(count_before(history, t));
    return std::exp(sc->mu * t - sc->alpha * n);
  }
  const auto& sum = std::get<SumIntensity>(spec.value);
  double v = 0.0;
  for (const auto& c : sum.components) v += intensity_at(c, history, t);
  return v;
}

double compensator(const IntensitySpec& spec, const std::vector<double>& times,
                   double t_start, double t_end) {
  if (!(t_start >= 0.0) || !(t_end >= t_start))
    fail(ErrorCode::InvalidArgument, "compensator needs 0 <= t_start <= t_end");

  if (const auto* lin = std::get_if<LinearIntensity>(&spec.value)) {
    checked(lin->slope * t_start + lin->intercept, t_start);
    checked(lin->slope * t_end + lin->intercept, t_end);
    return 0.5 * lin->slope * (t_end * t_end - t_start * t_start) +
           lin->intercept * (t_end - t_start);
  }

  if (const auto* pw = std::get_if<PiecewiseLinearIntensity>(&spec.value)) {
    // trapezoid rule per linear piece is exact
    double total = 0.0;
    double lo = t_start;
    double vlo = checked(pw_value(*pw, lo), lo);
    for (std::size_t j = 0; j <= pw->knots.size() && lo < t_end; ++j) {
      if (j < pw->knots.size() && pw->knots[j] <= lo) continue;
      double hi = j < pw->knots.size() ? std::min(pw->knots[j], t_end) : t_end;
      double vhi = checked(pw_value(*pw, hi), hi);
      total += 0.5 * (vlo + vhi) * (hi - lo);
      lo = hi;
      vlo = vhi;
    }
    return total;
  }

  if (const auto* hk = std::get_if<HawkesIntensity>(&spec.value)) {
    double total = hk->mu * (t_end - t_start);
    double decayed = 0.0;
    for (double ti : times) {
      if (ti >= t_end) break;
      double from = std::max(t_start, ti);
      decayed += std::exp(-hk->decay * (from - ti)) -
                 std::exp(-hk->decay * (t_end - ti));
    }
    return total + hk->alpha * decayed;
  }

  if (const auto* sc = std::get_if<SelfCorrectingIntensity>(&spec.value)) {
    // exp(mu t) e^{-n alpha} integrates in closed form between events
    double total = 0.0;
    double lo = t_start;
    std::size_t n = count_before(times, t_start);
    if (n < times.size() && times[n] == t_start) ++n;  // event exactly at t_start
    while (lo < t_end) {
      double hi = t_end;
      if (n < times.size() && times[n] < t_end) hi = times[n];
      total += std::exp(-static_cast<double>(n) * sc->alpha) *
               (std::exp(sc->mu * hi) - std::exp(sc->mu * lo)) / sc->mu;
      if (n < times.size() && times[n] == hi) ++n;
      lo = hi;
    }
    return total;
  }

  const auto& sum = std::get<SumIntensity>(spec.value);
  double v = 0.0;
  for (const auto& c : sum.components) v += compensator(c, times, t_start, t_end);
  return v;
}

IntensitySpec preset(const std::string& name) {
  std::string key;
  key.reserve(name.size());
  for (char ch : name)
    key.push_back(ch == '_' ? '-' : static_cast<char>(std::tolower(
                                        static_cast<unsigned char>(ch))));

  if (key == "ip") return {LinearIntensity{-0.2, 3.5}};
  if (key == "hp") return {HawkesIntensity{2.0, 0.5, 1.0}};
  if (key == "ip-hp1") {
    SumIntensity sum;
    sum.components.push_back(
        {PiecewiseLinearIntensity{{3.75, 7.5, 11.25}, {0.2, 0.3, 0.4, 0.5}, 0.5}});
    sum.components.push_back({HawkesIntensity{1.0, 0.5, 1.0}});
    return {std::move(sum)};
  }
  if (key == "ip-hp2") {
    SumIntensity sum;
    sum.components.push_back(
        {PiecewiseLinearIntensity{{3.75, 7.5, 11.25}, {1.0, -1.0, 2.0, -2.0}, 0.5}});
    sum.components.push_back({HawkesIntensity{1.0, 0.1, 1.0}});
    return {std::move(sum)};
  }
  fail(ErrorCode::UnknownPreset, "unknown preset: " + name);
}

}  // namespace tpp
