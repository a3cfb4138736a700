#pragma once

#include <string>
#include <variant>
#include <vector>

#include "events.hpp"

namespace tpp {

// lambda(t) = slope * t + intercept
struct LinearIntensity {
  double slope = 0.0;
  double intercept = 0.0;
};

// Continuous piecewise-linear rate.  knots are the strictly increasing
// interior breakpoints; slopes[j] applies on [knots[j-1], knots[j]) with an
// implicit knot at 0, and slopes.back() extends beyond the last knot.  The
// value at 0 is intercept.
struct PiecewiseLinearIntensity {
  std::vector<double> knots;
  std::vector<double> slopes;
  double intercept = 0.0;
};

// lambda(t | H_t) = mu + alpha * sum_{t_i < t} decay * exp(-decay (t - t_i)).
// The excitation kernel integrates to alpha, so alpha is the branching
// ratio and alpha < 1 keeps the process stable.
struct HawkesIntensity {
  double mu = 0.0;
  double alpha = 0.0;
  double decay = 1.0;
};

// lambda(t | H_t) = exp(mu t - alpha N(t-)) where N(t-) counts prior events
struct SelfCorrectingIntensity {
  double mu = 0.0;
  double alpha = 0.0;
};

struct IntensitySpec;

struct SumIntensity {
  std::vector<IntensitySpec> components;
};

struct IntensitySpec {
  std::variant<LinearIntensity, PiecewiseLinearIntensity, HawkesIntensity,
               SelfCorrectingIntensity, SumIntensity>
      value;
};

// Parameter checks plus nonnegativity of the deterministic variants over
// [0, window_end].  Throws NegativeIntensity / InvalidArgument.
void validate_spec(const IntensitySpec& spec, double window_end);

// conditional intensity at t given the (strictly earlier) event history
double intensity_at(const IntensitySpec& spec,
                    const std::vector<double>& history, double t);

// integral of the conditional intensity over [t_start, t_end]; closed form
// for every variant (history events inside the interval are accounted for)
double compensator(const IntensitySpec& spec, const std::vector<double>& times,
                   double t_start, double t_end);

// Named ground-truth processes used throughout the tests and the CLI:
//   ip      linear rate 3.5 - 0.2 t
//   hp      self-exciting, mu 2, branching 0.5, decay 1
//   ip-hp1  rising piecewise-linear trend plus self-excitation (branching .5)
//   ip-hp2  zig-zag piecewise-linear trend plus weak self-excitation (.1)
// Names are case-insensitive; '_' and '-' are interchangeable.
IntensitySpec preset(const std::string& name);

}  // namespace tpp
