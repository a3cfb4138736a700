#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "baselines.hpp"
#include "events.hpp"
#include "intensity.hpp"
#include "kernel.hpp"
#include "policy.hpp"

namespace tpp {

// binned mean event rate (events per unit time per sequence) over [0, T)
struct IntensityCurve {
  std::vector<double> edges;  // bins + 1 ascending values, 0 .. T
  std::vector<double> rates;
  std::size_t sequence_count = 0;

  double bin_center(std::size_t b) const {
    return 0.5 * (edges[b] + edges[b + 1]);
  }
};

IntensityCurve empirical_intensity(const Dataset& data, std::size_t bins);

// mean absolute difference between two curves with identical binning
double intensity_mae(const IntensityCurve& a, const IntensityCurve& b);

// compensator increments between consecutive events; unit-rate exponential
// when the spec matches the generator (time-rescaling)
struct RescaledGaps {
  std::vector<double> values;
};

RescaledGaps time_rescale(const EventSequence& seq, const IntensitySpec& spec);
RescaledGaps time_rescale(const EventSequence& seq,
                          const GaussianMixtureIntensity& mix);
// policy compensator: -log S(a_i | Theta(h_{i-1})) per step
RescaledGaps time_rescale(const EventSequence& seq, const PolicyParams& params);

// (theoretical, empirical) quantile pairs against Exp(1) at probabilities
// (i - 0.5) / quantiles
std::vector<std::pair<double, double>> qq_points(const RescaledGaps& gaps,
                                                 std::size_t quantiles);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// one-sample KS against Exp(1); p-value from the asymptotic Kolmogorov
// series at sqrt(n) * D_n
KsResult ks_test(const RescaledGaps& gaps);

// survival series K(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)
double kolmogorov_pvalue(double lambda);

// sorted empirical CDF points (p_(i), i/n)
std::vector<std::pair<double, double>> pvalue_cdf(std::vector<double> pvalues);

struct CandidateReport {
  std::string name;
  IntensityCurve curve;
  double intensity_mae = 0.0;
  double mmd2 = 0.0;
};

struct ComparisonReport {
  IntensityCurve expert_curve;
  double kernel_sigma = 0.0;
  std::vector<CandidateReport> candidates;
};

// Shared-bin intensity curves, per-candidate MAE against the expert curve,
// and mmd^2 against the expert sample.  sigma defaults to the median
// bandwidth of the expert dataset.
ComparisonReport compare_report(
    const Dataset& expert,
    const std::vector<std::pair<std::string, const Dataset*>>& candidates,
    std::size_t bins, std::optional<double> sigma = std::nullopt,
    int threads = 1);

}  // namespace tpp
