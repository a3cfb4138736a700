#include "eval.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace tpp {

IntensityCurve empirical_intensity(const Dataset& data, std::size_t bins) {
  if (bins < 1) fail(ErrorCode::InvalidArgument, "need at least one bin");
  if (!(data.window_end > 0.0))
    fail(ErrorCode::InvalidArgument, "window_end must be positive");

  IntensityCurve curve;
  curve.sequence_count = data.size();
  double width = data.window_end / static_cast<double>(bins);
  curve.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b)
    curve.edges[b] = data.window_end * static_cast<double>(b) /
                     static_cast<double>(bins);
  curve.rates.assign(bins, 0.0);
  for (const auto& seq : data.sequences) {
    require_valid(seq);
    for (double t : seq.times) {
      auto b = static_cast<std::size_t>(t / width);
      if (b >= bins) b = bins - 1;  // guard the t -> T- rounding edge
      curve.rates[b] += 1.0;
    }
  }
  if (curve.sequence_count > 0) {
    double norm = 1.0 / (static_cast<double>(curve.sequence_count) * width);
    for (double& r : curve.rates) r *= norm;
  }
  return curve;
}

double intensity_mae(const IntensityCurve& a, const IntensityCurve& b) {
  if (a.rates.size() != b.rates.size() || a.edges != b.edges)
    fail(ErrorCode::InvalidArgument, "curves must share their bins");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rates.size(); ++i)
    s += std::abs(a.rates[i] - b.rates[i]);
  return s / static_cast<double>(a.rates.size());
}

RescaledGaps time_rescale(const EventSequence& seq, const IntensitySpec& spec) {
  require_valid(seq);
  validate_spec(spec, seq.window_end);
  RescaledGaps out;
  out.values.reserve(seq.size());
  double prev = 0.0;
  for (double t : seq.times) {
    out.values.push_back(compensator(spec, seq.times, prev, t));
    prev = t;
  }
  return out;
}

RescaledGaps time_rescale(const EventSequence& seq,
                          const GaussianMixtureIntensity& mix) {
  require_valid(seq);
  RescaledGaps out;
  out.values.reserve(seq.size());
  double prev = 0.0;
  for (double t : seq.times) {
    out.values.push_back(mix.integral(prev, t));
    prev = t;
  }
  return out;
}

RescaledGaps time_rescale(const EventSequence& seq, const PolicyParams& params) {
  InterEventTimes gaps = to_gaps(seq);
  ForwardPass f = forward(params, gaps.gaps);
  RescaledGaps out;
  out.values.reserve(gaps.gaps.size());
  for (std::size_t i = 0; i < gaps.gaps.size(); ++i)
    out.values.push_back(-log_survival(params.dist, f.thetas[i], gaps.gaps[i]));
  return out;
}

std::vector<std::pair<double, double>> qq_points(const RescaledGaps& gaps,
                                                 std::size_t quantiles) {
  if (quantiles < 1) fail(ErrorCode::InvalidArgument, "need at least one quantile");
  std::size_t n = gaps.values.size();
  if (n < quantiles)
    fail(ErrorCode::InsufficientData,
         "need at least as many gaps as requested quantiles");
  std::vector<double> sorted = gaps.values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(quantiles);
  for (std::size_t i = 1; i <= quantiles; ++i) {
    double p = (static_cast<double>(i) - 0.5) / static_cast<double>(quantiles);
    // integer plotting position: floor((2i - 1) n / (2 q)), exact for n == q
    std::size_t idx = ((2 * i - 1) * n) / (2 * quantiles);
    out.push_back({-std::log1p(-p), sorted[idx]});
  }
  return out;
}

double kolmogorov_pvalue(double lambda) {
  if (lambda <= 0.0) return 1.0;
  // terms decay fast; below ~0.15 the sum is 1 within double precision
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100000; ++k) {
    double term = std::exp(-2.0 * lambda * lambda * static_cast<double>(k) *
                           static_cast<double>(k));
    sum += sign * term;
    if (term < 1e-10) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(const RescaledGaps& gaps) {
  std::size_t n = gaps.values.size();
  if (n < 1) fail(ErrorCode::InsufficientData, "KS test needs at least one gap");
  std::vector<double> sorted = gaps.values;
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double cdf = 1.0 - std::exp(-sorted[i]);
    double above = static_cast<double>(i + 1) / static_cast<double>(n) - cdf;
    double below = cdf - static_cast<double>(i) / static_cast<double>(n);
    d = std::max({d, above, below});
  }
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_pvalue(std::sqrt(static_cast<double>(n)) * d);
  return r;
}

std::vector<std::pair<double, double>> pvalue_cdf(std::vector<double> pvalues) {
  if (pvalues.empty())
    fail(ErrorCode::InsufficientData, "no p-values given");
  std::sort(pvalues.begin(), pvalues.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(pvalues.size());
  double n = static_cast<double>(pvalues.size());
  for (std::size_t i = 0; i < pvalues.size(); ++i)
    out.push_back({pvalues[i], static_cast<double>(i + 1) / n});
  return out;
}

ComparisonReport compare_report(
    const Dataset& expert,
    const std::vector<std::pair<std::string, const Dataset*>>& candidates,
    std::size_t bins, std::optional<double> sigma, int threads) {
  require_valid(expert);
  KernelConfig kcfg = sigma ? KernelConfig{*sigma} : median_bandwidth(expert);

  ComparisonReport report;
  report.kernel_sigma = kcfg.sigma;
  report.expert_curve = empirical_intensity(expert, bins);
  for (const auto& [name, data] : candidates) {
    if (data->window_end != expert.window_end)
      fail(ErrorCode::InvalidArgument,
           "candidate '" + name + "' does not share the expert window");
    CandidateReport cr;
    cr.name = name;
    cr.curve = empirical_intensity(*data, bins);
    cr.intensity_mae = intensity_mae(cr.curve, report.expert_curve);
    cr.mmd2 = mmd_squared(expert, *data, kcfg, threads);
    report.candidates.push_back(std::move(cr));
  }
  return report;
}

}  // namespace tpp
