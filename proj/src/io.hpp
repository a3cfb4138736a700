#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "baselines.hpp"
#include "eval.hpp"
#include "events.hpp"
#include "intensity.hpp"
#include "policy.hpp"
#include "train.hpp"

namespace tpp {

// Event files are JSON Lines: a header object {"T": <window>, "format": 1}
// followed by one {"t": [...]} object per sequence.  Doubles round-trip
// exactly (shortest-representation printing).
Dataset load_events(const std::string& path);
void save_events(const Dataset& data, const std::string& path);

// Binary checkpoint: magic "TPPCKPT1", little-endian fixed-width fields,
// weights in V, W (row-major), u, c order, optionally followed by the
// optimizer state that makes training resume bit-identical.
struct Checkpoint {
  PolicyParams params;
  bool has_train_state = false;
  PolicyGrad adam_m;
  PolicyGrad adam_v;
  std::uint64_t iteration = 0;
  std::uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// fit files: one JSON object tagged by "model"
using FitResult =
    std::variant<HawkesFit, GaussianMixtureFit, SelfCorrectingFit, PolicyMleResult>;

// hawkes | ip | sc | policy-mle
const char* fit_model_tag(const FitResult& fit);

void save_fit(const FitResult& fit, const std::string& path);
FitResult load_fit(const std::string& path);

// trace CSV with header iter,mmd2,mean_return,grad_norm,wall_ms; timings are
// written as 0 unless include_timing (keeps reruns byte-identical)
void save_trace(const TrainTrace& trace, const std::string& path,
                bool include_timing = false);

// intensity spec JSON ({"type": ..., ...}; "sum" nests components)
IntensitySpec load_spec(const std::string& path);
void save_spec(const IntensitySpec& spec, const std::string& path);

// Training configuration: flat key = value lines, '#' comments.  Unknown
// keys are rejected.  seed and threads come from the command line, not the
// file.
TrainConfig parse_train_config(const std::string& path);

// comparison report files: intensity.csv, summary.json, and per-candidate
// qq_<name>.csv / pvalues_<name>.csv when the extras carry data
struct CandidateEvalExtra {
  std::optional<double> ks_pass_rate;  // fraction of sequences with p > 0.05
  std::size_t ks_sequences = 0;
  std::vector<std::pair<double, double>> qq;
  std::vector<std::pair<double, double>> pvalue_cdf;
};

void write_report_files(const std::string& dir, const ComparisonReport& report,
                        const std::vector<CandidateEvalExtra>& extras);

}  // namespace tpp
