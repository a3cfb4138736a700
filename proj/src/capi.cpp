#include "tppkit.h"

#include <algorithm>
#include <cstring>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "baselines.hpp"
#include "errors.hpp"
#include "eval.hpp"
#include "events.hpp"
#include "intensity.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "policy.hpp"
#include "simulate.hpp"
#include "train.hpp"

struct tpp_dataset {
  tpp::Dataset data;
};

struct tpp_spec {
  tpp::IntensitySpec spec;
};

struct tpp_policy {
  tpp::PolicyParams params;
};

struct tpp_config {
  tpp::TrainConfig cfg;
};

struct tpp_trainer {
  tpp::Dataset expert;
  tpp::TrainConfig cfg;
  tpp::TrainState state;
};

struct tpp_trace {
  tpp::TrainTrace rows;
};

struct tpp_fit {
  tpp::FitResult fit;
};

struct tpp_report {
  tpp::Dataset expert;
  std::size_t bins = 20;
  std::optional<double> sigma;
  int threads = 1;
  std::vector<std::pair<std::string, tpp::Dataset>> candidates;
  std::vector<tpp::CandidateEvalExtra> extras;
  mutable std::optional<tpp::ComparisonReport> cache;

  const tpp::ComparisonReport& ensure() const {
    if (!cache) {
      std::vector<std::pair<std::string, const tpp::Dataset*>> refs;
      refs.reserve(candidates.size());
      for (const auto& [name, data] : candidates) refs.emplace_back(name, &data);
      cache = tpp::compare_report(expert, refs, bins, sigma, threads);
    }
    return *cache;
  }
};

struct tpp_rescale {
  std::vector<std::pair<double, double>> qq;
  std::vector<std::pair<double, double>> pcdf;
  std::size_t gap_count = 0;
  std::size_t sequences_tested = 0;
  double pass_rate = 0.0;
  double pooled_statistic = 0.0;
  double pooled_p = 1.0;
  bool has_pooled = false;
};

namespace {

thread_local tpp_status g_status = TPP_OK;
thread_local std::string g_message;

tpp_status map_code(tpp::ErrorCode code) {
  using tpp::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return TPP_ERR_INVALID_ARGUMENT;
    case ErrorCode::NonMonotonic: return TPP_ERR_NON_MONOTONIC;
    case ErrorCode::OutOfWindow: return TPP_ERR_OUT_OF_WINDOW;
    case ErrorCode::NegativeIntensity: return TPP_ERR_NEGATIVE_INTENSITY;
    case ErrorCode::DominatingRateOverflow:
      return TPP_ERR_DOMINATING_RATE_OVERFLOW;
    case ErrorCode::UnknownPreset: return TPP_ERR_UNKNOWN_PRESET;
    case ErrorCode::DegenerateData: return TPP_ERR_DEGENERATE_DATA;
    case ErrorCode::RolloutOverflow: return TPP_ERR_ROLLOUT_OVERFLOW;
    case ErrorCode::NonFiniteUpdate: return TPP_ERR_NON_FINITE_UPDATE;
    case ErrorCode::NonConvergence: return TPP_ERR_NON_CONVERGENCE;
    case ErrorCode::InsufficientData: return TPP_ERR_INSUFFICIENT_DATA;
    case ErrorCode::Io: return TPP_ERR_IO;
    case ErrorCode::Parse: return TPP_ERR_PARSE;
  }
  return TPP_ERR_UNKNOWN;
}

void record_failure(tpp_status status, const std::string& message) {
  g_status = status;
  g_message = message;
}

template <typename F>
tpp_status run_status(F&& f) noexcept {
  try {
    f();
    g_status = TPP_OK;
    return TPP_OK;
  } catch (const tpp::Error& e) {
    record_failure(map_code(e.code()), e.what());
  } catch (const std::exception& e) {
    record_failure(TPP_ERR_UNKNOWN, e.what());
  } catch (...) {
    record_failure(TPP_ERR_UNKNOWN, "unexpected failure");
  }
  return g_status;
}

template <typename F>
auto run_ptr(F&& f) noexcept -> decltype(f()) {
  try {
    auto* p = f();
    g_status = TPP_OK;
    return p;
  } catch (const tpp::Error& e) {
    record_failure(map_code(e.code()), e.what());
  } catch (const std::exception& e) {
    record_failure(TPP_ERR_UNKNOWN, e.what());
  } catch (...) {
    record_failure(TPP_ERR_UNKNOWN, "unexpected failure");
  }
  return nullptr;
}

bool require_handle(const void* p, const char* what) {
  if (p) return true;
  record_failure(TPP_ERR_INVALID_ARGUMENT, std::string(what) + " handle is NULL");
  return false;
}

bool require_cstr(const char* s, const char* what) {
  if (s) return true;
  record_failure(TPP_ERR_INVALID_ARGUMENT, std::string(what) + " is NULL");
  return false;
}

tpp::Dataset rollout_or_resimulate(const tpp::FitResult& fit, double window_end,
                                   std::size_t n, std::uint64_t seed,
                                   int threads) {
  if (const auto* h = std::get_if<tpp::HawkesFit>(&fit)) {
    tpp::IntensitySpec spec{tpp::HawkesIntensity{h->mu, h->alpha, h->decay}};
    return tpp::simulate_dataset(spec, window_end, n, seed, threads);
  }
  if (const auto* m = std::get_if<tpp::GaussianMixtureFit>(&fit))
    return tpp::simulate_mixture_dataset(m->intensity, window_end, n, seed,
                                         threads);
  if (const auto* s = std::get_if<tpp::SelfCorrectingFit>(&fit)) {
    tpp::IntensitySpec spec{tpp::SelfCorrectingIntensity{s->mu, s->alpha}};
    return tpp::simulate_dataset(spec, window_end, n, seed, threads);
  }
  const auto& pm = std::get<tpp::PolicyMleResult>(fit);
  return tpp::policy_rollout_dataset(pm.params, window_end, n, seed, threads);
}

template <typename Transform>
tpp_rescale* build_rescale(const tpp::Dataset& data, std::size_t quantiles,
                           Transform&& transform) {
  tpp::require_valid(data);
  auto* out = new tpp_rescale;
  tpp::RescaledGaps pooled;
  std::vector<double> pvalues;
  std::size_t passed = 0;
  for (const tpp::EventSequence& seq : data.sequences) {
    tpp::RescaledGaps gaps = transform(seq);
    if (!gaps.values.empty()) {
      tpp::KsResult ks = tpp::ks_test(gaps);
      pvalues.push_back(ks.p_value);
      if (ks.p_value > 0.05) ++passed;
    }
    pooled.values.insert(pooled.values.end(), gaps.values.begin(),
                         gaps.values.end());
  }
  out->gap_count = pooled.values.size();
  out->sequences_tested = pvalues.size();
  if (!pvalues.empty()) {
    out->pass_rate = static_cast<double>(passed) /
                     static_cast<double>(pvalues.size());
    out->pcdf = tpp::pvalue_cdf(std::move(pvalues));
  }
  if (!pooled.values.empty()) {
    tpp::KsResult ks = tpp::ks_test(pooled);
    out->pooled_statistic = ks.statistic;
    out->pooled_p = ks.p_value;
    out->has_pooled = true;
    if (quantiles >= 1 && pooled.values.size() >= quantiles)
      out->qq = tpp::qq_points(pooled, quantiles);
  }
  return out;
}

}  // namespace

extern "C" {

const char* tpp_version(void) { return "0.1.0"; }

const char* tpp_status_name(tpp_status status) {
  switch (status) {
    case TPP_OK: return "ok";
    case TPP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case TPP_ERR_NON_MONOTONIC: return "non_monotonic";
    case TPP_ERR_OUT_OF_WINDOW: return "out_of_window";
    case TPP_ERR_NEGATIVE_INTENSITY: return "negative_intensity";
    case TPP_ERR_DOMINATING_RATE_OVERFLOW: return "dominating_rate_overflow";
    case TPP_ERR_UNKNOWN_PRESET: return "unknown_preset";
    case TPP_ERR_DEGENERATE_DATA: return "degenerate_data";
    case TPP_ERR_ROLLOUT_OVERFLOW: return "rollout_overflow";
    case TPP_ERR_NON_FINITE_UPDATE: return "non_finite_update";
    case TPP_ERR_NON_CONVERGENCE: return "non_convergence";
    case TPP_ERR_INSUFFICIENT_DATA: return "insufficient_data";
    case TPP_ERR_IO: return "io";
    case TPP_ERR_PARSE: return "parse";
    case TPP_ERR_UNKNOWN: return "unknown";
  }
  return "unknown";
}

const char* tpp_last_error(void) { return g_message.c_str(); }

tpp_status tpp_last_status(void) { return g_status; }

/* ---- datasets -------------------------------------------------------- */

tpp_dataset* tpp_dataset_new(double window_end) {
  return run_ptr([&]() -> tpp_dataset* {
    if (!(window_end > 0.0))
      tpp::fail(tpp::ErrorCode::InvalidArgument, "window_end must be positive");
    auto* d = new tpp_dataset;
    d->data.window_end = window_end;
    return d;
  });
}

tpp_status tpp_dataset_add_sequence(tpp_dataset* data, const double* times,
                                    size_t count) {
  return run_status([&] {
    if (!require_handle(data, "dataset"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (count > 0 && !times)
      tpp::fail(tpp::ErrorCode::InvalidArgument, "times is NULL");
    tpp::EventSequence seq;
    seq.times.assign(times, times + count);
    seq.window_end = data->data.window_end;
    tpp::require_valid(seq);
    data->data.sequences.push_back(std::move(seq));
  });
}

tpp_dataset* tpp_dataset_load(const char* path) {
  return run_ptr([&]() -> tpp_dataset* {
    if (!require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_dataset{tpp::load_events(path)};
  });
}

tpp_status tpp_dataset_save(const tpp_dataset* data, const char* path) {
  return run_status([&] {
    if (!require_handle(data, "dataset") || !require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::save_events(data->data, path);
  });
}

void tpp_dataset_free(tpp_dataset* data) { delete data; }

double tpp_dataset_window(const tpp_dataset* data) {
  if (!require_handle(data, "dataset")) return 0.0;
  return data->data.window_end;
}

size_t tpp_dataset_size(const tpp_dataset* data) {
  if (!require_handle(data, "dataset")) return 0;
  return data->data.sequences.size();
}

size_t tpp_dataset_total_events(const tpp_dataset* data) {
  if (!require_handle(data, "dataset")) return 0;
  return data->data.total_events();
}

size_t tpp_dataset_sequence_length(const tpp_dataset* data, size_t index) {
  if (!require_handle(data, "dataset")) return 0;
  if (index >= data->data.sequences.size()) {
    record_failure(TPP_ERR_INVALID_ARGUMENT, "sequence index out of range");
    return 0;
  }
  return data->data.sequences[index].times.size();
}

size_t tpp_dataset_sequence_times(const tpp_dataset* data, size_t index,
                                  double* out, size_t capacity) {
  if (!require_handle(data, "dataset")) return 0;
  if (index >= data->data.sequences.size()) {
    record_failure(TPP_ERR_INVALID_ARGUMENT, "sequence index out of range");
    return 0;
  }
  const std::vector<double>& t = data->data.sequences[index].times;
  if (out) {
    const std::size_t n = std::min(capacity, t.size());
    std::copy_n(t.begin(), n, out);
  }
  return t.size();
}

/* ---- intensity specifications and simulation ------------------------- */

tpp_spec* tpp_spec_preset(const char* name) {
  return run_ptr([&]() -> tpp_spec* {
    if (!require_cstr(name, "name"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_spec{tpp::preset(name)};
  });
}

tpp_spec* tpp_spec_load(const char* path) {
  return run_ptr([&]() -> tpp_spec* {
    if (!require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_spec{tpp::load_spec(path)};
  });
}

tpp_status tpp_spec_save(const tpp_spec* spec, const char* path) {
  return run_status([&] {
    if (!require_handle(spec, "spec") || !require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::save_spec(spec->spec, path);
  });
}

tpp_status tpp_spec_validate(const tpp_spec* spec, double window_end) {
  return run_status([&] {
    if (!require_handle(spec, "spec"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::validate_spec(spec->spec, window_end);
  });
}

void tpp_spec_free(tpp_spec* spec) { delete spec; }

tpp_status tpp_intensity_at(const tpp_spec* spec, const double* history,
                            size_t count, double t, double* out) {
  return run_status([&] {
    if (!require_handle(spec, "spec") || !require_handle(out, "out"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (count > 0 && !history)
      tpp::fail(tpp::ErrorCode::InvalidArgument, "history is NULL");
    std::vector<double> h(history, history + count);
    *out = tpp::intensity_at(spec->spec, h, t);
  });
}

tpp_dataset* tpp_simulate(const tpp_spec* spec, double window_end, size_t n,
                          uint64_t seed, int threads) {
  return run_ptr([&]() -> tpp_dataset* {
    if (!require_handle(spec, "spec"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_dataset{
        tpp::simulate_dataset(spec->spec, window_end, n, seed, threads)};
  });
}

/* ---- kernel statistics ----------------------------------------------- */

tpp_status tpp_mmd2(const tpp_dataset* a, const tpp_dataset* b, double sigma,
                    double* out) {
  return run_status([&] {
    if (!require_handle(a, "dataset") || !require_handle(b, "dataset") ||
        !require_handle(out, "out"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (!(sigma > 0.0))
      tpp::fail(tpp::ErrorCode::InvalidArgument, "sigma must be positive");
    *out = tpp::mmd_squared(a->data, b->data, tpp::KernelConfig{sigma});
  });
}

tpp_status tpp_median_bandwidth(const tpp_dataset* data, uint64_t seed,
                                double* out) {
  return run_status([&] {
    if (!require_handle(data, "dataset") || !require_handle(out, "out"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    *out = tpp::median_bandwidth(data->data, 2000, seed).sigma;
  });
}

/* ---- gap policies ----------------------------------------------------- */

tpp_policy* tpp_policy_init(int hidden_dim, const char* dist, double scale,
                            uint64_t seed) {
  return run_ptr([&]() -> tpp_policy* {
    if (!require_cstr(dist, "dist"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_policy{tpp::init_policy(
        hidden_dim, tpp::gap_dist_from_name(dist), scale, seed)};
  });
}

tpp_policy* tpp_policy_load(const char* path) {
  return run_ptr([&]() -> tpp_policy* {
    if (!require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_policy{tpp::load_checkpoint(path).params};
  });
}

tpp_status tpp_policy_save(const tpp_policy* policy, const char* path) {
  return run_status([&] {
    if (!require_handle(policy, "policy") || !require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::Checkpoint ckpt;
    ckpt.params = policy->params;
    tpp::save_checkpoint(ckpt, path);
  });
}

void tpp_policy_free(tpp_policy* policy) { delete policy; }

int tpp_policy_hidden_dim(const tpp_policy* policy) {
  if (!require_handle(policy, "policy")) return 0;
  return policy->params.hidden_dim();
}

const char* tpp_policy_distribution(const tpp_policy* policy) {
  if (!require_handle(policy, "policy")) return "";
  return tpp::gap_dist_name(policy->params.dist);
}

tpp_dataset* tpp_policy_rollouts(const tpp_policy* policy, double window_end,
                                 size_t n, uint64_t seed, int threads) {
  return run_ptr([&]() -> tpp_dataset* {
    if (!require_handle(policy, "policy"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_dataset{tpp::policy_rollout_dataset(
        policy->params, window_end, n, seed, threads)};
  });
}

tpp_status tpp_policy_log_likelihood(const tpp_policy* policy,
                                     const double* times, size_t count,
                                     double window_end, double* out) {
  return run_status([&] {
    if (!require_handle(policy, "policy") || !require_handle(out, "out"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (count > 0 && !times)
      tpp::fail(tpp::ErrorCode::InvalidArgument, "times is NULL");
    tpp::EventSequence seq;
    seq.times.assign(times, times + count);
    seq.window_end = window_end;
    tpp::require_valid(seq);
    *out = tpp::log_likelihood(policy->params, seq);
  });
}

/* ---- training --------------------------------------------------------- */

tpp_config* tpp_config_default(void) { return new tpp_config; }

tpp_config* tpp_config_load(const char* path) {
  return run_ptr([&]() -> tpp_config* {
    if (!require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_config{tpp::parse_train_config(path)};
  });
}

void tpp_config_free(tpp_config* config) { delete config; }

void tpp_config_set_seed(tpp_config* config, uint64_t seed) {
  if (require_handle(config, "config")) config->cfg.seed = seed;
}

void tpp_config_set_threads(tpp_config* config, int threads) {
  if (require_handle(config, "config")) config->cfg.threads = threads;
}

void tpp_config_set_iterations(tpp_config* config, size_t iterations) {
  if (require_handle(config, "config")) config->cfg.iterations = iterations;
}

size_t tpp_config_iterations(const tpp_config* config) {
  if (!require_handle(config, "config")) return 0;
  return config->cfg.iterations;
}

size_t tpp_config_checkpoint_interval(const tpp_config* config) {
  if (!require_handle(config, "config")) return 0;
  return config->cfg.checkpoint_interval;
}

tpp_trainer* tpp_trainer_new(const tpp_dataset* expert,
                             const tpp_config* config) {
  return run_ptr([&]() -> tpp_trainer* {
    if (!require_handle(expert, "dataset") || !require_handle(config, "config"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::require_valid(expert->data);
    auto* t = new tpp_trainer{expert->data, config->cfg,
                              tpp::init_train_state(config->cfg)};
    return t;
  });
}

tpp_trainer* tpp_trainer_resume(const tpp_dataset* expert,
                                const tpp_config* config, const char* path) {
  return run_ptr([&]() -> tpp_trainer* {
    if (!require_handle(expert, "dataset") ||
        !require_handle(config, "config") || !require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::require_valid(expert->data);
    tpp::Checkpoint ckpt = tpp::load_checkpoint(path);
    if (!ckpt.has_train_state)
      tpp::fail(tpp::ErrorCode::Parse,
                std::string(path) + ": checkpoint has no optimizer state to resume from");
    if (ckpt.seed != config->cfg.seed)
      tpp::fail(tpp::ErrorCode::InvalidArgument,
                "checkpoint was written by a run with seed " +
                    std::to_string(ckpt.seed) + "; pass that seed to resume");
    if (ckpt.params.hidden_dim() != config->cfg.hidden_dim ||
        ckpt.params.dist != config->cfg.dist)
      tpp::fail(tpp::ErrorCode::InvalidArgument,
                "checkpoint policy shape disagrees with the configuration");
    auto* t = new tpp_trainer{expert->data, config->cfg, tpp::TrainState{}};
    t->state.params = std::move(ckpt.params);
    t->state.adam_m = std::move(ckpt.adam_m);
    t->state.adam_v = std::move(ckpt.adam_v);
    t->state.iteration = ckpt.iteration;
    return t;
  });
}

void tpp_trainer_free(tpp_trainer* trainer) { delete trainer; }

size_t tpp_trainer_iteration(const tpp_trainer* trainer) {
  if (!require_handle(trainer, "trainer")) return 0;
  return trainer->state.iteration;
}

tpp_status tpp_trainer_step(tpp_trainer* trainer, double* mmd2,
                            double* mean_return, double* grad_norm,
                            double* wall_ms) {
  return run_status([&] {
    if (!require_handle(trainer, "trainer"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::TrainTraceRow row =
        tpp::train_step(trainer->state, trainer->expert, trainer->cfg);
    if (mmd2) *mmd2 = row.mmd2;
    if (mean_return) *mean_return = row.mean_return;
    if (grad_norm) *grad_norm = row.grad_norm;
    if (wall_ms) *wall_ms = row.wall_ms;
  });
}

tpp_policy* tpp_trainer_policy(const tpp_trainer* trainer) {
  return run_ptr([&]() -> tpp_policy* {
    if (!require_handle(trainer, "trainer"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_policy{trainer->state.params};
  });
}

tpp_status tpp_trainer_save_checkpoint(const tpp_trainer* trainer,
                                       const char* path) {
  return run_status([&] {
    if (!require_handle(trainer, "trainer") || !require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::Checkpoint ckpt;
    ckpt.params = trainer->state.params;
    ckpt.has_train_state = true;
    ckpt.adam_m = trainer->state.adam_m;
    ckpt.adam_v = trainer->state.adam_v;
    ckpt.iteration = trainer->state.iteration;
    ckpt.seed = trainer->cfg.seed;
    tpp::save_checkpoint(ckpt, path);
  });
}

tpp_trace* tpp_trace_new(void) { return new tpp_trace; }

void tpp_trace_free(tpp_trace* trace) { delete trace; }

void tpp_trace_push(tpp_trace* trace, size_t iteration, double mmd2,
                    double mean_return, double grad_norm, double wall_ms) {
  if (!require_handle(trace, "trace")) return;
  trace->rows.push_back({iteration, mmd2, mean_return, grad_norm, wall_ms});
}

size_t tpp_trace_size(const tpp_trace* trace) {
  if (!require_handle(trace, "trace")) return 0;
  return trace->rows.size();
}

tpp_status tpp_trace_save(const tpp_trace* trace, const char* path,
                          int include_timing) {
  return run_status([&] {
    if (!require_handle(trace, "trace") || !require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::save_trace(trace->rows, path, include_timing != 0);
  });
}

/* ---- maximum-likelihood baselines ------------------------------------- */

tpp_fit* tpp_fit_hawkes(const tpp_dataset* data) {
  return run_ptr([&]() -> tpp_fit* {
    if (!require_handle(data, "dataset"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_fit{tpp::fit_hawkes(data->data)};
  });
}

tpp_fit* tpp_fit_ip(const tpp_dataset* data, int components) {
  return run_ptr([&]() -> tpp_fit* {
    if (!require_handle(data, "dataset"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_fit{tpp::fit_inhomogeneous_poisson(data->data, components)};
  });
}

tpp_fit* tpp_fit_sc(const tpp_dataset* data) {
  return run_ptr([&]() -> tpp_fit* {
    if (!require_handle(data, "dataset"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_fit{tpp::fit_self_correcting(data->data)};
  });
}

tpp_fit* tpp_fit_policy_mle(const tpp_dataset* data, int hidden_dim,
                            const char* dist, size_t iterations,
                            double learning_rate, size_t batch, uint64_t seed) {
  return run_ptr([&]() -> tpp_fit* {
    if (!require_handle(data, "dataset") || !require_cstr(dist, "dist"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::PolicyMleConfig cfg;
    cfg.hidden_dim = hidden_dim;
    cfg.dist = tpp::gap_dist_from_name(dist);
    cfg.iterations = iterations;
    cfg.learning_rate = learning_rate;
    cfg.batch = batch;
    cfg.seed = seed;
    return new tpp_fit{tpp::fit_policy_mle(data->data, cfg)};
  });
}

tpp_fit* tpp_fit_load(const char* path) {
  return run_ptr([&]() -> tpp_fit* {
    if (!require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_fit{tpp::load_fit(path)};
  });
}

tpp_status tpp_fit_save(const tpp_fit* fit, const char* path) {
  return run_status([&] {
    if (!require_handle(fit, "fit") || !require_cstr(path, "path"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::save_fit(fit->fit, path);
  });
}

void tpp_fit_free(tpp_fit* fit) { delete fit; }

const char* tpp_fit_model(const tpp_fit* fit) {
  if (!require_handle(fit, "fit")) return "";
  return tpp::fit_model_tag(fit->fit);
}

double tpp_fit_loglik(const tpp_fit* fit) {
  if (!require_handle(fit, "fit")) return 0.0;
  return std::visit([](const auto& f) { return f.loglik; }, fit->fit);
}

tpp_dataset* tpp_fit_resimulate(const tpp_fit* fit, double window_end,
                                size_t n, uint64_t seed, int threads) {
  return run_ptr([&]() -> tpp_dataset* {
    if (!require_handle(fit, "fit"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return new tpp_dataset{
        rollout_or_resimulate(fit->fit, window_end, n, seed, threads)};
  });
}

/* ---- evaluation ------------------------------------------------------- */

tpp_report* tpp_report_new(const tpp_dataset* expert, size_t bins,
                           double sigma, int threads) {
  return run_ptr([&]() -> tpp_report* {
    if (!require_handle(expert, "dataset"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (bins < 1)
      tpp::fail(tpp::ErrorCode::InvalidArgument, "need at least one bin");
    tpp::require_valid(expert->data);
    auto* r = new tpp_report;
    r->expert = expert->data;
    r->bins = bins;
    if (sigma > 0.0) r->sigma = sigma;
    r->threads = threads;
    return r;
  });
}

tpp_status tpp_report_add_candidate(tpp_report* report, const char* name,
                                    const tpp_dataset* data) {
  return run_status([&] {
    if (!require_handle(report, "report") || !require_cstr(name, "name") ||
        !require_handle(data, "dataset"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::require_valid(data->data);
    report->candidates.emplace_back(name, data->data);
    report->extras.emplace_back();
    report->cache.reset();
  });
}

void tpp_report_free(tpp_report* report) { delete report; }

size_t tpp_report_candidates(const tpp_report* report) {
  if (!require_handle(report, "report")) return 0;
  return report->candidates.size();
}

double tpp_report_sigma(const tpp_report* report) {
  if (!require_handle(report, "report")) return 0.0;
  try {
    return report->ensure().kernel_sigma;
  } catch (const tpp::Error& e) {
    record_failure(map_code(e.code()), e.what());
    return 0.0;
  }
}

tpp_status tpp_report_candidate_mae(const tpp_report* report, size_t index,
                                    double* out) {
  return run_status([&] {
    if (!require_handle(report, "report") || !require_handle(out, "out"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (index >= report->candidates.size())
      tpp::fail(tpp::ErrorCode::InvalidArgument, "candidate index out of range");
    *out = report->ensure().candidates[index].intensity_mae;
  });
}

tpp_status tpp_report_candidate_mmd2(const tpp_report* report, size_t index,
                                     double* out) {
  return run_status([&] {
    if (!require_handle(report, "report") || !require_handle(out, "out"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (index >= report->candidates.size())
      tpp::fail(tpp::ErrorCode::InvalidArgument, "candidate index out of range");
    *out = report->ensure().candidates[index].mmd2;
  });
}

tpp_rescale* tpp_rescale_spec(const tpp_dataset* data, const tpp_spec* spec,
                              size_t quantiles) {
  return run_ptr([&]() -> tpp_rescale* {
    if (!require_handle(data, "dataset") || !require_handle(spec, "spec"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return build_rescale(data->data, quantiles,
                         [&](const tpp::EventSequence& seq) {
                           return tpp::time_rescale(seq, spec->spec);
                         });
  });
}

tpp_rescale* tpp_rescale_fit(const tpp_dataset* data, const tpp_fit* fit,
                             size_t quantiles) {
  return run_ptr([&]() -> tpp_rescale* {
    if (!require_handle(data, "dataset") || !require_handle(fit, "fit"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (const auto* h = std::get_if<tpp::HawkesFit>(&fit->fit)) {
      tpp::IntensitySpec spec{tpp::HawkesIntensity{h->mu, h->alpha, h->decay}};
      return build_rescale(data->data, quantiles,
                           [&](const tpp::EventSequence& seq) {
                             return tpp::time_rescale(seq, spec);
                           });
    }
    if (const auto* m = std::get_if<tpp::GaussianMixtureFit>(&fit->fit))
      return build_rescale(data->data, quantiles,
                           [&](const tpp::EventSequence& seq) {
                             return tpp::time_rescale(seq, m->intensity);
                           });
    if (const auto* s = std::get_if<tpp::SelfCorrectingFit>(&fit->fit)) {
      tpp::IntensitySpec spec{tpp::SelfCorrectingIntensity{s->mu, s->alpha}};
      return build_rescale(data->data, quantiles,
                           [&](const tpp::EventSequence& seq) {
                             return tpp::time_rescale(seq, spec);
                           });
    }
    const auto& pm = std::get<tpp::PolicyMleResult>(fit->fit);
    return build_rescale(data->data, quantiles,
                         [&](const tpp::EventSequence& seq) {
                           return tpp::time_rescale(seq, pm.params);
                         });
  });
}

tpp_rescale* tpp_rescale_policy(const tpp_dataset* data,
                                const tpp_policy* policy, size_t quantiles) {
  return run_ptr([&]() -> tpp_rescale* {
    if (!require_handle(data, "dataset") || !require_handle(policy, "policy"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    return build_rescale(data->data, quantiles,
                         [&](const tpp::EventSequence& seq) {
                           return tpp::time_rescale(seq, policy->params);
                         });
  });
}

void tpp_rescale_free(tpp_rescale* rescale) { delete rescale; }

size_t tpp_rescale_gap_count(const tpp_rescale* rescale) {
  if (!require_handle(rescale, "rescale")) return 0;
  return rescale->gap_count;
}

tpp_status tpp_rescale_pooled_ks(const tpp_rescale* rescale, double* statistic,
                                 double* p_value) {
  return run_status([&] {
    if (!require_handle(rescale, "rescale"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (!rescale->has_pooled)
      tpp::fail(tpp::ErrorCode::InsufficientData,
                "no rescaled gaps to test");
    if (statistic) *statistic = rescale->pooled_statistic;
    if (p_value) *p_value = rescale->pooled_p;
  });
}

tpp_status tpp_rescale_ks_pass_rate(const tpp_rescale* rescale, double* rate,
                                    size_t* sequences) {
  return run_status([&] {
    if (!require_handle(rescale, "rescale"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (rescale->sequences_tested == 0)
      tpp::fail(tpp::ErrorCode::InsufficientData,
                "no sequence had rescaled gaps to test");
    if (rate) *rate = rescale->pass_rate;
    if (sequences) *sequences = rescale->sequences_tested;
  });
}

size_t tpp_rescale_qq_size(const tpp_rescale* rescale) {
  if (!require_handle(rescale, "rescale")) return 0;
  return rescale->qq.size();
}

size_t tpp_rescale_qq(const tpp_rescale* rescale, double* theoretical,
                      double* empirical, size_t capacity) {
  if (!require_handle(rescale, "rescale")) return 0;
  const std::size_t n = std::min(capacity, rescale->qq.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (theoretical) theoretical[i] = rescale->qq[i].first;
    if (empirical) empirical[i] = rescale->qq[i].second;
  }
  return rescale->qq.size();
}

tpp_status tpp_report_attach_rescale(tpp_report* report, size_t index,
                                     const tpp_rescale* rescale) {
  return run_status([&] {
    if (!require_handle(report, "report") || !require_handle(rescale, "rescale"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    if (index >= report->extras.size())
      tpp::fail(tpp::ErrorCode::InvalidArgument, "candidate index out of range");
    tpp::CandidateEvalExtra& extra = report->extras[index];
    if (rescale->sequences_tested > 0) {
      extra.ks_pass_rate = rescale->pass_rate;
      extra.ks_sequences = rescale->sequences_tested;
    } else {
      extra.ks_pass_rate.reset();
      extra.ks_sequences = 0;
    }
    extra.qq = rescale->qq;
    extra.pvalue_cdf = rescale->pcdf;
  });
}

tpp_status tpp_report_write(const tpp_report* report, const char* dir) {
  return run_status([&] {
    if (!require_handle(report, "report") || !require_cstr(dir, "dir"))
      tpp::fail(tpp::ErrorCode::InvalidArgument, g_message);
    tpp::write_report_files(dir, report->ensure(), report->extras);
  });
}

} /* extern "C" */
