#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "io.hpp"
#include "json.hpp"
#include "simulate.hpp"

using namespace tpp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static fs::path p = [] {
    fs::path q = fs::temp_directory_path() / "tppkit_io_tests";
    fs::remove_all(q);
    fs::create_directories(q);
    return q;
  }();
  return p;
}

std::string scratch(const std::string& name) {
  return (scratch_dir() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

ErrorCode thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  REQUIRE(false);
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("event files round-trip bitwise") {
  Dataset data = simulate_dataset(preset("hp"), 15.0, 20, 7, 4);
  const std::string path = scratch("events.jsonl");
  save_events(data, path);
  Dataset back = load_events(path);

  CHECK(back.window_end == data.window_end);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    REQUIRE(back.sequences[i].times.size() == data.sequences[i].times.size());
    for (std::size_t k = 0; k < data.sequences[i].times.size(); ++k)
      CHECK(back.sequences[i].times[k] == data.sequences[i].times[k]);
  }

  // saving the reloaded dataset reproduces the file byte for byte
  const std::string again = scratch("events2.jsonl");
  save_events(back, again);
  CHECK(slurp(again) == slurp(path));

  // first line is a header, then one object per sequence
  std::string text = slurp(path);
  CHECK(text.substr(0, text.find('\n')).find("\"format\":1") !=
        std::string::npos);
}

TEST_CASE("event file awkward doubles survive") {
  Dataset data;
  data.window_end = 1.0;
  data.sequences.push_back(
      {{0.1 + 0.2, 0.42345678901234567, 0x1.fffffffffffffp-1}, 1.0});
  const std::string path = scratch("awkward.jsonl");
  save_events(data, path);
  Dataset back = load_events(path);
  for (int k = 0; k < 3; ++k)
    CHECK(back.sequences[0].times[k] == data.sequences[0].times[k]);
}

TEST_CASE("event file failure modes") {
  CHECK(thrown_code([] { load_events(scratch("missing.jsonl")); }) ==
        ErrorCode::Io);

  spit(scratch("garbage.jsonl"), "not json\n");
  CHECK(thrown_code([] { load_events(scratch("garbage.jsonl")); }) ==
        ErrorCode::Parse);

  spit(scratch("noheader.jsonl"), "{\"t\": [0.5]}\n");
  CHECK(thrown_code([] { load_events(scratch("noheader.jsonl")); }) ==
        ErrorCode::Parse);

  spit(scratch("badformat.jsonl"), "{\"T\": 10.0, \"format\": 2}\n");
  CHECK(thrown_code([] { load_events(scratch("badformat.jsonl")); }) ==
        ErrorCode::Parse);

  spit(scratch("empty.jsonl"), "");
  CHECK(thrown_code([] { load_events(scratch("empty.jsonl")); }) ==
        ErrorCode::Parse);

  spit(scratch("badtime.jsonl"),
       "{\"T\": 10.0, \"format\": 1}\n{\"t\": [3.0, 2.0]}\n");
  CHECK(thrown_code([] { load_events(scratch("badtime.jsonl")); }) ==
        ErrorCode::NonMonotonic);

  spit(scratch("outside.jsonl"),
       "{\"T\": 10.0, \"format\": 1}\n{\"t\": [11.0]}\n");
  CHECK(thrown_code([] { load_events(scratch("outside.jsonl")); }) ==
        ErrorCode::OutOfWindow);
}

TEST_CASE("checkpoint round-trips weights exactly") {
  Checkpoint ckpt;
  ckpt.params = init_policy(5, GapDist::Rayleigh, 0.2, 99);

  const std::string path = scratch("plain.ckpt");
  save_checkpoint(ckpt, path);
  Checkpoint back = load_checkpoint(path);

  CHECK(back.params.dist == GapDist::Rayleigh);
  CHECK(back.params.V == ckpt.params.V);
  CHECK(back.params.W == ckpt.params.W);
  CHECK(back.params.u == ckpt.params.u);
  CHECK(back.params.c == ckpt.params.c);
  CHECK_FALSE(back.has_train_state);
}

TEST_CASE("checkpoint carries optimizer state when asked") {
  Checkpoint ckpt;
  ckpt.params = init_policy(3, GapDist::Exponential, 0.3, 1);
  ckpt.has_train_state = true;
  ckpt.adam_m = PolicyGrad::zero(3);
  ckpt.adam_v = PolicyGrad::zero(3);
  ckpt.adam_m.V << 0.25, -0.5, 1e-17;
  ckpt.adam_v.u << 4.0, 0.0, 123.456;
  ckpt.adam_m.W(1, 2) = -7.0;
  ckpt.adam_v.c = 0.125;
  ckpt.iteration = 41;
  ckpt.seed = 0xFEEDFACEull;

  const std::string path = scratch("state.ckpt");
  save_checkpoint(ckpt, path);
  Checkpoint back = load_checkpoint(path);

  CHECK(back.has_train_state);
  CHECK(back.iteration == 41);
  CHECK(back.seed == 0xFEEDFACEull);
  CHECK(back.adam_m.V == ckpt.adam_m.V);
  CHECK(back.adam_m.W == ckpt.adam_m.W);
  CHECK(back.adam_v.u == ckpt.adam_v.u);
  CHECK(back.adam_v.c == ckpt.adam_v.c);
}

TEST_CASE("checkpoint failure modes") {
  CHECK(thrown_code([] { load_checkpoint(scratch("no.ckpt")); }) ==
        ErrorCode::Io);

  spit(scratch("notckpt.bin"), "{\"model\": \"hawkes\"}");
  CHECK(thrown_code([] { load_checkpoint(scratch("notckpt.bin")); }) ==
        ErrorCode::Parse);

  Checkpoint ckpt;
  ckpt.params = init_policy(2, GapDist::Exponential, 0.1, 5);
  save_checkpoint(ckpt, scratch("whole.ckpt"));
  std::string bytes = slurp(scratch("whole.ckpt"));

  spit(scratch("short.ckpt"), bytes.substr(0, bytes.size() - 3));
  CHECK(thrown_code([] { load_checkpoint(scratch("short.ckpt")); }) ==
        ErrorCode::Parse);

  spit(scratch("long.ckpt"), bytes + "x");
  CHECK(thrown_code([] { load_checkpoint(scratch("long.ckpt")); }) ==
        ErrorCode::Parse);
}

TEST_CASE("fit files round-trip each model") {
  const std::string path = scratch("fit.json");

  HawkesFit h{1.75, 0.375, 2.0, -123.4567890123, 321};
  save_fit(FitResult{h}, path);
  FitResult hr = load_fit(path);
  REQUIRE(std::holds_alternative<HawkesFit>(hr));
  CHECK(std::get<HawkesFit>(hr).mu == h.mu);
  CHECK(std::get<HawkesFit>(hr).alpha == h.alpha);
  CHECK(std::get<HawkesFit>(hr).decay == h.decay);
  CHECK(std::get<HawkesFit>(hr).loglik == h.loglik);
  CHECK(fit_model_tag(hr) == std::string("hawkes"));

  GaussianMixtureFit m;
  m.intensity.components = {{2.5, 1.0, 0.75}, {0.1, 9.0, 3.0}};
  m.loglik = -45.5;
  m.iterations = 17;
  save_fit(FitResult{m}, path);
  FitResult mr = load_fit(path);
  REQUIRE(std::holds_alternative<GaussianMixtureFit>(mr));
  const auto& mc = std::get<GaussianMixtureFit>(mr).intensity.components;
  REQUIRE(mc.size() == 2);
  CHECK(mc[1].weight == 0.1);
  CHECK(mc[1].center == 9.0);
  CHECK(mc[1].width == 3.0);
  CHECK(fit_model_tag(mr) == std::string("ip"));

  SelfCorrectingFit s{1.125, 0.25, -9.875, 55};
  save_fit(FitResult{s}, path);
  FitResult sr = load_fit(path);
  REQUIRE(std::holds_alternative<SelfCorrectingFit>(sr));
  CHECK(std::get<SelfCorrectingFit>(sr).mu == s.mu);
  CHECK(std::get<SelfCorrectingFit>(sr).alpha == s.alpha);
  CHECK(fit_model_tag(sr) == std::string("sc"));

  PolicyMleResult pm;
  pm.params = init_policy(4, GapDist::Rayleigh, 0.15, 3);
  pm.loglik = -77.25;
  save_fit(FitResult{pm}, path);
  FitResult pr = load_fit(path);
  REQUIRE(std::holds_alternative<PolicyMleResult>(pr));
  const auto& pp = std::get<PolicyMleResult>(pr).params;
  CHECK(pp.dist == GapDist::Rayleigh);
  CHECK(pp.V == pm.params.V);
  CHECK(pp.W == pm.params.W);
  CHECK(pp.u == pm.params.u);
  CHECK(pp.c == pm.params.c);
  CHECK(std::get<PolicyMleResult>(pr).loglik == pm.loglik);
  CHECK(fit_model_tag(pr) == std::string("policy-mle"));
}

TEST_CASE("fit file failure modes") {
  spit(scratch("notag.json"), "{\"mu\": 1.0}");
  CHECK(thrown_code([] { load_fit(scratch("notag.json")); }) ==
        ErrorCode::Parse);

  spit(scratch("badtag.json"), "{\"model\": \"renewal\"}");
  CHECK(thrown_code([] { load_fit(scratch("badtag.json")); }) ==
        ErrorCode::Parse);

  spit(scratch("missingfield.json"), "{\"model\": \"hawkes\", \"mu\": 1.0}");
  CHECK(thrown_code([] { load_fit(scratch("missingfield.json")); }) ==
        ErrorCode::Parse);
}

TEST_CASE("trace CSV layout and timing suppression") {
  TrainTrace trace;
  trace.push_back({0, 0.5, -1.25, 3.0, 17.25});
  trace.push_back({1, 0.0625, 2.0, 0.0, 8.5});

  const std::string path = scratch("trace.csv");
  save_trace(trace, path);
  CHECK(slurp(path) ==
        "iter,mmd2,mean_return,grad_norm,wall_ms\n"
        "0,0.5,-1.25,3,0\n"
        "1,0.0625,2,0,0\n");

  save_trace(trace, path, /*include_timing=*/true);
  CHECK(slurp(path) ==
        "iter,mmd2,mean_return,grad_norm,wall_ms\n"
        "0,0.5,-1.25,3,17.25\n"
        "1,0.0625,2,0,8.5\n");
}

TEST_CASE("intensity spec files round-trip every variant") {
  const std::string path = scratch("spec.json");

  for (const char* name : {"ip", "hp", "ip-hp1", "ip-hp2"}) {
    IntensitySpec spec = preset(name);
    save_spec(spec, path);
    IntensitySpec back = load_spec(path);
    // equality through behavior: same intensity along a grid
    Dataset probe = simulate_dataset(spec, 15.0, 1, 11, 1);
    const auto& hist = probe.sequences[0].times;
    for (double t = 0.25; t < 15.0; t += 0.5)
      CHECK(intensity_at(back, hist, t) == intensity_at(spec, hist, t));
  }

  IntensitySpec sc{SelfCorrectingIntensity{0.8, 0.2}};
  save_spec(sc, path);
  IntensitySpec sc_back = load_spec(path);
  CHECK(std::get_if<SelfCorrectingIntensity>(&sc_back.value) != nullptr);
  CHECK(std::get_if<SelfCorrectingIntensity>(&sc_back.value)->mu == 0.8);

  spit(scratch("badspec.json"), "{\"type\": \"cyclic\"}");
  CHECK(thrown_code([] { load_spec(scratch("badspec.json")); }) ==
        ErrorCode::Parse);
  spit(scratch("badsum.json"), "{\"type\": \"sum\"}");
  CHECK(thrown_code([] { load_spec(scratch("badsum.json")); }) ==
        ErrorCode::Parse);
}

TEST_CASE("train config parser") {
  const std::string path = scratch("train.cfg");
  spit(path,
       "# full configuration\n"
       "hidden_dim = 16\n"
       "distribution = rayleigh  # trailing comment\n"
       "init_scale = 0.05\n"
       "expert_batch = 8\n"
       "rollout_batch = 12\n"
       "iterations = 250\n"
       "learning_rate = 0.01\n"
       "optimizer = sgd\n"
       "adam_beta1 = 0.8\n"
       "adam_beta2 = 0.95\n"
       "adam_epsilon = 1e-7\n"
       "\n"
       "variance_reduction = reward_to_go\n"
       "kernel = fixed\n"
       "kernel_sigma = 2.5\n"
       "normalize_reward = true\n"
       "checkpoint_interval = 50\n");
  TrainConfig cfg = parse_train_config(path);
  CHECK(cfg.hidden_dim == 16);
  CHECK(cfg.dist == GapDist::Rayleigh);
  CHECK(cfg.init_scale == 0.05);
  CHECK(cfg.expert_batch == 8);
  CHECK(cfg.rollout_batch == 12);
  CHECK(cfg.iterations == 250);
  CHECK(cfg.learning_rate == 0.01);
  CHECK(cfg.optimizer == Optimizer::Sgd);
  CHECK(cfg.adam_beta1 == 0.8);
  CHECK(cfg.adam_beta2 == 0.95);
  CHECK(cfg.adam_epsilon == 1e-7);
  CHECK(cfg.variance_reduction == VarianceReduction::RewardToGo);
  CHECK(cfg.kernel_source == KernelSource::Fixed);
  CHECK(cfg.kernel_sigma == 2.5);
  CHECK(cfg.normalize_reward);
  CHECK(cfg.checkpoint_interval == 50);

  // empty file keeps the defaults
  spit(scratch("empty.cfg"), "# nothing here\n");
  TrainConfig dflt = parse_train_config(scratch("empty.cfg"));
  CHECK(dflt.hidden_dim == 64);
  CHECK(dflt.optimizer == Optimizer::Adam);
  CHECK(dflt.variance_reduction == VarianceReduction::RewardToGoBaseline);

  spit(scratch("unknown.cfg"), "hidden_dim = 4\nwindow = 15\n");
  try {
    parse_train_config(scratch("unknown.cfg"));
    REQUIRE(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    // the message pinpoints the offending line
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    CHECK(std::string(e.what()).find("window") != std::string::npos);
  }

  spit(scratch("noeq.cfg"), "hidden_dim 4\n");
  CHECK(thrown_code([] { parse_train_config(scratch("noeq.cfg")); }) ==
        ErrorCode::Parse);
  spit(scratch("badnum.cfg"), "learning_rate = fast\n");
  CHECK(thrown_code([] { parse_train_config(scratch("badnum.cfg")); }) ==
        ErrorCode::Parse);
  spit(scratch("badbatch.cfg"), "rollout_batch = 1\n");
  CHECK(thrown_code([] { parse_train_config(scratch("badbatch.cfg")); }) ==
        ErrorCode::Parse);
}

TEST_CASE("report files are written per candidate") {
  Dataset expert = simulate_dataset(preset("hp"), 15.0, 25, 21, 4);
  Dataset cand = simulate_dataset(preset("ip"), 15.0, 25, 22, 4);
  ComparisonReport rep =
      compare_report(expert, {{"my model!", &cand}, {"plain", &cand}}, 10);

  std::vector<CandidateEvalExtra> extras(2);
  extras[0].ks_pass_rate = 0.75;
  extras[0].ks_sequences = 25;
  extras[0].qq = {{0.1, 0.2}, {0.5, 0.4}};
  extras[0].pvalue_cdf = {{0.03, 0.5}, {0.9, 1.0}};

  const std::string dir = (scratch_dir() / "report").string();
  write_report_files(dir, rep, extras);

  CHECK(fs::exists(fs::path(dir) / "intensity.csv"));
  CHECK(fs::exists(fs::path(dir) / "summary.json"));
  // unsafe characters in the candidate name are replaced in filenames
  CHECK(fs::exists(fs::path(dir) / "qq_my_model_.csv"));
  CHECK(fs::exists(fs::path(dir) / "pvalues_my_model_.csv"));
  CHECK_FALSE(fs::exists(fs::path(dir) / "qq_plain.csv"));

  std::string intensity = slurp((fs::path(dir) / "intensity.csv").string());
  CHECK(intensity.substr(0, intensity.find('\n')) ==
        "bin_center,expert,my_model_,plain");

  nlohmann::json summary = nlohmann::json::parse(
      slurp((fs::path(dir) / "summary.json").string()));
  CHECK(summary.at("kernel_sigma").get<double>() == rep.kernel_sigma);
  REQUIRE(summary.at("candidates").size() == 2);
  CHECK(summary.at("candidates").at(0).at("name") == "my model!");
  CHECK(summary.at("candidates").at(0).at("ks_pass_rate").get<double>() ==
        0.75);
  CHECK_FALSE(summary.at("candidates").at(1).contains("ks_pass_rate"));
  CHECK(summary.at("candidates").at(1).at("mmd2").get<double>() ==
        rep.candidates[1].mmd2);

  CHECK(slurp((fs::path(dir) / "qq_my_model_.csv").string()) ==
        "theoretical,empirical\n0.1,0.2\n0.5,0.4\n");

  // extras must be empty or match the candidate count
  CHECK_THROWS_AS(
      write_report_files(dir, rep, std::vector<CandidateEvalExtra>(1)), Error);
}
