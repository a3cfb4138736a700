#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tppkit.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static fs::path p = [] {
    fs::path q = fs::temp_directory_path() / "tppkit_capi_tests";
    fs::remove_all(q);
    fs::create_directories(q);
    return q;
  }();
  return p;
}

std::string scratch(const std::string& name) {
  return (scratch_dir() / name).string();
}

std::vector<double> sequence_times(const tpp_dataset* d, size_t i) {
  std::vector<double> out(tpp_dataset_sequence_length(d, i));
  tpp_dataset_sequence_times(d, i, out.data(), out.size());
  return out;
}

bool datasets_equal(const tpp_dataset* a, const tpp_dataset* b) {
  if (tpp_dataset_window(a) != tpp_dataset_window(b)) return false;
  if (tpp_dataset_size(a) != tpp_dataset_size(b)) return false;
  for (size_t i = 0; i < tpp_dataset_size(a); ++i)
    if (sequence_times(a, i) != sequence_times(b, i)) return false;
  return true;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(tpp_version()) == "0.1.0");
  CHECK(std::string(tpp_status_name(TPP_OK)) == "ok");
  CHECK(std::string(tpp_status_name(TPP_ERR_UNKNOWN_PRESET)) ==
        "unknown_preset");
  CHECK(std::string(tpp_status_name(TPP_ERR_PARSE)) == "parse");
}

TEST_CASE("dataset lifecycle and accessors") {
  tpp_dataset* d = tpp_dataset_new(10.0);
  REQUIRE(d != nullptr);
  CHECK(tpp_dataset_window(d) == 10.0);
  CHECK(tpp_dataset_size(d) == 0);

  const double seq0[] = {0.5, 1.5, 9.0};
  const double seq1[] = {2.25};
  CHECK(tpp_dataset_add_sequence(d, seq0, 3) == TPP_OK);
  CHECK(tpp_dataset_add_sequence(d, seq1, 1) == TPP_OK);
  CHECK(tpp_dataset_add_sequence(d, nullptr, 0) == TPP_OK);  // empty is legal

  CHECK(tpp_dataset_size(d) == 3);
  CHECK(tpp_dataset_total_events(d) == 4);
  CHECK(tpp_dataset_sequence_length(d, 0) == 3);
  CHECK(tpp_dataset_sequence_length(d, 2) == 0);
  CHECK(sequence_times(d, 0) == std::vector<double>{0.5, 1.5, 9.0});

  // capacity clamps the copy but the return value is the full length
  double two[2] = {0, 0};
  CHECK(tpp_dataset_sequence_times(d, 0, two, 2) == 3);
  CHECK(two[0] == 0.5);
  CHECK(two[1] == 1.5);

  // rejected sequences leave the dataset unchanged
  const double bad[] = {3.0, 2.0};
  CHECK(tpp_dataset_add_sequence(d, bad, 2) == TPP_ERR_NON_MONOTONIC);
  CHECK(tpp_last_status() == TPP_ERR_NON_MONOTONIC);
  CHECK(std::strlen(tpp_last_error()) > 0);
  const double outside[] = {10.0};
  CHECK(tpp_dataset_add_sequence(d, outside, 1) == TPP_ERR_OUT_OF_WINDOW);
  CHECK(tpp_dataset_size(d) == 3);

  CHECK(tpp_dataset_sequence_length(d, 9) == 0);
  CHECK(tpp_last_status() == TPP_ERR_INVALID_ARGUMENT);

  const std::string path = scratch("roundtrip.jsonl");
  CHECK(tpp_dataset_save(d, path.c_str()) == TPP_OK);
  tpp_dataset* back = tpp_dataset_load(path.c_str());
  REQUIRE(back != nullptr);
  CHECK(datasets_equal(d, back));

  tpp_dataset_free(back);
  tpp_dataset_free(d);

  CHECK(tpp_dataset_new(-1.0) == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_INVALID_ARGUMENT);
  CHECK(tpp_dataset_load(scratch("absent.jsonl").c_str()) == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_IO);
}

TEST_CASE("null handles are reported, not crashed on") {
  CHECK(tpp_dataset_window(nullptr) == 0.0);
  CHECK(tpp_last_status() == TPP_ERR_INVALID_ARGUMENT);
  CHECK(tpp_dataset_size(nullptr) == 0);
  CHECK(tpp_policy_hidden_dim(nullptr) == 0);
  CHECK(std::string(tpp_policy_distribution(nullptr)).empty());
  CHECK(tpp_trainer_step(nullptr, nullptr, nullptr, nullptr, nullptr) ==
        TPP_ERR_INVALID_ARGUMENT);
  CHECK(tpp_spec_preset(nullptr) == nullptr);
}

TEST_CASE("spec presets, files, validation, intensity") {
  tpp_spec* hp = tpp_spec_preset("HP");  // names are case-insensitive
  REQUIRE(hp != nullptr);
  CHECK(tpp_spec_preset("IP_HP1") != nullptr);

  CHECK(tpp_spec_preset("nope") == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_UNKNOWN_PRESET);

  double out = 0.0;
  CHECK(tpp_intensity_at(hp, nullptr, 0, 0.0, &out) == TPP_OK);
  CHECK(out == 2.0);  // baseline of the self-exciting preset
  const double hist[] = {1.0};
  CHECK(tpp_intensity_at(hp, hist, 1, 1.5, &out) == TPP_OK);
  CHECK(out ==
        doctest::Approx(2.0 + 0.5 * std::exp(-0.5)).epsilon(1e-15));
  // history is strict: the event at t itself does not excite yet
  CHECK(tpp_intensity_at(hp, hist, 1, 1.0, &out) == TPP_OK);
  CHECK(out == 2.0);

  CHECK(tpp_spec_validate(hp, 15.0) == TPP_OK);

  const std::string path = scratch("spec.json");
  CHECK(tpp_spec_save(hp, path.c_str()) == TPP_OK);
  tpp_spec* back = tpp_spec_load(path.c_str());
  REQUIRE(back != nullptr);
  double reloaded = 0.0;
  CHECK(tpp_intensity_at(back, hist, 1, 1.5, &reloaded) == TPP_OK);
  CHECK(tpp_intensity_at(hp, hist, 1, 1.5, &out) == TPP_OK);
  CHECK(reloaded == out);
  tpp_spec_free(back);
  tpp_spec_free(hp);

  // a rate that goes negative inside the window fails validation
  std::ofstream(scratch("neg.json"))
      << "{\"type\": \"linear\", \"slope\": -1.0, \"intercept\": 1.0}\n";
  tpp_spec* neg = tpp_spec_load(scratch("neg.json").c_str());
  REQUIRE(neg != nullptr);
  CHECK(tpp_spec_validate(neg, 10.0) == TPP_ERR_NEGATIVE_INTENSITY);
  CHECK(tpp_spec_validate(neg, 0.5) == TPP_OK);
  tpp_spec_free(neg);
}

TEST_CASE("simulation is reproducible through the C interface") {
  tpp_spec* hp = tpp_spec_preset("hp");
  REQUIRE(hp != nullptr);
  tpp_dataset* a = tpp_simulate(hp, 15.0, 8, 42, 1);
  tpp_dataset* b = tpp_simulate(hp, 15.0, 8, 42, 4);
  tpp_dataset* c = tpp_simulate(hp, 15.0, 8, 43, 1);
  REQUIRE(a != nullptr);
  REQUIRE(b != nullptr);
  REQUIRE(c != nullptr);
  CHECK(datasets_equal(a, b));
  CHECK_FALSE(datasets_equal(a, c));
  CHECK(tpp_dataset_total_events(a) > 0);
  tpp_dataset_free(a);
  tpp_dataset_free(b);
  tpp_dataset_free(c);
  tpp_spec_free(hp);
}

TEST_CASE("kernel statistics") {
  tpp_dataset* a = tpp_dataset_new(5.0);
  tpp_dataset* b = tpp_dataset_new(5.0);
  const double ta[] = {0.0};
  const double tb[] = {1.0};
  REQUIRE(tpp_dataset_add_sequence(a, ta, 1) == TPP_OK);
  REQUIRE(tpp_dataset_add_sequence(b, tb, 1) == TPP_OK);

  double mmd2 = -1.0;
  CHECK(tpp_mmd2(a, b, 1.0, &mmd2) == TPP_OK);
  CHECK(mmd2 == doctest::Approx(2.0 - 2.0 * std::exp(-0.5)).epsilon(1e-15));
  CHECK(tpp_mmd2(a, a, 1.0, &mmd2) == TPP_OK);
  CHECK(mmd2 == 0.0);
  CHECK(tpp_mmd2(a, b, 0.0, &mmd2) == TPP_ERR_INVALID_ARGUMENT);

  tpp_dataset* m = tpp_dataset_new(5.0);
  const double tm[] = {0.0, 1.0, 3.0};
  REQUIRE(tpp_dataset_add_sequence(m, tm, 3) == TPP_OK);
  double sigma = 0.0;
  CHECK(tpp_median_bandwidth(m, 0, &sigma) == TPP_OK);
  CHECK(sigma == 2.0);  // pairwise distances 1, 2, 3

  double none = 0.0;
  CHECK(tpp_median_bandwidth(a, 0, &none) == TPP_ERR_DEGENERATE_DATA);

  tpp_dataset_free(m);
  tpp_dataset_free(b);
  tpp_dataset_free(a);
}

TEST_CASE("policy handles") {
  tpp_policy* p = tpp_policy_init(6, "rayleigh", 0.2, 11);
  REQUIRE(p != nullptr);
  CHECK(tpp_policy_hidden_dim(p) == 6);
  CHECK(std::string(tpp_policy_distribution(p)) == "rayleigh");

  CHECK(tpp_policy_init(0, "rayleigh", 0.2, 11) == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_INVALID_ARGUMENT);
  CHECK(tpp_policy_init(4, "weibull", 0.2, 11) == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_INVALID_ARGUMENT);

  tpp_dataset* r1 = tpp_policy_rollouts(p, 12.0, 6, 3, 1);
  tpp_dataset* r2 = tpp_policy_rollouts(p, 12.0, 6, 3, 4);
  REQUIRE(r1 != nullptr);
  REQUIRE(r2 != nullptr);
  CHECK(datasets_equal(r1, r2));
  CHECK(tpp_dataset_window(r1) == 12.0);

  // weights survive a save/load cycle: identical rollouts
  const std::string path = scratch("policy.ckpt");
  CHECK(tpp_policy_save(p, path.c_str()) == TPP_OK);
  tpp_policy* q = tpp_policy_load(path.c_str());
  REQUIRE(q != nullptr);
  CHECK(tpp_policy_hidden_dim(q) == 6);
  tpp_dataset* r3 = tpp_policy_rollouts(q, 12.0, 6, 3, 1);
  REQUIRE(r3 != nullptr);
  CHECK(datasets_equal(r1, r3));

  double ll = 1.0;
  CHECK(tpp_policy_log_likelihood(p, nullptr, 0, 12.0, &ll) == TPP_OK);
  CHECK(ll == 0.0);
  std::vector<double> times = sequence_times(r1, 0);
  if (!times.empty()) {
    CHECK(tpp_policy_log_likelihood(p, times.data(), times.size(), 12.0,
                                    &ll) == TPP_OK);
    CHECK(std::isfinite(ll));
  }

  tpp_dataset_free(r3);
  tpp_dataset_free(r2);
  tpp_dataset_free(r1);
  tpp_policy_free(q);
  tpp_policy_free(p);
}

TEST_CASE("config handles") {
  tpp_config* cfg = tpp_config_default();
  REQUIRE(cfg != nullptr);
  CHECK(tpp_config_iterations(cfg) == 2000);
  CHECK(tpp_config_checkpoint_interval(cfg) == 0);
  tpp_config_set_iterations(cfg, 7);
  CHECK(tpp_config_iterations(cfg) == 7);
  tpp_config_free(cfg);

  std::ofstream(scratch("train.cfg"))
      << "hidden_dim = 8\nexpert_batch = 4\nrollout_batch = 6\n"
         "iterations = 3\nlearning_rate = 0.01\ncheckpoint_interval = 2\n";
  tpp_config* loaded = tpp_config_load(scratch("train.cfg").c_str());
  REQUIRE(loaded != nullptr);
  CHECK(tpp_config_iterations(loaded) == 3);
  CHECK(tpp_config_checkpoint_interval(loaded) == 2);
  tpp_config_free(loaded);

  std::ofstream(scratch("bad.cfg")) << "window = 15\n";
  CHECK(tpp_config_load(scratch("bad.cfg").c_str()) == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_PARSE);
}

TEST_CASE("trainer steps, checkpoints, and resumes bit-identically") {
  tpp_spec* hp = tpp_spec_preset("hp");
  tpp_dataset* expert = tpp_simulate(hp, 15.0, 12, 5, 2);
  REQUIRE(expert != nullptr);

  std::ofstream(scratch("small.cfg"))
      << "hidden_dim = 8\nexpert_batch = 4\nrollout_batch = 6\n"
         "iterations = 10\nlearning_rate = 0.01\n";
  tpp_config* cfg = tpp_config_load(scratch("small.cfg").c_str());
  REQUIRE(cfg != nullptr);
  tpp_config_set_seed(cfg, 17);
  tpp_config_set_threads(cfg, 2);

  // one uninterrupted run
  tpp_trainer* whole = tpp_trainer_new(expert, cfg);
  REQUIRE(whole != nullptr);
  CHECK(tpp_trainer_iteration(whole) == 0);
  double mmd2[4], ret[4], gnorm[4];
  for (int i = 0; i < 4; ++i)
    REQUIRE(tpp_trainer_step(whole, &mmd2[i], &ret[i], &gnorm[i], nullptr) ==
            TPP_OK);
  CHECK(tpp_trainer_iteration(whole) == 4);

  // the same run split by a checkpoint
  tpp_trainer* first = tpp_trainer_new(expert, cfg);
  REQUIRE(first != nullptr);
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    REQUIRE(tpp_trainer_step(first, &m, nullptr, nullptr, nullptr) == TPP_OK);
  CHECK(m == mmd2[1]);
  const std::string ckpt = scratch("trainer.ckpt");
  REQUIRE(tpp_trainer_save_checkpoint(first, ckpt.c_str()) == TPP_OK);
  tpp_trainer_free(first);

  tpp_trainer* resumed = tpp_trainer_resume(expert, cfg, ckpt.c_str());
  REQUIRE(resumed != nullptr);
  CHECK(tpp_trainer_iteration(resumed) == 2);
  for (int i = 2; i < 4; ++i) {
    double rm = 0.0, rr = 0.0, rg = 0.0;
    REQUIRE(tpp_trainer_step(resumed, &rm, &rr, &rg, nullptr) == TPP_OK);
    CHECK(rm == mmd2[i]);
    CHECK(rr == ret[i]);
    CHECK(rg == gnorm[i]);
  }

  // final weights agree too: identical rollouts
  tpp_policy* pw = tpp_trainer_policy(whole);
  tpp_policy* pr = tpp_trainer_policy(resumed);
  REQUIRE(pw != nullptr);
  REQUIRE(pr != nullptr);
  tpp_dataset* rw = tpp_policy_rollouts(pw, 15.0, 4, 9, 1);
  tpp_dataset* rr2 = tpp_policy_rollouts(pr, 15.0, 4, 9, 1);
  CHECK(datasets_equal(rw, rr2));
  tpp_dataset_free(rw);
  tpp_dataset_free(rr2);
  tpp_policy_free(pw);
  tpp_policy_free(pr);
  tpp_trainer_free(resumed);

  // resuming under a different seed is refused
  tpp_config_set_seed(cfg, 18);
  CHECK(tpp_trainer_resume(expert, cfg, ckpt.c_str()) == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_INVALID_ARGUMENT);
  tpp_config_set_seed(cfg, 17);

  // a weights-only checkpoint cannot resume
  tpp_policy* bare = tpp_policy_init(8, "exponential", 0.1, 17);
  REQUIRE(tpp_policy_save(bare, scratch("bare.ckpt").c_str()) == TPP_OK);
  CHECK(tpp_trainer_resume(expert, cfg, scratch("bare.ckpt").c_str()) ==
        nullptr);
  CHECK(tpp_last_status() == TPP_ERR_PARSE);
  tpp_policy_free(bare);

  // a dataset without sequences is rejected outright
  tpp_dataset* empty = tpp_dataset_new(15.0);
  CHECK(tpp_trainer_new(empty, cfg) == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_INVALID_ARGUMENT);
  tpp_dataset_free(empty);

  tpp_trainer_free(whole);
  tpp_config_free(cfg);
  tpp_dataset_free(expert);
  tpp_spec_free(hp);
}

TEST_CASE("trace handle writes the CSV") {
  tpp_trace* tr = tpp_trace_new();
  REQUIRE(tr != nullptr);
  CHECK(tpp_trace_size(tr) == 0);
  tpp_trace_push(tr, 0, 0.5, -1.25, 3.0, 9.5);
  tpp_trace_push(tr, 1, 0.25, 0.0, 1.0, 8.0);
  CHECK(tpp_trace_size(tr) == 2);
  const std::string path = scratch("trace.csv");
  CHECK(tpp_trace_save(tr, path.c_str(), 0) == TPP_OK);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "iter,mmd2,mean_return,grad_norm,wall_ms");
  CHECK(row == "0,0.5,-1.25,3,0");
  tpp_trace_free(tr);
}

TEST_CASE("fits through the C interface") {
  tpp_spec* hp = tpp_spec_preset("hp");
  tpp_dataset* data = tpp_simulate(hp, 15.0, 40, 13, 4);
  REQUIRE(data != nullptr);

  tpp_fit* hf = tpp_fit_hawkes(data);
  REQUIRE(hf != nullptr);
  CHECK(std::string(tpp_fit_model(hf)) == "hawkes");
  CHECK(std::isfinite(tpp_fit_loglik(hf)));

  const std::string path = scratch("hawkes.json");
  CHECK(tpp_fit_save(hf, path.c_str()) == TPP_OK);
  tpp_fit* back = tpp_fit_load(path.c_str());
  REQUIRE(back != nullptr);
  CHECK(tpp_fit_loglik(back) == tpp_fit_loglik(hf));

  tpp_dataset* resim1 = tpp_fit_resimulate(hf, 15.0, 5, 3, 1);
  tpp_dataset* resim2 = tpp_fit_resimulate(back, 15.0, 5, 3, 2);
  REQUIRE(resim1 != nullptr);
  REQUIRE(resim2 != nullptr);
  CHECK(datasets_equal(resim1, resim2));
  tpp_dataset_free(resim1);
  tpp_dataset_free(resim2);
  tpp_fit_free(back);
  tpp_fit_free(hf);

  tpp_dataset* ip_data = [] {
    tpp_spec* ip = tpp_spec_preset("ip");
    tpp_dataset* d = tpp_simulate(ip, 15.0, 40, 19, 4);
    tpp_spec_free(ip);
    return d;
  }();
  REQUIRE(ip_data != nullptr);
  tpp_fit* mf = tpp_fit_ip(ip_data, 4);
  REQUIRE(mf != nullptr);
  CHECK(std::string(tpp_fit_model(mf)) == "ip");
  tpp_dataset* mix = tpp_fit_resimulate(mf, 15.0, 3, 1, 1);
  REQUIRE(mix != nullptr);
  tpp_dataset_free(mix);
  tpp_fit_free(mf);
  tpp_dataset_free(ip_data);

  tpp_fit* pf = tpp_fit_policy_mle(data, 4, "exponential", 15, 0.01, 4, 3);
  REQUIRE(pf != nullptr);
  CHECK(std::string(tpp_fit_model(pf)) == "policy-mle");
  CHECK(std::isfinite(tpp_fit_loglik(pf)));
  tpp_fit_free(pf);

  // fitting nothing is refused up front
  tpp_dataset* empty = tpp_dataset_new(15.0);
  CHECK(tpp_fit_hawkes(empty) == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_INVALID_ARGUMENT);
  REQUIRE(tpp_dataset_add_sequence(empty, nullptr, 0) == TPP_OK);
  CHECK(tpp_fit_hawkes(empty) == nullptr);
  CHECK(tpp_last_status() == TPP_ERR_DEGENERATE_DATA);
  tpp_dataset_free(empty);

  tpp_dataset_free(data);
  tpp_spec_free(hp);
}

TEST_CASE("report and rescale handles") {
  tpp_spec* hp = tpp_spec_preset("hp");
  tpp_dataset* expert = tpp_simulate(hp, 15.0, 30, 23, 4);
  tpp_dataset* cand = tpp_simulate(hp, 15.0, 30, 24, 4);
  REQUIRE(expert != nullptr);
  REQUIRE(cand != nullptr);

  tpp_report* rep = tpp_report_new(expert, 12, 0.0, 2);
  REQUIRE(rep != nullptr);
  CHECK(tpp_report_add_candidate(rep, "same-process", cand) == TPP_OK);
  CHECK(tpp_report_add_candidate(rep, "itself", expert) == TPP_OK);
  CHECK(tpp_report_candidates(rep) == 2);

  double sigma = tpp_report_sigma(rep);
  CHECK(sigma > 0.0);

  double mae = -1.0, mmd2 = -1.0;
  CHECK(tpp_report_candidate_mae(rep, 1, &mae) == TPP_OK);
  CHECK(mae == 0.0);
  CHECK(tpp_report_candidate_mmd2(rep, 1, &mmd2) == TPP_OK);
  CHECK(mmd2 == 0.0);
  CHECK(tpp_report_candidate_mmd2(rep, 0, &mmd2) == TPP_OK);
  CHECK(mmd2 > 0.0);
  CHECK(tpp_report_candidate_mae(rep, 5, &mae) == TPP_ERR_INVALID_ARGUMENT);

  // rescaling the data under its own generator looks exponential
  tpp_rescale* rs = tpp_rescale_spec(cand, hp, 50);
  REQUIRE(rs != nullptr);
  CHECK(tpp_rescale_gap_count(rs) == tpp_dataset_total_events(cand));
  double stat = 0.0, p = 0.0;
  CHECK(tpp_rescale_pooled_ks(rs, &stat, &p) == TPP_OK);
  CHECK(stat > 0.0);
  CHECK(p > 0.01);
  double rate = 0.0;
  size_t tested = 0;
  CHECK(tpp_rescale_ks_pass_rate(rs, &rate, &tested) == TPP_OK);
  CHECK(tested == tpp_dataset_size(cand));
  CHECK(rate > 0.8);
  REQUIRE(tpp_rescale_qq_size(rs) == 50);
  std::vector<double> theo(50), emp(50);
  CHECK(tpp_rescale_qq(rs, theo.data(), emp.data(), 50) == 50);
  CHECK(theo[0] > 0.0);
  CHECK(theo[49] > theo[0]);
  CHECK(emp[49] > emp[0]);

  CHECK(tpp_report_attach_rescale(rep, 0, rs) == TPP_OK);
  CHECK(tpp_report_attach_rescale(rep, 7, rs) == TPP_ERR_INVALID_ARGUMENT);

  const std::string dir = scratch("report");
  CHECK(tpp_report_write(rep, dir.c_str()) == TPP_OK);
  CHECK(fs::exists(fs::path(dir) / "intensity.csv"));
  CHECK(fs::exists(fs::path(dir) / "summary.json"));
  CHECK(fs::exists(fs::path(dir) / "qq_same-process.csv"));
  CHECK(fs::exists(fs::path(dir) / "pvalues_same-process.csv"));

  // sequences without events have nothing to rescale
  tpp_dataset* empty = tpp_dataset_new(15.0);
  REQUIRE(tpp_dataset_add_sequence(empty, nullptr, 0) == TPP_OK);
  tpp_rescale* nothing = tpp_rescale_spec(empty, hp, 10);
  REQUIRE(nothing != nullptr);
  CHECK(tpp_rescale_gap_count(nothing) == 0);
  CHECK(tpp_rescale_pooled_ks(nothing, &stat, &p) ==
        TPP_ERR_INSUFFICIENT_DATA);
  CHECK(tpp_rescale_ks_pass_rate(nothing, &rate, &tested) ==
        TPP_ERR_INSUFFICIENT_DATA);
  tpp_rescale_free(nothing);
  tpp_dataset_free(empty);

  tpp_rescale_free(rs);
  tpp_report_free(rep);
  tpp_dataset_free(cand);
  tpp_dataset_free(expert);
  tpp_spec_free(hp);
}
