// tpp — command-line front end of the tppkit shared library.
//
// Commands: simulate | train | fit | eval | convert.  Every command takes
// --seed (mandatory; nothing is seeded from the clock), --out, and
// --threads, and is deterministic given its flags: re-running writes
// byte-identical files.
//
// Exit codes: 0 success, 2 usage, 3 numeric failure, 4 file IO/parse.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "tppkit.h"

namespace {

namespace fs = std::filesystem;

int exit_code_for(tpp_status status) {
  switch (status) {
    case TPP_OK:
      return 0;
    case TPP_ERR_INVALID_ARGUMENT:
    case TPP_ERR_UNKNOWN_PRESET:
      return 2;
    case TPP_ERR_NON_MONOTONIC:
    case TPP_ERR_OUT_OF_WINDOW:
    case TPP_ERR_IO:
    case TPP_ERR_PARSE:
      return 4;
    default:
      return 3;
  }
}

[[noreturn]] void die() {
  const tpp_status status = tpp_last_status();
  std::cerr << "error (" << tpp_status_name(status) << "): " << tpp_last_error()
            << '\n';
  std::exit(exit_code_for(status));
}

[[noreturn]] void die_usage(const std::string& message) {
  std::cerr << "error (usage): " << message << '\n';
  std::exit(2);
}

[[noreturn]] void die_io(const std::string& message) {
  std::cerr << "error (io): " << message << '\n';
  std::exit(4);
}

void check(tpp_status status) {
  if (status != TPP_OK) die();
}

template <typename T>
T* checked(T* p) {
  if (!p) die();
  return p;
}

struct HandleDeleter {
  void operator()(tpp_dataset* p) const { tpp_dataset_free(p); }
  void operator()(tpp_spec* p) const { tpp_spec_free(p); }
  void operator()(tpp_policy* p) const { tpp_policy_free(p); }
  void operator()(tpp_config* p) const { tpp_config_free(p); }
  void operator()(tpp_trainer* p) const { tpp_trainer_free(p); }
  void operator()(tpp_trace* p) const { tpp_trace_free(p); }
  void operator()(tpp_fit* p) const { tpp_fit_free(p); }
  void operator()(tpp_report* p) const { tpp_report_free(p); }
  void operator()(tpp_rescale* p) const { tpp_rescale_free(p); }
};

template <typename T>
using Ptr = std::unique_ptr<T, HandleDeleter>;

std::string fmt(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

void make_directories(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) die_io("cannot create directory " + dir);
}

// flags shared by every command
struct Common {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;  // <= 0 picks the hardware default
};

void add_common(CLI::App* cmd, Common& common, const std::string& out_default,
                const std::string& out_help) {
  cmd->add_option("--seed", common.seed, "random seed (mandatory)")
      ->required();
  common.out = out_default;
  cmd->add_option("--out", common.out, out_help)->capture_default_str();
  cmd->add_option("--threads", common.threads,
                  "worker threads (0 = hardware default; results do not "
                  "depend on this)")
      ->capture_default_str();
}

Ptr<tpp_spec> spec_from_name_or_file(const std::string& value) {
  if (fs::exists(value)) return Ptr<tpp_spec>(checked(tpp_spec_load(value.c_str())));
  return Ptr<tpp_spec>(checked(tpp_spec_preset(value.c_str())));
}

CLI::Validator positive_count() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos ||
            s.find_first_not_of('0') == std::string::npos)
          return "expected a positive integer, got \"" + s + "\"";
        return {};
      },
      "POSITIVE");
}

std::string unique_name(std::vector<std::string>& used, const std::string& base) {
  std::string name = base.empty() ? "candidate" : base;
  int k = 2;
  while (std::find(used.begin(), used.end(), name) != used.end())
    name = base + "_" + std::to_string(k++);
  used.push_back(name);
  return name;
}

// ---- simulate -----------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string preset;
  std::string spec_file;
  double window = 0.0;
  std::size_t sequences = 0;
};

void run_simulate(const SimulateArgs& a) {
  Ptr<tpp_spec> spec = a.preset.empty()
                           ? Ptr<tpp_spec>(checked(tpp_spec_load(a.spec_file.c_str())))
                           : Ptr<tpp_spec>(checked(tpp_spec_preset(a.preset.c_str())));
  check(tpp_spec_validate(spec.get(), a.window));
  Ptr<tpp_dataset> data(checked(tpp_simulate(spec.get(), a.window, a.sequences,
                                             a.common.seed, a.common.threads)));
  check(tpp_dataset_save(data.get(), a.common.out.c_str()));
  const double mean = static_cast<double>(tpp_dataset_total_events(data.get())) /
                      static_cast<double>(a.sequences);
  std::cout << "wrote " << a.sequences << " sequences to " << a.common.out
            << " (mean count " << fmt(mean) << ")\n";
}

// ---- train --------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string events;
  std::string config_file;
  std::string resume;
  std::size_t iterations = 0;
  bool iterations_set = false;
  bool trace_timing = false;
};

void run_train(const TrainArgs& a) {
  Ptr<tpp_config> cfg(a.config_file.empty()
                          ? tpp_config_default()
                          : checked(tpp_config_load(a.config_file.c_str())));
  tpp_config_set_seed(cfg.get(), a.common.seed);
  tpp_config_set_threads(cfg.get(), a.common.threads);
  if (a.iterations_set) tpp_config_set_iterations(cfg.get(), a.iterations);

  Ptr<tpp_dataset> expert(checked(tpp_dataset_load(a.events.c_str())));
  Ptr<tpp_trainer> trainer(
      a.resume.empty()
          ? checked(tpp_trainer_new(expert.get(), cfg.get()))
          : checked(tpp_trainer_resume(expert.get(), cfg.get(), a.resume.c_str())));

  make_directories(a.common.out);
  const fs::path out_dir(a.common.out);
  const std::size_t total = tpp_config_iterations(cfg.get());
  const std::size_t interval = tpp_config_checkpoint_interval(cfg.get());

  Ptr<tpp_trace> trace(tpp_trace_new());
  while (tpp_trainer_iteration(trainer.get()) < total) {
    double mmd2 = 0.0, mean_return = 0.0, grad_norm = 0.0, wall_ms = 0.0;
    const tpp_status status =
        tpp_trainer_step(trainer.get(), &mmd2, &mean_return, &grad_norm, &wall_ms);
    if (status != TPP_OK) {
      std::cerr << "error (" << tpp_status_name(status) << ") at iteration "
                << tpp_trainer_iteration(trainer.get()) + 1 << ": "
                << tpp_last_error() << '\n';
      std::exit(exit_code_for(status));
    }
    const std::size_t it = tpp_trainer_iteration(trainer.get());
    tpp_trace_push(trace.get(), it, mmd2, mean_return, grad_norm, wall_ms);
    if (interval > 0 && it % interval == 0 && it < total) {
      const fs::path path = out_dir / ("checkpoint_" + std::to_string(it) + ".ckpt");
      check(tpp_trainer_save_checkpoint(trainer.get(), path.string().c_str()));
    }
    if (it % 100 == 0 || it == total)
      std::cout << "iter " << it << "  mmd2 " << fmt(mmd2) << "  mean_return "
                << fmt(mean_return) << "  grad_norm " << fmt(grad_norm) << '\n';
  }

  const fs::path ckpt_path = out_dir / "policy.ckpt";
  const fs::path trace_path = out_dir / "trace.csv";
  check(tpp_trainer_save_checkpoint(trainer.get(), ckpt_path.string().c_str()));
  check(tpp_trace_save(trace.get(), trace_path.string().c_str(),
                       a.trace_timing ? 1 : 0));
  std::cout << "wrote " << ckpt_path.string() << " and " << trace_path.string()
            << " after " << tpp_trainer_iteration(trainer.get())
            << " iterations\n";
}

// ---- fit ----------------------------------------------------------------

struct FitArgs {
  Common common;
  std::string events;
  std::string model;
  int components = 8;
  int hidden_dim = 64;
  std::string dist = "exponential";
  std::size_t iterations = 2000;
  double learning_rate = 1e-2;
  std::size_t batch = 32;
};

void run_fit(const FitArgs& a) {
  Ptr<tpp_dataset> data(checked(tpp_dataset_load(a.events.c_str())));
  Ptr<tpp_fit> fit;
  if (a.model == "hawkes") {
    fit.reset(checked(tpp_fit_hawkes(data.get())));
  } else if (a.model == "ip") {
    fit.reset(checked(tpp_fit_ip(data.get(), a.components)));
  } else if (a.model == "sc") {
    fit.reset(checked(tpp_fit_sc(data.get())));
  } else {
    fit.reset(checked(tpp_fit_policy_mle(data.get(), a.hidden_dim,
                                         a.dist.c_str(), a.iterations,
                                         a.learning_rate, a.batch,
                                         a.common.seed)));
  }
  check(tpp_fit_save(fit.get(), a.common.out.c_str()));
  std::cout << "wrote " << a.common.out << " (model " << tpp_fit_model(fit.get())
            << ", loglik " << fmt(tpp_fit_loglik(fit.get())) << ")\n";
}

// ---- eval ---------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string events;
  std::vector<std::string> checkpoints;
  std::vector<std::string> fits;
  std::vector<std::string> candidate_events;
  std::size_t rollouts = 0;  // 0 = expert sequence count
  std::size_t bins = 20;
  double sigma = 0.0;  // <= 0 = median bandwidth of the expert data
  std::size_t quantiles = 100;
  std::string rescale_spec;
  bool rescale_model = false;
};

struct Candidate {
  std::string name;
  Ptr<tpp_dataset> data;
  Ptr<tpp_policy> policy;
  Ptr<tpp_fit> fit;
};

void run_eval(const EvalArgs& a) {
  Ptr<tpp_dataset> expert(checked(tpp_dataset_load(a.events.c_str())));
  const double window = tpp_dataset_window(expert.get());
  const std::size_t draws =
      a.rollouts > 0 ? a.rollouts : tpp_dataset_size(expert.get());

  std::vector<Candidate> candidates;
  std::vector<std::string> used_names;
  for (const std::string& path : a.checkpoints) {
    Candidate c;
    c.name = unique_name(used_names, fs::path(path).stem().string());
    c.policy.reset(checked(tpp_policy_load(path.c_str())));
    c.data.reset(checked(tpp_policy_rollouts(
        c.policy.get(), window, draws,
        a.common.seed + candidates.size() + 1, a.common.threads)));
    candidates.push_back(std::move(c));
  }
  for (const std::string& path : a.fits) {
    Candidate c;
    c.name = unique_name(used_names, fs::path(path).stem().string());
    c.fit.reset(checked(tpp_fit_load(path.c_str())));
    c.data.reset(checked(tpp_fit_resimulate(
        c.fit.get(), window, draws, a.common.seed + candidates.size() + 1,
        a.common.threads)));
    candidates.push_back(std::move(c));
  }
  for (const std::string& path : a.candidate_events) {
    Candidate c;
    c.name = unique_name(used_names, fs::path(path).stem().string());
    c.data.reset(checked(tpp_dataset_load(path.c_str())));
    if (tpp_dataset_window(c.data.get()) != window)
      die_usage(path + ": window " + fmt(tpp_dataset_window(c.data.get())) +
                " is incompatible with the expert window " + fmt(window));
    candidates.push_back(std::move(c));
  }

  Ptr<tpp_spec> rescale_spec;
  if (!a.rescale_spec.empty()) rescale_spec = spec_from_name_or_file(a.rescale_spec);

  Ptr<tpp_report> report(
      checked(tpp_report_new(expert.get(), a.bins, a.sigma, a.common.threads)));
  for (const Candidate& c : candidates)
    check(tpp_report_add_candidate(report.get(), c.name.c_str(), c.data.get()));

  // one rescale handle per candidate (may stay empty)
  std::vector<Ptr<tpp_rescale>> rescales(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Candidate& c = candidates[i];
    if (rescale_spec) {
      rescales[i].reset(checked(
          tpp_rescale_spec(c.data.get(), rescale_spec.get(), a.quantiles)));
    } else if (a.rescale_model && c.policy) {
      rescales[i].reset(checked(
          tpp_rescale_policy(c.data.get(), c.policy.get(), a.quantiles)));
    } else if (a.rescale_model && c.fit) {
      rescales[i].reset(
          checked(tpp_rescale_fit(c.data.get(), c.fit.get(), a.quantiles)));
    }
    if (rescales[i])
      check(tpp_report_attach_rescale(report.get(), i, rescales[i].get()));
  }

  check(tpp_report_write(report.get(), a.common.out.c_str()));

  std::cout << "kernel sigma " << fmt(tpp_report_sigma(report.get())) << '\n';
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double mae = 0.0, mmd2 = 0.0;
    check(tpp_report_candidate_mae(report.get(), i, &mae));
    check(tpp_report_candidate_mmd2(report.get(), i, &mmd2));
    std::cout << candidates[i].name << ": intensity_mae " << fmt(mae)
              << "  mmd2 " << fmt(mmd2);
    if (rescales[i]) {
      double rate = 0.0;
      std::size_t tested = 0;
      if (tpp_rescale_ks_pass_rate(rescales[i].get(), &rate, &tested) == TPP_OK)
        std::cout << "  ks_pass_rate " << fmt(rate) << " (" << tested
                  << " sequences)";
    }
    std::cout << '\n';
  }
  std::cout << "wrote report to " << a.common.out << '\n';
}

// ---- convert ------------------------------------------------------------

struct ConvertArgs {
  Common common;
  std::string csv;
  double window = 0.0;
  double offset = 0.0;
  double scale = 1.0;
};

// one sequence per line, comma-separated raw timestamps; each time maps to
// (t - offset) * scale and must land inside [0, T)
void run_convert(const ConvertArgs& a) {
  std::ifstream in(a.csv);
  if (!in) die_io("cannot open " + a.csv + " for reading");
  Ptr<tpp_dataset> data(checked(tpp_dataset_new(a.window)));
  std::string line;
  std::size_t line_no = 0;
  std::size_t events = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<double> times;
    std::size_t start = 0;
    bool blank = true;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      std::size_t b = start;
      std::size_t e = comma;
      while (b < e && (line[b] == ' ' || line[b] == '\t' || line[b] == '\r')) ++b;
      while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t' || line[e - 1] == '\r')) --e;
      if (b < e) {
        blank = false;
        double value = 0.0;
        auto [p, ec] = std::from_chars(line.data() + b, line.data() + e, value);
        if (ec != std::errc() || p != line.data() + e) {
          std::cerr << "error (parse): " << a.csv << ":" << line_no
                    << ": not a number: \""
                    << line.substr(b, e - b) << "\"\n";
          std::exit(4);
        }
        times.push_back((value - a.offset) * a.scale);
      }
      start = comma + 1;
    }
    if (blank) continue;
    std::sort(times.begin(), times.end());
    if (tpp_dataset_add_sequence(data.get(), times.data(), times.size()) !=
        TPP_OK) {
      std::cerr << "error (" << tpp_status_name(tpp_last_status()) << "): "
                << a.csv << ":" << line_no << ": " << tpp_last_error() << '\n';
      std::exit(4);
    }
    events += times.size();
  }
  if (in.bad()) die_io("read from " + a.csv + " failed");
  check(tpp_dataset_save(data.get(), a.common.out.c_str()));
  std::cout << "wrote " << tpp_dataset_size(data.get()) << " sequences ("
            << events << " events) to " << a.common.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tppkit: simulate, train, fit, and evaluate temporal point processes"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand(
      "simulate", "draw event sequences from a named or file-defined intensity");
  add_common(sim, sim_args.common, "events.jsonl", "output event file");
  auto* sim_src = sim->add_option_group("source")->require_option(1);
  sim_src->add_option("--preset", sim_args.preset,
                      "named intensity: ip | hp | ip-hp1 | ip-hp2");
  sim_src->add_option("--spec", sim_args.spec_file, "intensity spec JSON file")
      ->check(CLI::ExistingFile);
  sim->add_option("--T", sim_args.window, "observation window length")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("-n,--sequences", sim_args.sequences, "number of sequences")
      ->required()
      ->check(positive_count());
  sim->callback([&] { run_simulate(sim_args); });

  TrainArgs train_args;
  auto* train = app.add_subcommand(
      "train", "fit a gap policy to expert event data by kernel-discrepancy descent");
  add_common(train, train_args.common, "train_out", "output directory");
  train->add_option("--events", train_args.events, "expert event file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--config", train_args.config_file,
                    "key = value training configuration")
      ->check(CLI::ExistingFile);
  train->add_option("--resume", train_args.resume,
                    "checkpoint (with optimizer state) to continue from")
      ->check(CLI::ExistingFile);
  auto* iter_opt = train->add_option("--iterations", train_args.iterations,
                                     "total iterations (overrides the config)");
  train->add_flag("--trace-timing", train_args.trace_timing,
                  "record wall-clock milliseconds in trace.csv (re-runs then "
                  "differ in that column)");
  train->callback([&] {
    train_args.iterations_set = iter_opt->count() > 0;
    run_train(train_args);
  });

  FitArgs fit_args;
  auto* fit = app.add_subcommand(
      "fit", "maximum-likelihood baselines and the policy MLE");
  add_common(fit, fit_args.common, "fit.json", "output fit file");
  fit->add_option("--events", fit_args.events, "event file")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--model", fit_args.model,
                  "hawkes | ip | sc | policy-mle")
      ->required()
      ->check(CLI::IsMember({"hawkes", "ip", "sc", "policy-mle"}));
  fit->add_option("--components", fit_args.components,
                  "mixture components for --model ip")
      ->check(positive_count())
      ->capture_default_str();
  fit->add_option("--hidden-dim", fit_args.hidden_dim,
                  "policy-mle hidden state size")
      ->check(positive_count())
      ->capture_default_str();
  fit->add_option("--dist", fit_args.dist, "policy-mle gap family")
      ->check(CLI::IsMember({"exponential", "rayleigh"}))
      ->capture_default_str();
  fit->add_option("--iterations", fit_args.iterations, "policy-mle iterations")
      ->capture_default_str();
  fit->add_option("--lr", fit_args.learning_rate, "policy-mle learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit->add_option("--batch", fit_args.batch,
                  "policy-mle sequences per iteration (0 = full data)")
      ->capture_default_str();
  fit->callback([&] { run_fit(fit_args); });

  EvalArgs eval_args;
  auto* eval = app.add_subcommand(
      "eval", "compare candidate models or samples against expert event data");
  add_common(eval, eval_args.common, "report", "output report directory");
  eval->add_option("--events", eval_args.events, "expert event file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", eval_args.checkpoints,
                   "policy checkpoint candidate (repeatable)")
      ->check(CLI::ExistingFile);
  eval->add_option("--fit", eval_args.fits, "fit file candidate (repeatable)")
      ->check(CLI::ExistingFile);
  eval->add_option("--candidate-events", eval_args.candidate_events,
                   "pre-simulated event file candidate (repeatable)")
      ->check(CLI::ExistingFile);
  eval->add_option("--rollouts", eval_args.rollouts,
                   "sequences to draw per model candidate (0 = expert count)")
      ->capture_default_str();
  eval->add_option("--bins", eval_args.bins, "intensity histogram bins")
      ->check(positive_count())
      ->capture_default_str();
  eval->add_option("--sigma", eval_args.sigma,
                   "kernel bandwidth (<= 0 = median heuristic)")
      ->capture_default_str();
  eval->add_option("--quantiles", eval_args.quantiles,
                   "QQ curve resolution")
      ->check(positive_count())
      ->capture_default_str();
  auto* opt_rs = eval->add_option(
      "--rescale-spec", eval_args.rescale_spec,
      "compensator-transform candidate samples under this preset or spec "
      "file and run KS/QQ diagnostics");
  auto* opt_rm = eval->add_flag(
      "--rescale-model", eval_args.rescale_model,
      "compensator-transform each candidate's samples under its own model");
  opt_rs->excludes(opt_rm);
  opt_rm->excludes(opt_rs);
  eval->callback([&] { run_eval(eval_args); });

  ConvertArgs conv_args;
  auto* conv = app.add_subcommand(
      "convert", "turn CSV timestamp lines into an event file");
  add_common(conv, conv_args.common, "converted.jsonl", "output event file");
  conv->add_option("--csv", conv_args.csv,
                   "input: one sequence per line, comma-separated timestamps")
      ->required()
      ->check(CLI::ExistingFile);
  conv->add_option("--T", conv_args.window,
                   "observation window after rescaling")
      ->required()
      ->check(CLI::PositiveNumber);
  conv->add_option("--offset", conv_args.offset,
                   "subtracted from every raw timestamp")
      ->capture_default_str();
  conv->add_option("--scale", conv_args.scale,
                   "multiplies every offset timestamp")
      ->capture_default_str();
  conv->callback([&] { run_convert(conv_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return 0;
}
