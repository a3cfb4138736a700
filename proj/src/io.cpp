#include "io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary checkpoint layout assumes a little-endian host");

namespace tpp {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) fail(ErrorCode::Io, "cannot open " + path + " for reading");
  return in;
}

std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  return out;
}

void flush_or_fail(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) fail(ErrorCode::Io, "write to " + path + " failed");
}

json parse_json(const std::string& text, const std::string& where) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail(ErrorCode::Parse, "invalid JSON in " + where);
  return j;
}

double require_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number())
    fail(ErrorCode::Parse, where + ": missing numeric field \"" + key + "\"");
  return j.at(key).get<double>();
}

std::vector<double> require_number_array(const json& j, const char* key,
                                         const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array())
    fail(ErrorCode::Parse, where + ": missing array field \"" + key + "\"");
  std::vector<double> out;
  out.reserve(j.at(key).size());
  for (const auto& v : j.at(key)) {
    if (!v.is_number())
      fail(ErrorCode::Parse, where + ": non-numeric entry in \"" + key + "\"");
    out.push_back(v.get<double>());
  }
  return out;
}

// shortest representation that parses back to the same double
std::string fmt(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string safe_name(const std::string& name) {
  std::string out = name;
  for (char& ch : out) {
    bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
              (ch >= '0' && ch <= '9') || ch == '_' || ch == '.' || ch == '-';
    if (!ok) ch = '_';
  }
  return out.empty() ? std::string("candidate") : out;
}

}  // namespace

Dataset load_events(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  Dataset data;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j = parse_json(line, where);
    if (!j.is_object()) fail(ErrorCode::Parse, where + ": expected an object");
    if (!have_header) {
      double window = require_number(j, "T", where);
      if (!(window > 0.0) || !std::isfinite(window))
        fail(ErrorCode::Parse, where + ": window T must be finite and positive");
      if (!j.contains("format") || !j.at("format").is_number_integer() ||
          j.at("format").get<std::int64_t>() != 1)
        fail(ErrorCode::Parse, where + ": unsupported event file format");
      data.window_end = window;
      have_header = true;
      continue;
    }
    EventSequence seq;
    seq.times = require_number_array(j, "t", where);
    seq.window_end = data.window_end;
    data.sequences.push_back(std::move(seq));
  }
  if (in.bad()) fail(ErrorCode::Io, "read from " + path + " failed");
  if (!have_header)
    fail(ErrorCode::Parse, path + ": missing {\"T\": ..., \"format\": 1} header");
  require_valid(data);
  return data;
}

void save_events(const Dataset& data, const std::string& path) {
  require_valid(data);
  std::ofstream out = open_output(path);
  json header;
  header["T"] = data.window_end;
  header["format"] = 1;
  out << header.dump() << '\n';
  for (const EventSequence& seq : data.sequences) {
    json line;
    line["t"] = seq.times;
    out << line.dump() << '\n';
  }
  flush_or_fail(out, path);
}

namespace {

constexpr char kCheckpointMagic[8] = {'T', 'P', 'P', 'C', 'K', 'P', 'T', '1'};

void write_raw(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ofstream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  write_raw(out, &v, sizeof(T));
}

void write_weights(std::ofstream& out, const Eigen::VectorXd& V,
                   const Eigen::MatrixXd& W, const Eigen::VectorXd& u,
                   double c) {
  for (Eigen::Index i = 0; i < V.size(); ++i) write_pod(out, V[i]);
  for (Eigen::Index r = 0; r < W.rows(); ++r)
    for (Eigen::Index col = 0; col < W.cols(); ++col) write_pod(out, W(r, col));
  for (Eigen::Index i = 0; i < u.size(); ++i) write_pod(out, u[i]);
  write_pod(out, c);
}

void read_exact(std::ifstream& in, void* p, std::size_t n,
                const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n))
    fail(ErrorCode::Parse, path + ": truncated checkpoint");
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T v;
  read_exact(in, &v, sizeof(T), path);
  return v;
}

void read_weights(std::ifstream& in, int d, Eigen::VectorXd& V,
                  Eigen::MatrixXd& W, Eigen::VectorXd& u, double& c,
                  const std::string& path) {
  V.resize(d);
  W.resize(d, d);
  u.resize(d);
  for (int i = 0; i < d; ++i) V[i] = read_pod<double>(in, path);
  for (int r = 0; r < d; ++r)
    for (int col = 0; col < d; ++col) W(r, col) = read_pod<double>(in, path);
  for (int i = 0; i < d; ++i) u[i] = read_pod<double>(in, path);
  c = read_pod<double>(in, path);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const int d = ckpt.params.hidden_dim();
  if (d < 1 || ckpt.params.W.rows() != d || ckpt.params.W.cols() != d ||
      ckpt.params.u.size() != d)
    fail(ErrorCode::InvalidArgument, "checkpoint weights have mismatched shapes");
  if (ckpt.has_train_state &&
      (ckpt.adam_m.V.size() != d || ckpt.adam_v.V.size() != d ||
       ckpt.adam_m.W.rows() != d || ckpt.adam_v.W.rows() != d ||
       ckpt.adam_m.W.cols() != d || ckpt.adam_v.W.cols() != d ||
       ckpt.adam_m.u.size() != d || ckpt.adam_v.u.size() != d))
    fail(ErrorCode::InvalidArgument, "optimizer state has mismatched shapes");

  std::ofstream out = open_output(path, /*binary=*/true);
  write_raw(out, kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod(out, static_cast<std::uint32_t>(d));
  write_pod(out, static_cast<std::uint8_t>(
                     ckpt.params.dist == GapDist::Rayleigh ? 1 : 0));
  write_pod(out, static_cast<std::uint8_t>(ckpt.has_train_state ? 1 : 0));
  write_pod(out, static_cast<std::uint16_t>(0));
  write_weights(out, ckpt.params.V, ckpt.params.W, ckpt.params.u,
                ckpt.params.c);
  if (ckpt.has_train_state) {
    write_pod(out, ckpt.iteration);
    write_pod(out, ckpt.seed);
    write_weights(out, ckpt.adam_m.V, ckpt.adam_m.W, ckpt.adam_m.u,
                  ckpt.adam_m.c);
    write_weights(out, ckpt.adam_v.V, ckpt.adam_v.W, ckpt.adam_v.u,
                  ckpt.adam_v.c);
  }
  flush_or_fail(out, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in = open_input(path, /*binary=*/true);
  char magic[8];
  read_exact(in, magic, sizeof(magic), path);
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    fail(ErrorCode::Parse, path + ": not a policy checkpoint file");
  auto d32 = read_pod<std::uint32_t>(in, path);
  if (d32 < 1 || d32 > 65536)
    fail(ErrorCode::Parse, path + ": implausible hidden dimension");
  const int d = static_cast<int>(d32);
  auto dist_byte = read_pod<std::uint8_t>(in, path);
  if (dist_byte > 1)
    fail(ErrorCode::Parse, path + ": unknown gap distribution tag");
  auto train_byte = read_pod<std::uint8_t>(in, path);
  if (train_byte > 1)
    fail(ErrorCode::Parse, path + ": malformed optimizer-state flag");
  read_pod<std::uint16_t>(in, path);  // reserved

  Checkpoint ckpt;
  ckpt.params.dist = dist_byte == 1 ? GapDist::Rayleigh : GapDist::Exponential;
  read_weights(in, d, ckpt.params.V, ckpt.params.W, ckpt.params.u,
               ckpt.params.c, path);
  ckpt.has_train_state = train_byte == 1;
  if (ckpt.has_train_state) {
    ckpt.iteration = read_pod<std::uint64_t>(in, path);
    ckpt.seed = read_pod<std::uint64_t>(in, path);
    read_weights(in, d, ckpt.adam_m.V, ckpt.adam_m.W, ckpt.adam_m.u,
                 ckpt.adam_m.c, path);
    read_weights(in, d, ckpt.adam_v.V, ckpt.adam_v.W, ckpt.adam_v.u,
                 ckpt.adam_v.c, path);
  }
  in.peek();
  if (!in.eof()) fail(ErrorCode::Parse, path + ": trailing data after checkpoint");
  return ckpt;
}

const char* fit_model_tag(const FitResult& fit) {
  switch (fit.index()) {
    case 0: return "hawkes";
    case 1: return "ip";
    case 2: return "sc";
    default: return "policy-mle";
  }
}

namespace {

json policy_to_json(const PolicyParams& p) {
  json j;
  j["hidden_dim"] = p.hidden_dim();
  j["distribution"] = gap_dist_name(p.dist);
  j["V"] = std::vector<double>(p.V.data(), p.V.data() + p.V.size());
  json rows = json::array();
  for (Eigen::Index r = 0; r < p.W.rows(); ++r) {
    std::vector<double> row(p.W.cols());
    for (Eigen::Index col = 0; col < p.W.cols(); ++col) row[col] = p.W(r, col);
    rows.push_back(row);
  }
  j["W"] = std::move(rows);
  j["u"] = std::vector<double>(p.u.data(), p.u.data() + p.u.size());
  j["c"] = p.c;
  return j;
}

PolicyParams policy_from_json(const json& j, const std::string& where) {
  if (!j.contains("hidden_dim") || !j.at("hidden_dim").is_number_integer())
    fail(ErrorCode::Parse, where + ": missing hidden_dim");
  const int d = j.at("hidden_dim").get<int>();
  if (d < 1) fail(ErrorCode::Parse, where + ": hidden_dim must be positive");
  if (!j.contains("distribution") || !j.at("distribution").is_string())
    fail(ErrorCode::Parse, where + ": missing distribution");
  PolicyParams p;
  p.dist = gap_dist_from_name(j.at("distribution").get<std::string>());
  std::vector<double> V = require_number_array(j, "V", where);
  std::vector<double> u = require_number_array(j, "u", where);
  if (static_cast<int>(V.size()) != d || static_cast<int>(u.size()) != d)
    fail(ErrorCode::Parse, where + ": weight vectors disagree with hidden_dim");
  if (!j.contains("W") || !j.at("W").is_array() ||
      static_cast<int>(j.at("W").size()) != d)
    fail(ErrorCode::Parse, where + ": W must have hidden_dim rows");
  p.V = Eigen::Map<const Eigen::VectorXd>(V.data(), d);
  p.u = Eigen::Map<const Eigen::VectorXd>(u.data(), d);
  p.W.resize(d, d);
  for (int r = 0; r < d; ++r) {
    const auto& row = j.at("W").at(r);
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      fail(ErrorCode::Parse, where + ": W rows must have hidden_dim entries");
    for (int col = 0; col < d; ++col) {
      if (!row.at(col).is_number())
        fail(ErrorCode::Parse, where + ": non-numeric entry in W");
      p.W(r, col) = row.at(col).get<double>();
    }
  }
  p.c = require_number(j, "c", where);
  return p;
}

}  // namespace

void save_fit(const FitResult& fit, const std::string& path) {
  json j;
  j["model"] = fit_model_tag(fit);
  if (const auto* h = std::get_if<HawkesFit>(&fit)) {
    j["mu"] = h->mu;
    j["alpha"] = h->alpha;
    j["decay"] = h->decay;
    j["loglik"] = h->loglik;
    j["iterations"] = h->iterations;
  } else if (const auto* m = std::get_if<GaussianMixtureFit>(&fit)) {
    json comps = json::array();
    for (const GaussianComponent& comp : m->intensity.components) {
      json cj;
      cj["weight"] = comp.weight;
      cj["center"] = comp.center;
      cj["width"] = comp.width;
      comps.push_back(std::move(cj));
    }
    j["components"] = std::move(comps);
    j["loglik"] = m->loglik;
    j["iterations"] = m->iterations;
  } else if (const auto* s = std::get_if<SelfCorrectingFit>(&fit)) {
    j["mu"] = s->mu;
    j["alpha"] = s->alpha;
    j["loglik"] = s->loglik;
    j["iterations"] = s->iterations;
  } else {
    const auto& pm = std::get<PolicyMleResult>(fit);
    j.update(policy_to_json(pm.params));
    j["loglik"] = pm.loglik;
  }
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  flush_or_fail(out, path);
}

FitResult load_fit(const std::string& path) {
  std::ifstream in = open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "read from " + path + " failed");
  json j = parse_json(buf.str(), path);
  if (!j.is_object() || !j.contains("model") || !j.at("model").is_string())
    fail(ErrorCode::Parse, path + ": missing model tag");
  const std::string model = j.at("model").get<std::string>();
  if (model == "hawkes") {
    HawkesFit f;
    f.mu = require_number(j, "mu", path);
    f.alpha = require_number(j, "alpha", path);
    f.decay = require_number(j, "decay", path);
    f.loglik = require_number(j, "loglik", path);
    return f;
  }
  if (model == "ip") {
    GaussianMixtureFit f;
    if (!j.contains("components") || !j.at("components").is_array())
      fail(ErrorCode::Parse, path + ": missing components array");
    for (const auto& cj : j.at("components")) {
      GaussianComponent comp;
      comp.weight = require_number(cj, "weight", path);
      comp.center = require_number(cj, "center", path);
      comp.width = require_number(cj, "width", path);
      f.intensity.components.push_back(comp);
    }
    f.loglik = require_number(j, "loglik", path);
    return f;
  }
  if (model == "sc") {
    SelfCorrectingFit f;
    f.mu = require_number(j, "mu", path);
    f.alpha = require_number(j, "alpha", path);
    f.loglik = require_number(j, "loglik", path);
    return f;
  }
  if (model == "policy-mle") {
    PolicyMleResult f;
    f.params = policy_from_json(j, path);
    f.loglik = require_number(j, "loglik", path);
    return f;
  }
  fail(ErrorCode::Parse, path + ": unknown model tag \"" + model + "\"");
}

void save_trace(const TrainTrace& trace, const std::string& path,
                bool include_timing) {
  std::ofstream out = open_output(path);
  out << "iter,mmd2,mean_return,grad_norm,wall_ms\n";
  for (const TrainTraceRow& row : trace) {
    out << row.iteration << ',' << fmt(row.mmd2) << ',' << fmt(row.mean_return)
        << ',' << fmt(row.grad_norm) << ','
        << fmt(include_timing ? row.wall_ms : 0.0) << '\n';
  }
  flush_or_fail(out, path);
}

namespace {

json spec_to_json(const IntensitySpec& spec) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        json j;
        if constexpr (std::is_same_v<T, LinearIntensity>) {
          j["type"] = "linear";
          j["slope"] = v.slope;
          j["intercept"] = v.intercept;
        } else if constexpr (std::is_same_v<T, PiecewiseLinearIntensity>) {
          j["type"] = "piecewise_linear";
          j["knots"] = v.knots;
          j["slopes"] = v.slopes;
          j["intercept"] = v.intercept;
        } else if constexpr (std::is_same_v<T, HawkesIntensity>) {
          j["type"] = "hawkes";
          j["mu"] = v.mu;
          j["alpha"] = v.alpha;
          j["decay"] = v.decay;
        } else if constexpr (std::is_same_v<T, SelfCorrectingIntensity>) {
          j["type"] = "self_correcting";
          j["mu"] = v.mu;
          j["alpha"] = v.alpha;
        } else {
          j["type"] = "sum";
          json comps = json::array();
          for (const IntensitySpec& comp : v.components)
            comps.push_back(spec_to_json(comp));
          j["components"] = std::move(comps);
        }
        return j;
      },
      spec.value);
}

IntensitySpec spec_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    fail(ErrorCode::Parse, where + ": intensity spec needs a type tag");
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear") {
    LinearIntensity v;
    v.slope = require_number(j, "slope", where);
    v.intercept = require_number(j, "intercept", where);
    return IntensitySpec{v};
  }
  if (type == "piecewise_linear") {
    PiecewiseLinearIntensity v;
    v.knots = require_number_array(j, "knots", where);
    v.slopes = require_number_array(j, "slopes", where);
    v.intercept = require_number(j, "intercept", where);
    return IntensitySpec{v};
  }
  if (type == "hawkes") {
    HawkesIntensity v;
    v.mu = require_number(j, "mu", where);
    v.alpha = require_number(j, "alpha", where);
    v.decay = require_number(j, "decay", where);
    return IntensitySpec{v};
  }
  if (type == "self_correcting") {
    SelfCorrectingIntensity v;
    v.mu = require_number(j, "mu", where);
    v.alpha = require_number(j, "alpha", where);
    return IntensitySpec{v};
  }
  if (type == "sum") {
    SumIntensity v;
    if (!j.contains("components") || !j.at("components").is_array())
      fail(ErrorCode::Parse, where + ": sum spec needs a components array");
    for (const auto& cj : j.at("components"))
      v.components.push_back(spec_from_json(cj, where));
    return IntensitySpec{v};
  }
  fail(ErrorCode::Parse, where + ": unknown intensity type \"" + type + "\"");
}

}  // namespace

IntensitySpec load_spec(const std::string& path) {
  std::ifstream in = open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "read from " + path + " failed");
  return spec_from_json(parse_json(buf.str(), path), path);
}

void save_spec(const IntensitySpec& spec, const std::string& path) {
  std::ofstream out = open_output(path);
  out << spec_to_json(spec).dump(2) << '\n';
  flush_or_fail(out, path);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double_value(const std::string& key, const std::string& v) {
  const char* b = v.data();
  const char* e = b + v.size();
  double out = 0.0;
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || p != e)
    fail(ErrorCode::Parse, "config: " + key + " expects a number, got \"" + v + "\"");
  return out;
}

std::size_t parse_size_value(const std::string& key, const std::string& v) {
  const char* b = v.data();
  const char* e = b + v.size();
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || p != e)
    fail(ErrorCode::Parse,
         "config: " + key + " expects a nonnegative integer, got \"" + v + "\"");
  return out;
}

bool parse_bool_value(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorCode::Parse, "config: " + key + " expects true or false, got \"" + v + "\"");
}

}  // namespace

TrainConfig parse_train_config(const std::string& path) {
  std::ifstream in = open_input(path);
  TrainConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::size_t hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                 ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      fail(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                 ": expected key = value");
    if (key == "hidden_dim") {
      std::size_t d = parse_size_value(key, value);
      if (d < 1 || d > 65536)
        fail(ErrorCode::Parse, "config: hidden_dim out of range");
      cfg.hidden_dim = static_cast<int>(d);
    } else if (key == "distribution") {
      cfg.dist = gap_dist_from_name(value);
    } else if (key == "init_scale") {
      cfg.init_scale = parse_double_value(key, value);
      if (!(cfg.init_scale >= 0.0))
        fail(ErrorCode::Parse, "config: init_scale must be >= 0");
    } else if (key == "expert_batch") {
      cfg.expert_batch = parse_size_value(key, value);
      if (cfg.expert_batch < 1)
        fail(ErrorCode::Parse, "config: expert_batch must be >= 1");
    } else if (key == "rollout_batch") {
      cfg.rollout_batch = parse_size_value(key, value);
      if (cfg.rollout_batch < 2)
        fail(ErrorCode::Parse, "config: rollout_batch must be >= 2");
    } else if (key == "iterations") {
      cfg.iterations = parse_size_value(key, value);
    } else if (key == "learning_rate") {
      cfg.learning_rate = parse_double_value(key, value);
      if (!(cfg.learning_rate >= 0.0))
        fail(ErrorCode::Parse, "config: learning_rate must be >= 0");
    } else if (key == "optimizer") {
      if (value == "sgd") cfg.optimizer = Optimizer::Sgd;
      else if (value == "adam") cfg.optimizer = Optimizer::Adam;
      else fail(ErrorCode::Parse, "config: optimizer must be sgd or adam");
    } else if (key == "adam_beta1") {
      cfg.adam_beta1 = parse_double_value(key, value);
      if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0))
        fail(ErrorCode::Parse, "config: adam_beta1 must be in [0, 1)");
    } else if (key == "adam_beta2") {
      cfg.adam_beta2 = parse_double_value(key, value);
      if (!(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0))
        fail(ErrorCode::Parse, "config: adam_beta2 must be in [0, 1)");
    } else if (key == "adam_epsilon") {
      cfg.adam_epsilon = parse_double_value(key, value);
      if (!(cfg.adam_epsilon > 0.0))
        fail(ErrorCode::Parse, "config: adam_epsilon must be > 0");
    } else if (key == "variance_reduction") {
      if (value == "full_return")
        cfg.variance_reduction = VarianceReduction::FullReturn;
      else if (value == "reward_to_go")
        cfg.variance_reduction = VarianceReduction::RewardToGo;
      else if (value == "reward_to_go_baseline")
        cfg.variance_reduction = VarianceReduction::RewardToGoBaseline;
      else
        fail(ErrorCode::Parse,
             "config: variance_reduction must be full_return, reward_to_go, "
             "or reward_to_go_baseline");
    } else if (key == "kernel") {
      if (value == "median") cfg.kernel_source = KernelSource::MedianTrick;
      else if (value == "fixed") cfg.kernel_source = KernelSource::Fixed;
      else fail(ErrorCode::Parse, "config: kernel must be median or fixed");
    } else if (key == "kernel_sigma") {
      cfg.kernel_sigma = parse_double_value(key, value);
      if (!(cfg.kernel_sigma > 0.0))
        fail(ErrorCode::Parse, "config: kernel_sigma must be > 0");
    } else if (key == "normalize_reward") {
      cfg.normalize_reward = parse_bool_value(key, value);
    } else if (key == "checkpoint_interval") {
      cfg.checkpoint_interval = parse_size_value(key, value);
    } else {
      fail(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                 ": unknown config key \"" + key + "\"");
    }
  }
  if (in.bad()) fail(ErrorCode::Io, "read from " + path + " failed");
  return cfg;
}

void write_report_files(const std::string& dir, const ComparisonReport& report,
                        const std::vector<CandidateEvalExtra>& extras) {
  if (!extras.empty() && extras.size() != report.candidates.size())
    fail(ErrorCode::InvalidArgument,
         "one extras entry per candidate (or none) expected");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create directory " + dir);

  const auto path_in_dir = [&dir](const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
  };

  {
    std::ofstream out = open_output(path_in_dir("intensity.csv"));
    out << "bin_center,expert";
    for (const CandidateReport& cand : report.candidates)
      out << ',' << safe_name(cand.name);
    out << '\n';
    const IntensityCurve& ex = report.expert_curve;
    for (std::size_t b = 0; b + 1 < ex.edges.size(); ++b) {
      out << fmt(ex.bin_center(b)) << ',' << fmt(ex.rates[b]);
      for (const CandidateReport& cand : report.candidates)
        out << ',' << fmt(cand.curve.rates[b]);
      out << '\n';
    }
    flush_or_fail(out, path_in_dir("intensity.csv"));
  }

  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string name = safe_name(report.candidates[i].name);
    if (!extras[i].qq.empty()) {
      const std::string path = path_in_dir("qq_" + name + ".csv");
      std::ofstream out = open_output(path);
      out << "theoretical,empirical\n";
      for (const auto& [th, emp] : extras[i].qq)
        out << fmt(th) << ',' << fmt(emp) << '\n';
      flush_or_fail(out, path);
    }
    if (!extras[i].pvalue_cdf.empty()) {
      const std::string path = path_in_dir("pvalues_" + name + ".csv");
      std::ofstream out = open_output(path);
      out << "p,cdf\n";
      for (const auto& [p, cdf] : extras[i].pvalue_cdf)
        out << fmt(p) << ',' << fmt(cdf) << '\n';
      flush_or_fail(out, path);
    }
  }

  json summary;
  summary["kernel_sigma"] = report.kernel_sigma;
  json cands = json::array();
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const CandidateReport& cand = report.candidates[i];
    json cj;
    cj["name"] = cand.name;
    cj["intensity_mae"] = cand.intensity_mae;
    cj["mmd2"] = cand.mmd2;
    if (i < extras.size() && extras[i].ks_pass_rate.has_value()) {
      cj["ks_pass_rate"] = *extras[i].ks_pass_rate;
      cj["ks_sequences"] = extras[i].ks_sequences;
    }
    cands.push_back(std::move(cj));
  }
  summary["candidates"] = std::move(cands);
  const std::string spath = path_in_dir("summary.json");
  std::ofstream out = open_output(spath);
  out << summary.dump(2) << '\n';
  flush_or_fail(out, spath);
}

}  // namespace tpp
