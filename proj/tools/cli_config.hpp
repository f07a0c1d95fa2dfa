#pragma once

// Run configuration and tabular output for the qeilab command line.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qeilab/model.hpp"
#include "qeilab/numerics.hpp"

namespace qeilab::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kNonConvergence = 1,
  kInvalidConfig = 2,
  kVerificationFailed = 3,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string model = "ising";
  double mass = 1.0;
  // two-bump state
  double alpha = 0.5;
  double beta = -0.04;
  double gamma = 5.0;
  std::vector<int> nparticles{1, 2, 5};
  // verify: state | vacuum | superposition | random
  std::string suite = "state";
  // vacuum + two-particle superposition
  double c0 = 0.99;
  double phase = 0.0;
  double u_center = 1.5;
  double v_center = 2.5;
  double packet_width = 0.5;
  // smearing bump and position
  double tau = 1.0;
  double center = 0.0;
  double x = 0.0;
  // time grid for profiles
  double t_min = -10.0;
  double t_max = 10.0;
  int samples = 201;
  // quadrature
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double pointwise_budget = 4e9;
  // bound
  bool sweep = false;
  // scan
  std::vector<double> alphas{0.1, 0.25, 0.5, 1.0};
  std::vector<double> gammas;  // empty: 0, 0.5, ..., 8
  // random verification suite
  std::uint64_t seed = 20240601;
  int suite_size = 20;
  // output
  std::string format;  // empty: command default
  std::string out;     // empty: stdout

  [[nodiscard]] Model make_model() const {
    return model == "free" ? Model::free_boson(mass) : Model::ising(mass);
  }

  [[nodiscard]] QuadratureConfig quadrature() const {
    QuadratureConfig q;
    q.rel_tol = rel_tol;
    q.abs_tol = abs_tol;
    return q;
  }

  void validate() const {
    auto finite = [](double v, const char* name) {
      if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
    };
    if (model != "free" && model != "ising") throw ConfigError("model must be free or ising");
    if (!(mass > 0.0)) throw ConfigError("mass must be > 0");
    for (auto [v, n] : {std::pair{mass, "mass"}, {alpha, "alpha"}, {beta, "beta"},
                        {gamma, "gamma"}, {c0, "c0"}, {phase, "phase"}, {u_center, "u_center"},
                        {v_center, "v_center"}, {packet_width, "packet_width"}, {tau, "tau"},
                        {center, "center"}, {x, "x"}, {t_min, "t_min"}, {t_max, "t_max"},
                        {rel_tol, "rel_tol"}, {abs_tol, "abs_tol"},
                        {pointwise_budget, "pointwise_budget"}}) {
      finite(v, n);
    }
    if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
    if (nparticles.empty()) throw ConfigError("nparticles must not be empty");
    for (int n : nparticles) {
      if (n < 1) throw ConfigError("nparticles entries must be >= 1");
    }
    if (suite != "state" && suite != "vacuum" && suite != "superposition" && suite != "random") {
      throw ConfigError("suite must be state, vacuum, superposition or random");
    }
    if (!(c0 >= 0.0 && c0 < 1.0)) throw ConfigError("c0 must be in [0, 1)");
    if (!(packet_width > 0.0)) throw ConfigError("packet_width must be > 0");
    if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
    if (!(t_min <= t_max)) throw ConfigError("t_min must not exceed t_max");
    if (samples < 1 || (samples == 1 && t_min != t_max)) {
      throw ConfigError("samples must be >= 2 for a nonempty t-range");
    }
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("tolerances must be > 0");
    for (double a : alphas) {
      finite(a, "alphas");
      if (!(a > 0.0)) throw ConfigError("alphas entries must be > 0");
    }
    if (alphas.empty()) throw ConfigError("alphas must not be empty");
    for (double g : gammas) finite(g, "gammas");
    if (suite_size < 0) throw ConfigError("suite_size must be >= 0");
    if (!format.empty() && format != "csv" && format != "json") {
      throw ConfigError("format must be csv or json");
    }
  }
};

inline json to_json(const RunConfig& c) {
  json j;
  j["model"] = c.model;
  j["mass"] = c.mass;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["nparticles"] = c.nparticles;
  j["suite"] = c.suite;
  j["c0"] = c.c0;
  j["phase"] = c.phase;
  j["u_center"] = c.u_center;
  j["v_center"] = c.v_center;
  j["packet_width"] = c.packet_width;
  j["tau"] = c.tau;
  j["center"] = c.center;
  j["x"] = c.x;
  j["t_min"] = c.t_min;
  j["t_max"] = c.t_max;
  j["samples"] = c.samples;
  j["rel_tol"] = c.rel_tol;
  j["abs_tol"] = c.abs_tol;
  j["pointwise_budget"] = c.pointwise_budget;
  j["sweep"] = c.sweep;
  j["alphas"] = c.alphas;
  j["gammas"] = c.gammas;
  j["seed"] = c.seed;
  j["suite_size"] = c.suite_size;
  j["format"] = c.format;
  return j;
}

namespace detail {

template <typename T>
void read_key(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace detail

/// Overlays the keys present in `j` onto `c`. Unknown keys are rejected.
inline void apply_json(const json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const json known = to_json(RunConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key) && key != "out") {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  using detail::read_key;
  read_key(j, "model", c.model);
  read_key(j, "mass", c.mass);
  read_key(j, "alpha", c.alpha);
  read_key(j, "beta", c.beta);
  read_key(j, "gamma", c.gamma);
  read_key(j, "nparticles", c.nparticles);
  read_key(j, "suite", c.suite);
  read_key(j, "c0", c.c0);
  read_key(j, "phase", c.phase);
  read_key(j, "u_center", c.u_center);
  read_key(j, "v_center", c.v_center);
  read_key(j, "packet_width", c.packet_width);
  read_key(j, "tau", c.tau);
  read_key(j, "center", c.center);
  read_key(j, "x", c.x);
  read_key(j, "t_min", c.t_min);
  read_key(j, "t_max", c.t_max);
  read_key(j, "samples", c.samples);
  read_key(j, "rel_tol", c.rel_tol);
  read_key(j, "abs_tol", c.abs_tol);
  read_key(j, "pointwise_budget", c.pointwise_budget);
  read_key(j, "sweep", c.sweep);
  read_key(j, "alphas", c.alphas);
  read_key(j, "gammas", c.gammas);
  read_key(j, "seed", c.seed);
  read_key(j, "suite_size", c.suite_size);
  read_key(j, "format", c.format);
  read_key(j, "out", c.out);
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Rows plus checks, rendered as CSV (comment lines, header, records) or as
/// a JSON document {version, command, config, summary, results, checks}.
struct Table {
  std::string command;
  json config;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json summary = json::object();
  json checks = json::array();

  void add_check(const std::string& name, bool passed, double value, double tolerance,
                 const std::string& detail = {}) {
    json c;
    c["name"] = name;
    c["passed"] = passed;
    c["value"] = value;
    c["tolerance"] = tolerance;
    if (!detail.empty()) c["detail"] = detail;
    checks.push_back(std::move(c));
  }

  [[nodiscard]] bool all_checks_passed() const {
    for (const auto& c : checks) {
      if (!c.at("passed").get<bool>()) return false;
    }
    return true;
  }
};

inline std::string csv_cell(const json& v) {
  if (v.is_string()) {
    std::string s = "\"";
    for (char ch : v.get<std::string>()) {
      if (ch == '"') s += '"';
      s += ch;
    }
    return s + "\"";
  }
  if (v.is_number_float() && !std::isfinite(v.get<double>())) return "nan";
  return v.dump();
}

inline std::string render_csv(const Table& t) {
  std::ostringstream os;
  os << "# qeilab " << kVersion << " " << t.command << "\n";
  os << "# config: " << t.config.dump() << "\n";
  for (const auto& [key, value] : t.summary.items()) {
    os << "# " << key << ": " << value.dump() << "\n";
  }
  for (const auto& c : t.checks) os << "# check: " << c.dump() << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << (i ? "," : "") << t.columns[i];
  }
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << "\n";
  }
  return os.str();
}

inline std::string render_json(const Table& t) {
  json doc;
  doc["version"] = kVersion;
  doc["command"] = t.command;
  doc["config"] = t.config;
  doc["summary"] = t.summary;
  json results = json::array();
  for (const auto& row : t.rows) {
    json r;
    for (std::size_t i = 0; i < t.columns.size(); ++i) r[t.columns[i]] = row[i];
    results.push_back(std::move(r));
  }
  doc["results"] = std::move(results);
  doc["checks"] = t.checks;
  return doc.dump(2) + "\n";
}

}  // namespace qeilab::cli
