#pragma once

// Subcommands of the qeilab executable. Each command returns its rendered
// output and an exit code so it can be driven from tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cli_config.hpp"
#include "qeilab/energy_density.hpp"
#include "qeilab/negative_energy.hpp"
#include "qeilab/qei.hpp"
#include "qeilab/states.hpp"

namespace qeilab::cli {

struct CommandResult {
  int exit_code = kOk;
  std::string output;
  std::string error;
};

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct SuiteEntry {
  Model model;
  FockState state;
  SmearingFunction g;
  double x = 0.0;
};

/// Seeded product states: n in 1..5, alpha in [0.1, 1], gamma in [0, 8],
/// beta in [-0.1, 0.1], random model, bump width in [0.25, 1], random
/// bump center and position in [-0.5, 0.5].
inline std::vector<SuiteEntry> random_suite(std::uint64_t seed, int count, double mass = 1.0) {
  std::mt19937_64 rng(seed);
  std::vector<SuiteEntry> out;
  for (int i = 0; i < count; ++i) {
    const int n = 1 + static_cast<int>(5.0 * uniform01(rng));
    const double alpha = 0.1 + 0.9 * uniform01(rng);
    const double gamma = 8.0 * uniform01(rng);
    const double beta = -0.1 + 0.2 * uniform01(rng);
    const bool free = uniform01(rng) < 0.5;
    const double tau = 0.25 + 0.75 * uniform01(rng);
    const double center = uniform01(rng) - 0.5;
    const double x = uniform01(rng) - 0.5;
    out.push_back({free ? Model::free_boson(mass) : Model::ising(mass),
                   ProductState(n, make_two_bump({alpha, beta, gamma})),
                   SmearingFunction::bump(tau, center), x});
  }
  return out;
}

/// Vacuum plus two-particle vectors in both models: packets at rapidities
/// 1.5 and 2.5 with |c0| = 0.99 over six phases, and a wider mixed pair.
inline std::vector<SuiteEntry> superposition_family(double mass = 1.0) {
  std::vector<SuiteEntry> out;
  for (const auto& m : {Model::free_boson(mass), Model::ising(mass)}) {
    const auto u = make_packet(1.5, 0.5);
    const auto v = make_packet(2.5, 0.5);
    for (int k = 0; k < 6; ++k) {
      const complex c0 = std::polar(0.99, k * std::numbers::pi / 3.0);
      out.push_back({m, make_superposition(m, c0, u, v), SmearingFunction::bump(0.3), 0.0});
    }
    out.push_back({m, make_superposition(m, 0.6, make_packet(-0.5, 0.4), make_packet(0.7, 0.3)),
                   SmearingFunction::bump(0.5, 0.1), 0.2});
  }
  return out;
}

namespace detail {

inline std::string pick_format(const RunConfig& c, const char* fallback) {
  return c.format.empty() ? fallback : c.format;
}

inline CommandResult finish(const Table& t, const RunConfig& c, const char* fallback, int code) {
  const auto fmt = pick_format(c, fallback);
  return {code, fmt == "json" ? render_json(t) : render_csv(t), {}};
}

inline Table start(const char* command, const RunConfig& c) {
  Table t;
  t.command = command;
  t.config = to_json(c);
  return t;
}

inline std::vector<double> time_grid(const RunConfig& c) {
  std::vector<double> ts;
  if (c.samples == 1) return {c.t_min};
  for (int i = 0; i < c.samples; ++i) {
    ts.push_back(c.t_min + (c.t_max - c.t_min) * i / (c.samples - 1));
  }
  return ts;
}

}  // namespace detail

/// Energy density per particle along the time axis for product(n, phi).
inline CommandResult cmd_profile(const RunConfig& c) {
  const auto m = c.make_model();
  const auto q = c.quadrature();
  const auto phi = make_two_bump({c.alpha, c.beta, c.gamma}, BumpProfile::gaussian(), q);
  auto t = detail::start("profile", c);
  t.columns = {"n", "t", "rho", "rho_error"};
  std::vector<SpacetimePoint> line;
  for (double s : detail::time_grid(c)) line.push_back({s, c.x});
  bool converged = true;
  for (int n : c.nparticles) {
    const auto prof = expectation_profile(m, ProductState(n, phi), line, q);
    for (const auto& p : prof.points) {
      t.rows.push_back({n, p.point.t, p.value / n, p.error / n});
    }
    converged = converged && prof.converged();
  }
  t.summary["state"] = phi.describe();
  return detail::finish(t, c, "csv", converged ? kOk : kNonConvergence);
}

/// The lower bound for the configured bump; with `sweep`, over a range of
/// masses down to 1e-3 plus the massless limit as a mass-0 row.
inline CommandResult cmd_bound(const RunConfig& c) {
  const auto g = SmearingFunction::bump(c.tau, c.center);
  const auto q = c.quadrature();
  auto t = detail::start("bound", c);
  t.columns = {"model", "mass", "rhs", "rhs_error", "converged"};
  std::vector<double> masses{c.mass};
  if (c.sweep) masses = {10.0, 3.0, 1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3};
  bool converged = true;
  for (double mu : masses) {
    const Model m = c.model == "free" ? Model::free_boson(mu) : Model::ising(mu);
    const auto r = qei_rhs(m, g, q);
    t.rows.push_back({c.model, mu, r.value, r.error, r.converged});
    converged = converged && r.converged;
  }
  if (c.sweep) {
    const auto d = g.derivative_norm_result(q);
    const double k = 1.0 / (4.0 * std::numbers::pi);
    t.rows.push_back({c.model, 0.0, -k * d.value, k * d.error, d.converged});
    converged = converged && d.converged;
  }
  t.summary["smearing"] = g.describe();
  return detail::finish(t, c, "csv", converged ? kOk : kNonConvergence);
}

inline std::vector<SuiteEntry> verify_entries(const RunConfig& c) {
  const auto m = c.make_model();
  const auto g = SmearingFunction::bump(c.tau, c.center);
  const auto q = c.quadrature();
  std::vector<SuiteEntry> out;
  if (c.suite == "vacuum") {
    out.push_back({m, make_vacuum(m), g, c.x});
  } else if (c.suite == "superposition") {
    const auto u = make_packet(c.u_center, c.packet_width, BumpProfile::gaussian(), q);
    const auto v = make_packet(c.v_center, c.packet_width, BumpProfile::gaussian(), q);
    out.push_back({m, make_superposition(m, std::polar(c.c0, c.phase), u, v, q), g, c.x});
  } else if (c.suite == "random") {
    out = random_suite(c.seed, c.suite_size, c.mass);
    for (auto& e : superposition_family(c.mass)) out.push_back(std::move(e));
  } else {
    const auto phi = make_two_bump({c.alpha, c.beta, c.gamma}, BumpProfile::gaussian(), q);
    for (int n : c.nparticles) out.push_back({m, ProductState(n, phi), g, c.x});
  }
  return out;
}

/// One report per state; exit code 3 if any report fails.
inline CommandResult cmd_verify(const RunConfig& c) {
  const auto q = c.quadrature();
  SmearingOptions opt;
  opt.pointwise_budget = c.pointwise_budget;
  auto t = detail::start("verify", c);
  t.columns = {"model",           "state",          "smearing",         "x",
               "lhs",             "lhs_error",      "rhs",              "rhs_error",
               "margin",          "passed",         "converged",        "pointwise_evaluated",
               "pointwise_value", "pointwise_error", "note"};
  bool all_passed = true, converged = true;
  for (const auto& e : verify_entries(c)) {
    const auto r = verify(e.model, e.state, e.g, e.x, q, opt);
    t.rows.push_back({e.model.name(), r.state, r.smearing, e.x, r.lhs, r.lhs_error, r.rhs,
                      r.rhs_error, r.margin, r.passed, r.converged, r.detail.pointwise_evaluated,
                      r.detail.pointwise_value, r.detail.pointwise_error, r.detail.note});
    all_passed = all_passed && r.passed;
    converged = converged && r.converged;
  }
  t.add_check("all_reports_passed", all_passed, static_cast<double>(t.rows.size()), 0.0);
  const int code = !all_passed ? kVerificationFailed : (converged ? kOk : kNonConvergence);
  return detail::finish(t, c, "json", code);
}

/// Negativity scan over (alpha, gamma) with the threshold in the summary.
inline CommandResult cmd_scan(const RunConfig& c) {
  const auto gammas = c.gammas.empty() ? default_scan_gammas() : c.gammas;
  const auto res = scan(c.alphas, gammas, BumpProfile::gaussian(), c.quadrature(), c.make_model());
  auto t = detail::start("scan", c);
  t.columns = {"alpha", "gamma", "beta_opt", "min_value", "min_value_error", "negative", "status"};
  bool ok = true;
  for (const auto& r : res.rows) {
    t.rows.push_back({r.alpha, r.gamma, r.beta_opt, r.min_value, r.error, r.negative,
                      r.ok ? std::string("ok") : r.message});
    ok = ok && r.ok;
  }
  t.summary["gamma_threshold"] = gamma_threshold();
  t.summary["units"] = "mu^2/(2 pi)";
  return detail::finish(t, c, "csv", ok ? kOk : kNonConvergence);
}

/// Invariant checks with fixed parameters; exit code 3 if any fails.
inline CommandResult cmd_selftest(const RunConfig& c) {
  auto t = detail::start("selftest", c);
  t.columns = {"name", "passed", "value", "tolerance"};
  const Model free = Model::free_boson(), ising = Model::ising();
  const auto g = SmearingFunction::bump();

  {
    const double v = std::abs(gamma_threshold() - std::acosh(2.0 + std::sqrt(5.0)));
    t.add_check("gamma_threshold", v < 1e-9, v, 1e-9);
  }
  {
    double worst = 0.0;
    for (double gam : {0.0, 1.0, 2.0, 5.0}) {
      const auto a = ijk_integrals(1e-3, gam);
      const auto b = limit_ijk(gam);
      worst = std::max({worst, std::abs(a.i_val / b.i_val - 1), std::abs(a.j_val / b.j_val - 1),
                        std::abs(a.k_val / b.k_val - 1)});
    }
    t.add_check("ijk_delta_limit", worst < 1e-4, worst, 1e-4);
  }
  {
    std::mt19937_64 rng(c.seed);
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
      const double w = -5.0 + 10.0 * uniform01(rng), wp = -5.0 + 10.0 * uniform01(rng);
      const auto r = fm_identity_residual(g, w, wp);
      worst = std::max(worst, r.residual / (1.0 + std::abs(r.lhs)));
    }
    t.add_check("fm_identity", worst < 1e-6, worst, 1e-6);
  }
  for (double mu : {0.1, 1.0, 10.0}) {
    const auto a = qei_rhs(Model::ising(mu), g);
    const auto b = qei_rhs_oracle_ising(mu, g);
    const double v = std::abs(a.value - b.value) / std::abs(a.value);
    t.add_check("rhs_oracle_mu_" + json(mu).dump(), v < 1e-6, v, 1e-6);
  }
  {
    const double target = massless_limit_rhs(g);
    for (const auto& m : {Model::free_boson(1e-3), Model::ising(1e-3)}) {
      const double v = std::abs(qei_rhs(m, g).value / target - 1.0);
      t.add_check("massless_limit_" + m.name(), v < 0.01, v, 0.01);
    }
    const double r1 = target / conformal_sharp_bound(1.0, g);
    const double r2 = target / conformal_sharp_bound(0.5, g);
    t.add_check("conformal_ratio_c1", std::abs(r1 / 1.5 - 1) < 0.01, r1, 0.01);
    t.add_check("conformal_ratio_c_half", std::abs(r2 / 3.0 - 1) < 0.01, r2, 0.01);
  }
  {
    const auto fr = qei_rhs(free, g), is = qei_rhs(ising, g);
    t.add_check("rhs_ordering", fr.value <= is.value && is.value <= 0.0, is.value - fr.value, 0.0);
  }
  const auto phi = make_two_bump({0.5, -0.04, 5.0});
  {
    double worst = 0.0;
    for (double s : {-0.5, -0.05, 0.0, 0.03, 0.4}) {
      const auto p = expectation_point(free, ProductState(1, phi), {s, 0.0});
      worst = std::min(worst, p.value + p.error);
    }
    t.add_check("free_positivity", worst >= 0.0, worst, 0.0);
  }
  {
    double worst = 0.0;
    for (double s : {-0.3, 0.0, 0.2}) {
      const auto a = expectation_point(free, ProductState(1, phi), {s, 0.0});
      const auto b = expectation_point(free, ProductState(2, phi), {s, 0.0});
      const double excess = std::abs(b.value - 2 * a.value) - (b.error + 2 * a.error + 1e-12);
      worst = std::max(worst, excess);
    }
    t.add_check("free_additivity", worst <= 0.0, worst, 0.0);
  }
  {
    const auto a = expectation_point(ising, ProductState(1, phi), {0.0, 0.0});
    const auto b = expectation_point(ising, ProductState(2, phi), {0.0, 0.0});
    const double gap = std::abs(b.value - 2 * a.value);
    const double err = b.error + 2 * a.error;
    t.add_check("ising_non_additivity", gap > 10 * err, gap, 10 * err);
    t.add_check("ising_negative_at_origin", a.value + a.error < 0.0, a.value, a.error);
    const auto e = energy_at_origin(0.5, -0.04, 5.0);
    const double scaled = a.value / density_prefactor(ising);
    const double diff = std::abs(e.value - scaled);
    const double tol = 10 * (e.error + a.error / density_prefactor(ising)) + 1e-9;
    t.add_check("energy_at_origin_cross_check", diff <= tol, diff, tol);
    t.add_check("hermiticity", a.imag_residual < 1e-8, a.imag_residual, 1e-8);
  }
  bool ok = true;
  for (const auto& ch : t.checks) {
    t.rows.push_back({ch["name"], ch["passed"], ch["value"], ch["tolerance"]});
    ok = ok && ch["passed"].get<bool>();
  }
  return detail::finish(t, c, "json", ok ? kOk : kVerificationFailed);
}

/// Parses arguments (config file first, flags on top) and runs the command.
inline CommandResult run(std::vector<std::string> args) {
  CLI::App app{"qeilab: energy densities and quantum energy inequalities in 1+1 dimensions",
               "qeilab"};
  app.require_subcommand(1);
  RunConfig flags;
  std::string config_path;
  std::vector<std::function<void(RunConfig&)>> overrides;
  auto bind = [&](const std::string& name, auto RunConfig::*field, const std::string& help) {
    auto* opt = app.add_option(name, flags.*field, help);
    overrides.push_back([opt, field, &flags](RunConfig& c) {
      if (opt->count() > 0) c.*field = flags.*field;
    });
    return opt;
  };
  bind("--model", &RunConfig::model, "free or ising");
  bind("--mass", &RunConfig::mass, "particle mass mu");
  bind("--alpha", &RunConfig::alpha, "bump width");
  bind("--beta", &RunConfig::beta, "weight of the shifted bump");
  bind("--gamma", &RunConfig::gamma, "rapidity shift of the second bump");
  bind("--nparticles", &RunConfig::nparticles, "particle numbers")->delimiter(',');
  bind("--suite", &RunConfig::suite, "verify: state, vacuum, superposition or random");
  bind("--c0", &RunConfig::c0, "vacuum amplitude |c0| of the superposition");
  bind("--phase", &RunConfig::phase, "phase of c0");
  bind("--u-center", &RunConfig::u_center, "rapidity of the first packet");
  bind("--v-center", &RunConfig::v_center, "rapidity of the second packet");
  bind("--packet-width", &RunConfig::packet_width, "packet width");
  bind("--tau", &RunConfig::tau, "half-width of the smearing bump");
  bind("--center", &RunConfig::center, "center of the smearing bump");
  bind("--x", &RunConfig::x, "spatial position");
  bind("--t-min", &RunConfig::t_min, "profile start time");
  bind("--t-max", &RunConfig::t_max, "profile end time");
  bind("--samples", &RunConfig::samples, "profile sample count");
  bind("--tol", &RunConfig::rel_tol, "relative quadrature tolerance");
  bind("--abs-tol", &RunConfig::abs_tol, "absolute quadrature tolerance");
  bind("--pointwise-budget", &RunConfig::pointwise_budget,
       "cost limit for the pointwise cross-check of smeared values");
  bind("--alphas", &RunConfig::alphas, "scan widths")->delimiter(',');
  bind("--gammas", &RunConfig::gammas, "scan shifts")->delimiter(',');
  bind("--seed", &RunConfig::seed, "seed of the random verification suite");
  bind("--suite-size", &RunConfig::suite_size, "size of the random verification suite");
  bind("--format", &RunConfig::format, "csv or json");
  bind("--out", &RunConfig::out, "output path (default stdout)");
  auto* sweep = app.add_flag("--sweep", flags.sweep, "bound: sweep the mass toward 0");
  overrides.push_back([sweep, &flags](RunConfig& c) {
    if (sweep->count() > 0) c.sweep = flags.sweep;
  });
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.set_version_flag("--version", std::string("qeilab ") + kVersion);

  auto* profile = app.add_subcommand("profile", "energy density per particle along t");
  auto* bound = app.add_subcommand("bound", "lower bound on smeared energy density");
  auto* verify_cmd = app.add_subcommand("verify", "check the bound on states");
  auto* scan_cmd = app.add_subcommand("scan", "one-particle negativity scan");
  auto* selftest = app.add_subcommand("selftest", "invariant checks");
  for (auto* s : {profile, bound, verify_cmd, scan_cmd, selftest}) s->fallthrough();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    return {kOk, app.help(), {}};
  } catch (const CLI::CallForVersion& e) {
    return {kOk, std::string(e.what()) + "\n", {}};
  } catch (const CLI::ParseError& e) {
    return {kInvalidConfig, {}, e.what()};
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) apply_json(load_json_file(config_path), cfg);
    for (const auto& o : overrides) o(cfg);
    cfg.validate();
  } catch (const ConfigError& e) {
    return {kInvalidConfig, {}, e.what()};
  }

  try {
    CommandResult r;
    if (profile->parsed()) r = cmd_profile(cfg);
    if (bound->parsed()) r = cmd_bound(cfg);
    if (verify_cmd->parsed()) r = cmd_verify(cfg);
    if (scan_cmd->parsed()) r = cmd_scan(cfg);
    if (selftest->parsed()) r = cmd_selftest(cfg);
    if (!cfg.out.empty()) {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) return {kInvalidConfig, {}, "cannot write " + cfg.out};
      f << r.output;
      r.output.clear();
    }
    return r;
  } catch (const std::invalid_argument& e) {
    return {kInvalidConfig, {}, e.what()};
  } catch (const NumericalError& e) {
    return {kNonConvergence, {}, e.what()};
  }
}

}  // namespace qeilab::cli
