#pragma once

/// \file qei.hpp
/// \brief Time-smeared energy densities and the state-independent lower
/// bound they obey.

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qeilab/energy_density.hpp"
#include "qeilab/fourier.hpp"
#include "qeilab/model.hpp"
#include "qeilab/numerics.hpp"
#include "qeilab/states.hpp"

namespace qeilab {

/// Real, smooth, compactly supported time-averaging function g.
class SmearingFunction {
 public:
  /// g(t) = amplitude * exp(-1 / (1 - s^2)), s = (t - center) / tau, for |s| < 1.
  static SmearingFunction bump(double tau = 1.0, double center = 0.0, double amplitude = 1.0) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw std::invalid_argument("SmearingFunction: tau must be positive");
    }
    if (!std::isfinite(center) || !std::isfinite(amplitude)) {
      throw std::invalid_argument("SmearingFunction: center and amplitude must be finite");
    }
    auto g = [=](double t) {
      const double s = (t - center) / tau;
      return std::abs(s) < 1.0 ? amplitude * std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    };
    auto dg = [=](double t) {
      const double s = (t - center) / tau;
      if (!(std::abs(s) < 1.0)) return 0.0;
      const double q = 1.0 - s * s;
      return amplitude * std::exp(-1.0 / q) * (-2.0 * s / (q * q)) / tau;
    };
    std::ostringstream os;
    os.precision(17);
    os << "bump(tau=" << tau << ", center=" << center << ", amplitude=" << amplitude << ")";
    return {g, dg, center - tau, center + tau, os.str()};
  }

  /// Arbitrary g with derivative dg, vanishing outside [t0, t1].
  static SmearingFunction custom(std::function<double(double)> g,
                                 std::function<double(double)> dg, double t0, double t1,
                                 std::string name = "custom") {
    return {std::move(g), std::move(dg), t0, t1, std::move(name)};
  }

  [[nodiscard]] double operator()(double t) const { return (t < t0_ || t > t1_) ? 0.0 : g_(t); }
  [[nodiscard]] double derivative(double t) const {
    return (t < t0_ || t > t1_) ? 0.0 : dg_(t);
  }
  [[nodiscard]] double squared(double t) const {
    const double v = (*this)(t);
    return v * v;
  }
  [[nodiscard]] double t0() const { return t0_; }
  [[nodiscard]] double t1() const { return t1_; }
  [[nodiscard]] double length() const { return t1_ - t0_; }
  [[nodiscard]] const std::string& describe() const { return name_; }

  /// g~(w) = integral g(t) e^{i w t} dt, interpolated from the composite rule.
  [[nodiscard]] complex fourier(double omega) const { return spec_->interpolated(omega); }
  /// Fourier transform of g^2.
  [[nodiscard]] complex fourier_squared(double omega) const {
    return spec2_->interpolated(omega);
  }
  /// Adaptive evaluation of g~(w), independent of the fast rule.
  [[nodiscard]] IntegrationResult<complex> fourier_direct(double omega,
                                                          const QuadratureConfig& cfg = {}) const {
    return fourier_transform(*this, t0_, t1_, omega, cfg);
  }
  [[nodiscard]] const SpectralEvaluator& spectrum() const { return *spec_; }
  [[nodiscard]] const SpectralEvaluator& spectrum_squared() const { return *spec2_; }

  /// Frequency beyond which |g~| stays below rel * |g~|max (cached per rel).
  [[nodiscard]] double decay_frequency(double rel) const { return spec_->decay_frequency(rel); }
  [[nodiscard]] double decay_frequency_squared(double rel) const {
    return spec2_->decay_frequency(rel);
  }

  /// integral |g'(t)|^2 dt with its quadrature error.
  [[nodiscard]] IntegrationResult<double> derivative_norm_result(
      const QuadratureConfig& cfg = {}) const {
    auto f = [this](double t) {
      const double d = derivative(t);
      return d * d;
    };
    return integrate_1d_panels(f, t0_, t1_, 16, cfg);
  }
  [[nodiscard]] double derivative_norm(const QuadratureConfig& cfg = {}) const {
    const auto r = derivative_norm_result(cfg);
    if (!r.converged) throw NumericalError("SmearingFunction: derivative norm did not converge");
    return r.value;
  }

 private:
  SmearingFunction(std::function<double(double)> g, std::function<double(double)> dg, double t0,
                   double t1, std::string name)
      : g_(std::move(g)), dg_(std::move(dg)), t0_(t0), t1_(t1), name_(std::move(name)) {
    if (!(t0_ < t1_) || !std::isfinite(t0_) || !std::isfinite(t1_)) {
      throw std::invalid_argument("SmearingFunction: support must be a finite interval");
    }
    spec_ = std::make_shared<SpectralEvaluator>(g_, t0_, t1_);
    auto gg = g_;
    spec2_ = std::make_shared<SpectralEvaluator>(
        [gg](double t) {
          const double v = gg(t);
          return v * v;
        },
        t0_, t1_);
  }

  std::function<double(double)> g_;
  std::function<double(double)> dg_;
  double t0_;
  double t1_;
  std::string name_;
  std::shared_ptr<SpectralEvaluator> spec_;
  std::shared_ptr<SpectralEvaluator> spec2_;
};

// ---------------------------------------------------------------------------
// The bound
// ---------------------------------------------------------------------------

/// Q(u) = sqrt(1 - u^-2) + sign * u^-2 acosh(u); sign + for the free field,
/// - for the Ising model.
inline double q_function(const Model& m, double u) {
  if (!(u >= 1.0)) throw std::invalid_argument("q_function: require u >= 1");
  if (u == 1.0) return 0.0;
  const double inv2 = 1.0 / (u * u);
  const double tail = inv2 * std::acosh(u);
  return std::sqrt(1.0 - inv2) + (m.is_ising() ? -tail : tail);
}

/// Q(cosh s) in a form without cancellation near s = 0.
inline double q_of_cosh(const Model& m, double s) {
  const double c = std::cosh(s);
  const double tail = s / (c * c);
  return std::tanh(s) + (m.is_ising() ? -tail : tail);
}

/// -(1/4 pi^2) integral_mu^infinity w^2 |g~(w)|^2 Q(w / mu) dw.
///
/// Panels of width max(mu, pi / support) are added until three consecutive
/// panel contributions fall below rel_tol of the running total; the first
/// panel is mapped by w = mu cosh s to remove the square-root edge.
inline IntegrationResult<double> qei_rhs(const Model& m, const SmearingFunction& g,
                                         const QuadratureConfig& cfg = {}) {
  cfg.validate();
  const double mu = m.mass;
  const double width = std::max(mu, std::numbers::pi / g.length());
  constexpr double k = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);
  auto integrand = [&](double w) {
    return w * w * std::norm(g.fourier(w)) * q_function(m, w / mu);
  };
  IntegrationResult<double> out;
  out.converged = true;
  {
    const double smax = std::acosh(1.0 + width / mu);
    auto mapped = [&](double s) {
      const double w = mu * std::cosh(s);
      return w * w * std::norm(g.fourier(w)) * q_of_cosh(m, s) * mu * std::sinh(s);
    };
    const auto r = integrate_1d_panels(mapped, 0.0, smax, 8, cfg);
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
  }
  int quiet = 0;
  double recent = 0.0;
  double lo = mu + width;
  constexpr int kMaxPanels = 1 << 20;
  for (int p = 0;; ++p) {
    if (p >= kMaxPanels) throw NumericalError("qei_rhs: no decay of the smearing spectrum");
    const auto r = integrate_1d(integrand, lo, lo + width, cfg);
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
    lo += width;
    if (std::abs(r.value) <= cfg.rel_tol * std::abs(out.value)) {
      recent += std::abs(r.value);
      if (++quiet == 3) break;
    } else {
      quiet = 0;
      recent = 0.0;
    }
  }
  out.error += recent;  // the quiet panels bound the discarded tail
  out.value *= -k;
  out.error *= k;
  return out;
}

/// Same bound for the Ising model from the (nu, theta) double integral
/// -(mu/4 pi^2) int_0^inf dnu nu int dtheta cosh(theta) |g~(mu cosh theta + nu)|^2.
inline IntegrationResult<double> qei_rhs_oracle_ising(double mass, const SmearingFunction& g,
                                                      const QuadratureConfig& cfg = {}) {
  cfg.validate();
  if (!(mass > 0.0)) throw std::invalid_argument("qei_rhs_oracle_ising: mass must be positive");
  // |g~|^2 w^3 is negligible beyond wmax.
  const double wmax = g.decay_frequency(1e-8) + mass;
  const double theta_max = std::acosh(std::max(wmax / mass, 1.0));
  auto f = [&](double nu, double theta) {
    const double w = mass * std::cosh(theta) + nu;
    return nu * std::cosh(theta) * std::norm(g.fourier(w));
  };
  // The integrand is even in theta.
  const double nu_step = std::numbers::pi / g.length();
  std::vector<double> outer;
  for (double nu = nu_step; nu < wmax; nu += nu_step) outer.push_back(nu);
  auto r = integrate_2d(
      f, {0.0, wmax, 0.0, theta_max}, cfg,
      [&](double nu) {
        // Seed one inner panel per oscillation of |g~| in w = mass cosh(theta) + nu.
        std::vector<double> b;
        for (double w = nu + mass + nu_step; w < wmax; w += nu_step) {
          b.push_back(std::acosh((w - nu) / mass));
        }
        return b;
      },
      outer);
  constexpr double k = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);
  r.value *= -2.0 * mass * k;
  r.error *= 2.0 * mass * k;
  return r;
}

/// -(1/4 pi) integral |g'|^2.
inline double massless_limit_rhs(const SmearingFunction& g, const QuadratureConfig& cfg = {}) {
  return -g.derivative_norm(cfg) / (4.0 * std::numbers::pi);
}

/// -(C/6 pi) integral |g'|^2.
inline double conformal_sharp_bound(double central_charge, const SmearingFunction& g,
                                    const QuadratureConfig& cfg = {}) {
  if (!(central_charge > 0.0) || !std::isfinite(central_charge)) {
    throw std::invalid_argument("conformal_sharp_bound: central charge must be positive");
  }
  return -central_charge * g.derivative_norm(cfg) / (6.0 * std::numbers::pi);
}

struct IdentityResidual {
  double residual = 0.0;
  complex lhs;
  complex rhs;
  double error = 0.0;
  bool converged = true;
};

/// Residual of (w + w') (g^2)~(w' - w) = -(1/pi) int nu conj(g~(nu + w)) g~(nu + w') dnu.
/// The left side uses adaptive quadrature of g^2 e^{i w t}, the right side the
/// fast transform of g; the nu-range is cut where |g~| has decayed.
inline IdentityResidual fm_identity_residual(const SmearingFunction& g, double w, double wp,
                                             const QuadratureConfig& cfg = {}) {
  cfg.validate();
  IdentityResidual out;
  const auto sq = [&g](double t) { return g.squared(t); };
  const auto left = fourier_transform(sq, g.t0(), g.t1(), wp - w, cfg);
  out.lhs = (w + wp) * left.value;
  const double cut = g.decay_frequency(1e-12) + std::max(std::abs(w), std::abs(wp));
  auto f = [&](double nu) { return nu * std::conj(g.fourier(nu + w)) * g.fourier(nu + wp); };
  const auto panels = static_cast<std::size_t>(std::ceil(2.0 * cut * g.length() / std::numbers::pi));
  const auto right = integrate_1d_panels(f, -cut, cut, panels, cfg);
  out.rhs = -right.value / std::numbers::pi;
  out.residual = std::abs(out.lhs - out.rhs);
  out.error = std::abs(w + wp) * left.error + right.error / std::numbers::pi;
  out.converged = left.converged && right.converged;
  return out;
}

// ---------------------------------------------------------------------------
// Smeared energy density
// ---------------------------------------------------------------------------

struct SmearedLhs {
  double value = 0.0;  // route (b)
  double error = 0.0;
  bool converged = true;
  // route (a): t-quadrature of pointwise values
  bool pointwise_evaluated = false;
  double pointwise_value = 0.0;
  double pointwise_error = 0.0;
  bool pointwise_converged = false;
  std::string note;
};

struct SmearingOptions {
  /// Route (a) is skipped when its estimated cost (rapidity nodes times time
  /// samples times L-expansion terms) exceeds this.
  double pointwise_budget = 4e9;
  /// Force route (a) even above the budget.
  bool force_pointwise = false;
};

namespace detail {

inline std::vector<double> merged_breaks(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

/// eta values where E(eta) = E(theta) +- W, which bound the band outside
/// which (g^2)~(E(theta) - E(eta)) is negligible.
inline void band_edges(const Model& m, double theta, double band, std::vector<double>& out) {
  const double c = std::cosh(theta);
  const double hi = std::acosh(c + band / m.mass);
  out.push_back(hi);
  out.push_back(-hi);
  if (c - band / m.mass > 1.0) {
    const double lo = std::acosh(c - band / m.mass);
    out.push_back(lo);
    out.push_back(-lo);
  }
}

inline IntegrationResult<complex> smeared_double_integral(const Model& m, const FockState& state,
                                                          const SmearingFunction& g, double x,
                                                          const QuadratureConfig& cfg) {
  // (g^2)~ is treated as zero beyond `band`.
  const double band = g.decay_frequency_squared(1e-15);
  auto gsq = [&](double w) -> complex {
    return std::abs(w) > band ? complex(0.0) : g.fourier_squared(w);
  };
  auto spatial = [&](double a, double b) {
    const double ph = -(m.momentum(a) - m.momentum(b)) * x;
    return complex(std::cos(ph), std::sin(ph));
  };
  if (const auto* ps = std::get_if<ProductState>(&state)) {
    const auto& phi = ps->phi;
    const int power = m.is_ising() ? ps->n - 1 : 0;
    auto f = [&](double th, double et) -> complex {
      const double w = m.energy(th) - m.energy(et);
      if (std::abs(w) > band) return 0.0;
      const double amp = phi(th) * phi(et);
      if (amp == 0.0) return 0.0;
      double k = kernel_diag(m, th, et) * amp;
      if (power > 0) k *= std::pow(phi.l_factor(th, et), power);
      return k * gsq(w) * spatial(th, et);
    };
    const double c = phi.cutoff();
    const auto br = phi.break_points();
    auto r = integrate_2d(
        f, {-c, c, -c, c}, cfg,
        [&](double th) {
          std::vector<double> b = br;
          b.push_back(th);
          band_edges(m, th, band, b);
          return b;
        },
        br);
    r.value *= double(ps->n);
    r.error *= double(ps->n);
    return r;
  }
  const auto& sp = std::get<SuperpositionState>(state);
  if (!sp.f2) return {0.0, 0.0, true};
  const auto& f2 = *sp.f2;
  const double overlap = superposition_overlap(sp, cfg);
  const double n2 = f2.scale * f2.scale;
  auto f = [&](double th, double et) -> complex {
    const double guu = f2.u(th) * f2.u(et) + f2.v(th) * f2.v(et) +
                       f2.sign * overlap * (f2.u(th) * f2.v(et) + f2.v(th) * f2.u(et));
    const complex number =
        2.0 * kernel_diag(m, th, et) * n2 * guu * gsq(m.energy(th) - m.energy(et)) *
        spatial(th, et);
    const complex v2 = std::conj(kernel_offdiag(m, th, et, {0.0, x})) *
                       std::conj(gsq(m.energy(th) + m.energy(et))) * f2(th, et) /
                       std::numbers::sqrt2;
    return number + std::conj(sp.c0) * v2 + sp.c0 * std::conj(v2);
  };
  const double c = std::max(f2.u.cutoff(), f2.v.cutoff());
  const auto br = merged_breaks(f2.u.break_points(), f2.v.break_points());
  return integrate_2d(
      f, {-c, c, -c, c}, cfg,
      [&](double th) {
        std::vector<double> b = br;
        band_edges(m, th, band, b);
        return b;
      },
      br);
}

}  // namespace detail

/// Estimated cost of the pointwise route (arbitrary units, ~ flops).
inline double pointwise_cost(const Model& m, const FockState& state, const SmearingFunction& g,
                             double x, const QuadratureConfig& cfg = {}) {
  const auto geo = detail::geometry(state);
  const double far = std::max(std::abs(g.t0()), std::abs(g.t1()));
  const double nodes = double(rapidity_nodes(m, state, {far, x}, cfg));
  const double wmax = m.energy(geo.cutoff) + g.decay_frequency_squared(1e-12);
  const double samples = 15.0 * 2.0 * std::max(8.0, wmax * g.length() / std::numbers::pi);
  const int terms = std::get_if<ProductState>(&state) && m.is_ising()
                        ? std::get<ProductState>(state).n
                        : 1;
  return nodes * samples * 16.0 * terms * terms;
}

/// integral g(t)^2 <T00(t, x)> dt.
///
/// Route (b), the reported value: the double rapidity integral against
/// (g^2)~ at energy differences (and sums, for the pair-creation terms of
/// superpositions). Route (a): t-quadrature of pointwise values, run when
/// affordable. If both converge, they must agree within their combined error.
inline SmearedLhs smeared_lhs(const Model& m, const FockState& state, const SmearingFunction& g,
                              double x = 0.0, const QuadratureConfig& cfg = {},
                              const SmearingOptions& opt = {}) {
  cfg.validate();
  detail::check_statistics(m, state);
  SmearedLhs out;
  const auto* sp = std::get_if<SuperpositionState>(&state);
  if (sp && !sp->f2) {
    out.pointwise_evaluated = true;
    out.pointwise_converged = true;
    return out;
  }
  const auto b = detail::smeared_double_integral(m, state, g, x, cfg);
  out.value = b.value.real();
  out.error = b.error;
  out.converged = b.converged;
  if (std::abs(b.value.imag()) > kHermiticityTol * (std::abs(out.value) + m.mass * m.mass) +
                                     b.error) {
    throw NumericalError("smeared_lhs: imaginary residual exceeds hermiticity tolerance");
  }

  const double cost = pointwise_cost(m, state, g, x, cfg);
  if (!opt.force_pointwise && cost > opt.pointwise_budget) {
    std::ostringstream os;
    os << "pointwise route skipped (estimated cost " << cost << ")";
    out.note = os.str();
    return out;
  }
  const auto geo = detail::geometry(state);
  const double wmax = m.energy(geo.cutoff) + g.decay_frequency_squared(1e-12);
  const auto panels = static_cast<std::size_t>(
      std::max(8.0, std::ceil(wmax * g.length() / std::numbers::pi)));
  double worst = 0.0;
  bool pointwise_ok = true;
  auto f = [&](double t) {
    const double w = g.squared(t);
    if (w == 0.0) return 0.0;
    const auto v = expectation_point(m, state, {t, x}, cfg);
    worst = std::max(worst, v.error);
    pointwise_ok = pointwise_ok && v.converged;
    return w * v.value;
  };
  const auto a = integrate_1d_panels(f, g.t0(), g.t1(), panels, cfg);
  const double weight = integrate_1d([&](double t) { return g.squared(t); }, g.t0(), g.t1()).value;
  out.pointwise_evaluated = true;
  out.pointwise_value = a.value;
  out.pointwise_error = a.error + worst * weight;
  out.pointwise_converged = a.converged && pointwise_ok;
  if (out.converged && out.pointwise_converged) {
    const double tol = out.error + out.pointwise_error;
    if (std::abs(out.value - out.pointwise_value) > tol) {
      std::ostringstream os;
      os.precision(17);
      os << "smeared_lhs: quadrature routes disagree (" << out.value << " vs "
         << out.pointwise_value << ", combined error " << tol << ")";
      throw NumericalError(os.str());
    }
  }
  return out;
}

struct QeiReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool passed = false;
  double lhs_error = 0.0;
  double rhs_error = 0.0;
  bool converged = true;
  std::string state;
  std::string smearing;
  SmearedLhs detail;
};

/// Checks integral g^2 <T00(t, x)> >= bound for one state.
inline QeiReport verify(const Model& m, const FockState& state, const SmearingFunction& g,
                        double x = 0.0, const QuadratureConfig& cfg = {},
                        const SmearingOptions& opt = {}) {
  QeiReport rep;
  rep.detail = smeared_lhs(m, state, g, x, cfg, opt);
  const auto rhs = qei_rhs(m, g, cfg);
  rep.lhs = rep.detail.value;
  rep.lhs_error = rep.detail.error;
  rep.rhs = rhs.value;
  rep.rhs_error = rhs.error;
  rep.margin = rep.lhs - rep.rhs;
  rep.passed = rep.margin >= -(rep.lhs_error + rep.rhs_error);
  rep.converged = rep.detail.converged && rhs.converged;
  rep.state = describe(state);
  rep.smearing = g.describe();
  return rep;
}

}  // namespace qeilab
