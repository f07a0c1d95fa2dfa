#pragma once

/// \file energy_density.hpp
/// \brief Expectation values of the normal-ordered energy density T00 in
/// product states and vacuum + two-particle superpositions.
///
/// Conventions: p(theta) = mu (cosh theta, sinh theta) and
/// p.x = E t - p^1 x. The energy density is
///   T00(x) = 1/2 int dtheta deta [ F(th, et, x) a+ a+
///            + 2 F(th, et + i pi, x) a+(th) a(et) + F(th + i pi, et + i pi, x) a a ],
/// with F_+ = -(mu^2 / 2 pi) sinh^2((z1 + z2)/2) e^{i(p(z1) + p(z2)).x} and
/// F_- = i sinh((z1 - z2)/2) F_+. Continuing eta -> eta + i pi gives the
/// number-conserving kernels implemented by kernel_diag.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <variant>
#include <vector>

#include "qeilab/model.hpp"
#include "qeilab/numerics.hpp"
#include "qeilab/states.hpp"

namespace qeilab {

/// Absolute tolerance (in units of |value| + mu^2) on the imaginary part of
/// an expectation value of the self-adjoint energy density.
inline constexpr double kHermiticityTol = 1e-8;

inline double density_prefactor(const Model& m) {
  return m.mass * m.mass / (2.0 * std::numbers::pi);
}

/// Kernel of the a+(theta) a(eta) term.
inline double kernel_diag(const Model& m, double theta, double eta) {
  const double c = std::cosh(0.5 * (theta + eta));
  const double k = c * c * (m.is_ising() ? std::cosh(0.5 * (theta - eta)) : 1.0);
  return density_prefactor(m) * k;
}

inline complex plane_wave(const Model& m, double theta, const SpacetimePoint& p) {
  const double phase = m.energy(theta) * p.t - m.momentum(theta) * p.x;
  return {std::cos(phase), std::sin(phase)};
}

/// F(theta, eta, x) at real rapidities: the kernel of the a+ a+ term.
inline complex kernel_offdiag(const Model& m, double theta, double eta,
                              const SpacetimePoint& p) {
  const double s = std::sinh(0.5 * (theta + eta));
  const complex free = -density_prefactor(m) * s * s * plane_wave(m, theta, p) *
                       plane_wave(m, eta, p);
  if (!m.is_ising()) return free;
  return complex(0.0, std::sinh(0.5 * (theta - eta))) * free;
}

/// Kernel of the a(theta) a(eta) term, F(theta + i pi, eta + i pi, x).
inline complex kernel_annihilation(const Model& m, double theta, double eta,
                                   const SpacetimePoint& p) {
  return std::conj(kernel_offdiag(m, eta, theta, p));
}

// ---------------------------------------------------------------------------
// Separable form of the kernels
// ---------------------------------------------------------------------------

/// cosh(theta/2)^c * sinh(theta/2)^s
struct HalfAngleMonomial {
  int c = 0;
  int s = 0;

  [[nodiscard]] double operator()(double ch, double sh) const {
    double v = 1.0;
    for (int i = 0; i < c; ++i) v *= ch;
    for (int i = 0; i < s; ++i) v *= sh;
    return v;
  }
};

/// coef * a(theta) * b(eta)
struct SeparableTerm {
  double coef;
  HalfAngleMonomial a;
  HalfAngleMonomial b;
};

/// kernel_diag / prefactor as a finite sum of products. With
/// x = C(th)C(et), y = S(th)S(et): Ising (x+y)^2 (x-y), free (x+y)^2.
inline std::vector<SeparableTerm> diag_terms(const Model& m) {
  if (m.is_ising()) {
    return {{1.0, {3, 0}, {3, 0}},
            {1.0, {2, 1}, {2, 1}},
            {-1.0, {1, 2}, {1, 2}},
            {-1.0, {0, 3}, {0, 3}}};
  }
  return {{1.0, {2, 0}, {2, 0}}, {2.0, {1, 1}, {1, 1}}, {1.0, {0, 2}, {0, 2}}};
}

/// The rapidity shape of F without prefactor and plane waves:
/// free sinh^2((th+et)/2), Ising sinh((th-et)/2) sinh^2((th+et)/2).
/// With P = S(th)C(et), Q = C(th)S(et): (P+Q)^2 and (P-Q)(P+Q)^2.
inline std::vector<SeparableTerm> offdiag_shape_terms(const Model& m) {
  if (m.is_ising()) {
    return {{1.0, {0, 3}, {3, 0}},
            {1.0, {1, 2}, {2, 1}},
            {-1.0, {2, 1}, {1, 2}},
            {-1.0, {3, 0}, {0, 3}}};
  }
  return {{1.0, {0, 2}, {2, 0}}, {2.0, {1, 1}, {1, 1}}, {1.0, {2, 0}, {0, 2}}};
}

inline double evaluate_terms(const std::vector<SeparableTerm>& terms, double theta,
                             double eta) {
  const double c1 = std::cosh(0.5 * theta), s1 = std::sinh(0.5 * theta);
  const double c2 = std::cosh(0.5 * eta), s2 = std::sinh(0.5 * eta);
  double v = 0.0;
  for (const auto& t : terms) v += t.coef * t.a(c1, s1) * t.b(c2, s2);
  return v;
}

// ---------------------------------------------------------------------------
// Point evaluation
// ---------------------------------------------------------------------------

struct PointValue {
  double value = 0.0;
  double imag_residual = 0.0;
  double error = 0.0;
  bool converged = true;
};

struct ProfilePoint {
  SpacetimePoint point;
  double value = 0.0;
  double imag_residual = 0.0;
  double error = 0.0;
  bool converged = true;
};

struct EnergyDensityProfile {
  std::vector<ProfilePoint> points;

  [[nodiscard]] bool converged() const {
    for (const auto& p : points) {
      if (!p.converged) return false;
    }
    return true;
  }
};

namespace detail {

/// Rapidity panels resolving the wave packet (scale `alpha`) and the plane
/// wave e^{-i p(theta).x}: at most kPhasePerPanel radians per panel.
inline PanelGrid rapidity_grid(const Model& m, const SpacetimePoint& p, double cutoff,
                               double alpha, int points) {
  constexpr double kPhasePerPanel = 3.0;
  const double wmax = std::min(0.5, alpha / 2.0);
  auto width = [&](double th) {
    const double rate =
        m.mass * (std::abs(p.t) * std::abs(std::sinh(th)) + std::abs(p.x) * std::cosh(th));
    return rate > 0.0 ? std::min(wmax, kPhasePerPanel / rate) : wmax;
  };
  return PanelGrid::build(-cutoff, cutoff, width, points);
}

inline std::vector<double> multinomial_row(int m) {
  // coefficients m! / (a! b! c!) indexed [b][c] flattened with a = m - b - c
  std::vector<double> out(static_cast<std::size_t>((m + 1) * (m + 1)), 0.0);
  std::vector<double> fact(m + 1, 1.0);
  for (int i = 1; i <= m; ++i) fact[i] = fact[i - 1] * i;
  for (int b = 0; b <= m; ++b) {
    for (int c = 0; b + c <= m; ++c) {
      out[static_cast<std::size_t>(b * (m + 1) + c)] = fact[m] / (fact[m - b - c] * fact[b] * fact[c]);
    }
  }
  return out;
}

/// Double integral of conj(phi(th)) phi(et) K(th, et) L^{n-1} e^{i(p(th)-p(et)).x}
/// on one grid, without the n mu^2/2pi prefactor. Uses the separable kernel;
/// L^{n-1} is expanded in powers of the centred CDF and the triangle
/// integrals th < et, th > et are done with running integrals.
inline complex product_sum(const Model& m, const ProductState& s, const SpacetimePoint& p,
                           const PanelGrid& g) {
  const std::size_t n = g.size();
  const auto terms = diag_terms(m);
  std::vector<complex> psi(n);
  std::vector<double> ch(n), sh(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = g.nodes[i];
    psi[i] = s.phi(th) * std::conj(plane_wave(m, th, p));
    ch[i] = std::cosh(0.5 * th);
    sh[i] = std::sinh(0.5 * th);
  }
  const int power = m.is_ising() ? s.n - 1 : 0;
  complex total = 0.0;
  if (power == 0) {
    for (const auto& t : terms) {
      complex a = 0.0;
      for (std::size_t i = 0; i < n; ++i) a += g.weights[i] * t.a(ch[i], sh[i]) * psi[i];
      total += t.coef * std::norm(a);
    }
    return total;
  }

  std::vector<double> centred(n);
  for (std::size_t i = 0; i < n; ++i) centred[i] = s.phi.cdf(g.nodes[i]) - 0.5;
  const auto coeffs = multinomial_row(power);
  const int stride = power + 1;
  // pw[k][i] = (2 c_i)^k
  std::vector<std::vector<double>> pw(stride, std::vector<double>(n, 1.0));
  for (int k = 1; k <= power; ++k) {
    for (std::size_t i = 0; i < n; ++i) pw[k][i] = pw[k - 1][i] * 2.0 * centred[i];
  }
  std::vector<complex> u(n), f(n);
  for (const auto& t : terms) {
    for (std::size_t i = 0; i < n; ++i) u[i] = t.a(ch[i], sh[i]) * psi[i];
    for (int b = 0; b <= power; ++b) {
      // Upper triangle th < et: L = 1 + 2c(th) - 2c(et).
      for (std::size_t i = 0; i < n; ++i) f[i] = std::conj(u[i]) * pw[b][i];
      const auto below_conj = g.running_integral<complex>(f);
      // Lower triangle et < th: L = 1 + 2c(et) - 2c(th).
      for (std::size_t i = 0; i < n; ++i) f[i] = u[i] * pw[b][i];
      const auto below = g.running_integral<complex>(f);
      for (int c = 0; b + c <= power; ++c) {
        const double coef = coeffs[static_cast<std::size_t>(b * stride + c)];
        const double sign = (c % 2 == 0) ? 1.0 : -1.0;
        complex acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          acc += g.weights[i] * pw[c][i] *
                 (u[i] * below_conj[i] + std::conj(u[i]) * below[i]);
        }
        total += t.coef * coef * sign * acc;
      }
    }
  }
  return total;
}

/// Integrals int q(theta) w(theta) e^{-i p(theta).x} for monomials q.
template <typename Fn>
complex projected(const PanelGrid& g, const HalfAngleMonomial& q, Fn&& w,
                  const std::vector<complex>& wave) {
  complex a = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double th = g.nodes[i];
    a += g.weights[i] * q(std::cosh(0.5 * th), std::sinh(0.5 * th)) * w(th) * wave[i];
  }
  return a;
}

/// Superposition expectation (full prefactors) on one grid.
inline complex superposition_sum(const Model& m, const SuperpositionState& s,
                                 const SpacetimePoint& p, const PanelGrid& g,
                                 double overlap) {
  if (!s.f2) return 0.0;
  const auto& f2 = *s.f2;
  std::vector<complex> wave(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) wave[i] = std::conj(plane_wave(m, g.nodes[i], p));
  const double pref = density_prefactor(m);
  const double n2 = f2.scale * f2.scale;

  // a+ a term: 2 int K e^{i(p(th)-p(et)).x} G(th, et), with
  // G = N^2 [u u + s <u,v> (u v + v u) + v v] (unit norms, real functions).
  complex number_part = 0.0;
  for (const auto& t : diag_terms(m)) {
    const complex au = projected(g, t.a, f2.u, wave);
    const complex av = projected(g, t.a, f2.v, wave);
    number_part += t.coef * (std::norm(au) + std::norm(av) +
                             f2.sign * overlap * (std::conj(au) * av + std::conj(av) * au));
  }
  number_part *= 2.0 * pref * n2;

  // <Omega|T|Psi2> = (1/sqrt 2) int conj(F(th, et, x)) f2(th, et).
  const complex shape_pref = m.is_ising() ? complex(0.0, pref) : complex(-pref, 0.0);
  auto cross_pair = [&](const WaveFunction& a, const WaveFunction& b) {
    complex acc = 0.0;
    for (const auto& t : offdiag_shape_terms(m)) {
      acc += t.coef * projected(g, t.a, a, wave) * projected(g, t.b, b, wave);
    }
    return shape_pref * acc;
  };
  const complex x = f2.scale * (cross_pair(f2.u, f2.v) + double(f2.sign) * cross_pair(f2.v, f2.u));
  const complex vac_to_two = x / std::numbers::sqrt2;
  const complex cross = std::conj(s.c0) * vac_to_two + s.c0 * std::conj(vac_to_two);
  return number_part + cross;
}

inline double superposition_overlap(const SuperpositionState& s, const QuadratureConfig& cfg) {
  if (!s.f2) return 0.0;
  const auto& f2 = *s.f2;
  const double lim = std::max(f2.u.cutoff(), f2.v.cutoff());
  auto br = f2.u.break_points();
  const auto bv = f2.v.break_points();
  br.insert(br.end(), bv.begin(), bv.end());
  return integrate_1d([&](double t) { return f2.u(t) * f2.v(t); }, -lim, lim, cfg, br).value;
}

struct StateGeometry {
  double cutoff;
  double alpha;
};

inline StateGeometry geometry(const FockState& state) {
  if (const auto* ps = std::get_if<ProductState>(&state)) {
    return {ps->phi.cutoff(), ps->phi.feature_scale()};
  }
  const auto& sp = std::get<SuperpositionState>(state);
  if (!sp.f2) return {1.0, 1.0};
  return {std::max(sp.f2->u.cutoff(), sp.f2->v.cutoff()),
          std::min(sp.f2->u.feature_scale(), sp.f2->v.feature_scale())};
}

inline void check_statistics(const Model& m, const FockState& state) {
  if (const auto* sp = std::get_if<SuperpositionState>(&state)) {
    if (sp->f2 && sp->f2->sign != m.exchange_sign()) {
      throw std::invalid_argument(
          "expectation: two-particle amplitude symmetry does not match the model statistics");
    }
  }
}

inline void check_hermitian(const Model& m, const PointValue& v) {
  if (std::abs(v.imag_residual) > kHermiticityTol * (std::abs(v.value) + m.mass * m.mass)) {
    throw NumericalError("expectation: imaginary residual exceeds hermiticity tolerance");
  }
}

}  // namespace detail

/// Number of rapidity nodes the grid evaluator uses at point p (for cost
/// estimates).
inline std::size_t rapidity_nodes(const Model& m, const FockState& state,
                                  const SpacetimePoint& p, const QuadratureConfig& cfg = {}) {
  const auto geo = detail::geometry(state);
  return detail::rapidity_grid(m, p, geo.cutoff, geo.alpha, cfg.grid_points).size();
}

/// <T00(t, x)> in `state`.
///
/// Evaluated on composite Gauss-Legendre rapidity panels that resolve both
/// the packet and the plane waves; the error estimate compares against the
/// same rule with every panel halved, refining further (up to three times)
/// until the tolerance is met.
inline PointValue expectation_point(const Model& m, const FockState& state,
                                    const SpacetimePoint& p, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  detail::check_statistics(m, state);
  PointValue out;
  const auto* sp = std::get_if<SuperpositionState>(&state);
  if (sp && !sp->f2) return out;  // vacuum: normal ordering gives exactly zero

  const auto geo = detail::geometry(state);
  PanelGrid g = detail::rapidity_grid(m, p, geo.cutoff, geo.alpha, cfg.grid_points);
  const double overlap = sp ? detail::superposition_overlap(*sp, cfg) : 0.0;
  auto eval = [&](const PanelGrid& grid) -> complex {
    if (const auto* ps = std::get_if<ProductState>(&state)) {
      return double(ps->n) * density_prefactor(m) * detail::product_sum(m, *ps, p, grid);
    }
    return detail::superposition_sum(m, *sp, p, grid, overlap);
  };
  complex coarse = eval(g);
  for (int level = 0;; ++level) {
    PanelGrid fine = g.refined();
    const complex v = eval(fine);
    out.value = v.real();
    out.imag_residual = v.imag();
    // Round-off floor: the separable sums cancel terms of size up to e^{3 cutoff/2}.
    const double floor = 1e-14 * (std::abs(v) + density_prefactor(m));
    out.error = std::abs(v - coarse) + floor;
    out.converged = out.error <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(out.value)) + floor;
    if (out.converged || level >= 2) break;
    g = std::move(fine);
    coarse = v;
  }
  detail::check_hermitian(m, out);
  return out;
}

/// Independent evaluation of <T00(x)> by iterated adaptive 2D quadrature
/// of the defining double integrals, with L_phi from the closed-form CDF.
/// Slow for large |t|, |x|; used to cross-check expectation_point.
inline PointValue expectation_point_direct(const Model& m, const FockState& state,
                                           const SpacetimePoint& p,
                                           const QuadratureConfig& cfg = {}) {
  cfg.validate();
  detail::check_statistics(m, state);
  PointValue out;
  IntegrationResult<complex> r;
  if (const auto* ps = std::get_if<ProductState>(&state)) {
    const auto& phi = ps->phi;
    const int power = m.is_ising() ? ps->n - 1 : 0;
    auto f = [&](double th, double et) -> complex {
      const double amp = phi(th) * phi(et);
      if (amp == 0.0) return 0.0;
      double k = kernel_diag(m, th, et) * amp;
      if (power > 0) k *= std::pow(phi.l_factor(th, et), power);
      return k * plane_wave(m, th, p) * std::conj(plane_wave(m, et, p));
    };
    const double c = phi.cutoff();
    const auto br = phi.break_points();
    r = integrate_2d(
        f, {-c, c, -c, c}, cfg,
        [&](double th) {
          auto b = br;
          b.push_back(th);
          return b;
        },
        br);
    r.value *= double(ps->n);
    r.error *= double(ps->n);
  } else {
    const auto& sp = std::get<SuperpositionState>(state);
    if (!sp.f2) return out;
    const auto& f2 = *sp.f2;
    const double overlap = detail::superposition_overlap(sp, cfg);
    const double n2 = f2.scale * f2.scale;
    auto g_fn = [&](double th, double et) {
      return n2 * (f2.u(th) * f2.u(et) + f2.v(th) * f2.v(et) +
                   f2.sign * overlap * (f2.u(th) * f2.v(et) + f2.v(th) * f2.u(et)));
    };
    auto f = [&](double th, double et) -> complex {
      const complex number = 2.0 * kernel_diag(m, th, et) * g_fn(th, et) *
                             plane_wave(m, th, p) * std::conj(plane_wave(m, et, p));
      const complex v2 = std::conj(kernel_offdiag(m, th, et, p)) * f2(th, et) /
                         std::numbers::sqrt2;
      return number + std::conj(sp.c0) * v2 + sp.c0 * std::conj(v2);
    };
    const double c = std::max(f2.u.cutoff(), f2.v.cutoff());
    auto br = f2.u.break_points();
    const auto bv = f2.v.break_points();
    br.insert(br.end(), bv.begin(), bv.end());
    r = integrate_2d(f, {-c, c, -c, c}, cfg, [&](double) { return br; }, br);
  }
  out.value = r.value.real();
  out.imag_residual = r.value.imag();
  out.error = r.error;
  out.converged = r.converged;
  detail::check_hermitian(m, out);
  return out;
}

inline EnergyDensityProfile expectation_profile(const Model& m, const FockState& state,
                                                const std::vector<SpacetimePoint>& line,
                                                const QuadratureConfig& cfg = {}) {
  EnergyDensityProfile prof;
  prof.points.reserve(line.size());
  for (const auto& p : line) {
    const auto v = expectation_point(m, state, p, cfg);
    prof.points.push_back({p, v.value, v.imag_residual, v.error, v.converged});
  }
  return prof;
}

/// <H> = total energy.
inline double total_energy(const Model& m, const FockState& state,
                           const QuadratureConfig& cfg = {}) {
  if (const auto* ps = std::get_if<ProductState>(&state)) {
    return ps->n * m.mass * ps->phi.mean_cosh(cfg);
  }
  const auto& sp = std::get<SuperpositionState>(state);
  if (!sp.f2) return 0.0;
  const auto& f2 = *sp.f2;
  // <Psi2|H|Psi2> = 2 mu int int cosh(th) |f2(th, l)|^2
  const double lim = std::max(f2.u.cutoff(), f2.v.cutoff());
  auto br = f2.u.break_points();
  const auto bv = f2.v.break_points();
  br.insert(br.end(), bv.begin(), bv.end());
  auto integral = [&](auto&& fn) { return integrate_1d(fn, -lim, lim, cfg, br).value; };
  const double eu = integral([&](double t) { return f2.u(t) * f2.u(t) * std::cosh(t); });
  const double ev = integral([&](double t) { return f2.v(t) * f2.v(t) * std::cosh(t); });
  const double euv = integral([&](double t) { return f2.u(t) * f2.v(t) * std::cosh(t); });
  const double ov = integral([&](double t) { return f2.u(t) * f2.v(t); });
  return 2.0 * m.mass * f2.scale * f2.scale * (eu + ev + 2.0 * f2.sign * euv * ov);
}

}  // namespace qeilab
