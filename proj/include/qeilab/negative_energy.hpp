#pragma once

/// \file negative_energy.hpp
/// \brief One-particle energy density at the origin for the two-bump family,
/// written as a quadratic in beta.
///
/// All values are in units of mu^2 / (2 pi).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qeilab/model.hpp"
#include "qeilab/numerics.hpp"
#include "qeilab/states.hpp"

namespace qeilab {

struct IJK {
  double i_val = 0.0;
  double j_val = 0.0;
  double k_val = 0.0;
  double alpha = 0.0;  // 0 marks the delta limit
  double gamma = 0.0;
  double error = 0.0;
  bool converged = true;

  /// I + J beta + K beta^2.
  [[nodiscard]] double quadratic(double beta) const {
    return i_val + beta * (j_val + beta * k_val);
  }
};

namespace detail {

/// Dimensionless kernel at the origin: cosh^2((a+b)/2), times cosh((a-b)/2)
/// for the Ising model.
inline double origin_kernel(const Model& m, double a, double b) {
  const double c = std::cosh(0.5 * (a + b));
  return c * c * (m.is_ising() ? std::cosh(0.5 * (a - b)) : 1.0);
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("negative_energy: alpha must be positive");
  }
}

}  // namespace detail

/// I, J, K as double integrals over the truncated support of h_alpha.
inline IJK ijk_integrals(double alpha, double gamma, const BumpProfile& h = BumpProfile::gaussian(),
                         const QuadratureConfig& cfg = {}, const Model& m = Model::ising()) {
  detail::check_alpha(alpha);
  if (!std::isfinite(gamma)) throw std::invalid_argument("ijk_integrals: gamma must be finite");
  const double r = h.reach() * alpha;
  const Rectangle box{-r, r, -r, r};
  auto term = [&](double sa, double sb) {
    return integrate_2d(
        [&](double a, double b) {
          return h.scaled(alpha, a) * h.scaled(alpha, b) * detail::origin_kernel(m, a + sa, b + sb);
        },
        box, cfg);
  };
  const auto i = term(0.0, 0.0);
  const auto j = term(gamma, 0.0);
  const auto k = term(gamma, gamma);
  IJK out;
  out.i_val = i.value;
  out.j_val = 2.0 * j.value;
  out.k_val = k.value;
  out.alpha = alpha;
  out.gamma = gamma;
  out.error = i.error + 2.0 * j.error + k.error;
  out.converged = i.converged && j.converged && k.converged;
  return out;
}

/// The delta limit: I = 1, J = 2 cosh^3(gamma/2), K = cosh^2 gamma.
inline IJK limit_ijk(double gamma) {
  IJK out;
  const double ch = std::cosh(0.5 * gamma);
  const double c = std::cosh(gamma);
  out.i_val = 1.0;
  out.j_val = 2.0 * ch * ch * ch;
  out.k_val = c * c;
  out.gamma = gamma;
  return out;
}

/// Free-field counterpart of limit_ijk (no cosh((a-b)/2) factor).
inline IJK limit_ijk_free(double gamma) {
  IJK out;
  const double ch = std::cosh(0.5 * gamma);
  const double c = std::cosh(gamma);
  out.i_val = 1.0;
  out.j_val = 2.0 * ch * ch;
  out.k_val = c * c;
  out.gamma = gamma;
  return out;
}

/// Vertex of the parabola, -J / 2K.
inline double optimal_beta(const IJK& q) {
  if (!(q.k_val > 0.0)) throw std::invalid_argument("optimal_beta: K must be positive");
  return -q.j_val / (2.0 * q.k_val);
}

/// J^2 > 4 I K.
inline bool negativity_condition(const IJK& q) {
  return q.j_val * q.j_val > 4.0 * q.i_val * q.k_val;
}

/// c^2 = 1 / int (h_alpha(t) + beta h_alpha(t - gamma))^2.
inline IntegrationResult<double> two_bump_c2(double alpha, double beta, double gamma,
                                             const BumpProfile& h = BumpProfile::gaussian(),
                                             const QuadratureConfig& cfg = {}) {
  detail::check_alpha(alpha);
  const double r = h.reach() * alpha;
  const auto a = integrate_1d([&](double t) { return std::pow(h.scaled(alpha, t), 2); }, -r, r,
                              cfg);
  IntegrationResult<double> b{0.0, 0.0, true};
  const double lo = std::max(-r, gamma - r), hi = std::min(r, gamma + r);
  if (lo < hi) {
    b = integrate_1d([&](double t) { return h.scaled(alpha, t) * h.scaled(alpha, t - gamma); }, lo,
                     hi, cfg);
  }
  const double norm = a.value * (1.0 + beta * beta) + 2.0 * beta * b.value;
  if (!(norm > 0.0)) throw std::invalid_argument("two_bump_c2: wave function vanishes");
  const double err = a.error * (1.0 + beta * beta) + 2.0 * std::abs(beta) * b.error;
  return {1.0 / norm, err / (norm * norm), a.converged && b.converged};
}

/// c^2 (I + J beta + K beta^2), in units of mu^2 / (2 pi).
inline IntegrationResult<double> energy_at_origin(double alpha, double beta, double gamma,
                                                  const BumpProfile& h = BumpProfile::gaussian(),
                                                  const QuadratureConfig& cfg = {},
                                                  const Model& m = Model::ising()) {
  if (!std::isfinite(beta)) throw std::invalid_argument("energy_at_origin: beta must be finite");
  const auto q = ijk_integrals(alpha, gamma, h, cfg, m);
  const auto c2 = two_bump_c2(alpha, beta, gamma, h, cfg);
  const double poly = q.quadratic(beta);
  const double poly_err = q.error * std::max({1.0, std::abs(beta), beta * beta});
  return {c2.value * poly, c2.value * poly_err + c2.error * std::abs(poly),
          q.converged && c2.converged};
}

/// Root of (1 + cosh g)^3 = 8 cosh^2 g; analytically acosh(2 + sqrt 5).
inline double gamma_threshold() {
  return find_root(
      [](double g) {
        const double c = std::cosh(g);
        return std::pow(1.0 + c, 3) - 8.0 * c * c;
      },
      1.0, 3.0, 1e-14);
}

struct ScanRow {
  double alpha = 0.0;
  double gamma = 0.0;
  double beta_opt = 0.0;
  double min_value = 0.0;  // energy_at_origin at beta_opt
  double error = 0.0;
  bool negative = false;
  bool ok = true;
  std::string message;
};

struct ScanResult {
  std::vector<ScanRow> rows;
};

inline std::vector<double> default_scan_alphas() { return {0.1, 0.25, 0.5, 1.0}; }

inline std::vector<double> default_scan_gammas() {
  std::vector<double> g;
  for (int i = 0; i <= 16; ++i) g.push_back(0.5 * i);
  return g;
}

/// Rows sorted by (alpha, gamma). A failing row keeps ok = false and its
/// message; the scan goes on.
inline ScanResult scan(std::vector<double> alphas, std::vector<double> gammas,
                       const BumpProfile& h = BumpProfile::gaussian(),
                       const QuadratureConfig& cfg = {}, const Model& m = Model::ising()) {
  for (double a : alphas) detail::check_alpha(a);
  std::sort(alphas.begin(), alphas.end());
  std::sort(gammas.begin(), gammas.end());
  ScanResult out;
  for (double a : alphas) {
    for (double g : gammas) {
      ScanRow row;
      row.alpha = a;
      row.gamma = g;
      try {
        const auto q = ijk_integrals(a, g, h, cfg, m);
        // At gamma = 0 the vertex beta = -1 is the zero vector, and the energy
        // c^2 (1 + beta)^2 I does not depend on beta otherwise.
        row.beta_opt = g == 0.0 ? 0.0 : optimal_beta(q);
        const auto c2 = two_bump_c2(a, row.beta_opt, g, h, cfg);
        const double b = row.beta_opt;
        const double poly = q.quadratic(b);
        row.min_value = c2.value * poly;
        row.error = c2.value * q.error * std::max({1.0, std::abs(b), b * b}) +
                    c2.error * std::abs(poly);
        row.negative = row.min_value < 0.0;
        if (!q.converged || !c2.converged) {
          row.ok = false;
          row.message = "quadrature did not converge";
        }
      } catch (const std::exception& e) {
        row.ok = false;
        row.message = e.what();
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace qeilab
