#pragma once

/// \file fourier.hpp
/// \brief Fourier transforms of compactly supported real functions,
/// F(w) = integral f(t) exp(i w t) dt, evaluated at exact frequencies.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "qeilab/numerics.hpp"

namespace qeilab {

/// Adaptive direct quadrature of f(t) e^{i w t} over [t0, t1].
template <typename F>
IntegrationResult<complex> fourier_transform(F&& f, double t0, double t1, double omega,
                                             const QuadratureConfig& cfg = {}) {
  if (!(t0 < t1)) throw std::invalid_argument("fourier_transform: empty support");
  // Seed roughly one panel per half period so the first pass is resolved.
  const auto panels = static_cast<std::size_t>(
      std::max(4.0, std::ceil(std::abs(omega) * (t1 - t0) / std::numbers::pi)));
  auto integrand = [&](double t) {
    return f(t) * complex(std::cos(omega * t), std::sin(omega * t));
  };
  return integrate_1d_panels(integrand, t0, t1, panels, cfg);
}

/// Fast repeated evaluation of the Fourier transform of a fixed real function
/// with compact support.
///
/// Uses composite 16-point Gauss-Legendre panels. The panel count is chosen
/// per frequency so that |w| * panel_width / 2 <= 3, which keeps the rule
/// error near round-off; samples of f are cached per refinement level.
/// Thread-safe.
class SpectralEvaluator {
 public:
  SpectralEvaluator(std::function<double(double)> f, double t0, double t1,
                    int base_panels = 128)
      : f_(std::move(f)), t0_(t0), t1_(t1), base_panels_(base_panels) {
    if (!(t0 < t1)) throw std::invalid_argument("SpectralEvaluator: empty support");
    levels_.resize(kMaxLevel + 1);
  }

  [[nodiscard]] double t0() const { return t0_; }
  [[nodiscard]] double t1() const { return t1_; }

  [[nodiscard]] complex operator()(double omega) const {
    const double ph = omega * midpoint();
    return complex(std::cos(ph), std::sin(ph)) * centred(omega);
  }

  /// Same transform from cached piecewise Chebyshev interpolation.
  ///
  /// F(w) = e^{i w m} R(w) with m the support midpoint, and R only oscillates
  /// at rates up to the half-length h, so 24 Chebyshev nodes on panels of
  /// width 6 / h reproduce it to round-off.
  [[nodiscard]] complex interpolated(double omega) const {
    const double width = 6.0 / (0.5 * (t1_ - t0_));
    const double pos = omega / width;
    const auto index = static_cast<long long>(std::floor(pos));
    const Panel& p = panel(index, width);
    // Barycentric formula on Chebyshev points of the second kind.
    const double x = 2.0 * (pos - static_cast<double>(index)) - 1.0;
    complex num = 0.0;
    double den = 0.0;
    for (int j = 0; j < kChebPoints; ++j) {
      const double d = x - cheb_nodes()[j];
      if (d == 0.0) {
        num = p.values[j];
        den = 1.0;
        break;
      }
      double w = (j % 2 ? -1.0 : 1.0) / d;
      if (j == 0 || j == kChebPoints - 1) w *= 0.5;
      num += w * p.values[j];
      den += w;
    }
    const double ph = omega * midpoint();
    return complex(std::cos(ph), std::sin(ph)) * (num / den);
  }

  /// Smallest frequency W (from a doubling scan) beyond which sampled
  /// |F(w)| stays below rel * max |F|. Throws if no decay is seen.
  [[nodiscard]] double decay_frequency(double rel) const {
    double reference = std::abs(centred(0.0));
    double w = 1.0;
    for (int k = 0; k < 24; ++k, w *= 2.0) {
      double local = 0.0;
      for (int j = 0; j <= 64; ++j) {
        local = std::max(local, std::abs(centred(w * (1.0 + j / 64.0))));
      }
      if (local <= rel * reference) return w;
      reference = std::max(reference, local);
    }
    throw NumericalError("SpectralEvaluator: no decay detected in Fourier transform");
  }

 private:
  [[nodiscard]] double midpoint() const { return 0.5 * (t0_ + t1_); }

  /// integral f(t) e^{i w (t - m)} dt; phases stay small whatever the support.
  [[nodiscard]] complex centred(double omega) const {
    const double len = t1_ - t0_;
    int level = 0;
    while (level < kMaxLevel &&
           std::abs(omega) * len / (base_panels_ << level) * 0.5 > kMaxPhasePerHalfPanel) {
      ++level;
    }
    if (std::abs(omega) * len / (base_panels_ << level) * 0.5 > kMaxPhasePerHalfPanel) {
      throw NumericalError("SpectralEvaluator: frequency beyond supported range");
    }
    const Level& lv = level_data(level);
    const auto& gl = gauss_legendre(kPoints);
    const double half = 0.5 * lv.width;

    // Node phases are shared by every panel; panel centres advance geometrically.
    std::array<complex, kPoints> node_phase;
    for (int k = 0; k < kPoints; ++k) {
      const double a = omega * half * gl.nodes[k];
      node_phase[k] = {std::cos(a), std::sin(a)};
    }
    const complex step(std::cos(omega * lv.width), std::sin(omega * lv.width));
    complex sum = 0.0;
    complex centre_phase;
    for (int p = 0; p < lv.panels; ++p) {
      if (p % 64 == 0) {
        const double c = (p + 0.5) * lv.width - 0.5 * len;
        centre_phase = {std::cos(omega * c), std::sin(omega * c)};
      } else {
        centre_phase *= step;
      }
      complex panel = 0.0;
      const double* fw = &lv.weighted[static_cast<std::size_t>(p) * kPoints];
      for (int k = 0; k < kPoints; ++k) panel += fw[k] * node_phase[k];
      sum += centre_phase * panel;
    }
    return sum;
  }

  static constexpr int kPoints = 16;
  static constexpr int kMaxLevel = 10;
  static constexpr double kMaxPhasePerHalfPanel = 3.0;

  struct Level {
    int panels = 0;
    double width = 0.0;
    std::vector<double> weighted;  // f(node) * weight * half-width
  };

  static constexpr int kChebPoints = 24;

  struct Panel {
    std::array<complex, kChebPoints> values;  // R at the Chebyshev nodes
  };

  static const std::array<double, kChebPoints>& cheb_nodes() {
    static const auto nodes = [] {
      std::array<double, kChebPoints> x{};
      for (int j = 0; j < kChebPoints; ++j) {
        x[j] = std::cos(std::numbers::pi * j / (kChebPoints - 1));
      }
      return x;
    }();
    return nodes;
  }

  const Panel& panel(long long index, double width) const {
    {
      std::lock_guard<std::mutex> lock(*mutex_);
      auto it = panels_.find(index);
      if (it != panels_.end()) return it->second;
    }
    Panel p;
    for (int j = 0; j < kChebPoints; ++j) {
      p.values[j] = centred(width * (static_cast<double>(index) + 0.5 * (cheb_nodes()[j] + 1.0)));
    }
    std::lock_guard<std::mutex> lock(*mutex_);
    return panels_.emplace(index, p).first->second;
  }

  const Level& level_data(int level) const {
    std::lock_guard<std::mutex> lock(*mutex_);
    auto& slot = levels_[level];
    if (!slot) {
      auto lv = std::make_unique<Level>();
      lv->panels = base_panels_ << level;
      lv->width = (t1_ - t0_) / lv->panels;
      const auto& gl = gauss_legendre(kPoints);
      lv->weighted.resize(static_cast<std::size_t>(lv->panels) * kPoints);
      const double half = 0.5 * lv->width;
      for (int p = 0; p < lv->panels; ++p) {
        const double c = t0_ + (p + 0.5) * lv->width;
        for (int k = 0; k < kPoints; ++k) {
          lv->weighted[static_cast<std::size_t>(p) * kPoints + k] =
              f_(c + half * gl.nodes[k]) * gl.weights[k] * half;
        }
      }
      slot = std::move(lv);
    }
    return *slot;
  }

  std::function<double(double)> f_;
  double t0_;
  double t1_;
  int base_panels_;
  mutable std::vector<std::unique_ptr<Level>> levels_;
  mutable std::unordered_map<long long, Panel> panels_;
  std::shared_ptr<std::mutex> mutex_ = std::make_shared<std::mutex>();
};

}  // namespace qeilab
