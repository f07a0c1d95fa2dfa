#pragma once

/// \file states.hpp
/// \brief Rapidity-space wave packets, the two-bump family, the scattering
/// weight L_phi, and the Fock states built from them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qeilab/model.hpp"
#include "qeilab/numerics.hpp"

namespace qeilab {

/// Nonnegative, rapidly decaying profile h, rescaled to unit integral.
class BumpProfile {
 public:
  /// h(theta) = exp(-theta^2) / sqrt(pi).
  static BumpProfile gaussian() {
    BumpProfile b;
    b.gaussian_ = true;
    b.raw_ = [](double x) { return std::exp(-x * x); };
    b.raw_integral_ = std::sqrt(std::numbers::pi);
    b.reach_ = 8.4;  // exp(-8.4^2) < 1e-30
    return b;
  }

  /// Arbitrary nonnegative raw profile; its integral is found numerically.
  static BumpProfile custom(std::function<double(double)> raw,
                            const QuadratureConfig& cfg = {}) {
    BumpProfile b;
    b.raw_ = std::move(raw);
    double peak = 0.0;
    for (double x = -4.0; x <= 4.0; x += 1.0 / 64) {
      const double v = b.raw_(x);
      if (v < 0.0 || !std::isfinite(v)) {
        throw std::invalid_argument("BumpProfile: h must be finite and nonnegative");
      }
      peak = std::max(peak, v);
    }
    if (!(peak > 0.0)) {
      throw std::invalid_argument("BumpProfile: h vanishes identically");
    }
    double r = 4.0;
    while (std::max(b.raw_(r), b.raw_(-r)) > 1e-30 * peak) {
      if (b.raw_(r) < 0.0 || b.raw_(-r) < 0.0) {
        throw std::invalid_argument("BumpProfile: h must be nonnegative");
      }
      r += 0.25;
      if (r > 200.0) throw std::invalid_argument("BumpProfile: h does not decay");
    }
    b.reach_ = r;
    const auto res = integrate_1d_panels(b.raw_, -r, r, 64, cfg);
    if (!res.converged || !(res.value > 0.0)) {
      throw NumericalError("BumpProfile: could not normalise h");
    }
    b.raw_integral_ = res.value;
    return b;
  }

  /// Unit-integral h.
  [[nodiscard]] double operator()(double theta) const { return raw_(theta) / raw_integral_; }
  /// h_alpha(theta) = h(theta / alpha) / alpha.
  [[nodiscard]] double scaled(double alpha, double theta) const {
    return (*this)(theta / alpha) / alpha;
  }
  [[nodiscard]] bool is_gaussian() const { return gaussian_; }
  /// |theta| beyond which h is negligible (relative 1e-30) at unit width.
  [[nodiscard]] double reach() const { return reach_; }
  [[nodiscard]] std::string name() const { return gaussian_ ? "exp(-theta^2)" : "custom"; }

 private:
  BumpProfile() = default;

  std::function<double(double)> raw_;
  double raw_integral_ = 1.0;
  double reach_ = 8.0;
  bool gaussian_ = false;
};

struct TwoBumpParams {
  double alpha = 0.5;
  double beta = -0.04;
  double gamma = 5.0;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw std::invalid_argument("TwoBumpParams: alpha must be positive");
    }
    if (!std::isfinite(beta) || !std::isfinite(gamma)) {
      throw std::invalid_argument("TwoBumpParams: beta and gamma must be finite");
    }
  }
};

struct BumpComponent {
  double center;
  double weight;
};

/// Normalised real wave function phi(theta) = c * sum_j w_j h_alpha(theta - theta_j).
///
/// The closed form is used for every quadrature; the grid and cumulative
/// table serve the CDF of |phi|^2 and diagnostics. Immutable after
/// construction.
class WaveFunction {
 public:
  static constexpr double kTruncationTol = 1e-24;

  WaveFunction(BumpProfile h, double alpha, std::vector<BumpComponent> components,
               const QuadratureConfig& cfg = {})
      : h_(std::move(h)), alpha_(alpha), components_(std::move(components)) {
    if (!(alpha_ > 0.0)) throw std::invalid_argument("WaveFunction: alpha must be positive");
    if (components_.empty()) throw std::invalid_argument("WaveFunction: no components");
    choose_cutoff(cfg);
    normalise(cfg);
    build_grid(cfg);
  }

  [[nodiscard]] double operator()(double theta) const { return norm_ * unnormalised(theta); }

  [[nodiscard]] double norm_constant() const { return norm_; }
  /// Truncation: the wave function is treated as zero outside [-cutoff, cutoff].
  [[nodiscard]] double cutoff() const { return cutoff_; }
  [[nodiscard]] double feature_scale() const { return alpha_; }
  [[nodiscard]] const BumpProfile& profile() const { return h_; }
  [[nodiscard]] const std::vector<BumpComponent>& components() const { return components_; }
  [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  /// Integral of |phi|^2 from -infinity to theta.
  [[nodiscard]] double cdf(double theta) const {
    if (!h_.is_gaussian()) return table_(theta);
    // Products of Gaussians are Gaussians: closed form with erfc.
    const double n2 = norm_ * norm_;
    double sum = 0.0;
    for (const auto& a : components_) {
      for (const auto& b : components_) {
        const double d = a.center - b.center;
        const double m = 0.5 * (a.center + b.center);
        sum += a.weight * b.weight * std::exp(-d * d / (2 * alpha_ * alpha_)) *
               std::erfc(-std::numbers::sqrt2 * (theta - m) / alpha_);
      }
    }
    return n2 * sum / (2.0 * std::sqrt(2.0 * std::numbers::pi) * alpha_);
  }

  /// L_phi(theta, eta) = integral |phi(l)|^2 sign(theta - l) sign(eta - l) dl.
  [[nodiscard]] double l_factor(double theta, double eta) const {
    const double lo = std::min(theta, eta);
    const double hi = std::max(theta, eta);
    return 1.0 - 2.0 * (cdf(hi) - cdf(lo));
  }

  /// Energy expectation per particle in units of mass: integral |phi|^2 cosh.
  [[nodiscard]] double mean_cosh(const QuadratureConfig& cfg = {}) const {
    auto f = [this](double t) {
      const double p = (*this)(t);
      return p * p * std::cosh(t);
    };
    return integrate_1d(f, -cutoff_, cutoff_, cfg, break_points()).value;
  }

  [[nodiscard]] double norm_squared(const QuadratureConfig& cfg = {}) const {
    auto f = [this](double t) {
      const double p = (*this)(t);
      return p * p;
    };
    return integrate_1d(f, -cutoff_, cutoff_, cfg, break_points()).value;
  }

  /// Component centres clipped to the cutoff, used to seed quadrature.
  [[nodiscard]] std::vector<double> break_points() const {
    std::vector<double> b;
    for (const auto& c : components_) {
      for (double k = -4; k <= 4; k += 1) {
        const double x = c.center + k * alpha_;
        if (x > -cutoff_ && x < cutoff_) b.push_back(x);
      }
    }
    std::sort(b.begin(), b.end());
    return b;
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "h=" << h_.name() << " alpha=" << alpha_ << " components=[";
    for (std::size_t i = 0; i < components_.size(); ++i) {
      os << (i ? ", " : "") << "(" << components_[i].center << ", " << components_[i].weight
         << ")";
    }
    os << "]";
    return os.str();
  }

 private:
  [[nodiscard]] double unnormalised(double theta) const {
    double s = 0.0;
    for (const auto& c : components_) s += c.weight * h_.scaled(alpha_, theta - c.center);
    return s;
  }

  [[nodiscard]] double envelope(double theta) const {
    const double p = unnormalised(theta);
    return p * p * std::exp(2.0 * std::abs(theta));
  }

  // Smallest symmetric window outside which |phi|^2 e^{2|theta|} is below
  // kTruncationTol of its peak. Densities are bilinear in phi, so the dropped
  // amplitude is about sqrt(kTruncationTol) of the peak.
  void choose_cutoff(const QuadratureConfig& cfg) {
    double lo = components_.front().center;
    double hi = lo;
    for (const auto& c : components_) {
      lo = std::min(lo, c.center);
      hi = std::max(hi, c.center);
    }
    const double reach = alpha_ * h_.reach();
    const double step = alpha_ / 16.0;
    double peak = 0.0;
    for (double t = lo - reach; t <= hi + reach; t += step) peak = std::max(peak, envelope(t));
    if (!(peak > 0.0)) throw std::invalid_argument("WaveFunction: phi vanishes identically");
    if (cfg.rapidity_cutoff > 0.0) {
      cutoff_ = cfg.rapidity_cutoff;
      return;
    }
    double r = std::max(std::abs(lo), std::abs(hi));
    // Require a sustained stretch below tolerance so bumps further out are not missed.
    double quiet = 0.0;
    while (quiet < reach) {
      const bool below = std::max(envelope(r), envelope(-r)) <= kTruncationTol * peak;
      quiet = below ? quiet + step : 0.0;
      r += step;
      if (r > 60.0) throw NumericalError("WaveFunction: wave packet decays too slowly");
    }
    cutoff_ = r - quiet;
    if (r - quiet < std::max(std::abs(lo), std::abs(hi))) cutoff_ = r;
  }

  void normalise(const QuadratureConfig& cfg) {
    auto f = [this](double t) {
      const double p = unnormalised(t);
      return p * p;
    };
    std::vector<double> br;
    for (const auto& c : components_) br.push_back(c.center);
    const auto r = integrate_1d(f, -cutoff_, cutoff_, cfg, br);
    if (!(r.value > 0.0)) throw std::invalid_argument("WaveFunction: phi vanishes identically");
    if (!r.converged) throw NumericalError("WaveFunction: normalisation did not converge");
    norm_ = 1.0 / std::sqrt(r.value);
  }

  void build_grid(const QuadratureConfig& cfg) {
    const double spacing = std::max(alpha_ / 8.0, 2.0 * cutoff_ / 20000.0);
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * cutoff_ / spacing)) + 1;
    grid_.resize(n);
    values_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      grid_[i] = -cutoff_ + 2.0 * cutoff_ * static_cast<double>(i) / static_cast<double>(n - 1);
      values_[i] = (*this)(grid_[i]);
    }
    if (!h_.is_gaussian()) {
      // Finer than the diagnostic grid: cubic interpolation error scales as spacing^4.
      const double fine = std::max(alpha_ / 32.0, 2.0 * cutoff_ / 200000.0);
      const auto m = static_cast<std::size_t>(std::ceil(2.0 * cutoff_ / fine)) + 1;
      std::vector<double> nodes(m);
      for (std::size_t i = 0; i < m; ++i) {
        nodes[i] = -cutoff_ + 2.0 * cutoff_ * static_cast<double>(i) / static_cast<double>(m - 1);
      }
      table_ = cumulative_table(
          [this](double t) {
            const double p = (*this)(t);
            return p * p;
          },
          std::move(nodes), cfg);
    }
  }

  BumpProfile h_;
  double alpha_;
  std::vector<BumpComponent> components_;
  double cutoff_ = 0.0;
  double norm_ = 1.0;
  std::vector<double> grid_;
  std::vector<double> values_;
  CumulativeTable table_;
};

/// phi_{alpha,beta,gamma} = c (h_alpha(theta) + beta h_alpha(theta - gamma)).
inline WaveFunction make_two_bump(const TwoBumpParams& p,
                                  const BumpProfile& h = BumpProfile::gaussian(),
                                  const QuadratureConfig& cfg = {}) {
  p.validate();
  std::vector<BumpComponent> comps{{0.0, 1.0}};
  if (p.beta != 0.0) comps.push_back({p.gamma, p.beta});
  return WaveFunction(h, p.alpha, std::move(comps), cfg);
}

/// Single normalised bump of width alpha centred at `center`.
inline WaveFunction make_packet(double center, double alpha,
                                const BumpProfile& h = BumpProfile::gaussian(),
                                const QuadratureConfig& cfg = {}) {
  return WaveFunction(h, alpha, {{center, 1.0}}, cfg);
}

/// alpha -> 0 idealisation of the two-bump family: point masses.
struct DeltaLimit {
  struct Atom {
    double position;
    double weight;
  };
  std::vector<Atom> atoms;
};

inline DeltaLimit delta_limit_wavefunction(double gamma, double beta) {
  DeltaLimit d;
  if (gamma == 0.0) {
    d.atoms.push_back({0.0, 1.0 + beta});
  } else {
    d.atoms.push_back({0.0, 1.0});
    if (beta != 0.0) d.atoms.push_back({gamma, beta});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Fock states
// ---------------------------------------------------------------------------

/// n identical particles in wave function phi: Phi_{n+} for the free field,
/// and its image under the inverse incoming Moller map for the Ising model.
struct ProductState {
  int n = 1;
  WaveFunction phi;

  ProductState(int count, WaveFunction wf) : n(count), phi(std::move(wf)) {
    if (n < 1) throw std::invalid_argument("ProductState: n must be >= 1");
  }
};

/// f2(theta, eta) = scale * (u(theta) v(eta) + sign * v(theta) u(eta)), with
/// sign = +1 (symmetric, free field) or -1 (antisymmetric, Ising).
struct TwoParticleAmplitude {
  WaveFunction u;
  WaveFunction v;
  int sign = 1;
  double scale = 1.0;

  [[nodiscard]] double operator()(double theta, double eta) const {
    return scale * (u(theta) * v(eta) + sign * v(theta) * u(eta));
  }
};

/// c0 |Omega> + (1/sqrt 2) integral f2(theta, eta) a+(theta) a+(eta) |Omega>,
/// with ||Psi||^2 = |c0|^2 + integral |f2|^2.
struct SuperpositionState {
  complex c0 = 1.0;
  std::optional<TwoParticleAmplitude> f2;
  int sign = 1;
};

using FockState = std::variant<ProductState, SuperpositionState>;

inline SuperpositionState make_vacuum(const Model& model = Model::ising()) {
  return {1.0, std::nullopt, model.exchange_sign()};
}

/// Builds the normalised superposition of c0 * vacuum and a two-particle
/// component made from u and v with the model's exchange symmetry.
inline SuperpositionState make_superposition(const Model& model, complex c0,
                                             const WaveFunction& u, const WaveFunction& v,
                                             const QuadratureConfig& cfg = {}) {
  const double p0 = std::norm(c0);
  if (!(p0 < 1.0)) {
    throw std::invalid_argument("make_superposition: |c0| must be < 1");
  }
  const int sign = model.exchange_sign();
  const double lo = -std::max(u.cutoff(), v.cutoff());
  auto overlap_fn = [&](double t) { return u(t) * v(t); };
  std::vector<double> br = u.break_points();
  const auto vb = v.break_points();
  br.insert(br.end(), vb.begin(), vb.end());
  const double overlap = integrate_1d(overlap_fn, lo, -lo, cfg, br).value;
  // ||u (x) v + s v (x) u||^2 = 2 (||u||^2 ||v||^2 + s <u,v>^2), with unit norms.
  const double raw = 2.0 * (1.0 + sign * overlap * overlap);
  if (!(raw > 1e-10)) {
    throw std::invalid_argument("make_superposition: two-particle component vanishes");
  }
  TwoParticleAmplitude f2{u, v, sign, std::sqrt((1.0 - p0) / raw)};
  return {c0, std::move(f2), sign};
}

inline int particle_count(const FockState& s) {
  if (const auto* p = std::get_if<ProductState>(&s)) return p->n;
  return 2;
}

inline std::string describe(const FockState& s) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* p = std::get_if<ProductState>(&s)) {
    os << "product(n=" << p->n << ", " << p->phi.describe() << ")";
  } else {
    const auto& sp = std::get<SuperpositionState>(s);
    os << "superposition(c0=" << sp.c0.real() << (sp.c0.imag() < 0 ? "" : "+")
       << sp.c0.imag() << "i";
    if (sp.f2) {
      os << ", sign=" << sp.f2->sign << ", u=" << sp.f2->u.describe()
         << ", v=" << sp.f2->v.describe();
    } else {
      os << ", vacuum";
    }
    os << ")";
  }
  return os.str();
}

}  // namespace qeilab
