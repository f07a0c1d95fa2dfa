#pragma once

/// \file numerics.hpp
/// \brief Adaptive quadrature, Gauss-Legendre panels, cumulative tables and
/// bracketed root finding.
///
/// Every routine here is a pure function of its inputs. Adaptive routines
/// return an IntegrationResult carrying an error estimate and a convergence
/// flag; non-convergence is reported, never hidden.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace qeilab {

using complex = std::complex<double>;

/// Raised when a computation cannot produce a trustworthy number.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-9;
  int max_depth = 48;
  /// Truncation of infinite rapidity domains; 0 lets the state choose.
  double rapidity_cutoff = 0.0;
  /// Gauss-Legendre points per panel for fixed-panel rules.
  int grid_points = 16;
  /// Upper bound on the number of live subintervals in one adaptive run.
  std::size_t max_intervals = 200000;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
      throw std::invalid_argument("QuadratureConfig: tolerances must be positive");
    }
    if (rapidity_cutoff < 0.0 || !std::isfinite(rapidity_cutoff)) {
      throw std::invalid_argument("QuadratureConfig: rapidity_cutoff must be finite and >= 0");
    }
    if (grid_points < 2) {
      throw std::invalid_argument("QuadratureConfig: grid_points must be >= 2");
    }
    if (max_depth < 1) {
      throw std::invalid_argument("QuadratureConfig: max_depth must be >= 1");
    }
  }

  /// Same config with tolerances scaled by `factor` (used for nested rules).
  [[nodiscard]] QuadratureConfig tightened(double factor) const {
    QuadratureConfig c = *this;
    c.abs_tol *= factor;
    c.rel_tol *= factor;
    return c;
  }
};

template <typename T>
struct IntegrationResult {
  T value{};
  double error = 0.0;
  bool converged = true;
  /// Stopped because parts that refinement cannot improve (round-off floor,
  /// depth limit, inner-integral noise) already exceed the tolerance.
  bool noise_limited = false;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const complex& v) { return std::abs(v); }

// 7-point Gauss / 15-point Kronrod pair on [-1, 1] (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct PanelEstimate {
  T value{};
  double error = 0.0;
  double aux = 0.0;  // Kronrod integral of the auxiliary channel
  bool roundoff = false;  // error estimate sits at the round-off floor
};

// One G7-K15 panel. `f` returns std::pair<T, double>; the second member is an
// auxiliary nonnegative channel (e.g. inner error estimates) integrated
// alongside the value.
template <typename T, typename F>
PanelEstimate<T> gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<T, 15> fv{};
  std::array<double, 15> av{};
  {
    auto [v, x] = f(center);
    fv[7] = v;
    av[7] = x;
  }
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    auto [v1, x1] = f(center - dx);
    auto [v2, x2] = f(center + dx);
    fv[j] = v1;
    fv[14 - j] = v2;
    av[j] = x1;
    av[14 - j] = x2;
  }
  T resk = fv[7] * kWgk[7];
  T resg = fv[7] * kWg[3];
  double aux = av[7] * kWgk[7];
  double resabs = magnitude(fv[7]) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const T pair = fv[j] + fv[14 - j];
    resk += pair * kWgk[j];
    resabs += (magnitude(fv[j]) + magnitude(fv[14 - j])) * kWgk[j];
    aux += (av[j] + av[14 - j]) * kWgk[j];
    if (j % 2 == 1) {
      resg += pair * kWg[j / 2];
    }
  }
  const T mean = resk * 0.5;
  double resasc = kWgk[7] * magnitude(fv[7] - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (magnitude(fv[j] - mean) + magnitude(fv[14 - j] - mean));
  }
  const double h = std::abs(half);
  resasc *= h;
  resabs *= h;
  double err = magnitude((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  bool roundoff = false;
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    roundoff = err <= 50.0 * eps * resabs;
    err = std::max(50.0 * eps * resabs, err);
  }
  return {resk * half, err, aux * h, roundoff};
}

template <typename T>
struct Interval {
  double a;
  double b;
  T value;
  double error;
  double aux;
  int depth;
  bool roundoff;
};

// Global adaptive subdivision: always bisect the interval with the largest
// error until the summed error meets max(abs_tol, rel_tol*|I|).
template <typename T, typename F>
IntegrationResult<T> adaptive(F&& f, std::span<const double> breaks,
                              const QuadratureConfig& cfg) {
  std::vector<Interval<T>> live;
  live.reserve(64);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    auto p = gk15<T>(f, breaks[i], breaks[i + 1]);
    live.push_back({breaks[i], breaks[i + 1], p.value, p.error, p.aux, 0, p.roundoff});
  }
  auto by_error = [](const Interval<T>& l, const Interval<T>& r) {
    return l.error < r.error;
  };
  std::make_heap(live.begin(), live.end(), by_error);

  // Intervals that hit max_depth are parked; their error still counts.
  std::vector<Interval<T>> parked;
  bool converged = true;
  bool noise_limited = false;
  double parked_err = 0.0;
  T total{};
  double err = 0.0;
  auto resum = [&] {
    total = T{};
    err = 0.0;
    for (const auto& iv : live) {
      total += iv.value;
      err += iv.error + iv.aux;
    }
    for (const auto& iv : parked) {
      total += iv.value;
      err += iv.error + iv.aux;
    }
  };
  resum();
  for (std::size_t iter = 1;; ++iter) {
    if (iter % 512 == 0) resum();  // running sums drift
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * magnitude(total));
    if (err <= tol) {
      resum();
      if (err <= std::max(cfg.abs_tol, cfg.rel_tol * magnitude(total))) break;
    }
    if (live.empty() || live.size() + parked.size() >= cfg.max_intervals) {
      converged = false;
      break;
    }
    std::pop_heap(live.begin(), live.end(), by_error);
    Interval<T> worst = live.back();
    live.pop_back();
    // Refining cannot help at max depth, at the round-off floor, or when the
    // aux channel (noise of inner integrals) dominates.
    if (worst.depth >= cfg.max_depth || worst.roundoff || worst.error <= worst.aux) {
      parked.push_back(worst);
      parked_err += worst.error + worst.aux;
      if (parked_err > std::max(cfg.abs_tol, cfg.rel_tol * magnitude(total))) {
        converged = false;
        noise_limited = true;
        break;
      }
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = gk15<T>(f, worst.a, mid);
    auto right = gk15<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + left.aux + right.error + right.aux - worst.error - worst.aux;
    live.push_back({worst.a, mid, left.value, left.error, left.aux, worst.depth + 1,
                    left.roundoff});
    std::push_heap(live.begin(), live.end(), by_error);
    live.push_back({mid, worst.b, right.value, right.error, right.aux, worst.depth + 1,
                    right.roundoff});
    std::push_heap(live.begin(), live.end(), by_error);
  }

  // Sum in position order so results do not depend on heap layout.
  live.insert(live.end(), parked.begin(), parked.end());
  std::sort(live.begin(), live.end(),
            [](const Interval<T>& l, const Interval<T>& r) { return l.a < r.a; });
  IntegrationResult<T> out;
  for (const auto& iv : live) {
    out.value += iv.value;
    out.error += iv.error + iv.aux;
  }
  const double tol = std::max(cfg.abs_tol, cfg.rel_tol * magnitude(out.value));
  out.converged = converged && out.error <= tol;
  out.noise_limited = noise_limited && !out.converged;
  return out;
}

template <typename F>
auto with_zero_aux(F& f) {
  return [&f](double x) { return std::pair{f(x), 0.0}; };
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integral of `f` over [a, b].
///
/// `f` may return double or std::complex<double>. Extra `breaks` inside (a, b)
/// seed the subdivision (kinks, oscillation scale).
template <typename F>
auto integrate_1d(F&& f, double a, double b, const QuadratureConfig& cfg = {},
                  std::span<const double> breaks = {}) {
  using T = std::decay_t<std::invoke_result_t<F&, double>>;
  cfg.validate();
  if (!(a <= b)) {
    throw std::invalid_argument("integrate_1d: require a <= b");
  }
  if (a == b) return IntegrationResult<T>{T{}, 0.0, true};
  std::vector<double> pts{a};
  for (double x : breaks) {
    if (x > a && x < b) pts.push_back(x);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return detail::adaptive<T>(detail::with_zero_aux(f), pts, cfg);
}

/// Same as integrate_1d but with `n` equal seed panels.
template <typename F>
auto integrate_1d_panels(F&& f, double a, double b, std::size_t n,
                         const QuadratureConfig& cfg = {}) {
  std::vector<double> pts;
  n = std::max<std::size_t>(n, 1);
  pts.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    pts.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
  }
  return integrate_1d(std::forward<F>(f), a, b, cfg, pts);
}

struct Rectangle {
  double x0, x1, y0, y1;
};

/// Iterated 2D adaptive quadrature over a rectangle.
///
/// The outer variable is x, the inner is y. `inner_breaks(x)` may supply
/// seed points for the inner integral (e.g. a kink along y == x). The error
/// estimate is the outer error plus the outer integral of the inner errors.
/// `outer_breaks` seed the outer subdivision.
template <typename F, typename B = std::nullptr_t>
auto integrate_2d(F&& f, const Rectangle& dom, const QuadratureConfig& cfg = {},
                  B inner_breaks = nullptr, std::span<const double> outer_breaks = {}) {
  using T = std::decay_t<std::invoke_result_t<F&, double, double>>;
  cfg.validate();
  if (!(dom.x0 <= dom.x1) || !(dom.y0 <= dom.y1)) {
    throw std::invalid_argument("integrate_2d: degenerate rectangle");
  }
  bool inner_ok = true;
  const double width = std::max(dom.x1 - dom.x0, 1e-300);
  QuadratureConfig inner_cfg = cfg.tightened(0.1);
  inner_cfg.abs_tol = cfg.abs_tol * 0.1 / width;

  auto outer = [&](double x) {
    auto g = [&](double y) { return f(x, y); };
    IntegrationResult<T> r;
    if constexpr (std::is_same_v<B, std::nullptr_t>) {
      r = integrate_1d(g, dom.y0, dom.y1, inner_cfg);
    } else {
      const std::vector<double> br = inner_breaks(x);
      r = integrate_1d(g, dom.y0, dom.y1, inner_cfg, br);
    }
    // A noise-limited inner error is carried by the aux channel, so the outer
    // tolerance test still sees it.
    if (!r.converged && !r.noise_limited) inner_ok = false;
    return std::pair{r.value, r.error};
  };
  std::vector<double> ends{dom.x0};
  for (double x : outer_breaks) {
    if (x > dom.x0 && x < dom.x1) ends.push_back(x);
  }
  ends.push_back(dom.x1);
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  if (dom.x0 == dom.x1) return IntegrationResult<T>{T{}, 0.0, true};
  auto res = detail::adaptive<T>(outer, ends, cfg);
  res.converged = res.converged && inner_ok;
  return res;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

struct GaussLegendre {
  std::vector<double> nodes;    // ascending, on [-1, 1]
  std::vector<double> weights;
  /// cumulative[i][j] = integral from -1 to nodes[i] of the j-th Lagrange
  /// basis polynomial through the nodes.
  std::vector<std::vector<double>> cumulative;
};

namespace detail {

inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

inline GaussLegendre build_gauss_legendre(int n) {
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre_with_derivative(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    auto [p, dp] = legendre_with_derivative(n, x);
    gl.nodes[i] = x;
    gl.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Lagrange basis through GL nodes expanded in Legendre polynomials:
  // l_j(x) = w_j * sum_k (2k+1)/2 P_k(x_j) P_k(x), exact for k <= n-1.
  auto legendre_all = [n](double x) {
    std::vector<double> p(n + 1);
    p[0] = 1.0;
    if (n >= 1) p[1] = x;
    for (int k = 2; k <= n; ++k) {
      p[k] = ((2.0 * k - 1.0) * x * p[k - 1] - (k - 1.0) * p[k - 2]) / k;
    }
    return p;
  };
  std::vector<std::vector<double>> pn(n);
  for (int j = 0; j < n; ++j) pn[j] = legendre_all(gl.nodes[j]);
  gl.cumulative.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    const auto pi = legendre_all(gl.nodes[i]);
    for (int j = 0; j < n; ++j) {
      // int_{-1}^{x} P_0 = x + 1; int_{-1}^{x} P_k = (P_{k+1} - P_{k-1})/(2k+1)
      double s = 0.5 * (gl.nodes[i] + 1.0);
      for (int k = 1; k < n; ++k) {
        s += 0.5 * pn[j][k] * (pi[k + 1] - pi[k - 1]);
      }
      gl.cumulative[i][j] = gl.weights[j] * s;
    }
  }
  return gl;
}

}  // namespace detail

/// Gauss-Legendre rule with `n` points (cached for the common sizes).
inline const GaussLegendre& gauss_legendre(int n) {
  if (n < 2 || n > 64) {
    throw std::invalid_argument("gauss_legendre: n must be in [2, 64]");
  }
  static const auto table = [] {
    std::vector<GaussLegendre> t(65);
    for (int k = 2; k <= 64; ++k) t[k] = detail::build_gauss_legendre(k);
    return t;
  }();
  return table[n];
}

/// Composite Gauss-Legendre rule on variable-width panels.
struct PanelGrid {
  int points = 16;
  std::vector<double> edges;    // panel boundaries, ascending
  std::vector<double> nodes;    // points * panels() nodes, ascending
  std::vector<double> weights;

  [[nodiscard]] std::size_t panels() const { return edges.empty() ? 0 : edges.size() - 1; }
  [[nodiscard]] std::size_t size() const { return nodes.size(); }

  /// Panels marching from lo to hi; each width is at most max_width(x) at
  /// both of its ends.
  template <typename W>
  static PanelGrid build(double lo, double hi, W&& max_width, int points = 16) {
    if (!(lo < hi)) throw std::invalid_argument("PanelGrid: empty range");
    std::vector<double> edges{lo};
    double x = lo;
    while (x < hi) {
      double w = max_width(x);
      w = std::min(w, max_width(std::min(x + w, hi)));
      if (!(w > 0.0)) throw std::invalid_argument("PanelGrid: nonpositive width");
      // Avoid a sliver as the last panel.
      x = (hi - x < 1.5 * w) ? hi : x + w;
      edges.push_back(x);
      if (edges.size() > 50'000'000) throw NumericalError("PanelGrid: too many panels");
    }
    return from_edges(std::move(edges), points);
  }

  static PanelGrid from_edges(std::vector<double> edges, int points) {
    PanelGrid g;
    g.points = points;
    g.edges = std::move(edges);
    const auto& gl = gauss_legendre(points);
    g.nodes.reserve(g.panels() * points);
    g.weights.reserve(g.panels() * points);
    for (std::size_t p = 0; p < g.panels(); ++p) {
      const double c = 0.5 * (g.edges[p] + g.edges[p + 1]);
      const double h = 0.5 * (g.edges[p + 1] - g.edges[p]);
      for (int k = 0; k < points; ++k) {
        g.nodes.push_back(c + h * gl.nodes[k]);
        g.weights.push_back(h * gl.weights[k]);
      }
    }
    return g;
  }

  /// Every panel split in two.
  [[nodiscard]] PanelGrid refined() const {
    std::vector<double> e;
    e.reserve(2 * edges.size());
    for (std::size_t p = 0; p < panels(); ++p) {
      e.push_back(edges[p]);
      e.push_back(0.5 * (edges[p] + edges[p + 1]));
    }
    e.push_back(edges.back());
    return from_edges(std::move(e), points);
  }

  /// Running integrals: out[i] = integral from edges.front() to nodes[i] of
  /// the function sampled as `values` (spectral integration inside panels).
  template <typename T>
  [[nodiscard]] std::vector<T> running_integral(std::span<const T> values) const {
    const auto& gl = gauss_legendre(points);
    std::vector<T> out(values.size());
    T base{};
    for (std::size_t p = 0; p < panels(); ++p) {
      const double h = 0.5 * (edges[p + 1] - edges[p]);
      const std::size_t off = p * static_cast<std::size_t>(points);
      for (int i = 0; i < points; ++i) {
        T s{};
        const auto& row = gl.cumulative[i];
        for (int j = 0; j < points; ++j) s += row[j] * values[off + j];
        out[off + i] = base + h * s;
      }
      T full{};
      for (int j = 0; j < points; ++j) full += weights[off + j] * values[off + j];
      base += full;
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Cumulative integrals
// ---------------------------------------------------------------------------

/// C(x) = integral of a nonnegative f from grid.front() to x, tabulated on a
/// grid and interpolated with a monotone cubic Hermite scheme.
class CumulativeTable {
 public:
  CumulativeTable() = default;
  CumulativeTable(std::vector<double> grid, std::vector<double> values,
                  std::vector<double> slopes)
      : grid_(std::move(grid)), values_(std::move(values)), slopes_(std::move(slopes)) {
    limit_slopes();
  }

  [[nodiscard]] double operator()(double x) const {
    if (grid_.empty()) return 0.0;
    if (x <= grid_.front()) return values_.front();
    if (x >= grid_.back()) return values_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    const double h = grid_[i + 1] - grid_[i];
    const double s = (x - grid_[i]) / h;
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    const double delta = values_[i + 1] - values_[i];
    if (delta <= 0.0) return values_[i];
    // Work with the fraction of the step so rounding near saturation stays monotone.
    const double frac = h01 + h * (h10 * slopes_[i] + h11 * slopes_[i + 1]) / delta;
    return values_[i] + delta * std::clamp(frac, 0.0, 1.0);
  }

  [[nodiscard]] double total() const { return values_.empty() ? 0.0 : values_.back(); }
  [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

 private:
  // Fritsch-Carlson limiter keeps every cubic piece monotone.
  void limit_slopes() {
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
      const double h = grid_[i + 1] - grid_[i];
      const double delta = (values_[i + 1] - values_[i]) / h;
      if (delta <= 0.0) {
        slopes_[i] = 0.0;
        slopes_[i + 1] = 0.0;
        continue;
      }
      const double a = slopes_[i] / delta;
      const double b = slopes_[i + 1] / delta;
      const double r = a * a + b * b;
      if (r > 9.0) {
        const double tau = 3.0 / std::sqrt(r);
        slopes_[i] = tau * a * delta;
        slopes_[i + 1] = tau * b * delta;
      }
    }
  }

  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// Tabulates C(grid[k]) = integral of f from grid.front() to grid[k].
/// Rejects negative samples of f.
template <typename F>
CumulativeTable cumulative_table(F&& f, std::vector<double> grid,
                                 const QuadratureConfig& cfg = {}) {
  if (grid.size() < 2) {
    throw std::invalid_argument("cumulative_table: need at least two grid points");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("cumulative_table: grid must be ordered");
  }
  std::vector<double> values(grid.size(), 0.0);
  std::vector<double> slopes(grid.size(), 0.0);
  bool negative = false;
  auto checked = [&](double x) {
    const double v = f(x);
    if (v < 0.0) negative = true;
    return v;
  };
  for (std::size_t k = 0; k < grid.size(); ++k) {
    slopes[k] = checked(grid[k]);
    if (k == 0) continue;
    const auto r = integrate_1d(checked, grid[k - 1], grid[k], cfg);
    if (!r.converged) {
      throw NumericalError("cumulative_table: quadrature did not converge");
    }
    values[k] = values[k - 1] + std::max(r.value, 0.0);
  }
  if (negative) {
    throw std::invalid_argument("cumulative_table: integrand must be nonnegative");
  }
  return CumulativeTable(std::move(grid), std::move(values), std::move(slopes));
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Brent's method on a sign-changing bracket. The returned root lies in a
/// final bracket of width at most `tol` (plus a few ulps).
template <typename F>
double find_root(F&& f, double lo, double hi, double tol = 1e-14) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("find_root: invalid bracket");
  }
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::signbit(fa) == std::signbit(fb)) {
    throw std::invalid_argument("find_root: f(lo) and f(hi) must differ in sign");
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < 500; ++iter) {
    if (std::signbit(fb) == std::signbit(fc)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;  // bisection step
      e = m;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (m > 0 ? tol1 : -tol1);
    fb = f(b);
  }
  throw NumericalError("find_root: iteration limit reached");
}

}  // namespace qeilab
