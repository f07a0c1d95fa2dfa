#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qeilab {

/// The two theories sharing one quadratic-form expansion of the energy
/// density: the free scalar field (symmetric Fock space) and the massive
/// Ising model (antisymmetric Fock space).
struct Model {
  enum class Variant { FreeBoson, Ising };

  Variant variant = Variant::Ising;
  double mass = 1.0;

  Model() = default;
  Model(Variant v, double m) : variant(v), mass(m) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw std::invalid_argument("Model: mass must be positive and finite");
    }
  }

  static Model free_boson(double m = 1.0) { return {Variant::FreeBoson, m}; }
  static Model ising(double m = 1.0) { return {Variant::Ising, m}; }

  [[nodiscard]] bool is_ising() const { return variant == Variant::Ising; }
  /// +1 for symmetric (Bose) statistics, -1 for antisymmetric.
  [[nodiscard]] int exchange_sign() const { return is_ising() ? -1 : +1; }
  [[nodiscard]] double energy(double theta) const { return mass * std::cosh(theta); }
  [[nodiscard]] double momentum(double theta) const { return mass * std::sinh(theta); }
  [[nodiscard]] std::string name() const { return is_ising() ? "ising" : "free"; }
};

struct SpacetimePoint {
  double t = 0.0;
  double x = 0.0;
};

}  // namespace qeilab
