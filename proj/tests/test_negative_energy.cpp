#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qeilab/energy_density.hpp"
#include "qeilab/negative_energy.hpp"

using namespace qeilab;

namespace {

// For the unit-integral Gaussian h, m(k) = int h_alpha(t) e^{k t} dt = exp(k^2 alpha^2 / 4),
// and for even h, int int h h cosh(a s + b t + c) = m(a) m(b) cosh c.
// Expanding cosh^2(u/2) cosh(v/2) = (cosh(v/2) + cosh(u) cosh(v/2)) / 2 gives closed forms.
double m(double k, double alpha) { return std::exp(k * k * alpha * alpha / 4.0); }

// int int h h cosh^2((s+t+p)/2) cosh((s-t+q)/2)
double ising_moment(double alpha, double p, double q) {
  const double half = m(0.5, alpha) * m(0.5, alpha) * std::cosh(q / 2);
  // cosh(s+t+p) cosh((s-t+q)/2) = [cosh(3s/2 + t/2 + p + q/2) + cosh(s/2 + 3t/2 + p - q/2)] / 2
  const double mixed =
      0.5 * m(1.5, alpha) * m(0.5, alpha) * (std::cosh(p + q / 2) + std::cosh(p - q / 2));
  return 0.5 * (half + mixed);
}

IJK closed_form(double alpha, double gamma) {
  IJK q;
  q.i_val = ising_moment(alpha, 0.0, 0.0);
  q.j_val = 2.0 * ising_moment(alpha, gamma, gamma);
  q.k_val = ising_moment(alpha, 2 * gamma, 0.0);
  return q;
}

}  // namespace

TEST(LimitIjk, Examples) {
  const auto z = limit_ijk(0.0);
  EXPECT_EQ(z.i_val, 1.0);
  EXPECT_EQ(z.j_val, 2.0);
  EXPECT_EQ(z.k_val, 1.0);
  const auto f = limit_ijk(5.0);
  EXPECT_NEAR(f.j_val, 461.2, 0.05);
  EXPECT_NEAR(f.k_val, 5507.1, 0.05);
  EXPECT_NEAR(f.quadratic(-0.04), -8.64, 0.01);
}

TEST(Ijk, MatchesClosedFormMoments) {
  for (double alpha : {0.1, 0.5, 1.0}) {
    for (double gamma : {0.0, 1.3, 5.0, 8.0}) {
      const auto q = ijk_integrals(alpha, gamma);
      const auto ref = closed_form(alpha, gamma);
      EXPECT_TRUE(q.converged);
      EXPECT_NEAR(q.i_val / ref.i_val, 1.0, 1e-8) << alpha << " " << gamma;
      EXPECT_NEAR(q.j_val / ref.j_val, 1.0, 1e-8) << alpha << " " << gamma;
      EXPECT_NEAR(q.k_val / ref.k_val, 1.0, 1e-8) << alpha << " " << gamma;
    }
  }
}

TEST(Ijk, ApproachesDeltaLimit) {
  for (double gamma : {0.0, 1.0, 2.0, 5.0}) {
    const auto q = ijk_integrals(1e-3, gamma);
    const auto lim = limit_ijk(gamma);
    EXPECT_LT(std::abs(q.i_val / lim.i_val - 1.0), 1e-4);
    EXPECT_LT(std::abs(q.j_val / lim.j_val - 1.0), 1e-4);
    EXPECT_LT(std::abs(q.k_val / lim.k_val - 1.0), 1e-4);
  }
}

TEST(Ijk, ZeroShiftAndGammaIndependence) {
  const auto q0 = ijk_integrals(0.4, 0.0);
  EXPECT_NEAR(q0.j_val, 2.0 * q0.i_val, 1e-12 * q0.i_val);
  EXPECT_NEAR(q0.k_val, q0.i_val, 1e-12 * q0.i_val);
  const auto q3 = ijk_integrals(0.4, 3.0);
  EXPECT_EQ(q0.i_val, q3.i_val);
}

TEST(Ijk, AllPositive) {
  for (double alpha : {0.1, 0.5, 1.0}) {
    for (double gamma : {-3.0, 0.0, 2.0, 7.0}) {
      const auto q = ijk_integrals(alpha, gamma);
      EXPECT_GT(q.i_val, 0.0);
      EXPECT_GT(q.j_val, 0.0);
      EXPECT_GT(q.k_val, 0.0);
    }
  }
}

TEST(Ijk, RejectsBadAlpha) {
  EXPECT_THROW(ijk_integrals(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(energy_at_origin(-0.1, 0.0, 1.0), std::invalid_argument);
}

TEST(OptimalBeta, Examples) {
  IJK sq;
  sq.i_val = 1;
  sq.j_val = 2;
  sq.k_val = 1;
  EXPECT_EQ(optimal_beta(sq), -1.0);
  EXPECT_EQ(sq.quadratic(optimal_beta(sq)), 0.0);
  EXPECT_NEAR(optimal_beta(limit_ijk(5.0)), -0.04187, 1e-5);
  sq.j_val = 0;
  EXPECT_EQ(optimal_beta(sq), 0.0);
  sq.k_val = 0;
  EXPECT_THROW(optimal_beta(sq), std::invalid_argument);
}

TEST(OptimalBeta, MinimisesEnergy) {
  const auto q = ijk_integrals(0.5, 5.0);
  const double b = optimal_beta(q);
  const double at = q.quadratic(b);
  for (double d : {1e-4, 1e-3, 1e-2}) {
    EXPECT_GE(q.quadratic(b + d), at);
    EXPECT_GE(q.quadratic(b - d), at);
  }
}

TEST(Negativity, LimitCases) {
  EXPECT_FALSE(negativity_condition(limit_ijk(0.0)));
  EXPECT_TRUE(negativity_condition(limit_ijk(5.0)));
  EXPECT_FALSE(negativity_condition(limit_ijk(1.0)));
  EXPECT_FALSE(negativity_condition(limit_ijk(2.0)));
  EXPECT_TRUE(negativity_condition(limit_ijk(2.2)));
}

TEST(GammaThreshold, RootOfCubic) {
  const double g = gamma_threshold();
  EXPECT_NEAR(g, std::acosh(2.0 + std::sqrt(5.0)), 1e-12);
  EXPECT_NEAR(g, 2.1226, 1e-4);
  const double c = std::cosh(g);
  EXPECT_LT(std::abs(std::pow(1 + c, 3) - 8 * c * c), 1e-9);
}

TEST(EnergyAtOrigin, SignExamples) {
  EXPECT_GT(energy_at_origin(0.5, 0.0, 5.0).value, 0.0);
  EXPECT_LT(energy_at_origin(0.5, -0.04, 5.0).value, 0.0);
}

TEST(EnergyAtOrigin, MatchesPointwiseDensity) {
  const Model ising = Model::ising();
  for (const TwoBumpParams p : {TwoBumpParams{0.5, -0.04, 5.0}, TwoBumpParams{0.3, 0.7, 1.0},
                                TwoBumpParams{1.0, -0.2, 3.0}, TwoBumpParams{0.1, -0.05, 4.0}}) {
    const auto e = energy_at_origin(p.alpha, p.beta, p.gamma);
    const auto d = expectation_point(ising, ProductState(1, make_two_bump(p)), {0.0, 0.0});
    const double scaled = d.value / density_prefactor(ising);
    EXPECT_NEAR(e.value, scaled, 10 * (e.error + d.error / density_prefactor(ising)) + 1e-9)
        << p.alpha << " " << p.beta << " " << p.gamma;
  }
}

TEST(EnergyAtOrigin, FreeFieldNeverNegative) {
  const Model free = Model::free_boson();
  for (double gamma : {0.0, 1.0, 3.0, 5.0, 8.0}) {
    EXPECT_FALSE(negativity_condition(limit_ijk_free(gamma)));
    for (double alpha : {0.1, 0.5}) {
      const auto q = ijk_integrals(alpha, gamma, BumpProfile::gaussian(), {}, free);
      const double b = optimal_beta(q);
      EXPECT_GE(q.quadratic(b), -1e-9 * q.k_val) << alpha << " " << gamma;
    }
  }
}

TEST(Scan, DefaultGridFlagsFigurePoint) {
  const auto res = scan({0.5}, {0.0, 2.0, 5.0});
  ASSERT_EQ(res.rows.size(), 3u);
  EXPECT_FALSE(res.rows[0].negative);
  EXPECT_FALSE(res.rows[1].negative);
  EXPECT_TRUE(res.rows[2].negative);
  for (const auto& r : res.rows) {
    EXPECT_TRUE(r.ok) << r.message;
    EXPECT_EQ(r.negative, r.min_value < 0.0);
  }
}

TEST(Scan, NegativityOnsetNearThreshold) {
  const double g = gamma_threshold();
  const auto res = scan({0.01}, {g - 0.1, g + 0.1, 1.0, 4.0});
  ASSERT_EQ(res.rows.size(), 4u);
  EXPECT_FALSE(res.rows[0].negative);  // gamma = 1
  EXPECT_FALSE(res.rows[1].negative);
  EXPECT_TRUE(res.rows[2].negative);
  EXPECT_TRUE(res.rows[3].negative);
}

TEST(Scan, SortedAndFailuresRecorded) {
  const auto bad = BumpProfile::custom([](double x) { return std::exp(-x * x); });
  QuadratureConfig cfg;
  cfg.max_intervals = 2;
  const auto res = scan({1.0, 0.25}, {3.0, 0.0}, bad, cfg);
  ASSERT_EQ(res.rows.size(), 4u);
  EXPECT_EQ(res.rows[0].alpha, 0.25);
  EXPECT_EQ(res.rows[0].gamma, 0.0);
  EXPECT_EQ(res.rows[3].alpha, 1.0);
  EXPECT_EQ(res.rows[3].gamma, 3.0);
  bool any_failed = false;
  for (const auto& r : res.rows) any_failed = any_failed || !r.ok;
  EXPECT_TRUE(any_failed);
  EXPECT_THROW(scan({0.0}, {1.0}), std::invalid_argument);
}
