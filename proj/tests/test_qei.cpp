#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qeilab/qei.hpp"

using namespace qeilab;

namespace {

const Model kFree = Model::free_boson();
const Model kIsing = Model::ising();

WaveFunction fig_state() { return make_two_bump({0.5, -0.04, 5.0}); }

}  // namespace

TEST(QFunction, ValueAtThresholdIsZero) {
  EXPECT_EQ(q_function(kFree, 1.0), 0.0);
  EXPECT_EQ(q_function(kIsing, 1.0), 0.0);
  EXPECT_NEAR(q_of_cosh(kIsing, 0.0), 0.0, 1e-300);
}

TEST(QFunction, TendsToOne) {
  EXPECT_LT(std::abs(q_function(kFree, 1e6) - 1.0), 1e-5);
  EXPECT_LT(std::abs(q_function(kIsing, 1e6) - 1.0), 1e-5);
}

TEST(QFunction, RootTwoClosedForm) {
  const double u = std::sqrt(2.0);
  const double log_term = std::log(1.0 + std::sqrt(2.0));
  EXPECT_NEAR(q_function(kIsing, u), 1.0 / u - 0.5 * log_term, 1e-15);
  EXPECT_NEAR(q_function(kIsing, u), 0.26642, 1e-5);
  EXPECT_NEAR(q_function(kFree, u) - q_function(kIsing, u), log_term, 1e-15);
  EXPECT_NEAR(q_of_cosh(kIsing, std::acosh(u)), q_function(kIsing, u), 1e-15);
}

TEST(QFunction, RejectsBelowThreshold) {
  EXPECT_THROW(q_function(kFree, 0.999), std::invalid_argument);
  EXPECT_THROW(q_function(kIsing, NAN), std::invalid_argument);
}

TEST(QFunction, PositiveAndOrdered) {
  for (int i = 1; i <= 20000; ++i) {
    const double u = 1.0 + (i / 1000.0) * (i / 1000.0);
    const double qi = q_function(kIsing, u);
    EXPECT_GT(qi, 0.0);
    EXPECT_GE(q_function(kFree, u), qi);
  }
}

TEST(QFunction, IsingBranchStrictlyIncreasing) {
  double prev = 0.0;
  for (int i = 1; i <= 20000; ++i) {
    const double u = 1.0 + (i / 1000.0) * (i / 1000.0);
    const double q = q_function(kIsing, u);
    EXPECT_GT(q, prev) << u;
    prev = q;
  }
}

TEST(QFunction, FreeBranchPeaksAboveOne) {
  // Q+' = 2 (1/s - acosh u) / u^3 with s = sqrt(1 - u^-2): one maximum where
  // s acosh u = 1, then a descent to 1 from above.
  const double peak = find_root(
      [](double u) { return std::sqrt(1.0 - 1.0 / (u * u)) * std::acosh(u) - 1.0; }, 1.1, 3.0);
  EXPECT_NEAR(peak, 1.8101707, 1e-6);
  double prev = 0.0;
  for (double u = 1.0001; u < peak; u += 0.001) {
    EXPECT_GT(q_function(kFree, u), prev);
    prev = q_function(kFree, u);
  }
  for (double u = peak + 0.01; u < 400.0; u *= 1.01) {
    const double q = q_function(kFree, u);
    EXPECT_LT(q, prev) << u;
    EXPECT_GT(q, 1.0);
    prev = q;
  }
  EXPECT_NEAR(q_function(kFree, peak), 1.19967864, 1e-8);
}

TEST(Smearing, BumpShapeAndSupport) {
  const auto g = SmearingFunction::bump(0.5, 1.0);
  EXPECT_EQ(g(0.5), 0.0);
  EXPECT_EQ(g(1.6), 0.0);
  EXPECT_NEAR(g(1.0), std::exp(-1.0), 1e-15);
  // derivative against a central difference
  for (double t : {0.7, 0.9, 1.2, 1.45}) {
    const double h = 1e-6;
    EXPECT_NEAR(g.derivative(t), (g(t + h) - g(t - h)) / (2 * h), 1e-6);
  }
  EXPECT_THROW(SmearingFunction::bump(0.0), std::invalid_argument);
}

TEST(Smearing, FastTransformMatchesAdaptive) {
  const auto g = SmearingFunction::bump(0.7, 0.2);
  for (double w : {0.0, 1.0, 9.0, 40.0}) {
    EXPECT_NEAR(std::abs(g.fourier(w) - g.fourier_direct(w).value), 0.0, 1e-12);
  }
}

TEST(QeiRhs, ZeroSmearingGivesZero) {
  const auto g = SmearingFunction::bump(1.0, 0.0, 0.0);
  EXPECT_EQ(qei_rhs(kFree, g).value, 0.0);
  EXPECT_EQ(qei_rhs(kIsing, g).value, 0.0);
  EXPECT_EQ(massless_limit_rhs(g), 0.0);
}

TEST(QeiRhs, QuadraticInAmplitude) {
  const auto g = SmearingFunction::bump();
  const auto g3 = SmearingFunction::bump(1.0, 0.0, 3.0);
  for (const auto& m : {kFree, kIsing}) {
    const auto a = qei_rhs(m, g);
    const auto b = qei_rhs(m, g3);
    EXPECT_NEAR(b.value, 9.0 * a.value, 1e-9 * std::abs(b.value));
  }
}

TEST(QeiRhs, TranslationInvariant) {
  const auto g = SmearingFunction::bump(0.8);
  const auto h = SmearingFunction::bump(0.8, 3.7);
  for (const auto& m : {kFree, kIsing}) {
    const auto a = qei_rhs(m, g);
    const auto b = qei_rhs(m, h);
    EXPECT_NEAR(a.value, b.value, 1e-9 * std::abs(a.value) + a.error + b.error);
  }
}

TEST(QeiRhs, FreeBelowIsingBelowZero) {
  for (double tau : {0.1, 0.5, 1.0, 3.0}) {
    for (double mu : {0.1, 1.0, 10.0}) {
      const auto g = SmearingFunction::bump(tau);
      const auto f = qei_rhs(Model::free_boson(mu), g);
      const auto i = qei_rhs(Model::ising(mu), g);
      EXPECT_TRUE(f.converged && i.converged);
      EXPECT_LE(f.value, i.value);
      EXPECT_LE(i.value, 0.0);
    }
  }
}

TEST(QeiRhs, MoreNegativeAsMassDecreases) {
  const auto g = SmearingFunction::bump();
  double prev = -INFINITY;
  for (double mu = 0.02; mu <= 12.0; mu *= 1.15) {
    const double v = qei_rhs(Model::ising(mu), g).value;
    EXPECT_GE(v, prev) << mu;
    prev = v;
  }
}

TEST(QeiRhsOracle, AgreesWithSingleIntegral) {
  const auto g = SmearingFunction::bump();
  double prev = -INFINITY;
  for (double mu : {0.1, 1.0, 10.0}) {
    const auto fast = qei_rhs(Model::ising(mu), g);
    const auto slow = qei_rhs_oracle_ising(mu, g);
    EXPECT_LT(std::abs(fast.value - slow.value), 1e-6 * std::abs(fast.value)) << mu;
    EXPECT_GE(slow.value, prev);
    prev = slow.value;
  }
}

TEST(QeiRhsOracle, ZeroSmearing) {
  EXPECT_EQ(qei_rhs_oracle_ising(1.0, SmearingFunction::bump(1.0, 0.0, 0.0)).value, 0.0);
}

TEST(MasslessLimit, MatchesSmallMassBound) {
  const auto g = SmearingFunction::bump();
  const double target = massless_limit_rhs(g);
  for (const auto& m : {Model::free_boson(1e-3), Model::ising(1e-3)}) {
    EXPECT_LT(std::abs(qei_rhs(m, g).value / target - 1.0), 0.01);
  }
}

TEST(MasslessLimit, InverseWidthScaling) {
  const double one = massless_limit_rhs(SmearingFunction::bump(1.0));
  for (double tau : {0.25, 0.5, 2.0, 5.0}) {
    EXPECT_NEAR(massless_limit_rhs(SmearingFunction::bump(tau)) * tau, one, 1e-10 * std::abs(one));
  }
}

TEST(ConformalBound, Ratios) {
  const auto g = SmearingFunction::bump(0.6);
  const double limit = massless_limit_rhs(g);
  EXPECT_NEAR(limit / conformal_sharp_bound(1.0, g), 1.5, 1e-12);
  EXPECT_NEAR(limit / conformal_sharp_bound(0.5, g), 3.0, 1e-12);
  EXPECT_NEAR(conformal_sharp_bound(1e-300, g), 0.0, 1e-300);
  EXPECT_THROW(conformal_sharp_bound(0.0, g), std::invalid_argument);
}

TEST(FmIdentity, ZeroFrequencies) {
  const auto r = fm_identity_residual(SmearingFunction::bump(), 0.0, 0.0);
  EXPECT_EQ(std::abs(r.lhs), 0.0);
  EXPECT_LT(r.residual, 1e-12);
}

TEST(FmIdentity, RandomPairs) {
  const auto g = SmearingFunction::bump();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 25; ++i) {
    const double w = u(rng), wp = u(rng);
    const auto r = fm_identity_residual(g, w, wp);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.residual, 1e-6 * (1.0 + std::abs(r.lhs))) << w << " " << wp;
  }
}

TEST(FmIdentity, SwapConjugates) {
  const auto g = SmearingFunction::bump(0.9, 0.4);
  const auto a = fm_identity_residual(g, 1.3, -2.2);
  const auto b = fm_identity_residual(g, -2.2, 1.3);
  EXPECT_NEAR(std::abs(a.lhs - std::conj(b.lhs)), 0.0, 1e-13);
  EXPECT_NEAR(a.residual, b.residual, 1e-12);
}

TEST(SmearedLhs, VacuumIsZero) {
  const auto g = SmearingFunction::bump();
  for (const auto& m : {kFree, kIsing}) {
    const auto s = smeared_lhs(m, make_vacuum(), g);
    EXPECT_EQ(s.value, 0.0);
    const auto rep = verify(m, make_vacuum(), g);
    EXPECT_LT(rep.rhs, 0.0);
    EXPECT_TRUE(rep.passed);
  }
}

TEST(SmearedLhs, FreeOneParticleIsNonnegative) {
  const auto g = SmearingFunction::bump(0.3);
  for (const TwoBumpParams p : {TwoBumpParams{0.5, -0.04, 5.0}, TwoBumpParams{0.3, -0.7, 2.0}}) {
    const auto s = smeared_lhs(kFree, ProductState(1, make_two_bump(p)), g);
    EXPECT_GE(s.value, -s.error);
  }
}

TEST(SmearedLhs, RoutesAgreeOnProductStates) {
  SmearingOptions opt;
  opt.force_pointwise = true;
  const auto g = SmearingFunction::bump(0.4, 0.2);
  for (const auto& m : {kFree, kIsing}) {
    for (int n : {1, 2}) {
      const auto s = smeared_lhs(m, ProductState(n, make_two_bump({0.4, -0.3, 1.5})), g, 0.3, {},
                                 opt);
      ASSERT_TRUE(s.pointwise_evaluated);
      EXPECT_LE(std::abs(s.value - s.pointwise_value), s.error + s.pointwise_error);
    }
  }
}

TEST(SmearedLhs, NarrowBumpAtDipIsNegativeButBounded) {
  SmearingOptions opt;
  opt.force_pointwise = true;
  for (double tau : {0.01, 0.02}) {
    const auto g = SmearingFunction::bump(tau);
    const auto rep = verify(kIsing, ProductState(1, fig_state()), g, 0.0, {}, opt);
    EXPECT_LT(rep.lhs, -10.0 * rep.lhs_error);
    EXPECT_NEAR(rep.lhs, rep.detail.pointwise_value, rep.lhs_error + rep.detail.pointwise_error);
    EXPECT_TRUE(rep.passed);
    EXPECT_GT(rep.margin, 0.0);
  }
}

TEST(Verify, FigStatePasses) {
  const auto g = SmearingFunction::bump();
  for (const auto& m : {kFree, kIsing}) {
    const auto rep = verify(m, ProductState(1, fig_state()), g);
    EXPECT_TRUE(rep.passed);
    EXPECT_TRUE(std::isfinite(rep.margin));
    EXPECT_NEAR(rep.margin, rep.lhs - rep.rhs, 1e-15);
  }
}

TEST(Verify, ManyParticlesExtremeSeparation) {
  const auto g = SmearingFunction::bump(0.5);
  const auto rep = verify(kIsing, ProductState(5, make_two_bump({0.5, -0.04, 8.0})), g);
  EXPECT_TRUE(rep.converged);
  EXPECT_TRUE(rep.passed);
}

TEST(Verify, SuperpositionPasses) {
  const auto g = SmearingFunction::bump(0.3);
  for (const auto& m : {kFree, kIsing}) {
    const auto s = make_superposition(m, std::polar(0.99, 2.0), make_packet(1.5, 0.5),
                                      make_packet(2.5, 0.5));
    const auto rep = verify(m, s, g);
    EXPECT_TRUE(rep.passed);
  }
}
