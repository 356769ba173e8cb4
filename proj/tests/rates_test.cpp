#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mlab/errors.hpp"
#include "mlab/rates.hpp"

using namespace mlab;

namespace {

Eigen::MatrixXd m1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

CriticalPoint point(double x, double f, double curvature) {
  CriticalPoint c;
  c.location = Eigen::VectorXd::Constant(1, x);
  c.value = f;
  c.hessian = m1(curvature);
  c.hess_eigs = Eigen::VectorXd::Constant(1, curvature);
  c.hess_vecs = m1(1.0);
  c.index = curvature < 0 ? 1 : 0;
  return c;
}

}  // namespace

TEST(EtaD, QuadraticFormulaOracle) {
  const double eta = eta_d(m1(-1.0), 1.0);
  EXPECT_NEAR(eta, 0.5 - std::sqrt(1.25), 1e-12);
  EXPECT_NEAR(std::abs(eta), 1.0 / (0.5 + std::sqrt(1.25)), 1e-12);
}

TEST(EtaD, BlockMatrixMatchesClosedFormOnGrid) {
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      const double mu = std::pow(10.0, -3.0 + 4.0 * i / 11.0);
      const double v = std::pow(10.0, -2.0 + 3.0 * j / 11.0);
      const double block = eta_d(m1(-v), 2.0 * std::sqrt(mu));
      EXPECT_NEAR(block, -v / (std::sqrt(mu) + std::sqrt(mu + v)), 1e-10);
      EXPECT_NEAR(block, eta_d_closed_form(mu, v), 1e-10);
    }
  }
}

TEST(EtaD, DegenerateLimitTendsToZero) { EXPECT_LT(std::abs(eta_d(m1(-1e-12), 1.0)), 1e-11); }

TEST(EtaD, RejectsNonSaddles) {
  EXPECT_THROW(eta_d(m1(2.0), 1.0), NotIndexOneError);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2) * -1.0;
  EXPECT_THROW(eta_d(h, 1.0), NotIndexOneError);
}

TEST(Gamma, TiltedDoubleWellPair) {
  EXPECT_NEAR(gamma_prefactor(m1(1.6825), m1(-0.9694)), 0.4193, 1e-4);
}

TEST(Gamma, EqualCurvatures) { EXPECT_NEAR(gamma_prefactor(m1(3.0), m1(-3.0)), 1.0 / std::numbers::pi, 1e-15); }

TEST(Gamma, SeparableTwoDimensional) {
  Eigen::MatrixXd hm = Eigen::Vector2d(2.0, 1.0).asDiagonal();
  Eigen::MatrixXd hs = Eigen::Vector2d(-1.0, 1.0).asDiagonal();
  EXPECT_NEAR(gamma_prefactor(hm, hs), std::sqrt(2.0) / std::numbers::pi, 1e-14);
}

TEST(Gamma, SignViolations) {
  EXPECT_THROW(gamma_prefactor(m1(-1.0), m1(-1.0)), ClassificationError);
  EXPECT_THROW(gamma_prefactor(m1(1.0), m1(1.0)), ClassificationError);
}

TEST(KramersRate, TiltedDoubleWellUnderdamped) {
  const auto pairing = analyze(tilted_double_well(0.1));
  const auto hp = derive(0.05, 0.9);
  const auto r = kramers_rate(pairing, hp, Regime::underdamped_hp).leading;
  EXPECT_NEAR(r.lambda, 0.168, 1e-3);
  EXPECT_NEAR(std::abs(r.eta_d), 0.77695, 2e-4);
  EXPECT_NEAR(r.gamma_prefactor, 0.41934, 2e-4);
  EXPECT_NEAR(r.exponent_arg, 2.0 * 0.15766 / 0.475, 1e-4);
  EXPECT_LT(r.eta_d, 0.0);
  EXPECT_NEAR(r.lambda / (r.prefactor * std::exp(-r.exponent_arg)), 1.0, 1e-12);
  EXPECT_NEAR(r.delta, hp.beta * r.zeta, 1e-15);
}

TEST(KramersRate, TiltedDoubleWellOverdamped) {
  const auto pairing = analyze(tilted_double_well(0.1));
  const auto r = kramers_rate(pairing, derive(0.05, 0.9), Regime::overdamped_lr).leading;
  EXPECT_NEAR(r.lambda / 7.4e-4, 1.0, 0.02);
  EXPECT_NEAR(r.lambda, 0.9694 * 0.41934 * std::exp(-2.0 * 0.157665 / 0.05), 2e-6);
}

TEST(KramersRate, SingleWellIsNotMetastable) {
  EXPECT_THROW(kramers_rate(analyze(quadratic(0.5)), derive(0.05, 0.9), Regime::underdamped_hp), NoMetastabilityError);
}

TEST(KramersRate, ZeroBarrierLeavesPrefactor) {
  const auto r = pair_rate(point(0.0, 1.0, -1.0), point(1.0, 1.0, 2.0), derive(0.05, 0.9), Regime::underdamped_hp);
  EXPECT_DOUBLE_EQ(r.exponent_arg, 0.0);
  EXPECT_DOUBLE_EQ(r.lambda, r.prefactor);
}

TEST(KramersRate, IncreasingInMomentum) {
  const auto pairing = analyze(tilted_double_well(0.1));
  double prev = 0.0;
  for (int i = 1; i < 40; ++i) {
    const double lam = kramers_rate(pairing, derive(0.05, i / 40.0), Regime::underdamped_hp).leading.lambda;
    EXPECT_GT(lam, prev);
    prev = lam;
  }
}

TEST(KramersRate, LadderOrderedOnTripleWell) {
  const auto pairing = analyze(triple_well());
  const auto lad = kramers_rate(pairing, derive(0.05, 0.5), Regime::underdamped_hp);
  ASSERT_EQ(lad.ladder.size(), 2u);
  const double pre_ratio = lad.ladder[0].prefactor / lad.ladder[1].prefactor;
  if (pre_ratio > 0.1 && pre_ratio < 10.0) EXPECT_LE(lad.ladder[0].lambda, lad.ladder[1].lambda);
  EXPECT_DOUBLE_EQ(lad.leading.lambda, lad.ladder[0].lambda);
}

TEST(KramersRate, NagCNeedsIterationIndex) {
  EXPECT_THROW(kramers_rate(analyze(tilted_double_well(0.1)), derive(0.05, 0.9), Regime::nag_c), UsageError);
  EXPECT_EQ(parse_regime("nag_sc"), Regime::nag_sc);
  EXPECT_THROW(parse_regime("overdamped"), ValidationError);
}

TEST(Nag, ReferenceValues) {
  const auto n = nag_asymptotics(0.0554, 0.9694, 0.05);
  EXPECT_NEAR(n.eta_abs_nag_sc, 0.6745, 5e-4);
  EXPECT_NEAR(n.eta_abs_plain, 0.7770, 5e-4);
}

TEST(Nag, ZeroStepCoincides) {
  const auto n = nag_asymptotics(0.0554, 0.9694, 0.0);
  EXPECT_EQ(n.eta_abs_nag_sc, n.eta_abs_plain);
}

TEST(Nag, SquareRootShrinkage) {
  const auto a = nag_asymptotics(0.0554, 0.9694, 0.05), b = nag_asymptotics(0.0554, 0.9694, 0.0005);
  const double da = std::abs(a.eta_abs_nag_sc - a.eta_abs_plain), db = std::abs(b.eta_abs_nag_sc - b.eta_abs_plain);
  EXPECT_NEAR(db, 0.011, 1e-3);
  EXPECT_NEAR(da, 0.103, 2e-3);
  EXPECT_GE(da / db, 7.0);
  EXPECT_LE(da / db, 13.0);
}

TEST(Nag, NagCExponent) {
  const auto n = nag_asymptotics(0.0554, 0.9694, 0.05, 0.15);
  for (double k : {1.0, 10.0, 1000.0}) EXPECT_NEAR(n.nag_c_exponent(k), -(1.0 / k) * (1.0 + 1.5 / k) * 6.0 * 0.15 / 0.05, 1e-12);
}

TEST(FinalGap, ReferenceValues) {
  const auto g = final_gap_and_iteration(derive(0.01, 0.9), 1.0, 0.1, 1.0, 2.0, 0.5);
  EXPECT_NEAR(g.gap_bound, 0.095, 1e-12);
  EXPECT_NEAR(g.s_max, 0.1 * 0.1 / 1.9, 1e-12);
  EXPECT_NEAR(g.t_min, 2.0 * std::log(40.0), 1e-12);
  EXPECT_NEAR(final_gap_and_iteration(derive(0.02, 1.0 / 3.0), 1.0, 0.1, 1.0, 2.0, 0.5).gap_bound, 0.02, 1e-15);
}

TEST(FinalGap, IncreasesWithTemperature) {
  double prev = 0.0;
  for (int i = 1; i < 30; ++i) {
    const double g = final_gap_and_iteration(derive(0.01, i / 30.0), 2.0, 0.1, 1.0, 1.0, 1.0).gap_bound;
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(FinalGap, ZeroRateIsAnError) {
  EXPECT_THROW(final_gap_and_iteration(derive(0.01, 0.9), 1.0, 0.1, 1.0, 2.0, 0.0), NumericalError);
  EXPECT_THROW(final_gap_and_iteration(derive(0.5, 0.9), 1.0, 0.1, 0.1, 2.0, 1.0), DomainError);
}

TEST(IdealizedRisk, StartsAtHundred) {
  for (double s : {0.001, 0.1}) {
    for (double a : {0.3, 0.9}) EXPECT_DOUBLE_EQ(idealized_risk(0.0, s, a), 100.0);
  }
}

TEST(IdealizedRisk, StabilizationCounts) {
  EXPECT_NEAR(stabilization_k(0.1, 0.9), 26.0, 1.0);
  EXPECT_NEAR(stabilization_k(0.001, 0.9) / 8.6e8, 1.0, 0.01);
  EXPECT_THROW(stabilization_k(0.1, 0.9, 1.5), DomainError);
}
