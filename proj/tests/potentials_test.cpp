#include <gtest/gtest.h>

#include <cmath>

#include "mlab/errors.hpp"
#include "mlab/morse.hpp"
#include "mlab/potentials.hpp"

using namespace mlab;

namespace {

Eigen::VectorXd pt(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

std::vector<Potential> catalog() {
  std::vector<Potential> out;
  for (const auto& n : catalog_names()) out.push_back(make_potential(n, {}));
  return out;
}

}  // namespace

TEST(Evaluate, TiltedDoubleWellClosedForms) {
  const auto p = tilted_double_well(0.1);
  EXPECT_DOUBLE_EQ(std::get<double>(evaluate(p, pt({0.0}), Order::value)), 0.25);
  EXPECT_DOUBLE_EQ(std::get<Eigen::MatrixXd>(evaluate(p, pt({1.0}), Order::hessian))(0, 0), 2.0);
  EXPECT_NEAR(std::get<Eigen::VectorXd>(evaluate(p, pt({1.0}), Order::gradient))[0], 0.1, 1e-15);
}

TEST(Evaluate, QuadraticGradientVanishesAtOrigin) {
  const auto p = quadratic(0.5);
  EXPECT_EQ(std::get<Eigen::VectorXd>(evaluate(p, pt({0.0}), Order::gradient))[0], 0.0);
}

TEST(Evaluate, RejectsPointsOutsideTheBox) {
  const auto p = tilted_double_well(0.1);
  EXPECT_THROW(evaluate(p, pt({3.5}), Order::value), DomainError);
  EXPECT_THROW(evaluate(p, pt({0.0, 0.0}), Order::value), DomainError);
}

TEST(Evaluate, RejectsUnknownOrder) {
  EXPECT_THROW(parse_order("third"), UsageError);
  EXPECT_EQ(parse_order("hessian"), Order::hessian);
}

TEST(Villani, QuadraticConstantIsCurvature) {
  for (double theta : {0.5, 2.0}) {
    const auto d = villani_diagnostics(quadratic(theta), 0.1, 64);
    EXPECT_NEAR(d.estimated_C, theta, 1e-12);
  }
}

TEST(Villani, ZeroPotentialHasZeroConstant) {
  EXPECT_EQ(villani_diagnostics(zero_potential(1), 0.1, 16).estimated_C, 0.0);
}

TEST(Villani, DoubleWellGrowthOnShell) {
  const auto d = villani_diagnostics(tilted_double_well(0.1, -2.0, 2.0), 0.1, 64);
  EXPECT_TRUE(villani_growth_surrogate(d));
  EXPECT_GE(d.condition2_ratio_max, 0.0);
  EXPECT_TRUE(std::isfinite(d.condition2_ratio_max));
}

TEST(Villani, RejectsBadInputs) {
  EXPECT_THROW(villani_diagnostics(quadratic(0.5), 0.0, 64), DomainError);
  EXPECT_THROW(villani_diagnostics(quadratic(0.5), 0.1, 4), DomainError);
}

TEST(SelfCheck, QuadraticExactUpToRounding) {
  EXPECT_LE(derivative_selfcheck(quadratic(0.5), 10, 1).max_error(), 1e-8);
}

TEST(SelfCheck, TwoDimensionalDoubleWell) {
  EXPECT_LE(derivative_selfcheck(separable_double_well_2d(), 100, 3).max_error(), 1e-6);
}

TEST(SelfCheck, WholeCatalog) {
  for (const auto& p : catalog()) {
    EXPECT_LE(derivative_selfcheck(p, 100, 7).max_error(), 1e-6) << p.name();
  }
}

TEST(Catalog, ConfiningAtBoxFaces) {
  for (const auto& p : catalog()) {
    if (p.name() == "zero") continue;
    const auto c = p.box().center();
    Eigen::VectorXd center = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    for (std::size_t a = 0; a < p.dim(); ++a) {
      for (double face : {p.box().lower[a], p.box().upper[a]}) {
        Eigen::VectorXd x = center;
        x[static_cast<Eigen::Index>(a)] = face;
        EXPECT_GT(p.value(x), p.value(center)) << p.name();
      }
    }
  }
}

TEST(Catalog, CriticalPointsAreNonDegenerate) {
  for (const auto& p : catalog()) {
    if (p.name() == "zero") continue;
    for (const auto& cp : find_critical_points(p)) {
      EXPECT_GT(cp.hess_eigs.cwiseAbs().minCoeff(), 1e-8) << p.name();
    }
  }
}

TEST(Catalog, FiniteEverywhereOnTheBox) {
  for (const auto& p : catalog()) {
    const auto& b = p.box();
    for (int k = 0; k <= 50; ++k) {
      Eigen::VectorXd x(static_cast<Eigen::Index>(p.dim()));
      for (std::size_t a = 0; a < p.dim(); ++a) x[static_cast<Eigen::Index>(a)] = b.lower[a] + (b.upper[a] - b.lower[a]) * k / 50.0;
      EXPECT_TRUE(std::isfinite(p.value(x))) << p.name();
    }
  }
}

TEST(Catalog, UnknownNamesAndParametersRejected) {
  EXPECT_THROW(make_potential("banana", {}), ValidationError);
  EXPECT_THROW(make_potential("quadratic", {{"tau", 1.0}}), ValidationError);
  EXPECT_DOUBLE_EQ(make_potential("quadratic", {{"theta", 2.0}}).curvature1(0.3), 2.0);
}

TEST(Catalog, ShiftAndTranslate) {
  const auto p = tilted_double_well(0.1);
  EXPECT_DOUBLE_EQ(shifted(p, 3.0).value1(0.4), p.value1(0.4) + 3.0);
  const auto q = translated(p, {0.5});
  EXPECT_DOUBLE_EQ(q.value1(0.9), p.value1(0.4));
  EXPECT_DOUBLE_EQ(q.box().lower[0], p.box().lower[0] + 0.5);
}

TEST(Catalog, PhaseSpaceLiftAddsKineticEnergy) {
  const auto H = phase_space_lift(tilted_double_well(0.1), 2.0);
  ASSERT_EQ(H.dim(), 2u);
  EXPECT_DOUBLE_EQ(H.value(pt({0.0, 1.0})), 0.25 + 0.5);
  EXPECT_LE(derivative_selfcheck(H, 50, 2).max_error(), 1e-6);
}
