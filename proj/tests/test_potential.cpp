#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gamma2/potential.hpp"

namespace gamma2 {
namespace {

TEST(Potential, QuarticClosedForm) {
  const Potential p = Potential::quartic();
  EXPECT_DOUBLE_EQ(p(0.5), 0.5 * 0.75 * 0.75);
  EXPECT_DOUBLE_EQ(p.deriv(0.5), 2.0 * 0.5 * (0.25 - 1.0));
  EXPECT_EQ(p.curvature_at_wells(), 4.0);
  EXPECT_EQ(p.deriv2(-1.0).value(), 4.0);
  EXPECT_EQ(p.deriv2(1.0).value(), 4.0);
  EXPECT_EQ(p.a(), -1.0);
  EXPECT_EQ(p.b(), 1.0);
  EXPECT_EQ(p.c(), 0.0);
  EXPECT_TRUE(p.symmetric());
}

TEST(Potential, SubquadraticWellExponent) {
  const Potential p = Potential::subquadratic(0.5);
  EXPECT_EQ(p.q(), 0.5);
  EXPECT_NEAR(p.ell(), 0.5 * std::pow(2.0, 1.5), 1e-15);
  // W'' blows up like |s - well|^{q-1} at the wells.
  const double d = 1e-8;
  EXPECT_NEAR(p.deriv2(1.0 - d).value() / std::pow(d, -0.5), p.ell(), 1e-4 * p.ell());
  EXPECT_THROW(Potential::subquadratic(1.5), InvalidArgument);
  EXPECT_THROW(Potential::subquadratic(0.0), InvalidArgument);
}

TEST(Potential, SkewedIsAsymmetricWithEqualCurvatures) {
  const Potential p = Potential::skewed();
  EXPECT_FALSE(p.symmetric());
  EXPECT_NEAR(p.deriv(p.c()), 0.0, 1e-12);
  EXPECT_GT(p.c(), 0.5);
  EXPECT_NEAR(p.deriv2(0.0).value(), 16.0, 1e-9);
  EXPECT_NEAR(p.deriv2(1.0).value(), 16.0, 1e-9);
  EXPECT_THROW(Potential::skewed(2.5), InvalidArgument);
}

TEST(Validation, BuiltInsPassEveryCheck) {
  for (const auto& p : {Potential::quartic(), Potential::subquadratic(0.5), Potential::skewed()}) {
    const auto rep = validate_potential(p);
    EXPECT_TRUE(rep.passed) << p.name();
    for (const auto& c : rep.checks) EXPECT_TRUE(c.passed) << p.name() << ": " << c.name << " " << c.detail;
  }
}

TEST(Validation, SingleWellIsRejected) {
  const auto p = Potential::from_shape("single", [](auto s) { return s * s; }, {-1, 1, 0, 1, 4}, true);
  const auto rep = validate_potential(p);
  EXPECT_FALSE(rep.passed);
  ASSERT_NE(rep.find("two_zeros"), nullptr);
  EXPECT_FALSE(rep.find("two_zeros")->passed);
}

TEST(Tabulated, RecoversQuarticWells) {
  const Potential q = Potential::quartic();
  std::vector<double> s, w, dw;
  for (int i = 0; i <= 400; ++i) {
    const double x = -2.0 + 4.0 * i / 400.0;
    s.push_back(x);
    w.push_back(q(x));
    dw.push_back(q.deriv(x));
  }
  const Potential t = tabulated_potential(s, w, dw);
  EXPECT_DOUBLE_EQ(t.a(), -1.0);
  EXPECT_DOUBLE_EQ(t.b(), 1.0);
  EXPECT_NEAR(t.c(), 0.0, 1e-12);
  EXPECT_NEAR(t(0.3), q(0.3), 1e-6);
  EXPECT_NEAR(t.ell(), 4.0, 1e-3);
}

TEST(Tabulated, RejectsMismatchedColumns) {
  EXPECT_THROW(tabulated_potential({0, 1, 2}, {0, 1, 0}, {0, 0, 0}), InvalidArgument);
}

}  // namespace
}  // namespace gamma2
