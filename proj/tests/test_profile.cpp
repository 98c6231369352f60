#include <cmath>

#include <gtest/gtest.h>

#include "gamma2/profile.hpp"

namespace gamma2 {
namespace {

TEST(Profile, QuarticIsScaledTanh) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  EXPECT_NEAR(prof.z(std::sqrt(2.0)), std::tanh(1.0), 1e-8);
  for (double t : {-5.0, -1.0, 0.0, 0.3, 2.0, 7.0})
    EXPECT_NEAR(prof.z(t), std::tanh(t / std::sqrt(2.0)), 1e-9) << t;
  EXPECT_EQ(prof.z(0.0), p.c());
  EXPECT_LT(prof.max_ode_residual(), 1e-9);
  EXPECT_FALSE(prof.t_a().has_value());
  EXPECT_NEAR(prof.tail_rate(), std::sqrt(2.0), 1e-12);
}

TEST(Profile, DerivativeSolvesTheOde) {
  const Potential p = Potential::skewed();
  const Profile prof = solve_profile(p);
  for (double t = -1.0; t <= 1.0; t += 0.05)
    EXPECT_NEAR(prof.dz(t), std::sqrt(p(prof.z(t))), 1e-8) << t;
}

TEST(Profile, SubquadraticHasFiniteSupport) {
  const Potential p = Potential::subquadratic(0.5);
  const Profile prof = solve_profile(p);
  ASSERT_TRUE(prof.t_a().has_value());
  ASSERT_TRUE(prof.t_b().has_value());
  EXPECT_NEAR(*prof.t_a(), -*prof.t_b(), 1e-9);
  EXPECT_EQ(prof.z(*prof.t_b() + 1.0), 1.0);
  EXPECT_EQ(prof.z(*prof.t_a() - 1.0), -1.0);
}

TEST(Constants, QuarticValues) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  const auto c = compute_constants(prof, p);
  EXPECT_NEAR(c.c_w, 2.0 * std::sqrt(2.0) / 3.0, 1e-10);
  EXPECT_NEAR(c.c_sym, 0.0, 1e-10);
  EXPECT_LT(c.c_w_error, 1e-10);
  EXPECT_NEAR(cw_from_profile(prof, p), c.c_w, 1e-9);
}

TEST(Constants, SymmetryDefectQuadratureVanishesForAnEvenWell) {
  // Same quartic, but not declared symmetric, so c_sym goes through quadrature.
  const Potential p = Potential::from_shape(
      "quartic_generic", [](auto s) { return 0.5 * (1.0 - s * s) * (1.0 - s * s); },
      {-1.0, 1.0, 0.0, 1.0, 4.0}, false);
  const Profile prof = solve_profile(p);
  EXPECT_NEAR(compute_csym(prof, p).value, 0.0, 1e-10);
}

TEST(Constants, SkewedHasNonzeroSymmetryDefect) {
  const Potential p = Potential::skewed();
  const Profile prof = solve_profile(p);
  const auto c = compute_constants(prof, p);
  EXPECT_GT(std::abs(c.c_sym), 1e-4);
  EXPECT_LT(c.c_sym_error, 1e-8);
}

TEST(Shift, SlopeIsMinusTheWellGap) {
  for (const auto& p : {Potential::quartic(), Potential::skewed(), Potential::subquadratic(0.5)}) {
    const Profile prof = solve_profile(p);
    const double h = 0.1;
    const double slope = (shift_integral(prof, 0.3 + h) - shift_integral(prof, 0.3 - h)) / (2 * h);
    EXPECT_NEAR(slope, -(p.b() - p.a()), 1e-8) << p.name();
  }
}

TEST(Shift, QuarticTauInClosedForm) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  // P shift(tau) = 2 c_W (n-1) kappa |Omega| / (W'' (b-a)) with shift(tau) = -2 tau.
  EXPECT_NEAR(solve_tau(prof, p, 1.0, 1.0, 1.0, 2), -std::sqrt(2.0) / 12.0, 1e-11);
  EXPECT_NEAR(solve_tau(prof, p, 1.0, 1.0, 0.0, 2), 0.0, 1e-12);
}

TEST(Shift, SubquadraticBalancesTheTails) {
  const Potential p = Potential::subquadratic(0.5);
  const Profile prof = solve_profile(p);
  const double tau = solve_tau(prof, p, 1.0, 1.0, 1.0, 2);
  EXPECT_NEAR(shift_integral(prof, tau), 0.0, 1e-10);
  EXPECT_NEAR(tau, 0.0, 1e-10);
}

}  // namespace
}  // namespace gamma2
