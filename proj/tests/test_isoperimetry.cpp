#include <cmath>

#include <gtest/gtest.h>

#include "gamma2/isoperimetry.hpp"

namespace gamma2 {
namespace {

TEST(IsoProfile, SquareProfileShape) {
  const IsoProfile sq = square_iso_profile();
  EXPECT_NEAR(sq(0.1), std::sqrt(0.1 * M_PI), 1e-15);
  EXPECT_EQ(sq(0.4), 1.0);
  EXPECT_NEAR(sq(0.9), sq(0.1), 1e-15);
  ASSERT_EQ(sq.kinks().size(), 2u);
  EXPECT_TRUE(sq.is_kink(1.0 / M_PI));
  EXPECT_NEAR(sq.deriv_left(1.0 / M_PI), M_PI / 2.0, 1e-12);
  EXPECT_EQ(sq.deriv_right(1.0 / M_PI), 0.0);
}

TEST(VolumeFunction, SquareHalfWidth) {
  const auto dom = solve_volume_function(square_iso_profile());
  EXPECT_NEAR(dom.T(), 0.5 + 1.0 / M_PI, 1e-6);
  EXPECT_NEAR(dom.T_quadrature(), 0.5 + 1.0 / M_PI, 1e-10);
  EXPECT_NEAR(half_width_by_quadrature(square_iso_profile()), 0.5 + 1.0 / M_PI, 1e-12);
  EXPECT_LT(dom.symmetry_defect(), 1e-10);
}

TEST(VolumeFunction, PowerProfileHalfWidth) {
  // int_0^{1/2} dv / (c sqrt(v)) = sqrt(2) / c.
  const auto dom = solve_volume_function(power_iso_profile(1.3, 2));
  EXPECT_NEAR(dom.T(), std::sqrt(2.0) / 1.3, 1e-9);
}

TEST(VolumeFunction, SlabIsTheUnitInterval) {
  const auto dom = solve_volume_function(slab_iso_profile());
  EXPECT_NEAR(dom.T(), 0.5, 1e-12);
  EXPECT_NEAR(dom.V(0.1), 0.6, 1e-12);
}

TEST(VolumeFunction, VolumeDerivativeIsTheProfile) {
  const auto m = build_modified_profile(square_iso_profile(), 0.4);
  const auto dom = solve_volume_function(m);
  for (double t : {-1.2, -0.5, 0.0, 0.3, 1.1}) {
    const double h = 1e-5;
    EXPECT_NEAR((dom.V(t + h) - dom.V(t - h)) / (2 * h), dom.eta(t), 1e-6) << t;
    EXPECT_NEAR(dom.inverse(dom.V(t)), t, 1e-9);
  }
  EXPECT_EQ(dom.V(-dom.T() - 1.0), 0.0);
  EXPECT_EQ(dom.V(dom.T() + 1.0), 1.0);
  EXPECT_THROW(perimeter_volume_pair(dom, dom.T() + 0.1), InvalidArgument);
}

class ModifiedProfileTest : public ::testing::TestWithParam<double> {};

TEST_P(ModifiedProfileTest, MinorantTouchingToFirstOrder) {
  const IsoProfile sq = square_iso_profile();
  const double vm = GetParam();
  const auto m = build_modified_profile(sq, vm);
  EXPECT_EQ(m(vm), sq(vm));
  EXPECT_EQ(m.deriv(vm), sq.deriv(vm));
  for (int i = 1; i < 4000; ++i) {
    const double v = i / 4000.0;
    EXPECT_LE(m(v), sq(v)) << v;
    EXPECT_GT(m(v), 0.0) << v;
    if (v > 0.01 && v < 0.99) {
      const double h = 1e-7;
      EXPECT_NEAR((m(v + h) - m(v - h)) / (2 * h), m.deriv(v), 1e-6) << v;
    }
  }
  const auto dom = solve_volume_function(m);
  const Weight w = rearranged_weight(dom, m);
  EXPECT_NEAR(w.total(), 1.0, 1e-9);
  EXPECT_EQ(w.tail.n1, 2);
  EXPECT_EQ(w.tail.n2, 2);
}

INSTANTIATE_TEST_SUITE_P(Masses, ModifiedProfileTest, ::testing::Values(0.2, 0.4, 0.5, 0.7));

TEST(ModifiedProfile, KinkIsRejected) {
  EXPECT_THROW(build_modified_profile(square_iso_profile(), 1.0 / M_PI), KinkAtMass);
}

TEST(LevelSet, QuarterDiskDerivativeAtInterface) {
  const auto lw = levelset_weight(CanonicalSet::parse("quarter_disk", 0.5));
  EXPECT_NEAR(lw.weight.deriv(0.0), M_PI / 2.0, 1e-14);
  EXPECT_NEAR(lw.weight(0.0), M_PI / 4.0, 1e-15);
  EXPECT_NEAR(lw.weight.total(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(lw.kappa, 2.0);
  EXPECT_EQ(lw.n, 2);
}

TEST(LevelSet, MeasuresOfTheDomains) {
  EXPECT_NEAR(levelset_weight(CanonicalSet::parse("strip", 0.3)).weight.total(), 1.0, 1e-12);
  EXPECT_NEAR(levelset_weight(CanonicalSet::parse("disk", 0.3)).weight.total(), 1.0, 1e-12);
  const auto ball = levelset_weight(CanonicalSet::parse("ball", 0.5));
  EXPECT_NEAR(ball.weight.total(), 4.0 * M_PI / 3.0, 1e-10);
  EXPECT_EQ(ball.weight.tail.n1, 3);
}

TEST(LevelSet, InvalidSetsAreRejected) {
  EXPECT_THROW(CanonicalSet::parse("triangle", 0.5), UnsupportedSet);
  EXPECT_THROW(levelset_weight(CanonicalSet::parse("disk", 0.6)), UnsupportedSet);
  EXPECT_THROW(levelset_weight(CanonicalSet::parse("strip", 1.0)), UnsupportedSet);
}

TEST(UnitBall, Measures) {
  EXPECT_NEAR(unit_ball_measure(1), 2.0, 1e-15);
  EXPECT_NEAR(unit_ball_measure(2), M_PI, 1e-15);
  EXPECT_NEAR(unit_ball_measure(3), 4.0 * M_PI / 3.0, 1e-14);
}

}  // namespace
}  // namespace gamma2
