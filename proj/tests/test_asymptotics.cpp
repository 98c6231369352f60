#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "gamma2/asymptotics.hpp"

namespace gamma2 {
namespace {

TEST(Prediction, QuarticCurvatureFormula) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  for (int n : {2, 3})
    for (double kappa : {0.5, 1.0, 2.0}) {
      const auto pr = second_order_prediction(p, prof, n, kappa, 1.0);
      EXPECT_NEAR(pr.second_order, -(n - 1) * (n - 1) * kappa * kappa / 9.0, 1e-10) << n << " " << kappa;
    }
}

TEST(Prediction, SymmetricSubquadraticIsExactlyZero) {
  for (double q : {0.3, 0.5, 0.7}) {
    const Potential p = Potential::subquadratic(q);
    const Profile prof = solve_profile(p);
    const auto pr = second_order_prediction(p, prof, 2, 1.0, 1.0);
    EXPECT_EQ(pr.second_order, 0.0) << q;
    EXPECT_EQ(pr.bulk_term, 0.0);
  }
}

TEST(Prediction, OneDimensionalSkewWeight) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  const Weight w = linear_weight(1.0, 1.0, -1.0, 1.0);
  const auto pr = second_order_prediction_1d(w, p, prof, 0.0);
  EXPECT_NEAR(pr.second_order, -2.0 / 9.0, 1e-10);
  EXPECT_NEAR(pr.lambda0, 2.0 * std::sqrt(2.0) / 3.0, 1e-12);
  EXPECT_NEAR(pr.first_order, 4.0 * std::sqrt(2.0) / 3.0, 1e-12);
  EXPECT_NEAR(limiting_multiplier(w, p, 0.0, pr.c_w), pr.lambda0, 1e-15);
}

TEST(Prediction, FlatWeightGivesZero) {
  const Potential p = Potential::skewed();
  const Profile prof = solve_profile(p);
  const auto pr = second_order_prediction_1d(constant_weight(1.0, -1.0, 1.0), p, prof, 0.0);
  EXPECT_EQ(pr.second_order, 0.0);
}

TEST(Sweep, GeometricEpsList) {
  const auto e = geometric_eps();
  ASSERT_EQ(e.size(), 7u);
  EXPECT_DOUBLE_EQ(e.front(), 0.1);
  EXPECT_NEAR(e.back(), 1e-3, 1e-18);
  EXPECT_NEAR(e[1] / e[0], std::pow(0.01, 1.0 / 6.0), 1e-14);
}

TEST(Sweep, RejectsIncreasingEps) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  const Weight w = linear_weight(1.0, 1.0, -1.0, 1.0);
  EXPECT_THROW(verify_expansion_1d(w, p, prof, 1.0, {0.01, 0.1}, SweepMode::recovery), InvalidArgument);
}

TEST(Sweep, RecoveryModeMatchesTheQuarticPrediction) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  const Weight w = linear_weight(1.0, 1.0, -1.0, 1.0);
  const auto rep = verify_expansion_1d(w, p, prof, 1.0, geometric_eps(), SweepMode::recovery);
  ASSERT_TRUE(rep.has_fit);
  EXPECT_LT(rep.gap, 0.02);
  for (const auto& row : rep.rows) {
    EXPECT_TRUE(row.ok) << row.error;
    EXPECT_LT(std::abs(row.mass_residual), 1e-12);
  }
  // E2 is Cauchy along the sweep.
  for (std::size_t i = 2; i < rep.rows.size(); ++i)
    EXPECT_LT(std::abs(rep.rows[i].excess - rep.rows[i - 1].excess),
              std::abs(rep.rows[i - 1].excess - rep.rows[i - 2].excess));
}

TEST(Sweep, UnresolvedEpsilonIsReportedPerRow) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  const Weight w = linear_weight(1.0, 1.0, -1.0, 1.0);
  SweepOptions opt;
  opt.grid.fine_spacing_factor = 40.0;
  opt.grid.max_spacing = 0.2;
  const auto rep = verify_expansion_1d(w, p, prof, 1.0, {0.1, 0.05, 0.02}, SweepMode::minimize, opt);
  EXPECT_FALSE(rep.has_fit);
  EXPECT_FALSE(rep.within(1.0));
  for (const auto& row : rep.rows) {
    EXPECT_FALSE(row.ok);
    EXPECT_NE(row.error.find("UnresolvedEpsilon"), std::string::npos) << row.error;
  }
}

TEST(Sweep, QuarterDiskThroughTheReduction) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  const auto rep = verify_expansion_nd(CanonicalSet::parse("quarter_disk", 0.5), p, prof, geometric_eps());
  EXPECT_NEAR(rep.prediction.second_order, -4.0 / 9.0, 1e-10);
  ASSERT_TRUE(rep.prediction_1d.has_value());
  EXPECT_NEAR(rep.prediction_1d->second_order, -4.0 / 9.0, 1e-8);
  EXPECT_LT(rep.gap, 0.05);
}

TEST(Sweep, SignOfTheExcessForSymmetricWells) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  const Weight w = linear_weight(1.0, -0.5, -1.0, 1.0);
  const auto rep = verify_expansion_1d(w, p, prof, 1.0, geometric_eps(), SweepMode::recovery);
  EXPECT_LT(rep.extrapolated_limit, 0.0);
}

TEST(GridCheck, PlanarGridAgreesWithTheReduction) {
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  const auto g = grid_energy_check(CanonicalSet::parse("quarter_disk", 0.5), p, prof, 0.05, 400);
  EXPECT_LT(g.relative_difference, 0.01);
}

}  // namespace
}  // namespace gamma2
