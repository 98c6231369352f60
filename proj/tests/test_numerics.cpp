#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "gamma2/numerics/extrapolation.hpp"
#include "gamma2/numerics/interpolation.hpp"
#include "gamma2/numerics/jet.hpp"
#include "gamma2/numerics/ode.hpp"
#include "gamma2/numerics/parallel.hpp"
#include "gamma2/numerics/quadrature.hpp"
#include "gamma2/numerics/roots.hpp"
#include "gamma2/numerics/tridiagonal.hpp"

namespace gamma2 {
namespace {

TEST(Roots, BrentFindsCubicRoot) {
  auto f = [](double x) { return x * x * x - 2.0; };
  EXPECT_NEAR(brent(f, 0.0, 2.0), std::cbrt(2.0), 1e-14);
}

TEST(Roots, BisectThenSecantPolish) {
  auto f = [](double x) { return std::cos(x) - x; };
  const double x0 = bisect(f, 0.0, 1.0, 1e-6);
  const double x = secant_polish(f, x0, x0 + 1e-7, 0.0, 1.0);
  EXPECT_NEAR(f(x), 0.0, 1e-14);
}

TEST(Roots, MissingBracketThrows) {
  auto f = [](double x) { return x * x + 1.0; };
  EXPECT_THROW(brent(f, -1.0, 1.0), NoBracket);
  EXPECT_THROW(bisect(f, -1.0, 1.0, 1e-12), NoBracket);
}

TEST(Roots, SignChangeBracketsCountsRoots) {
  auto f = [](double x) { return std::sin(x); };
  const auto br = sign_change_brackets(f, 0.5, 10.0, 200);
  EXPECT_EQ(br.size(), 3u);
}

TEST(Quadrature, EndpointSingularity) {
  const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 2.0, 1e-9);
  EXPECT_TRUE(r.converged);
}

TEST(Quadrature, BreakpointsAndReversedLimits) {
  auto f = [](double x) { return std::abs(x - 0.3); };
  const std::vector<double> br = {0.3};
  const auto r = integrate(f, 1.0, 0.0, std::span<const double>(br));
  EXPECT_NEAR(r.value, -(0.045 + 0.245), 1e-14);
}

TEST(Quadrature, GaussLegendreExactForPolynomials) {
  const GaussRule& g = gauss_legendre(5);
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], 9);
  EXPECT_NEAR(s, 0.1, 1e-15);
}

TEST(Quadrature, NonFiniteIntegrandThrows) {
  EXPECT_THROW(integrate([](double) { return NAN; }, 0.0, 1.0), NonFiniteEvaluation);
}

TEST(Ode, TanhProfileToMachineAccuracy) {
  auto f = [](double, double z) { return (1.0 - z * z) / std::sqrt(2.0); };
  const auto tr = integrate_dopri(f, 0.0, 0.0, std::sqrt(2.0), OdeOptions{});
  EXPECT_NEAR(tr.y.back(), std::tanh(1.0), 1e-12);
  EXPECT_DOUBLE_EQ(tr.t.back(), std::sqrt(2.0));
}

TEST(Ode, EventStopsIntegration) {
  auto f = [](double, double) { return 1.0; };
  auto ev = [](double, double y) { return 0.5 - y; };
  const auto tr = integrate_dopri(f, 0.0, 0.0, 10.0, OdeOptions{}, ev);
  EXPECT_TRUE(tr.event_hit);
  EXPECT_NEAR(tr.y.back(), 0.5, 1e-10);
}

TEST(Interpolation, MonotoneCubicStaysMonotone) {
  const auto h = CubicHermite::monotone({0, 1, 2, 3, 4}, {0, 0, 1, 1, 5});
  double prev = -1.0;
  for (int i = 0; i <= 400; ++i) {
    const double y = h(i / 100.0);
    EXPECT_GE(y, prev - 1e-15);
    prev = y;
  }
  EXPECT_DOUBLE_EQ(h(2.0), 1.0);
}

TEST(Interpolation, QuinticReproducesQuintic) {
  std::vector<double> x, y, d1, d2;
  for (int i = 0; i <= 4; ++i) {
    const double t = 0.5 * i;
    x.push_back(t);
    y.push_back(std::pow(t, 5));
    d1.push_back(5 * std::pow(t, 4));
    d2.push_back(20 * std::pow(t, 3));
  }
  const QuinticHermite q(x, y, d1, d2);
  EXPECT_NEAR(q(1.3), std::pow(1.3, 5), 1e-12);
  EXPECT_NEAR(q.deriv(1.3), 5 * std::pow(1.3, 4), 1e-11);
}

TEST(Jet, SecondDerivativeOfComposite) {
  const Jet x = Jet::variable(0.7);
  const Jet y = sqrt(x * x + 1.0) * exp(x);
  const double s = std::sqrt(0.49 + 1.0), e = std::exp(0.7);
  EXPECT_NEAR(y.v, s * e, 1e-15);
  EXPECT_NEAR(y.d1, e * (s + 0.7 / s), 1e-14);
  EXPECT_NEAR(y.d2, e * (s + 1.4 / s + 1.0 / (s * s * s)), 1e-13);
}

TEST(Tridiagonal, SolveInvertsMultiply) {
  Tridiagonal m;
  m.diag = {4, 4, 4, 4, 4};
  m.lower = {1, 1, 1, 1};
  m.upper = {-1, 2, -1, 2};
  const std::vector<double> x = {1, -2, 3, 0.5, -1};
  const auto sol = solve(m, m.multiply(x));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(sol[i], x[i], 1e-14);
}

TEST(Extrapolation, RecoversLimitAndExponent) {
  std::vector<double> e = {1e-1, 5e-2, 2.5e-2, 1.25e-2}, y;
  for (double x : e) y.push_back(-2.0 / 9.0 + 0.3 * std::pow(x, 1.3));
  const auto f = fit_power_law(e, y);
  EXPECT_NEAR(f.limit, -2.0 / 9.0, 1e-9);
  EXPECT_NEAR(f.exponent, 1.3, 1e-6);
}

TEST(Extrapolation, NeedsThreePoints) {
  EXPECT_THROW(fit_power_law({0.1, 0.05}, {1.0, 1.0}), InvalidArgument);
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
  std::vector<double> a(1000), b(1000);
  auto body = [](std::vector<double>& out) {
    return [&out](std::size_t i) { out[i] = std::sin(double(i)); };
  };
  parallel_for(a.size(), body(a), 1);
  parallel_for(b.size(), body(b), 4);
  EXPECT_EQ(a, b);
}

TEST(Parallel, ExceptionPropagates) {
  EXPECT_THROW(parallel_for(
                   10, [](std::size_t i) { if (i == 7) throw NoConvergence("x"); }, 3),
               NoConvergence);
}

}  // namespace
}  // namespace gamma2
