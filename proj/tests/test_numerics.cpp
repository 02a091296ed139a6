#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pinlab/error.hpp"
#include "pinlab/numerics.hpp"

namespace pinlab {
using namespace num;
namespace {

// E_p(x) with u = 1 + e^s: a smooth integrand on the whole line, where the
// trapezoid rule converges geometrically.
double expint_oracle(double p, double x) {
  const double h = 2e-3;
  double sum = 0.0;
  for (double s = -60.0; s < 60.0; s += h) {
    const double v = std::exp(s);
    const double w = std::exp(-x * (1.0 + v) - p * std::log1p(v) + s);
    sum += w;
    if (s > 0 && w < 1e-300) break;
  }
  return sum * h;
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (std::size_t n : {2u, 5u, 14u, 20u}) {
    const auto& rule = gauss_legendre(n);
    ASSERT_EQ(rule.nodes.size(), n);
    for (std::size_t k = 0; k < 2 * n; ++k) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], double(k));
      const double exact = k % 2 ? 0.0 : 2.0 / double(k + 1);
      EXPECT_NEAR(sum, exact, 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

TEST(ExpInt, AgainstIntegralAndClosedForms) {
  for (double p : {-0.5, 0.5, 1.0, 1.5, 2.5, 4.0}) {
    for (double x : {0.01, 0.3, 1.0, 4.0, 20.0}) {
      const double expect = expint_oracle(p, x);
      EXPECT_NEAR(expint_e(p, x), expect, 1e-12 * expect + 1e-300) << "p=" << p << " x=" << x;
    }
  }
  EXPECT_NEAR(expint_e(2.5, 0.0), 1.0 / 1.5, 1e-15);
  EXPECT_NEAR(expint_e(0.0, 2.0), std::exp(-2.0) / 2.0, 1e-15);
  EXPECT_NEAR(expint_e(1.0, 1.0), -std::expint(-1.0), 1e-14);
}

TEST(ExpInt, PowerExpTailScaling) {
  for (double s : {1.5, 2.5, 3.5}) {
    EXPECT_NEAR(power_exp_tail(s, 0.2, 10.0), std::pow(10.0, 1.0 - s) * expint_e(s, 2.0), 1e-15);
    EXPECT_NEAR(power_exp_tail(s, 0.0, 10.0), std::pow(10.0, 1.0 - s) / (s - 1.0), 1e-15);
  }
}

TEST(LeastSquares, RecoversExactLine) {
  const std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(1.5 - 2.0 * v);
  const auto fit = least_squares(x, y);
  EXPECT_NEAR(fit.slope, -2.0, 1e-14);
  EXPECT_NEAR(fit.intercept, 1.5, 1e-14);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-14);
  EXPECT_EQ(fit.points, 5u);
}

TEST(LeastSquares, RejectsDegenerateInput) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(least_squares(one, one), Error);
  const std::vector<double> x{2, 2, 2}, y{1, 2, 3};
  EXPECT_THROW(least_squares(x, y), Error);
}

TEST(RunningStats, MatchesTwoPassFormulas) {
  const std::vector<double> v{1.0, 4.0, 2.5, -3.0, 10.0, 0.5};
  RunningStats s;
  for (double x : v) s.add(x);
  double mean = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= v.size() - 1;
  EXPECT_EQ(s.count(), v.size());
  EXPECT_NEAR(s.mean(), mean, 1e-14);
  EXPECT_NEAR(s.variance(), var, 1e-12);
  EXPECT_NEAR(s.stderr_of_mean(), std::sqrt(var / v.size()), 1e-12);
}

TEST(LogPoisson, MatchesDirectProduct) {
  const double mean = 3.7;
  double pmf = std::exp(-mean);
  for (std::size_t k = 0; k < 30; ++k) {
    EXPECT_NEAR(log_poisson_pmf(k, mean), std::log(pmf), 1e-12) << k;
    pmf *= mean / double(k + 1);
  }
}

}  // namespace
}  // namespace pinlab
