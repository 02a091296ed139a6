#include "pinlab/bessel.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

#include "pinlab/error.hpp"

namespace pinlab {

namespace {

constexpr double kEps = 1e-17;

double series_scaled(int n, double x) {
  const double y = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= y / (static_cast<double>(k) * (n + k));
    sum += term;
    if (term < kEps * sum) break;
  }
  const double log_lead = n * std::log(0.5 * x) - std::lgamma(n + 1.0) - x;
  return std::exp(log_lead + std::log(sum));
}

// Hankel expansion of e^{-x} I_n(x); returns NaN when the series does not reach
// full precision before its terms start growing.
double asymptotic_scaled(int n, double x) {
  const double mu = 4.0 * n * n;
  double term = 1.0;
  double sum = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 400; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    const double magnitude = std::abs(term);
    if (magnitude > previous) return std::numeric_limits<double>::quiet_NaN();
    sum += term;
    if (magnitude < kEps * std::abs(sum)) return sum / std::sqrt(2.0 * std::numbers::pi * x);
    previous = magnitude;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// I_n(x) / I_{n-1}(x) by the modified Lentz continued fraction.
double ratio_continued_fraction(int n, double x) {
  constexpr double tiny = 1e-300;
  double h = tiny;
  double c = h;
  double d = 0.0;
  for (int j = 1; j < 10'000'000; ++j) {
    const double b = 2.0 * (n + j - 1) / x;
    d = b + d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = b + 1.0 / c;
    if (c == 0.0) c = tiny;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  fail(ErrorKind::QuadratureFailure, "Bessel ratio continued fraction did not converge");
}

}  // namespace

double bessel_i_scaled(int order, double x) {
  require(x >= 0.0 && std::isfinite(x), "bessel_i_scaled requires finite x >= 0");
  const int n = std::abs(order);
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x <= kBesselSeriesSwitch) return series_scaled(n, x);

  if (4.0 * n * n < x) {
    const double direct = asymptotic_scaled(n, x);
    if (!std::isnan(direct)) return direct;
  }
  const double i0 = asymptotic_scaled(0, x);
  if (n == 0) return i0;
  double ratio = ratio_continued_fraction(n, x);
  double log_product = std::log(ratio);
  for (int j = n - 1; j >= 1; --j) {
    ratio = 1.0 / (2.0 * j / x + ratio);
    log_product += std::log(ratio);
  }
  return i0 * std::exp(log_product);
}

}  // namespace pinlab
