#include "pinlab/numerics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "pinlab/error.hpp"

namespace pinlab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Divergent: return "Divergent";
    case ErrorKind::AbsorbedAll: return "AbsorbedAll";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::RejectionStall: return "RejectionStall";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace pinlab

namespace pinlab::num {

namespace {

QuadratureRule build_gauss_legendre(std::size_t n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

bool is_integer(double p) { return p == std::floor(p); }

double digamma_integer(int n) {
  double psi = -std::numbers::egamma;
  for (int k = 1; k < n; ++k) psi += 1.0 / k;
  return psi;
}

}  // namespace

const QuadratureRule& gauss_legendre(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

double expint_e(double p, double x) {
  constexpr double eps = 1e-16;
  require(x >= 0.0, "expint_e requires x >= 0");
  if (x == 0.0) {
    if (p <= 1.0) fail(ErrorKind::Divergent, "E_p(0) diverges for p <= 1");
    return 1.0 / (p - 1.0);
  }
  if (x > 1.0) {
    // Modified Lentz evaluation of the continued fraction.
    double b = x + p;
    double c = 1.0 / std::numeric_limits<double>::min();
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
      const double an = -i * (p - 1.0 + i);
      b += 2.0;
      d = 1.0 / (an * d + b);
      c = b + an / c;
      const double del = c * d;
      h *= del;
      if (std::abs(del - 1.0) < eps) return h * std::exp(-x);
    }
    fail(ErrorKind::QuadratureFailure, "E_p continued fraction did not converge");
  }
  if (is_integer(p)) {
    const int n = static_cast<int>(p);
    if (n <= 0) {
      // E_{-m}(x) = Gamma(m+1, x) / x^{m+1}; upward recursion from E_0.
      double value = std::exp(-x) / x;
      for (int m = 1; m <= -n; ++m) value = (m * value + std::exp(-x)) / x;
      return value;
    }
    // Series with the digamma term (n >= 1).
    double sum = (n - 1 != 0) ? 1.0 / (n - 1) : -std::log(x) - std::numbers::egamma;
    double fact = 1.0;
    for (int i = 1; i < 1000; ++i) {
      fact *= -x / i;
      double del;
      if (i != n - 1) {
        del = -fact / (i - n + 1);
      } else {
        del = fact * (-std::log(x) + digamma_integer(n));
      }
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    return sum;
  }
  // Non-integer order: E_p(x) = x^{p-1} Gamma(1-p) - sum_k (-x)^k / (k! (1-p+k)).
  double sum = 0.0;
  double term = 1.0;
  for (int k = 0; k < 1000; ++k) {
    if (k > 0) term *= -x / k;
    const double del = term / (1.0 - p + k);
    sum += del;
    if (k > 2 && std::abs(del) < eps * std::abs(sum)) break;
  }
  return std::pow(x, p - 1.0) * std::tgamma(1.0 - p) - sum;
}

double power_exp_tail(double s, double b, double T) {
  require(T > 0.0 && b >= 0.0, "power_exp_tail requires T > 0 and b >= 0");
  return std::pow(T, 1.0 - s) * expint_e(s, b * T);
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "least_squares needs matching sizes >= 2");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0, "least_squares needs at least two distinct x values");
  LineFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

void RunningStats::add(double value) noexcept {
  ++n_;
  const double delta = value - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (value - mean_);
}

double RunningStats::variance() const noexcept {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::stderr_of_mean() const noexcept {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double log_poisson_pmf(std::size_t k, double mean) {
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

}  // namespace pinlab::num
