#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Small numerical toolbox shared by the modules: fixed Gauss-Legendre rules,
// generalized exponential integrals for algebraic tails, least squares and
// running moments.
namespace pinlab::num {

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, cached per n.
const QuadratureRule& gauss_legendre(std::size_t n);

/// Generalized exponential integral E_p(x) = \int_1^\infty e^{-xu} u^{-p} du
/// for real p and x >= 0 (x = 0 requires p > 1).
double expint_e(double p, double x);

/// \int_T^\infty e^{-b t} t^{-s} dt for b >= 0, T > 0 (b = 0 requires s > 1).
double power_exp_tail(double s, double b, double T);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y);

/// Welford accumulator for mean and standard error.
class RunningStats {
public:
  void add(double value) noexcept;
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;
  double stderr_of_mean() const noexcept;

private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// log of the Poisson pmf.
double log_poisson_pmf(std::size_t k, double mean);

}  // namespace pinlab::num
