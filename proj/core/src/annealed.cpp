#include "pinlab/annealed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinlab/error.hpp"
#include "pinlab/numerics.hpp"

namespace pinlab {

AnnealedModel::AnnealedModel(const JumpKernel& kernel, double root_tolerance)
    : dimension_(kernel.dimension()), transform_(kernel),
      green_(kernel.dimension() >= 3 ? transform_.green().value : std::numeric_limits<double>::infinity()),
      root_tolerance_(root_tolerance) {
  require(root_tolerance > 0.0, "root tolerance must be positive");
}

double AnnealedModel::solve(double beta, double& residual) const {
  residual = 0.0;
  if (beta <= 0.0) return 0.0;
  if (dimension_ >= 3 && beta * green_ <= 1.0) return 0.0;

  // f(u) = beta p^(u^2) - 1 is decreasing in u = sqrt(b); u = 0 is a lower
  // bracket (f > 0) and b <= beta - 1 + 1/beta an upper one.
  const auto f = [&](double u) { return beta * transform_.laplace(u * u).value - 1.0; };
  double lo = 0.0;
  double hi = std::sqrt(beta - 1.0 + 1.0 / beta);
  double f_hi = f(hi);
  for (int i = 0; f_hi > 0.0 && i < 60; ++i) {
    lo = hi;
    hi *= 2.0;
    f_hi = f(hi);
  }
  if (f_hi > 0.0) fail(ErrorKind::QuadratureFailure, "could not bracket the free-energy root");
  double f_lo = lo > 0.0 ? f(lo) : std::numeric_limits<double>::infinity();

  double u = 0.5 * (lo + hi);
  double fu = f(u);
  for (int iter = 0; iter < 300; ++iter) {
    if (std::abs(fu) < root_tolerance_) break;
    if (fu > 0.0) {
      lo = u;
      f_lo = fu;
    } else {
      hi = u;
      f_hi = fu;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    // Secant on the bracket, falling back to bisection when it lands outside
    // the middle 90% or the lower end is still unbounded.
    double next = 0.5 * (lo + hi);
    if (std::isfinite(f_lo)) {
      const double secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
      const double margin = 0.05 * (hi - lo);
      if (secant > lo + margin && secant < hi - margin) next = secant;
    }
    u = next;
    fu = f(u);
  }
  residual = fu;
  return u * u;
}

AnnealedSolution AnnealedModel::pure_free_energy(double beta) const {
  require(std::isfinite(beta), "beta must be finite");
  AnnealedSolution s;
  s.beta = beta;
  s.b = solve(beta, s.residual);
  s.lambda = 1.0 - beta + s.b;
  if (s.b > 0.0) {
    s.defect_mass = 0.0;
    const auto v = transform_.laplace(s.b);
    s.contact_fraction = -v.value * v.value / v.derivative;
    s.contact_defined = true;
  } else {
    s.defect_mass = 1.0 - excursion_laplace(0.0) / s.lambda;
    if (dimension_ >= 5) {
      const auto v = transform_.laplace(0.0);
      s.contact_fraction = s.defect_mass > 1e-12 ? 0.0 : -v.value * v.value / v.derivative;
      s.contact_defined = true;
    }
  }
  return s;
}

double AnnealedModel::critical_point(double rho) const {
  require(rho >= 0.0, "rho must be nonnegative");
  return dimension_ >= 3 ? (1.0 + rho) / green_ : 0.0;
}

double AnnealedModel::annealed_free_energy(double beta, double rho) const {
  require(rho >= 0.0, "rho must be nonnegative");
  return (1.0 + rho) * pure_free_energy(beta / (1.0 + rho)).b;
}

double AnnealedModel::contact_fraction(double beta) const {
  const auto s = pure_free_energy(beta);
  if (!s.contact_defined)
    fail(ErrorKind::NotApplicable, "contact fraction at b = 0 needs a finite mean excursion (d >= 5)");
  return s.contact_fraction;
}

double AnnealedModel::excursion_laplace(double b) const {
  require(b >= 0.0, "excursion_laplace requires b >= 0");
  if (b == 0.0 && dimension_ <= 2) return 1.0;
  return (1.0 + b) - 1.0 / transform_.laplace(b).value;
}

ExponentFit AnnealedModel::onset_exponent_fit(double rho, const OnsetWindow& window) const {
  require(window.lo > 0.0 && window.hi > window.lo, "onset window must satisfy 0 < lo < hi");
  const double beta_c = critical_point(rho);
  ExponentFit fit;
  fit.dimension = dimension_;
  fit.window_lo = window.lo;
  fit.window_hi = window.hi;
  std::vector<double> lx;
  std::vector<double> ly;
  const int n = std::max(window.points, 2);
  for (int i = 0; i < n; ++i) {
    const double delta = window.lo * std::pow(window.hi / window.lo, static_cast<double>(i) / (n - 1));
    const double f = annealed_free_energy(beta_c + delta, rho);
    if (!(f > 0.0)) continue;
    fit.delta.push_back(delta);
    fit.free_energy.push_back(f);
    lx.push_back(std::log(delta));
    ly.push_back(std::log(f));
  }
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 8) fail(ErrorKind::NotApplicable, "onset fit needs at least 8 points with F > 0");
  const auto line = num::least_squares(lx, ly);
  fit.exponent = line.slope;
  fit.amplitude = std::exp(line.intercept);
  fit.r_squared = line.r_squared;
  if (dimension_ == 4) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < fit.delta.size(); ++i) {
      const double r = fit.free_energy[i] * std::abs(std::log(fit.delta[i])) / fit.delta[i];
      fit.log_ratio.push_back(r);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      sum += r;
    }
    fit.log_ratio_spread = (hi - lo) / (sum / static_cast<double>(fit.log_ratio.size()));
  }
  return fit;
}

AnnealedSolution pure_free_energy(const JumpKernel& kernel, double beta) {
  return AnnealedModel(kernel).pure_free_energy(beta);
}

double critical_point(const JumpKernel& kernel, double rho) {
  return AnnealedModel(kernel).critical_point(rho);
}

double annealed_free_energy(const JumpKernel& kernel, double beta, double rho) {
  return AnnealedModel(kernel).annealed_free_energy(beta, rho);
}

double contact_fraction(const JumpKernel& kernel, double beta) {
  return AnnealedModel(kernel).contact_fraction(beta);
}

double excursion_laplace(const JumpKernel& kernel, double b) {
  return AnnealedModel(kernel).excursion_laplace(b);
}

ExponentFit onset_exponent_fit(const JumpKernel& kernel, double rho, const OnsetWindow& window) {
  return AnnealedModel(kernel).onset_exponent_fit(rho, window);
}

double smoothing_envelope(int dimension, double rho, double beta, double beta_c_ref, double green) {
  require(rho > 0.0, "smoothing envelope requires rho > 0");
  require(dimension >= 3, "smoothing envelope requires d >= 3");
  const double gap = std::max(0.0, beta - beta_c_ref);
  return 3.0 * dimension * green * green / rho * gap * gap;
}

}  // namespace pinlab
