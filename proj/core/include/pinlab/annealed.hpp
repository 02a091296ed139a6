#pragma once

#include <memory>
#include <vector>

#include "pinlab/walk_core.hpp"

namespace pinlab {

struct AnnealedSolution {
  double beta = 0.0;
  double b = 0.0;          // F(beta)
  double lambda = 0.0;     // 1 - beta + b
  double contact_fraction = 0.0;
  bool contact_defined = false;
  double defect_mass = 0.0;
  double residual = 0.0;   // beta * p^(b) - 1, or 0 when b = 0
};

struct OnsetWindow {
  double lo = 1e-3;  // smallest beta - beta_c
  double hi = 1e-2;
  int points = 12;
};

struct ExponentFit {
  int dimension = 0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double exponent = 0.0;
  double amplitude = 0.0;
  double r_squared = 0.0;
  int points = 0;
  std::vector<double> delta;
  std::vector<double> free_energy;
  /// d = 4: F |log delta| / delta per point and its relative spread
  /// (max - min) / mean.
  std::vector<double> log_ratio;
  double log_ratio_spread = 0.0;
};

/// The pure model F(beta) and the quantities derived from its renewal
/// structure. Holds one Laplace-transform table, so repeated queries are cheap.
class AnnealedModel {
public:
  explicit AnnealedModel(const JumpKernel& kernel, double root_tolerance = 1e-12);

  int dimension() const noexcept { return dimension_; }
  const ReturnTransform& transform() const noexcept { return transform_; }
  /// G, or +infinity when d <= 2.
  double green() const noexcept { return green_; }

  AnnealedSolution pure_free_energy(double beta) const;
  /// (1 + rho) / G, or 0 for d <= 2.
  double critical_point(double rho) const;
  /// (1 + rho) F(beta / (1 + rho)).
  double annealed_free_energy(double beta, double rho) const;
  /// dF/dbeta = -p^(b)^2 / p^'(b). NotApplicable at b = 0 for d <= 4.
  double contact_fraction(double beta) const;
  /// K^(b) = (1 + b) - 1 / p^(b).
  double excursion_laplace(double b) const;
  ExponentFit onset_exponent_fit(double rho, const OnsetWindow& window = {}) const;

private:
  double solve(double beta, double& residual) const;

  int dimension_;
  ReturnTransform transform_;
  double green_;
  double root_tolerance_;
};

AnnealedSolution pure_free_energy(const JumpKernel& kernel, double beta);
double critical_point(const JumpKernel& kernel, double rho);
double annealed_free_energy(const JumpKernel& kernel, double beta, double rho);
double contact_fraction(const JumpKernel& kernel, double beta);
double excursion_laplace(const JumpKernel& kernel, double b);
ExponentFit onset_exponent_fit(const JumpKernel& kernel, double rho, const OnsetWindow& window = {});

/// (3 d G^2 / rho) (beta - beta_c_ref)_+^2.
double smoothing_envelope(int dimension, double rho, double beta, double beta_c_ref, double green);

}  // namespace pinlab
