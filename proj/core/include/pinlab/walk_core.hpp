#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pinlab/lattice_box.hpp"

namespace pinlab {

class RandomStream;

/// A symmetric, finite-range, irreducible jump distribution on Z^d.
class JumpKernel {
public:
  struct Jump {
    Site displacement;
    double probability = 0.0;
  };

  /// Nearest-neighbour walk, p(+-e_i) = 1/(2d).
  static JumpKernel simple(int dimension);
  /// Validates normalization, symmetry, p(0) = 0 and irreducibility.
  static JumpKernel from_pmf(int dimension, std::vector<Jump> jumps);

  int dimension() const noexcept { return dimension_; }
  bool is_simple() const noexcept { return simple_; }
  std::span<const Jump> jumps() const noexcept { return jumps_; }
  /// Largest |x|_inf in the support.
  int range() const noexcept { return range_; }
  double probability(const Site& displacement) const;
  /// Determinant of the covariance matrix of one jump.
  double covariance_determinant() const;

  /// Draws one displacement.
  const Site& sample(RandomStream& rng) const;

  /// -sum_x p(x) log(2 p(x)); equals log d for the simple walk.
  double entropy_constant() const;

private:
  JumpKernel(int dimension, std::vector<Jump> jumps, bool simple);

  int dimension_;
  std::vector<Jump> jumps_;
  std::vector<double> cumulative_;
  bool simple_;
  int range_;
};

struct DisorderJump {
  double time = 0.0;
  Site displacement;
};

/// One quenched realization of the defect walk Y on [0, horizon]. Y is
/// right-continuous: a jump at time s is already included in Y_s.
class DisorderPath {
public:
  DisorderPath(int dimension, double rate, double horizon, std::uint64_t seed,
               std::vector<DisorderJump> jumps);

  /// Y identically zero on [0, horizon].
  static DisorderPath constant(int dimension, double horizon);

  int dimension() const noexcept { return dimension_; }
  double rate() const noexcept { return rate_; }
  double horizon() const noexcept { return horizon_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const DisorderJump> jumps() const noexcept { return jumps_; }

  /// Number of jumps with time <= s.
  std::size_t jump_count(double s) const noexcept;
  /// Y_s.
  Site position(double s) const;
  /// max over s of |Y_s|_inf.
  int max_excursion() const noexcept;

  std::string to_json() const;
  static DisorderPath from_json(const std::string& text);

  friend bool operator==(const DisorderPath&, const DisorderPath&);

private:
  int dimension_;
  double rate_;
  double horizon_;
  std::uint64_t seed_;
  std::vector<DisorderJump> jumps_;
};

bool operator==(const DisorderPath& a, const DisorderPath& b);

struct GreenResult {
  double value = 0.0;
  double error_bound = 0.0;
  int dimension = 0;
};

struct LaplaceValue {
  double value = 0.0;       // \int_0^\infty e^{-bt} p_t(0) dt
  double derivative = 0.0;  // d/db of the above
};

/// Values of a probability distribution on the box |x|_inf <= radius.
struct BoxDistribution {
  int dimension = 0;
  int radius = 0;
  std::vector<double> values;  // row-major, side 2*radius+1

  double at(const Site& site) const;
  double total() const;
};

/// p_t(x) = P(X_t = x) for the rate-1 walk with the given kernel.
double transition_probability(const JumpKernel& kernel, double t, const Site& x);

/// p_t(0).
double return_probability(const JumpKernel& kernel, double t);

/// p_t(.) on a box; the mass outside the box is simply not represented.
BoxDistribution transition_distribution(const JumpKernel& kernel, double t, int radius);

/// Laplace transform of t -> p_t(0), precomputed once per kernel so it can be
/// evaluated cheaply at many b (the annealed root finder calls it often).
///
/// Simple walks: adaptive Gauss-Legendre panels on [0, T*] plus the analytic
/// integral of the large-t asymptotic expansion of p_t(0) beyond T*, which
/// resolves the sqrt(b) and b log b behaviour at small b exactly.
/// Other kernels: the discrete-time return sequence u_k = P(S_k = 0) for
/// k <= K (weights (1+b)^{-(k+1)}) plus a fitted local-CLT tail.
class ReturnTransform {
public:
  explicit ReturnTransform(const JumpKernel& kernel, double tolerance = 1e-9);
  ~ReturnTransform();
  ReturnTransform(ReturnTransform&&) noexcept;
  ReturnTransform& operator=(ReturnTransform&&) noexcept;

  int dimension() const noexcept;
  /// Throws Divergent when b = 0 and the walk is recurrent.
  LaplaceValue laplace(double b) const;
  /// G = laplace(0).value, with an error bound.
  GreenResult green() const;
  /// Whether G is finite (d >= 3).
  bool transient() const noexcept;
  double error_bound() const noexcept;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// G = \int_0^\infty p_t(0) dt. Throws Divergent for d <= 2.
GreenResult green_function(const JumpKernel& kernel, double tolerance = 1e-9);

/// (p^(b), p^'(b)). Throws Divergent at b = 0 for d <= 2, and reports an
/// infinite derivative at b = 0 for d <= 4.
LaplaceValue laplace_p0(const JumpKernel& kernel, double b);

/// Y on [0, t] with Poisson(rho) jump times and kernel displacements.
/// Deterministic in (seed, task); the path for a shorter horizon is a prefix
/// of the path for a longer one.
DisorderPath sample_disorder(const JumpKernel& kernel, double rho, double t, std::uint64_t seed,
                             std::uint64_t task = 0);

/// dP^{rho} / dP^{rho'} of the path restricted to [0, L].
double disorder_likelihood_ratio(const DisorderPath& path, double rho, double rho_prime, double L);

}  // namespace pinlab
