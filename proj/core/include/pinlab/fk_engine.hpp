#pragma once

#include <cstdint>
#include <vector>

#include "pinlab/lattice_box.hpp"
#include "pinlab/walk_core.hpp"

namespace pinlab {

struct SolverOptions {
  /// 0 selects ceil(4 sqrt(t)) + 4 + max |Y|_inf.
  int initial_radius = 0;
  /// Largest number of sites per axis; 0 selects a per-dimension default.
  int max_sites_per_axis = 0;
  /// Sup-norm remainder allowed per uniformization step.
  double series_tolerance = 1e-12;
  /// 0 selects 1 / (1 + |beta|).
  double max_step = 0.0;
  /// Target for log Z(R) - log Z(R/2).
  double truncation_tolerance = 1e-6;
  /// Finite-difference step in beta for mean_local_time.
  double delta_beta = 1e-4;
};

/// Per-axis site cap used when SolverOptions::max_sites_per_axis is 0.
int default_max_sites_per_axis(int dimension) noexcept;

struct PartitionResult {
  double log_z = 0.0;
  double beta = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  int radius = 0;
  /// log Z at the final radius minus log Z at half of it.
  double certificate = 0.0;
  bool pinned = true;
};

/// Feynman-Kac state in the relative frame W = X - Y on a box with absorbing
/// boundary. The represented weights are exp(log_scale()) * weights().
class RelativeField {
public:
  RelativeField(const JumpKernel& kernel, int radius, double beta, double series_tolerance = 1e-12);

  /// Applies exp(s (Q + beta e0 e0^T)) by uniformization, in steps of at most
  /// max_step.
  void evolve(double s, double max_step);
  /// Y jumps by dy: W -> W - dy. Mass pushed outside the box is dropped.
  void shift(const Site& dy);

  double log_scale() const noexcept { return log_scale_; }
  double time() const noexcept { return time_; }
  const LatticeBox& box() const noexcept { return box_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// log of the weight at W = 0.
  double log_origin() const;
  /// log of the total weight.
  double log_total() const;

private:
  void step(double s);
  void apply(const std::vector<double>& in, std::vector<double>& out) const;
  void renormalize();

  const JumpKernel& kernel_;
  LatticeBox box_;
  double beta_;
  double shift_c_;
  double norm_bound_;
  double series_tolerance_;
  std::vector<std::ptrdiff_t> offsets_;
  std::vector<double> probs_;
  std::vector<double> weights_;
  std::vector<double> term_;
  std::vector<double> scratch_;
  double log_scale_ = 0.0;
  double time_ = 0.0;
};

/// log Z on [t1, t2] at a fixed radius, without certification.
double log_partition_at_radius(const JumpKernel& kernel, const DisorderPath& y, double beta,
                               double t1, double t2, int radius, bool pinned,
                               const SolverOptions& opts = {});

/// log E^X[e^{beta L_t(X,Y)} 1{X_t = Y_t}], a certified lower bound.
PartitionResult pinned_log_partition(const JumpKernel& kernel, const DisorderPath& y, double beta,
                                     double t, const SolverOptions& opts = {});

/// log E^X[e^{beta L_t(X,Y)}].
PartitionResult free_log_partition(const JumpKernel& kernel, const DisorderPath& y, double beta,
                                   double t, const SolverOptions& opts = {});

/// Pinned partition function of the path shifted to start at t1.
PartitionResult interval_log_partition(const JumpKernel& kernel, const DisorderPath& y,
                                       double beta, double t1, double t2,
                                       const SolverOptions& opts = {});

/// d/dbeta log Z^{pin} = E[L_t] under the pinned polymer measure.
double mean_local_time(const JumpKernel& kernel, const DisorderPath& y, double beta, double t,
                       const SolverOptions& opts = {});

}  // namespace pinlab
