#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pinlab/fk_engine.hpp"
#include "pinlab/walk_core.hpp"

namespace pinlab {

struct ExperimentOptions {
  SolverOptions solver;
  /// 0 reads PINLAB_THREADS, then falls back to the hardware count.
  int threads = 0;
};

int resolve_threads(int requested);

/// Runs fn(0..count-1) on a bounded pool. Every index runs even if others
/// throw; the first exception (by index) is rethrown afterwards.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

struct CellStatus {
  bool ok = true;
  std::string error;
  double seconds = 0.0;
};

/// One solver call inside an experiment.
struct SolveRecord {
  std::uint64_t seed = 0;
  std::uint64_t sample = 0;
  int dimension = 0;
  double rho = 0.0;
  PartitionResult result;
  CellStatus status;
};

struct FreeEnergyCurve {
  int dimension = 0;
  double rho = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int n = 0;
  std::vector<double> t_grid;
  std::vector<double> mean;     // of (1/t) log Z
  std::vector<double> stderr_;  // across disorder samples
  std::vector<int> valid;       // samples that succeeded
  std::vector<SolveRecord> records;  // t-major, then sample
};

/// (1/t) log Z^{pin} averaged over n disorder paths. Path i is the stream
/// (seed, i) at the largest horizon, so every t uses nested prefixes.
FreeEnergyCurve quenched_fe_estimate(const JumpKernel& kernel, double beta, double rho,
                                     const std::vector<double>& t_grid, int n, std::uint64_t seed,
                                     const ExperimentOptions& opts = {});

/// Superadditive lower bound on (1/t) log Z^{pin}_{t,beta} for one path: each
/// jump of Y costs log(2 p(dY) / beta) + log(1 - (e^{-beta eps-} + e^{-beta eps+}) / 2)
/// with eps+- = beta^{-2/3} ^ half-gap; for the last jump in [0, t] the gap
/// runs to t. Reduces to -log(d beta) + ... for the simple walk.
double lowtemp_lower_bound_formula(const JumpKernel& kernel, const DisorderPath& y, double beta,
                                   double t);

/// beta - 1 - rho (log beta + H) with H = -sum p log(2p) (log d for the simple walk).
double lowtemp_prediction(const JumpKernel& kernel, double rho, double beta);

struct LowTempRow {
  double beta = 0.0;
  double measured = 0.0;  // mean (1/t) log Z
  double stderr_ = 0.0;
  double prediction = 0.0;
  double deviation = 0.0;  // measured - prediction
  /// measured + mean((kappa/t - rho)) (log beta + H): same expectation, with
  /// the jump-count fluctuation of the leading term removed.
  double measured_cv = 0.0;
  double stderr_cv = 0.0;
  double mean_lower_bound = 0.0;
  double worst_margin = 0.0;  // min over paths of solver - bound
  int violations = 0;
  int valid = 0;
};

struct LowTempReport {
  int dimension = 0;
  double rho = 0.0;
  double t = 0.0;
  int n = 0;
  double entropy_constant = 0.0;
  std::vector<LowTempRow> rows;
  std::vector<SolveRecord> records;
};

/// Solver values are compared to the per-path bound with tolerance 1e-6.
LowTempReport lowtemp_report(const JumpKernel& kernel, double rho, const std::vector<double>& betas,
                             double t, int n, std::uint64_t seed, const ExperimentOptions& opts = {});

struct SmoothingRow {
  double beta = 0.0;
  double quenched = 0.0;
  double stderr_ = 0.0;
  double annealed = 0.0;
  double envelope = 0.0;
  bool envelope_defined = false;
  int valid = 0;
};

struct ContactDiagnostic {
  double t = 0.0;
  double mean_fraction = 0.0;  // mean_local_time / t
  double stderr_ = 0.0;
  int valid = 0;
};

struct SmoothingReport {
  int dimension = 0;
  double rho = 0.0;
  double t = 0.0;
  int n = 0;
  double green = 0.0;
  bool critical_found = false;
  double beta_hat_c = 0.0;
  std::vector<SmoothingRow> rows;
  /// mean_local_time / s at beta_hat_c for s = t/4, t/2, t.
  std::vector<ContactDiagnostic> diagnostic;
  std::vector<SolveRecord> records;
};

SmoothingReport smoothing_report(const JumpKernel& kernel, double rho, const std::vector<double>& beta_grid,
                                 double t, int n, std::uint64_t seed, const ExperimentOptions& opts = {});

struct SandwichCell {
  int dimension = 0;
  double beta = 0.0;
  double t = 0.0;
  double log_z = 0.0;
  double lower = 0.0;  // (beta - 1) t
  double upper = 0.0;  // (beta - 1 + 1/beta) t + log(1 + 1/beta)
  bool ok = false;
  PartitionResult result;
  CellStatus status;
};

/// Free partition function with Y = 0 against both exponential bounds, with
/// slack equal to the truncation tolerance.
std::vector<SandwichCell> sandwich_report(const JumpKernel& kernel, const std::vector<double>& beta_grid,
                                          const std::vector<double>& t_grid,
                                          const ExperimentOptions& opts = {});

struct AnnealedIdentity {
  double mean_z = 0.0;
  double stderr_ = 0.0;
  /// Pure pinned partition function of X - Y: rate 1 + rho, i.e. beta/(1+rho)
  /// over (1+rho) t at rate 1.
  double reference = 0.0;
  int valid = 0;
};

/// E_Y[Z^{pin}_{t,beta}] by averaging Z over n disorder paths.
AnnealedIdentity annealed_identity_check(const JumpKernel& kernel, double rho, double beta, double t, int n,
                                         std::uint64_t seed, const ExperimentOptions& opts = {});

struct SuperadditivityReport {
  int instances = 0;
  int violations = 0;
  /// min over instances of log Z[u,w] - log Z[u,v] - log Z[v,w].
  double worst_margin = 0.0;
};

/// Random splits u < v < w in [0, horizon] with beta uniform in [0, beta_max].
SuperadditivityReport superadditivity_check(const JumpKernel& kernel, double rho, double beta_max,
                                            double horizon, int instances, std::uint64_t seed,
                                            double tolerance = 1e-6, const ExperimentOptions& opts = {});

}  // namespace pinlab
