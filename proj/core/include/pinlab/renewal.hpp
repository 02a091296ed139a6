#pragma once

#include <cstdint>
#include <vector>

#include "pinlab/annealed.hpp"
#include "pinlab/walk_core.hpp"

namespace pinlab {

class RandomStream;

enum class ExcursionOutcome {
  Finite,
  /// d >= 3 only: the step cap was reached; see excursion_tail_bound.
  Infinite,
  /// d <= 2: the step cap was reached before the walk returned.
  Truncated,
};

struct ExcursionSample {
  ExcursionOutcome outcome = ExcursionOutcome::Finite;
  double duration = 0.0;  // meaningful for Finite only
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t task = 0;
};

/// One excursion away from 0: a first jump, then exponential holding times
/// until the walk is back at 0.
ExcursionSample sample_excursion(const JumpKernel& kernel, std::uint64_t seed,
                                 std::uint64_t step_cap, std::uint64_t task = 0);

/// Local-CLT estimate of sum_{k > step_cap} P(S_k = 0), an upper bound on the
/// probability that an excursion classified Infinite would still return.
double excursion_tail_bound(const JumpKernel& kernel, std::uint64_t step_cap);

/// Contact set on [0, horizon] as alternating wet/dry intervals starting wet
/// at 0: [0, e_0) wet, [e_0, e_1) dry, [e_1, e_2) wet, ... The last interval
/// may extend past the horizon.
struct RenewalPath {
  double horizon = 0.0;
  std::vector<double> endpoints;
  double wet_time = 0.0;
  bool horizon_in_contact = false;
};

struct RenewalOptions {
  std::uint64_t step_cap = 1'000'000;
  double min_acceptance = 1e-4;
  std::uint64_t stall_check_after = 100'000;
};

struct RenewalStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t truncated = 0;
  double acceptance_rate() const noexcept {
    return proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
  }
};

struct RenewalEstimate {
  double beta = 0.0;
  double t = 0.0;
  std::uint64_t n = 0;
  std::uint64_t hits = 0;
  double log_z = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// Standard error of log Z (delta method); infinite with zero hits.
  double log_z_stderr = 0.0;
  double acceptance_rate = 0.0;
  double truncated_bias_bound = 0.0;
};

/// Samples the contact set under the tilted law (beta > beta_c), or under the
/// plain walk law when beta = 0.
class RenewalSampler {
public:
  RenewalSampler(const JumpKernel& kernel, double beta, RenewalOptions options = {});

  double beta() const noexcept { return beta_; }
  double b() const noexcept { return b_; }
  double lambda() const noexcept { return lambda_; }

  /// Path number `task` of the stream keyed by `seed`.
  RenewalPath sample(double t, std::uint64_t seed, std::uint64_t task);
  const RenewalStats& stats() const noexcept { return stats_; }

  /// log Z^{pin}_{t,beta} = b t + log(fraction of paths with t in T), with a
  /// 3-sigma binomial interval (one-sided when no path hits).
  RenewalEstimate partition_estimate(double t, std::uint64_t n, std::uint64_t seed);

private:
  double dry_interval(RandomStream& rng, double remaining);

  JumpKernel kernel_;
  double beta_;
  double b_ = 0.0;
  double lambda_ = 1.0;
  RenewalOptions options_;
  RenewalStats stats_;
};

RenewalPath sample_tilted_renewal(const JumpKernel& kernel, double beta, double t, std::uint64_t seed,
                                  std::uint64_t task = 0);

RenewalEstimate pure_partition_mc(const JumpKernel& kernel, double beta, double t, std::uint64_t n,
                                  std::uint64_t seed);

}  // namespace pinlab
