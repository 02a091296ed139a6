#include "pinlab/renewal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pinlab/error.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

namespace {

struct WalkRun {
  enum class End { Returned, Capped, Stopped } end = End::Returned;
  double duration = 0.0;
  std::uint64_t steps = 0;
};

// Runs one excursion from 0, stopping early once its duration passes
// time_limit (then the remaining path is irrelevant to the caller).
WalkRun run_excursion(const JumpKernel& kernel, RandomStream& rng, std::uint64_t step_cap,
                      double time_limit) {
  WalkRun run;
  Site pos = kernel.sample(rng);
  run.steps = 1;
  auto at_origin = [&pos] {
    for (int c : pos)
      if (c != 0) return false;
    return true;
  };
  while (true) {
    if (at_origin()) return run;
    run.duration += rng.exponential(1.0);
    if (run.duration > time_limit) {
      run.end = WalkRun::End::Stopped;
      return run;
    }
    if (run.steps >= step_cap) {
      run.end = WalkRun::End::Capped;
      return run;
    }
    const Site& dx = kernel.sample(rng);
    for (std::size_t c = 0; c < pos.size(); ++c) pos[c] += dx[c];
    ++run.steps;
  }
}

}  // namespace

ExcursionSample sample_excursion(const JumpKernel& kernel, std::uint64_t seed, std::uint64_t step_cap,
                                 std::uint64_t task) {
  require(step_cap >= 1, "step_cap must be >= 1");
  RandomStream rng(seed, task);
  const auto run = run_excursion(kernel, rng, step_cap, std::numeric_limits<double>::infinity());
  ExcursionSample out;
  out.seed = seed;
  out.task = task;
  out.steps = run.steps;
  out.duration = run.duration;
  if (run.end == WalkRun::End::Capped)
    out.outcome = kernel.dimension() >= 3 ? ExcursionOutcome::Infinite : ExcursionOutcome::Truncated;
  return out;
}

double excursion_tail_bound(const JumpKernel& kernel, std::uint64_t step_cap) {
  const int d = kernel.dimension();
  if (d <= 2) return 1.0;
  // P(S_k = 0) ~ (2 pi k)^{-d/2} det(Sigma)^{-1/2} on average over periods.
  const double amp = std::pow(2.0 * std::numbers::pi, -0.5 * d) / std::sqrt(kernel.covariance_determinant());
  const double n = static_cast<double>(step_cap);
  return amp * std::pow(n, 1.0 - 0.5 * d) / (0.5 * d - 1.0);
}

RenewalSampler::RenewalSampler(const JumpKernel& kernel, double beta, RenewalOptions options)
    : kernel_(kernel), beta_(beta), options_(options) {
  require(std::isfinite(beta) && beta >= 0.0, "renewal sampler requires beta >= 0");
  require(options.step_cap >= 1, "step_cap must be >= 1");
  if (beta > 0.0) {
    const auto sol = AnnealedModel(kernel).pure_free_energy(beta);
    if (!(sol.b > 0.0))
      fail(ErrorKind::NotApplicable, "the tilted sampler needs beta above the critical point");
    b_ = sol.b;
    lambda_ = sol.lambda;
  }
}

// Returns the length of the next dry interval, or +infinity when it covers the
// rest of the horizon.
double RenewalSampler::dry_interval(RandomStream& rng, double remaining) {
  if (b_ == 0.0) {
    // Plain walk: every excursion is kept, so it can be cut at the horizon.
    const auto run = run_excursion(kernel_, rng, options_.step_cap, remaining);
    ++stats_.proposals;
    ++stats_.accepted;
    if (run.end == WalkRun::End::Capped) ++stats_.truncated;
    return run.end == WalkRun::End::Returned ? run.duration : std::numeric_limits<double>::infinity();
  }
  // Tilted: propose from K and accept with probability e^{-b duration},
  // realized as duration < E with E ~ Exp(b).
  while (true) {
    const double e = rng.exponential(b_);
    const auto run = run_excursion(kernel_, rng, options_.step_cap, e);
    ++stats_.proposals;
    if (run.end == WalkRun::End::Capped) ++stats_.truncated;
    if (run.end == WalkRun::End::Returned) {
      ++stats_.accepted;
      return run.duration;
    }
    if (stats_.proposals >= options_.stall_check_after &&
        stats_.acceptance_rate() < options_.min_acceptance)
      fail(ErrorKind::RejectionStall, "dry-interval acceptance rate fell below the stall threshold");
  }
}

RenewalPath RenewalSampler::sample(double t, std::uint64_t seed, std::uint64_t task) {
  require(t >= 0.0 && std::isfinite(t), "renewal horizon must be finite and >= 0");
  RandomStream rng(seed, task);
  RenewalPath path;
  path.horizon = t;
  double now = 0.0;
  while (true) {
    const double wet = rng.exponential(lambda_);
    path.endpoints.push_back(now + wet);
    if (now + wet > t) {
      path.wet_time += t - now;
      path.horizon_in_contact = true;
      return path;
    }
    path.wet_time += wet;
    now += wet;
    const double dry = dry_interval(rng, t - now);
    path.endpoints.push_back(now + dry);
    if (now + dry > t) return path;
    now += dry;
  }
}

RenewalEstimate RenewalSampler::partition_estimate(double t, std::uint64_t n, std::uint64_t seed) {
  require(n >= 1, "partition estimate needs n >= 1");
  RenewalEstimate est;
  est.beta = beta_;
  est.t = t;
  est.n = n;
  for (std::uint64_t i = 0; i < n; ++i)
    if (sample(t, seed, i).horizon_in_contact) ++est.hits;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(est.hits) / nn;
  constexpr double z = 3.0;
  if (est.hits == 0) {
    // One-sided bound at the same confidence as z = 3.
    est.log_z = -std::numeric_limits<double>::infinity();
    est.ci_lo = -std::numeric_limits<double>::infinity();
    est.ci_hi = b_ * t + std::log1p(-std::pow(0.00135, 1.0 / nn));
    est.log_z_stderr = std::numeric_limits<double>::infinity();
  } else {
    const double se = std::sqrt(p * (1.0 - p) / nn);
    est.log_z = b_ * t + std::log(p);
    est.ci_lo = p - z * se > 0.0 ? b_ * t + std::log(p - z * se) : -std::numeric_limits<double>::infinity();
    est.ci_hi = b_ * t + std::log(std::min(1.0, p + z * se));
    est.log_z_stderr = se / p;
  }
  est.acceptance_rate = stats_.acceptance_rate();
  est.truncated_bias_bound =
      stats_.proposals > 0 ? static_cast<double>(stats_.truncated) / static_cast<double>(stats_.proposals) : 0.0;
  return est;
}

RenewalPath sample_tilted_renewal(const JumpKernel& kernel, double beta, double t, std::uint64_t seed,
                                  std::uint64_t task) {
  require(beta > 0.0, "the tilted sampler needs beta > 0");
  return RenewalSampler(kernel, beta).sample(t, seed, task);
}

RenewalEstimate pure_partition_mc(const JumpKernel& kernel, double beta, double t, std::uint64_t n,
                                  std::uint64_t seed) {
  return RenewalSampler(kernel, beta).partition_estimate(t, n, seed);
}

}  // namespace pinlab
