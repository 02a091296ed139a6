#include "pinlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include "pinlab/annealed.hpp"
#include "pinlab/error.hpp"
#include "pinlab/numerics.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PINLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto pool = static_cast<std::size_t>(std::max(1, threads));
  if (pool == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    for (std::size_t k = 0; k < std::min(pool, count); ++k) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

using Clock = std::chrono::steady_clock;

// Runs one solver call, converting library errors into a failed status.
template <typename Fn>
CellStatus guarded(Fn&& fn) {
  CellStatus status;
  const auto start = Clock::now();
  try {
    fn();
  } catch (const Error& e) {
    status.ok = false;
    status.error = e.what();
  }
  status.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return status;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};

MeanSe summarize(const std::vector<double>& values) {
  num::RunningStats stats;
  for (double v : values) stats.add(v);
  return {stats.mean(), stats.count() > 1 ? stats.stderr_of_mean() : 0.0, static_cast<int>(stats.count())};
}

std::vector<DisorderPath> disorder_samples(const JumpKernel& kernel, double rho, double horizon, int n,
                                           std::uint64_t seed) {
  std::vector<DisorderPath> paths;
  paths.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) paths.push_back(sample_disorder(kernel, rho, horizon, seed, static_cast<std::uint64_t>(i)));
  return paths;
}

}  // namespace

FreeEnergyCurve quenched_fe_estimate(const JumpKernel& kernel, double beta, double rho,
                                     const std::vector<double>& t_grid, int n, std::uint64_t seed,
                                     const ExperimentOptions& opts) {
  require(!t_grid.empty() && std::is_sorted(t_grid.begin(), t_grid.end()) && t_grid.front() > 0.0,
          "t grid must be ascending and positive");
  require(n >= 2, "quenched estimate needs n >= 2");
  FreeEnergyCurve curve;
  curve.dimension = kernel.dimension();
  curve.rho = rho;
  curve.beta = beta;
  curve.seed = seed;
  curve.n = n;
  curve.t_grid = t_grid;
  const auto paths = disorder_samples(kernel, rho, t_grid.back(), n, seed);
  const std::size_t nt = t_grid.size();
  curve.records.resize(nt * static_cast<std::size_t>(n));
  parallel_for(curve.records.size(), resolve_threads(opts.threads), [&](std::size_t cell) {
    const std::size_t ti = cell / static_cast<std::size_t>(n);
    const std::size_t si = cell % static_cast<std::size_t>(n);
    auto& rec = curve.records[cell];
    rec.seed = seed;
    rec.sample = si;
    rec.dimension = kernel.dimension();
    rec.rho = rho;
    rec.status = guarded([&] { rec.result = pinned_log_partition(kernel, paths[si], beta, t_grid[ti], opts.solver); });
  });
  for (std::size_t ti = 0; ti < nt; ++ti) {
    std::vector<double> values;
    for (int si = 0; si < n; ++si) {
      const auto& rec = curve.records[ti * static_cast<std::size_t>(n) + static_cast<std::size_t>(si)];
      if (rec.status.ok) values.push_back(rec.result.log_z / t_grid[ti]);
    }
    const auto s = summarize(values);
    curve.mean.push_back(s.mean);
    curve.stderr_.push_back(s.se);
    curve.valid.push_back(s.n);
  }
  return curve;
}

double lowtemp_lower_bound_formula(const JumpKernel& kernel, const DisorderPath& y, double beta, double t) {
  require(beta > 0.0, "the low-temperature bound needs beta > 0");
  require(t > 0.0 && t <= y.horizon(), "horizon must lie in (0, path horizon]");
  const auto jumps = y.jumps();
  const std::size_t k = y.jump_count(t);
  const double cap = std::pow(beta, -2.0 / 3.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double prev = i == 0 ? 0.0 : jumps[i - 1].time;
    const double next = i + 1 < k ? jumps[i + 1].time : t;
    const double eps_minus = std::min(cap, 0.5 * (jumps[i].time - prev));
    const double eps_plus = std::min(cap, 0.5 * (next - jumps[i].time));
    const double p = kernel.probability(jumps[i].displacement);
    sum += std::log(2.0 * p / beta) +
           std::log1p(-0.5 * (std::exp(-beta * eps_minus) + std::exp(-beta * eps_plus)));
  }
  return (beta - 1.0) + sum / t;
}

double lowtemp_prediction(const JumpKernel& kernel, double rho, double beta) {
  return beta - 1.0 - rho * (std::log(beta) + kernel.entropy_constant());
}

LowTempReport lowtemp_report(const JumpKernel& kernel, double rho, const std::vector<double>& betas, double t,
                             int n, std::uint64_t seed, const ExperimentOptions& opts) {
  require(!betas.empty() && t > 0.0 && n >= 2, "low-temperature report needs betas, t > 0 and n >= 2");
  LowTempReport report;
  report.dimension = kernel.dimension();
  report.rho = rho;
  report.t = t;
  report.n = n;
  report.entropy_constant = kernel.entropy_constant();
  const auto paths = disorder_samples(kernel, rho, t, n, seed);
  const std::size_t nb = betas.size();
  report.records.resize(nb * static_cast<std::size_t>(n));
  parallel_for(report.records.size(), resolve_threads(opts.threads), [&](std::size_t cell) {
    const std::size_t bi = cell / static_cast<std::size_t>(n);
    const std::size_t si = cell % static_cast<std::size_t>(n);
    auto& rec = report.records[cell];
    rec.seed = seed;
    rec.sample = si;
    rec.dimension = kernel.dimension();
    rec.rho = rho;
    rec.status = guarded([&] { rec.result = pinned_log_partition(kernel, paths[si], betas[bi], t, opts.solver); });
  });
  for (std::size_t bi = 0; bi < nb; ++bi) {
    LowTempRow row;
    row.beta = betas[bi];
    row.prediction = lowtemp_prediction(kernel, rho, row.beta);
    std::vector<double> measured;
    std::vector<double> adjusted;
    std::vector<double> bounds;
    const double jump_cost = std::log(row.beta) + kernel.entropy_constant();
    row.worst_margin = std::numeric_limits<double>::infinity();
    for (int si = 0; si < n; ++si) {
      const auto& rec = report.records[bi * static_cast<std::size_t>(n) + static_cast<std::size_t>(si)];
      if (!rec.status.ok) continue;
      const double value = rec.result.log_z / t;
      const double bound = lowtemp_lower_bound_formula(kernel, paths[static_cast<std::size_t>(si)], row.beta, t);
      const auto kappa = static_cast<double>(paths[static_cast<std::size_t>(si)].jump_count(t));
      measured.push_back(value);
      adjusted.push_back(value + (kappa / t - rho) * jump_cost);
      bounds.push_back(bound);
      row.worst_margin = std::min(row.worst_margin, value - bound);
      if (bound > value + 1e-6) ++row.violations;
    }
    const auto s = summarize(measured);
    row.measured = s.mean;
    row.stderr_ = s.se;
    row.valid = s.n;
    row.deviation = row.measured - row.prediction;
    const auto cv = summarize(adjusted);
    row.measured_cv = cv.mean;
    row.stderr_cv = cv.se;
    row.mean_lower_bound = summarize(bounds).mean;
    report.rows.push_back(row);
  }
  return report;
}

SmoothingReport smoothing_report(const JumpKernel& kernel, double rho, const std::vector<double>& beta_grid,
                                 double t, int n, std::uint64_t seed, const ExperimentOptions& opts) {
  require(kernel.dimension() >= 3, "smoothing report requires d >= 3");
  require(rho > 0.0, "smoothing report requires rho > 0");
  require(!beta_grid.empty() && std::is_sorted(beta_grid.begin(), beta_grid.end()), "beta grid must be ascending");
  require(t > 0.0 && n >= 2, "smoothing report needs t > 0 and n >= 2");
  const AnnealedModel model(kernel);
  SmoothingReport report;
  report.dimension = kernel.dimension();
  report.rho = rho;
  report.t = t;
  report.n = n;
  report.green = model.green();

  const auto paths = disorder_samples(kernel, rho, t, n, seed);
  const std::size_t nb = beta_grid.size();
  report.records.resize(nb * static_cast<std::size_t>(n));
  const int threads = resolve_threads(opts.threads);
  parallel_for(report.records.size(), threads, [&](std::size_t cell) {
    const std::size_t bi = cell / static_cast<std::size_t>(n);
    const std::size_t si = cell % static_cast<std::size_t>(n);
    auto& rec = report.records[cell];
    rec.seed = seed;
    rec.sample = si;
    rec.dimension = kernel.dimension();
    rec.rho = rho;
    rec.status = guarded([&] { rec.result = pinned_log_partition(kernel, paths[si], beta_grid[bi], t, opts.solver); });
  });
  for (std::size_t bi = 0; bi < nb; ++bi) {
    SmoothingRow row;
    row.beta = beta_grid[bi];
    std::vector<double> values;
    for (int si = 0; si < n; ++si) {
      const auto& rec = report.records[bi * static_cast<std::size_t>(n) + static_cast<std::size_t>(si)];
      if (rec.status.ok) values.push_back(rec.result.log_z / t);
    }
    const auto s = summarize(values);
    row.quenched = s.mean;
    row.stderr_ = s.se;
    row.valid = s.n;
    row.annealed = model.annealed_free_energy(row.beta, rho);
    if (!report.critical_found && s.n >= 2 && row.quenched > 3.0 * row.stderr_ && row.quenched > 0.0) {
      report.critical_found = true;
      report.beta_hat_c = row.beta;
    }
    report.rows.push_back(row);
  }
  if (!report.critical_found) return report;
  for (auto& row : report.rows) {
    row.envelope = smoothing_envelope(kernel.dimension(), rho, row.beta, report.beta_hat_c, report.green);
    row.envelope_defined = true;
  }

  for (double horizon : {0.25 * t, 0.5 * t, t}) {
    std::vector<double> fractions(static_cast<std::size_t>(n), 0.0);
    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t si) {
      try {
        fractions[si] = mean_local_time(kernel, paths[si], report.beta_hat_c, horizon, opts.solver) / horizon;
        ok[si] = 1;
      } catch (const Error&) {
      }
    });
    std::vector<double> values;
    for (std::size_t si = 0; si < fractions.size(); ++si)
      if (ok[si]) values.push_back(fractions[si]);
    const auto s = summarize(values);
    report.diagnostic.push_back({horizon, s.mean, s.se, s.n});
  }
  return report;
}

std::vector<SandwichCell> sandwich_report(const JumpKernel& kernel, const std::vector<double>& beta_grid,
                                          const std::vector<double>& t_grid, const ExperimentOptions& opts) {
  std::vector<SandwichCell> cells;
  for (double beta : beta_grid) {
    require(beta > 0.0, "sandwich bounds need beta > 0");
    for (double t : t_grid) {
      require(t >= 0.0, "sandwich horizons must be >= 0");
      SandwichCell cell;
      cell.dimension = kernel.dimension();
      cell.beta = beta;
      cell.t = t;
      cell.lower = (beta - 1.0) * t;
      cell.upper = (beta - 1.0 + 1.0 / beta) * t + std::log1p(1.0 / beta);
      cells.push_back(cell);
    }
  }
  double horizon = 0.0;
  for (double t : t_grid) horizon = std::max(horizon, t);
  const auto y = DisorderPath::constant(kernel.dimension(), horizon);
  const double tol = opts.solver.truncation_tolerance;
  parallel_for(cells.size(), resolve_threads(opts.threads), [&](std::size_t i) {
    auto& cell = cells[i];
    cell.status = guarded([&] { cell.result = free_log_partition(kernel, y, cell.beta, cell.t, opts.solver); });
    cell.log_z = cell.result.log_z;
    cell.ok = cell.status.ok && cell.log_z >= cell.lower - tol && cell.log_z <= cell.upper + tol;
  });
  return cells;
}

AnnealedIdentity annealed_identity_check(const JumpKernel& kernel, double rho, double beta, double t, int n,
                                         std::uint64_t seed, const ExperimentOptions& opts) {
  require(n >= 2 && t > 0.0 && rho >= 0.0, "annealed identity needs n >= 2, t > 0, rho >= 0");
  const auto paths = disorder_samples(kernel, rho, t, n, seed);
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(n), 0);
  parallel_for(static_cast<std::size_t>(n), resolve_threads(opts.threads), [&](std::size_t i) {
    try {
      z[i] = std::exp(pinned_log_partition(kernel, paths[i], beta, t, opts.solver).log_z);
      ok[i] = 1;
    } catch (const Error&) {
    }
  });
  std::vector<double> values;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (ok[i]) values.push_back(z[i]);
  const auto s = summarize(values);
  AnnealedIdentity out;
  out.mean_z = s.mean;
  out.stderr_ = s.se;
  out.valid = s.n;
  const double scale = 1.0 + rho;
  const auto flat = DisorderPath::constant(kernel.dimension(), scale * t);
  out.reference = std::exp(pinned_log_partition(kernel, flat, beta / scale, scale * t, opts.solver).log_z);
  return out;
}

SuperadditivityReport superadditivity_check(const JumpKernel& kernel, double rho, double beta_max,
                                            double horizon, int instances, std::uint64_t seed, double tolerance,
                                            const ExperimentOptions& opts) {
  require(instances >= 1 && horizon > 0.0 && beta_max >= 0.0, "invalid superadditivity parameters");
  struct Instance {
    double beta, u, v, w;
    double margin = 0.0;
    bool ok = false;
  };
  std::vector<Instance> cases;
  RandomStream rng(seed, 0);
  for (int i = 0; i < instances; ++i) {
    double a = rng.uniform() * horizon;
    double b = rng.uniform() * horizon;
    double c = rng.uniform() * horizon;
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    cases.push_back({rng.uniform() * beta_max, a, b, c});
  }
  const auto paths = disorder_samples(kernel, rho, horizon, instances, seed + 1);
  parallel_for(cases.size(), resolve_threads(opts.threads), [&](std::size_t i) {
    auto& c = cases[i];
    const auto& y = paths[i];
    try {
      const double whole = interval_log_partition(kernel, y, c.beta, c.u, c.w, opts.solver).log_z;
      const double left = interval_log_partition(kernel, y, c.beta, c.u, c.v, opts.solver).log_z;
      const double right = interval_log_partition(kernel, y, c.beta, c.v, c.w, opts.solver).log_z;
      c.margin = whole - left - right;
      c.ok = true;
    } catch (const Error&) {
    }
  });
  SuperadditivityReport report;
  report.instances = instances;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& c : cases) {
    if (!c.ok || c.margin < -tolerance) ++report.violations;
    if (c.ok) report.worst_margin = std::min(report.worst_margin, c.margin);
  }
  return report;
}

}  // namespace pinlab
