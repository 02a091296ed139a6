#include "pinlab/io/dispatch.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "pinlab/annealed.hpp"
#include "pinlab/error.hpp"
#include "pinlab/experiments.hpp"
#include "pinlab/io/manifest.hpp"
#include "pinlab/io/records.hpp"
#include "pinlab/renewal.hpp"

namespace pinlab::io {

namespace {

struct Output {
  std::string name;
  std::string content;
};

// Everything a subcommand produces before anything is written.
struct RunState {
  std::vector<Output> outputs;
  std::vector<CellEntry> cells;
  std::vector<std::string> failures;

  void cell(std::string id, const CellStatus& status) {
    if (!status.ok) failures.push_back(fmt::format("{}: {}", id, status.error));
    cells.push_back({std::move(id), status.ok, status.error, status.seconds});
  }
  void invariant(bool holds, const std::string& what) {
    if (!holds) failures.push_back("invariant: " + what);
  }
};

std::string cell_id(double beta, double t, std::uint64_t sample) {
  return fmt::format("beta={:.17g};t={:.17g};sample={}", beta, t, sample);
}

ExperimentOptions experiment_options(const RunConfig& c) {
  ExperimentOptions o;
  o.threads = c.threads;
  o.solver.truncation_tolerance = c.tolerance;
  o.solver.series_tolerance = c.series_tolerance;
  o.solver.max_step = c.max_step;
  o.solver.initial_radius = c.initial_radius;
  o.solver.max_sites_per_axis = c.max_sites;
  o.solver.delta_beta = c.delta_beta;
  return o;
}

template <typename Fn>
CellStatus timed(Fn&& fn) {
  CellStatus s;
  const auto start = std::chrono::steady_clock::now();
  try {
    fn();
  } catch (const Error& e) {
    s.ok = false;
    s.error = e.what();
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

void run_green(const RunConfig& c, const JumpKernel& kernel, RunState& st) {
  CsvTable table({"run_id", "d", "kernel", "G", "error_bound", "beta_c"});
  GreenResult g;
  const auto status = timed([&] { g = green_function(kernel, 1e-9); });
  st.cell(fmt::format("d={}", c.d), status);
  if (status.ok)
    table.add_row({c.run_id, std::to_string(c.d), c.kernel.simple ? "simple" : "pmf", csv_number(g.value),
                   csv_number(g.error_bound), csv_number(1.0 / g.value)});
  st.outputs.push_back({"green.csv", table.str()});
}

void run_annealed(const RunConfig& c, const JumpKernel& kernel, RunState& st) {
  const AnnealedModel model(kernel);
  auto table = annealed_table();
  const double scale = 1.0 + c.rho;
  for (double beta : c.beta) {
    AnnealedSolution s;
    const auto status = timed([&] { s = model.pure_free_energy(beta / scale); });
    st.cell(fmt::format("beta={:.17g}", beta), status);
    if (!status.ok) continue;
    st.invariant(s.b == 0.0 || std::abs(s.residual) < 1e-10, fmt::format("root residual at beta={}", beta));
    st.invariant(s.defect_mass >= -1e-12 && s.defect_mass <= 1.0 + 1e-12, fmt::format("defect mass at beta={}", beta));
    table.add_row({c.run_id, "", std::to_string(c.d), csv_number(c.rho), csv_number(beta), "", "", "", "", "", "",
                   "ok", csv_number(s.b), csv_number(s.lambda),
                   s.contact_defined ? csv_number(s.contact_fraction) : "", csv_number(s.defect_mass),
                   csv_number(s.residual), csv_number(scale * s.b)});
  }
  st.outputs.push_back({"annealed.csv", table.str()});
  if (!c.onset) return;

  CsvTable points({"run_id", "d", "rho", "beta_c", "delta", "beta", "free_energy"});
  CsvTable fit_table({"run_id", "d", "rho", "beta_c", "window_lo", "window_hi", "points", "exponent", "amplitude",
                      "r_squared", "log_ratio_spread"});
  ExponentFit fit;
  const auto status = timed([&] {
    fit = model.onset_exponent_fit(c.rho, {c.window_lo, c.window_hi, c.window_points});
  });
  st.cell("onset_fit", status);
  if (status.ok) {
    const double beta_c = model.critical_point(c.rho);
    for (std::size_t i = 0; i < fit.delta.size(); ++i)
      points.add_row({c.run_id, std::to_string(c.d), csv_number(c.rho), csv_number(beta_c), csv_number(fit.delta[i]),
                      csv_number(beta_c + fit.delta[i]), csv_number(fit.free_energy[i])});
    fit_table.add_row({c.run_id, std::to_string(c.d), csv_number(c.rho), csv_number(beta_c), csv_number(fit.window_lo),
                       csv_number(fit.window_hi), std::to_string(fit.points), csv_number(fit.exponent),
                       csv_number(fit.amplitude), csv_number(fit.r_squared),
                       c.d == 4 ? csv_number(fit.log_ratio_spread) : ""});
  }
  st.outputs.push_back({"annealed_onset.csv", points.str()});
  st.outputs.push_back({"annealed_fit.csv", fit_table.str()});
}

void run_quenched(const RunConfig& c, const JumpKernel& kernel, RunState& st) {
  const AnnealedModel model(kernel);
  const auto opts = experiment_options(c);
  auto rows = partition_table();
  CsvTable summary({"run_id", "d", "rho", "beta", "t", "n_valid", "mean", "stderr", "annealed"});
  for (double beta : c.beta) {
    const auto curve = quenched_fe_estimate(kernel, beta, c.rho, c.t, c.n, c.seed, opts);
    for (const auto& rec : curve.records) {
      add_partition_row(rows, c.run_id, rec);
      st.cell(cell_id(beta, rec.result.t2, rec.sample), rec.status);
    }
    const double annealed = model.annealed_free_energy(beta, c.rho);
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
      summary.add_row({c.run_id, std::to_string(c.d), csv_number(c.rho), csv_number(beta), csv_number(curve.t_grid[i]),
                       std::to_string(curve.valid[i]), csv_number(curve.mean[i]), csv_number(curve.stderr_[i]),
                       csv_number(annealed)});
      st.invariant(curve.mean[i] <= annealed + 3.0 * curve.stderr_[i] + c.tolerance,
                   fmt::format("quenched <= annealed + 3 sigma at beta={}, t={}", beta, curve.t_grid[i]));
      for (std::size_t j = i + 1; j < curve.t_grid.size(); ++j)
        st.invariant(curve.mean[i] - 3.0 * curve.stderr_[i] <= curve.mean[j] + 3.0 * curve.stderr_[j] + c.tolerance,
                     fmt::format("lower-bound monotonicity between t={} and t={} at beta={}", curve.t_grid[i],
                                 curve.t_grid[j], beta));
    }
  }
  st.outputs.push_back({"quenched.csv", rows.str()});
  st.outputs.push_back({"quenched_summary.csv", summary.str()});
}

void run_lowtemp(const RunConfig& c, const JumpKernel& kernel, RunState& st) {
  const auto opts = experiment_options(c);
  auto rows = partition_table();
  CsvTable summary({"run_id", "d", "rho", "beta", "t", "n_valid", "measured", "stderr", "prediction", "deviation",
                    "measured_cv", "stderr_cv", "mean_lower_bound", "worst_margin", "violations", "entropy_constant"});
  for (double t : c.t) {
    const auto report = lowtemp_report(kernel, c.rho, c.beta, t, c.n, c.seed, opts);
    for (const auto& rec : report.records) {
      add_partition_row(rows, c.run_id, rec);
      st.cell(cell_id(rec.result.beta, t, rec.sample), rec.status);
    }
    for (const auto& r : report.rows) {
      summary.add_row({c.run_id, std::to_string(c.d), csv_number(c.rho), csv_number(r.beta), csv_number(t),
                       std::to_string(r.valid), csv_number(r.measured), csv_number(r.stderr_), csv_number(r.prediction),
                       csv_number(r.deviation), csv_number(r.measured_cv), csv_number(r.stderr_cv),
                       csv_number(r.mean_lower_bound), csv_number(r.worst_margin), std::to_string(r.violations),
                       csv_number(report.entropy_constant)});
      st.invariant(r.violations == 0, fmt::format("per-path lower bound exceeded the solver at beta={}, t={}", r.beta, t));
    }
  }
  st.outputs.push_back({"lowtemp.csv", rows.str()});
  st.outputs.push_back({"lowtemp_summary.csv", summary.str()});
}

void run_smoothing(const RunConfig& c, const JumpKernel& kernel, RunState& st) {
  const auto opts = experiment_options(c);
  const double t = c.t.back();
  const auto report = smoothing_report(kernel, c.rho, c.beta, t, c.n, c.seed, opts);
  auto rows = partition_table();
  for (const auto& rec : report.records) {
    add_partition_row(rows, c.run_id, rec);
    st.cell(cell_id(rec.result.beta, t, rec.sample), rec.status);
  }
  CsvTable summary({"run_id", "d", "rho", "beta", "t", "n_valid", "quenched", "stderr", "annealed", "envelope",
                    "beta_hat_c"});
  for (const auto& r : report.rows) {
    summary.add_row({c.run_id, std::to_string(c.d), csv_number(c.rho), csv_number(r.beta), csv_number(t),
                     std::to_string(r.valid), csv_number(r.quenched), csv_number(r.stderr_), csv_number(r.annealed),
                     r.envelope_defined ? csv_number(r.envelope) : "",
                     report.critical_found ? csv_number(report.beta_hat_c) : ""});
    st.invariant(r.quenched <= r.annealed + 3.0 * r.stderr_ + c.tolerance,
                 fmt::format("quenched <= annealed + 3 sigma at beta={}", r.beta));
  }
  CsvTable diag({"run_id", "d", "rho", "beta_hat_c", "t", "n_valid", "mean_fraction", "stderr"});
  for (const auto& dgn : report.diagnostic)
    diag.add_row({c.run_id, std::to_string(c.d), csv_number(c.rho), csv_number(report.beta_hat_c), csv_number(dgn.t),
                  std::to_string(dgn.valid), csv_number(dgn.mean_fraction), csv_number(dgn.stderr_)});
  if (!report.critical_found) st.cells.push_back({"envelope", false, "NotApplicable: no beta_hat_c on the grid", 0.0});
  st.outputs.push_back({"smoothing.csv", rows.str()});
  st.outputs.push_back({"smoothing_summary.csv", summary.str()});
  st.outputs.push_back({"smoothing_diagnostic.csv", diag.str()});
}

void run_sandwich(const RunConfig& c, const JumpKernel& kernel, RunState& st) {
  const auto cells = sandwich_report(kernel, c.beta, c.t, experiment_options(c));
  CsvTable table({"run_id", "d", "beta", "t", "R", "logZ", "cert", "lower", "upper", "ok", "status"});
  for (const auto& cell : cells) {
    st.cell(cell_id(cell.beta, cell.t, 0), cell.status);
    st.invariant(!cell.status.ok || cell.ok, fmt::format("sandwich bounds at beta={}, t={}", cell.beta, cell.t));
    table.add_row({c.run_id, std::to_string(c.d), csv_number(cell.beta), csv_number(cell.t),
                   cell.status.ok ? std::to_string(cell.result.radius) : "",
                   cell.status.ok ? csv_number(cell.log_z) : "",
                   cell.status.ok ? csv_number(cell.result.certificate) : "", csv_number(cell.lower),
                   csv_number(cell.upper), cell.ok ? "1" : "0", status_word(cell.status)});
  }
  st.outputs.push_back({"sandwich.csv", table.str()});
}

void run_renewal(const RunConfig& c, const JumpKernel& kernel, RunState& st) {
  CsvTable table({"run_id", "beta", "t", "n", "hits", "logZ_est", "ci_lo", "ci_hi", "acc_rate", "truncated_bias_bound"});
  std::string json = "[";
  bool first = true;
  RenewalOptions options;
  options.step_cap = c.step_cap;
  for (double beta : c.beta) {
    for (double t : c.t) {
      RenewalEstimate e;
      const auto status = timed([&] { e = RenewalSampler(kernel, beta, options).partition_estimate(t, c.n, c.seed); });
      st.cell(cell_id(beta, t, 0), status);
      if (!status.ok) continue;
      table.add_row({c.run_id, csv_number(beta), csv_number(t), std::to_string(e.n), std::to_string(e.hits),
                     std::isfinite(e.log_z) ? csv_number(e.log_z) : "", std::isfinite(e.ci_lo) ? csv_number(e.ci_lo) : "",
                     csv_number(e.ci_hi), csv_number(e.acceptance_rate), csv_number(e.truncated_bias_bound)});
      json += (first ? "\n  " : ",\n  ") + renewal_summary_json(e);
      first = false;
    }
  }
  json += "\n]\n";
  st.outputs.push_back({"renewal.csv", table.str()});
  st.outputs.push_back({"renewal.json", json});
}

}  // namespace

DispatchResult dispatch(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunState st;
  DispatchResult result;
  try {
    const auto kernel = make_kernel(config);
    switch (config.command) {
      case Subcommand::Green: run_green(config, kernel, st); break;
      case Subcommand::Annealed: run_annealed(config, kernel, st); break;
      case Subcommand::Quenched: run_quenched(config, kernel, st); break;
      case Subcommand::LowTemp: run_lowtemp(config, kernel, st); break;
      case Subcommand::Smoothing: run_smoothing(config, kernel, st); break;
      case Subcommand::Sandwich: run_sandwich(config, kernel, st); break;
      case Subcommand::RenewalMc: run_renewal(config, kernel, st); break;
    }
  } catch (const Error& e) {
    st.failures.push_back(e.what());
  }

  RunManifest manifest;
  manifest.command = std::string(to_string(config.command));
  manifest.version = std::string(library_version());
  manifest.config_text = serialize_config(config);
  manifest.seed = config.seed;
  manifest.threads = resolve_threads(config.threads);
  manifest.cells = st.cells;
  manifest.failures = st.failures;
  result.failures = st.failures;
  result.exit_code = st.failures.empty() ? 0 : 1;

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) {
    result.failures.push_back(fmt::format("IoError: cannot create {}: {}", config.out, ec.message()));
    result.exit_code = 1;
    return result;
  }
  const auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(config.out) / name, std::ios::binary);
    out << content;
    if (!out) {
      result.failures.push_back(fmt::format("IoError: cannot write {}", name));
      result.exit_code = 1;
      return;
    }
    result.files.push_back(name);
  };
  for (const auto& o : st.outputs) {
    write(o.name, o.content);
    manifest.outputs.push_back({o.name, fnv1a64(o.content), o.content.size()});
  }
  manifest.exit_status = result.exit_code;
  manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write("manifest.json", to_json(manifest));
  return result;
}

}  // namespace pinlab::io
