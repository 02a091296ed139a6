#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pinlab/walk_core.hpp"

namespace pinlab::io {

enum class Subcommand { Green, Annealed, Quenched, LowTemp, Smoothing, Sandwich, RenewalMc };

std::string_view to_string(Subcommand command) noexcept;
std::optional<Subcommand> parse_subcommand(std::string_view name) noexcept;
const std::vector<Subcommand>& all_subcommands() noexcept;

/// "simple", or an explicit pmf written as "(x1,..,xd):p (..):p ...".
struct KernelSpec {
  bool simple = true;
  std::vector<JumpKernel::Jump> jumps;

  friend bool operator==(const KernelSpec& a, const KernelSpec& b);
};

struct RunConfig {
  Subcommand command = Subcommand::Green;
  std::string run_id = "run";
  int d = 1;
  KernelSpec kernel;
  double rho = 0.0;
  std::vector<double> beta{1.0};
  std::vector<double> t{10.0};
  int n = 20;
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
  double series_tolerance = 1e-12;
  double max_step = 0.0;
  int initial_radius = 0;
  int max_sites = 0;
  double delta_beta = 1e-4;
  int threads = 0;
  std::string out = "out";
  bool onset = false;
  double window_lo = 1e-3;
  double window_hi = 1e-2;
  int window_points = 12;
  std::uint64_t step_cap = 1'000'000;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ConfigIssue {
  int line = 0;  // 0 when the issue is not tied to one line
  std::string key;
  std::string message;
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<ConfigIssue> errors;
  bool ok() const noexcept { return config.has_value(); }
};

/// Line-oriented key = value text. Keys before any [section] apply to every
/// subcommand; keys inside [name] apply only when running `name` and
/// override the global ones. '#' starts a comment. The subcommand comes from
/// `command` unless given explicitly. All problems are collected.
ParseResult parse_config(std::string_view text, std::optional<Subcommand> command = std::nullopt);

/// Canonical text form; parse_config(serialize_config(c)) yields c.
std::string serialize_config(const RunConfig& config);

std::string format_kernel(const KernelSpec& kernel);
JumpKernel make_kernel(const RunConfig& config);

std::string format_issue(const ConfigIssue& issue);

}  // namespace pinlab::io
