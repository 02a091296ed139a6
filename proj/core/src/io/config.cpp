#include "pinlab/io/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "pinlab/error.hpp"

namespace pinlab::io {

namespace {

constexpr std::pair<Subcommand, std::string_view> kNames[] = {
    {Subcommand::Green, "green"},         {Subcommand::Annealed, "annealed"},
    {Subcommand::Quenched, "quenched"},   {Subcommand::LowTemp, "lowtemp"},
    {Subcommand::Smoothing, "smoothing"}, {Subcommand::Sandwich, "sandwich"},
    {Subcommand::RenewalMc, "renewal-mc"},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> to_integer(std::string_view s) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<KernelSpec> parse_kernel(std::string_view s, std::string& why) {
  KernelSpec spec;
  if (s == "simple") return spec;
  spec.simple = false;
  std::istringstream in{std::string(s)};
  std::string token;
  while (in >> token) {
    const auto close = token.find("):");
    if (token.front() != '(' || close == std::string::npos) {
      why = "kernel entries look like (x1,..,xd):p";
      return std::nullopt;
    }
    JumpKernel::Jump jump;
    for (auto part : split(std::string_view(token).substr(1, close - 1), ',')) {
      const auto c = to_integer<int>(part);
      if (!c) {
        why = fmt::format("bad displacement component '{}'", part);
        return std::nullopt;
      }
      jump.displacement.push_back(*c);
    }
    const auto p = to_double(std::string_view(token).substr(close + 2));
    if (!p) {
      why = fmt::format("bad probability in '{}'", token);
      return std::nullopt;
    }
    jump.probability = *p;
    spec.jumps.push_back(std::move(jump));
  }
  if (spec.jumps.empty()) {
    why = "kernel must be 'simple' or a non-empty list of (x):p entries";
    return std::nullopt;
  }
  return spec;
}

std::string number(double v) { return fmt::format("{:.17g}", v); }

std::string number_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + number(v[i]);
  return out;
}

struct Entry {
  std::string value;
  int line;
};

// Reads one key into the config; returns an error message or empty.
using Setter = std::function<std::string(RunConfig&, std::string_view)>;

template <typename T>
Setter integer_field(T RunConfig::*field, T lo, T hi) {
  return [=](RunConfig& c, std::string_view v) -> std::string {
    const auto x = to_integer<T>(v);
    if (!x) return fmt::format("expected an integer, got '{}'", v);
    if (*x < lo || *x > hi) return fmt::format("must lie in [{}, {}], got {}", lo, hi, *x);
    c.*field = *x;
    return {};
  };
}

Setter real_field(double RunConfig::*field, double lo, bool lo_open, double hi = HUGE_VAL) {
  return [=](RunConfig& c, std::string_view v) -> std::string {
    const auto x = to_double(v);
    if (!x) return fmt::format("expected a finite number, got '{}'", v);
    if (lo_open ? *x <= lo : *x < lo) return fmt::format("must be {} {}, got {}", lo_open ? ">" : ">=", number(lo), v);
    if (*x > hi) return fmt::format("must be <= {}, got {}", number(hi), v);
    c.*field = *x;
    return {};
  };
}

Setter list_field(std::vector<double> RunConfig::*field, double lo, bool lo_open) {
  return [=](RunConfig& c, std::string_view v) -> std::string {
    std::vector<double> values;
    for (auto part : split(v, ',')) {
      const auto x = to_double(part);
      if (!x) return fmt::format("expected a comma-separated list of numbers, got '{}'", part);
      if (lo_open ? *x <= lo : *x < lo)
        return fmt::format("every entry must be {} {}, got {}", lo_open ? ">" : ">=", number(lo), part);
      values.push_back(*x);
    }
    c.*field = std::move(values);
    return {};
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"command",
       [](RunConfig& c, std::string_view v) -> std::string {
         const auto cmd = parse_subcommand(v);
         if (!cmd) return fmt::format("unknown subcommand '{}'", v);
         c.command = *cmd;
         return {};
       }},
      {"run_id",
       [](RunConfig& c, std::string_view v) -> std::string {
         if (v.empty() || v.find_first_of(",\"") != std::string_view::npos)
           return "run_id must be non-empty without commas or quotes";
         c.run_id = std::string(v);
         return {};
       }},
      {"d", integer_field<int>(&RunConfig::d, 1, 8)},
      {"kernel",
       [](RunConfig& c, std::string_view v) -> std::string {
         std::string why;
         auto spec = parse_kernel(v, why);
         if (!spec) return why;
         c.kernel = std::move(*spec);
         return {};
       }},
      {"rho", real_field(&RunConfig::rho, 0.0, false)},
      {"beta", list_field(&RunConfig::beta, -HUGE_VAL, false)},
      {"t", list_field(&RunConfig::t, 0.0, false)},
      {"n", integer_field<int>(&RunConfig::n, 1, 100'000'000)},
      {"seed", integer_field<std::uint64_t>(&RunConfig::seed, 0, UINT64_MAX)},
      {"tolerance", real_field(&RunConfig::tolerance, 0.0, true)},
      {"series_tolerance", real_field(&RunConfig::series_tolerance, 0.0, true)},
      {"max_step", real_field(&RunConfig::max_step, 0.0, false)},
      {"initial_radius", integer_field<int>(&RunConfig::initial_radius, 0, 100'000)},
      {"max_sites", integer_field<int>(&RunConfig::max_sites, 0, 1'000'001)},
      {"delta_beta", real_field(&RunConfig::delta_beta, 0.0, true, 1.0)},
      {"threads", integer_field<int>(&RunConfig::threads, 0, 4096)},
      {"out",
       [](RunConfig& c, std::string_view v) -> std::string {
         if (v.empty()) return "out must be a non-empty path";
         c.out = std::string(v);
         return {};
       }},
      {"onset",
       [](RunConfig& c, std::string_view v) -> std::string {
         if (v == "true") {
           c.onset = true;
         } else if (v == "false") {
           c.onset = false;
         } else {
           return fmt::format("expected true or false, got '{}'", v);
         }
         return {};
       }},
      {"window_lo", real_field(&RunConfig::window_lo, 0.0, true)},
      {"window_hi", real_field(&RunConfig::window_hi, 0.0, true)},
      {"window_points", integer_field<int>(&RunConfig::window_points, 8, 10'000)},
      {"step_cap", integer_field<std::uint64_t>(&RunConfig::step_cap, 1, UINT64_MAX)},
  };
  return table;
}

void check_semantics(const RunConfig& c, const std::map<std::string, int>& lines, std::vector<ConfigIssue>& errors) {
  const auto line_of = [&](const std::string& key) {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  const auto issue = [&](const std::string& key, std::string msg) {
    errors.push_back({line_of(key), key, fmt::format("{}: {}", key, msg)});
  };
  if (!c.kernel.simple) {
    const bool shaped = std::all_of(c.kernel.jumps.begin(), c.kernel.jumps.end(),
                                    [&](const auto& j) { return static_cast<int>(j.displacement.size()) == c.d; });
    if (!shaped) {
      issue("kernel", fmt::format("displacements must have d = {} components", c.d));
    } else {
      try {
        (void)JumpKernel::from_pmf(c.d, c.kernel.jumps);
      } catch (const Error& e) {
        issue("kernel", e.what());
      }
    }
  }
  if (c.window_hi <= c.window_lo) issue("window_hi", "must exceed window_lo");
  if (!std::is_sorted(c.t.begin(), c.t.end())) issue("t", "values must be ascending");
  const auto need_positive_beta = [&](const char* what) {
    for (double b : c.beta)
      if (b <= 0.0) {
        issue("beta", fmt::format("{} needs beta > 0", what));
        return;
      }
  };
  switch (c.command) {
    case Subcommand::Quenched:
      if (c.n < 2) issue("n", "must be >= 2 for disorder averages");
      break;
    case Subcommand::LowTemp:
      if (c.n < 2) issue("n", "must be >= 2 for disorder averages");
      need_positive_beta("lowtemp");
      break;
    case Subcommand::Smoothing:
      if (c.d < 3) issue("d", "smoothing needs d >= 3");
      if (c.rho <= 0.0) issue("rho", "smoothing needs rho > 0");
      if (c.n < 2) issue("n", "must be >= 2 for disorder averages");
      if (!std::is_sorted(c.beta.begin(), c.beta.end())) issue("beta", "values must be ascending");
      break;
    case Subcommand::Sandwich:
      need_positive_beta("sandwich");
      break;
    case Subcommand::RenewalMc:
      for (double b : c.beta)
        if (b < 0.0) {
          issue("beta", "renewal-mc needs beta >= 0");
          break;
        }
      break;
    default:
      break;
  }
}

}  // namespace

std::string_view to_string(Subcommand command) noexcept {
  for (const auto& [cmd, name] : kNames)
    if (cmd == command) return name;
  return "unknown";
}

std::optional<Subcommand> parse_subcommand(std::string_view name) noexcept {
  for (const auto& [cmd, n] : kNames)
    if (n == name) return cmd;
  return std::nullopt;
}

const std::vector<Subcommand>& all_subcommands() noexcept {
  static const std::vector<Subcommand> list = [] {
    std::vector<Subcommand> v;
    for (const auto& entry : kNames) v.push_back(entry.first);
    return v;
  }();
  return list;
}

bool operator==(const KernelSpec& a, const KernelSpec& b) {
  if (a.simple != b.simple || a.jumps.size() != b.jumps.size()) return false;
  for (std::size_t i = 0; i < a.jumps.size(); ++i)
    if (a.jumps[i].displacement != b.jumps[i].displacement || a.jumps[i].probability != b.jumps[i].probability)
      return false;
  return true;
}

ParseResult parse_config(std::string_view text, std::optional<Subcommand> command) {
  ParseResult result;
  std::map<std::string, Entry> global;
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        result.errors.push_back({line_no, "", "unterminated section header"});
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!parse_subcommand(section))
        result.errors.push_back({line_no, section, fmt::format("unknown section [{}]", section)});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      result.errors.push_back({line_no, "", fmt::format("expected key = value, got '{}'", line)});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (setters().find(key) == setters().end()) {
      result.errors.push_back({line_no, key, fmt::format("unknown key '{}'", key)});
      continue;
    }
    auto& target = section.empty() ? global : sections[section];
    if (target.count(key)) {
      result.errors.push_back({line_no, key, fmt::format("duplicate key '{}'", key)});
      continue;
    }
    target[key] = {value, line_no};
  }

  // Every entry is type- and range-checked, including sections that will not
  // be applied to this run.
  RunConfig scratch;
  const auto check = [&](const std::string& key, const Entry& entry) {
    if (auto msg = setters().at(key)(scratch, entry.value); !msg.empty())
      result.errors.push_back({entry.line, key, fmt::format("{}: {}", key, msg)});
  };
  for (const auto& [key, entry] : global) check(key, entry);
  for (const auto& [name, entries] : sections)
    for (const auto& [key, entry] : entries) {
      if (key == "command") {
        result.errors.push_back({entry.line, key, "command may only be set globally"});
        continue;
      }
      check(key, entry);
    }
  if (!result.errors.empty()) return result;

  RunConfig config;
  if (command) {
    config.command = *command;
  } else if (const auto it = global.find("command"); it != global.end()) {
    config.command = *parse_subcommand(it->second.value);
  } else {
    result.errors.push_back({0, "command", "no subcommand given"});
    return result;
  }
  std::map<std::string, int> lines;
  for (const auto& [key, entry] : global) {
    if (key == "command") continue;
    (void)setters().at(key)(config, entry.value);
    lines[key] = entry.line;
  }
  if (const auto it = sections.find(std::string(to_string(config.command))); it != sections.end()) {
    for (const auto& [key, entry] : it->second) {
      (void)setters().at(key)(config, entry.value);
      lines[key] = entry.line;
    }
  }
  check_semantics(config, lines, result.errors);
  if (result.errors.empty()) result.config = std::move(config);
  return result;
}

std::string format_kernel(const KernelSpec& kernel) {
  if (kernel.simple) return "simple";
  std::string out;
  for (std::size_t i = 0; i < kernel.jumps.size(); ++i) {
    const auto& j = kernel.jumps[i];
    out += i ? " (" : "(";
    for (std::size_t c = 0; c < j.displacement.size(); ++c) out += (c ? "," : "") + std::to_string(j.displacement[c]);
    out += "):" + number(j.probability);
  }
  return out;
}

std::string serialize_config(const RunConfig& c) {
  std::string out;
  const auto put = [&out](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  put("command", std::string(to_string(c.command)));
  put("run_id", c.run_id);
  put("d", std::to_string(c.d));
  put("kernel", format_kernel(c.kernel));
  put("rho", number(c.rho));
  put("beta", number_list(c.beta));
  put("t", number_list(c.t));
  put("n", std::to_string(c.n));
  put("seed", std::to_string(c.seed));
  put("tolerance", number(c.tolerance));
  put("series_tolerance", number(c.series_tolerance));
  put("max_step", number(c.max_step));
  put("initial_radius", std::to_string(c.initial_radius));
  put("max_sites", std::to_string(c.max_sites));
  put("delta_beta", number(c.delta_beta));
  put("threads", std::to_string(c.threads));
  put("out", c.out);
  put("onset", c.onset ? "true" : "false");
  put("window_lo", number(c.window_lo));
  put("window_hi", number(c.window_hi));
  put("window_points", std::to_string(c.window_points));
  put("step_cap", std::to_string(c.step_cap));
  return out;
}

JumpKernel make_kernel(const RunConfig& config) {
  if (config.kernel.simple) return JumpKernel::simple(config.d);
  return JumpKernel::from_pmf(config.d, config.kernel.jumps);
}

std::string format_issue(const ConfigIssue& issue) {
  if (issue.line > 0) return fmt::format("line {}: {}", issue.line, issue.message);
  return issue.message;
}

}  // namespace pinlab::io
