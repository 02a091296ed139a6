// pinlab <subcommand> [--config PATH] [--out DIR] [--seed N] [--threads N] [--tolerance X]
//
// Exit status: 0 all cells valid, 1 a cell failed or a hard invariant was
// violated, 2 the configuration was rejected (nothing is written).

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pinlab/io/config.hpp"
#include "pinlab/io/dispatch.hpp"

namespace {

constexpr int kInvalidConfig = 2;

int reject(std::vector<pinlab::io::ConfigIssue> issues) {
  std::stable_sort(issues.begin(), issues.end(), [](const auto& a, const auto& b) { return a.line < b.line; });
  nlohmann::ordered_json summary;
  summary["exit_status"] = kInvalidConfig;
  summary["errors"] = nlohmann::json::array();
  for (const auto& issue : issues) {
    std::cerr << "pinlab: " << pinlab::io::format_issue(issue) << '\n';
    summary["errors"].push_back({{"line", issue.line}, {"key", issue.key}, {"message", issue.message}});
  }
  std::cout << summary.dump() << '\n';
  return kInvalidConfig;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pinlab::io;

  CLI::App app{"pinning model numerics"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(PINLAB_TOOL_VERSION));

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tolerance;
  for (auto command : all_subcommands()) {
    auto* sub = app.add_subcommand(std::string(to_string(command)));
    sub->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--threads", threads, "worker threads (0: PINLAB_THREADS or hardware)");
    sub->add_option("--tolerance", tolerance, "solver truncation tolerance");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalidConfig;
  }
  const auto command = *parse_subcommand(app.get_subcommands().front()->get_name());

  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }
  auto parsed = parse_config(text, command);
  if (!parsed.ok()) return reject(parsed.errors);

  RunConfig config = *parsed.config;
  if (out) config.out = *out;
  if (seed) config.seed = *seed;
  if (threads) config.threads = *threads;
  if (tolerance) config.tolerance = *tolerance;
  // Overrides go through the same validation as file values.
  auto checked = parse_config(serialize_config(config), command);
  if (!checked.ok()) {
    for (auto& issue : checked.errors) issue.line = 0;
    return reject(checked.errors);
  }

  const auto result = dispatch(*checked.config);
  if (result.exit_code != 0) {
    nlohmann::ordered_json summary;
    summary["exit_status"] = result.exit_code;
    summary["failures"] = result.failures;
    std::cout << summary.dump() << '\n';
    for (const auto& f : result.failures) std::cerr << "pinlab: " << f << '\n';
  }
  return result.exit_code;
}
