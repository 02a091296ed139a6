#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "pinlab/io/config.hpp"
#include "pinlab/io/dispatch.hpp"
#include "pinlab/io/manifest.hpp"

namespace pinlab::io {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::map<Subcommand, std::string>& small_configs() {
  static const std::map<Subcommand, std::string> configs = {
      {Subcommand::Green, "d = 3\n"},
      {Subcommand::Annealed, "d = 3\nrho = 1\nbeta = 0.5, 2\nonset = true\n"},
      {Subcommand::Quenched, "d = 1\nrho = 1\nbeta = 1\nt = 1, 2\nn = 3\n"},
      {Subcommand::LowTemp, "d = 1\nrho = 1\nbeta = 5\nt = 2\nn = 2\n"},
      {Subcommand::Smoothing, "d = 3\nrho = 1\nbeta = 1.5, 3\nt = 2\nn = 2\n"},
      {Subcommand::Sandwich, "d = 1\nbeta = 1, 2\nt = 1\n"},
      {Subcommand::RenewalMc, "d = 1\nbeta = 0, 1\nt = 2\nn = 100\n"},
  };
  return configs;
}

class DispatchTest : public ::testing::Test {
protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("pinlab_dispatch_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  RunConfig config(Subcommand c, const std::string& out, const std::string& extra = "") const {
    auto r = parse_config(small_configs().at(c) + extra, c);
    EXPECT_TRUE(r.ok());
    r.config->out = (root_ / out).string();
    return *r.config;
  }

  fs::path root_;
};

// Column set and order per subcommand are frozen in golden/<name>.txt as
// "file|header" lines.
TEST_F(DispatchTest, CsvSchemasMatchGoldenFiles) {
  for (const auto& [command, text] : small_configs()) {
    const auto name = std::string(to_string(command));
    const auto result = dispatch(config(command, name));
    EXPECT_EQ(result.exit_code, 0) << name << (result.failures.empty() ? "" : ": " + result.failures[0]);
    std::ifstream golden(fs::path(PINLAB_GOLDEN_DIR) / (name + ".txt"));
    ASSERT_TRUE(golden) << name;
    std::string line;
    std::size_t csv_files = 0;
    while (std::getline(golden, line)) {
      const auto bar = line.find('|');
      const auto file = line.substr(0, bar);
      const auto content = slurp(root_ / name / file);
      EXPECT_EQ(content.substr(0, content.find('\n')), line.substr(bar + 1)) << name << "/" << file;
      ++csv_files;
    }
    std::size_t produced = 0;
    for (const auto& f : result.files) produced += f.ends_with(".csv");
    EXPECT_EQ(produced, csv_files) << name;
  }
}

TEST_F(DispatchTest, GreenRowAndManifest) {
  const auto result = dispatch(config(Subcommand::Green, "g"));
  ASSERT_EQ(result.exit_code, 0);
  const auto csv = slurp(root_ / "g" / "green.csv");
  std::istringstream lines(csv);
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_FALSE(std::getline(lines, extra));
  std::vector<std::string> cells;
  std::stringstream cs(row);
  for (std::string c; std::getline(cs, c, ',');) cells.push_back(c);
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_NEAR(std::stod(cells[3]), 1.51639, 1e-5);

  const auto manifest = nlohmann::json::parse(slurp(root_ / "g" / "manifest.json"));
  EXPECT_EQ(manifest["exit_status"], 0);
  EXPECT_EQ(manifest["command"], "green");
  const auto echoed = parse_config(manifest["config"].get<std::string>());
  ASSERT_TRUE(echoed.ok());
  EXPECT_EQ(echoed.config->d, 3);
  ASSERT_EQ(manifest["outputs"].size(), 1u);
  const auto& entry = manifest["outputs"][0];
  EXPECT_EQ(entry["file"], "green.csv");
  EXPECT_EQ(entry["bytes"], csv.size());
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(csv)));
  EXPECT_EQ(entry["fnv1a64"], hex);
}

TEST_F(DispatchTest, RerunIsByteIdentical) {
  for (auto command : {Subcommand::Quenched, Subcommand::RenewalMc, Subcommand::LowTemp}) {
    auto a = config(command, "a"), b = config(command, "b");
    b.threads = 2;
    ASSERT_EQ(dispatch(a).exit_code, 0);
    const auto rb = dispatch(b);
    ASSERT_EQ(rb.exit_code, 0);
    for (const auto& f : rb.files) {
      if (f == "manifest.json") continue;
      EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
    }
    fs::remove_all(root_ / "a");
    fs::remove_all(root_ / "b");
  }
}

TEST_F(DispatchTest, FailuresGiveExitOne) {
  auto c = config(Subcommand::Green, "d2");
  c.d = 2;
  const auto r = dispatch(c);
  EXPECT_EQ(r.exit_code, 1);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_NE(r.failures[0].find("Divergent"), std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(root_ / "d2" / "manifest.json"));
  EXPECT_EQ(manifest["exit_status"], 1);
  EXPECT_EQ(manifest["cells"][0]["status"], "failed");

  // A radius cap too small for the horizon fails the cell, not the run.
  auto q = config(Subcommand::Quenched, "cramped", "max_sites = 5\n");
  q.t = {20.0};
  const auto rq = dispatch(q);
  EXPECT_EQ(rq.exit_code, 1);
  EXPECT_NE(slurp(root_ / "cramped" / "quenched.csv").find("ToleranceNotMet"), std::string::npos);
}

}  // namespace
}  // namespace pinlab::io
