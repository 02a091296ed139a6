#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include <json.hpp>

#include "pinlab/error.hpp"
#include "pinlab/io/manifest.hpp"
#include "pinlab/io/records.hpp"

namespace pinlab::io {
namespace {

TEST(CsvNumber, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1.516386059151978}) {
    const auto s = csv_number(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
  EXPECT_EQ(csv_number(std::nan("")), "");
}

TEST(CsvTable, LayoutAndWidthCheck) {
  CsvTable t({"a", "b"});
  t.add_row({"1", "2"});
  t.add_row({"", "x"});
  EXPECT_EQ(t.str(), "a,b\n1,2\n,x\n");
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_THROW(t.add_row({"1"}), Error);
}

TEST(PartitionRows, FailedCellsBlankTheirNumbers) {
  auto t = partition_table();
  SolveRecord ok;
  ok.seed = 3;
  ok.sample = 1;
  ok.dimension = 1;
  ok.rho = 0.5;
  ok.result = {1.25, 2.0, 0.0, 4.0, 16, 1e-9, true};
  SolveRecord bad = ok;
  bad.status = {false, "ToleranceNotMet: radius cap reached", 0.1};
  add_partition_row(t, "x", ok);
  add_partition_row(t, "x", bad);
  EXPECT_EQ(t.str(),
            "run_id,seed,d,rho,beta,t,R,logZ,cert,pinned,sample,status\n"
            "x,3,1,0.5,2,4,16,1.25,1.0000000000000001e-09,1,1,ok\n"
            "x,3,1,0.5,2,4,,,,1,1,ToleranceNotMet\n");
}

TEST(RenewalJson, KeysAndInfinities) {
  RenewalEstimate e;
  e.beta = 1;
  e.t = 5;
  e.n = 10;
  e.hits = 0;
  e.log_z = -std::numeric_limits<double>::infinity();
  e.ci_lo = e.log_z;
  e.ci_hi = -2.0;
  const auto j = nlohmann::ordered_json::parse(renewal_summary_json(e));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"beta", "t", "n", "hits", "logZ_est", "ci_lo", "ci_hi", "acc_rate",
                                            "truncated_bias_bound"}));
  EXPECT_TRUE(j["logZ_est"].is_null());
  EXPECT_EQ(j["ci_hi"].get<double>(), -2.0);
}

TEST(Manifest, HashAndJson) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  RunManifest m;
  m.command = "green";
  m.version = std::string(library_version());
  m.cells.push_back({"d=3", true, "", 0.5});
  m.outputs.push_back({"green.csv", fnv1a64("x"), 1});
  const auto j = nlohmann::json::parse(to_json(m));
  EXPECT_EQ(j["command"], "green");
  EXPECT_EQ(j["cells"][0]["status"], "ok");
  EXPECT_EQ(j["outputs"][0]["file"], "green.csv");
  EXPECT_FALSE(library_version().empty());
}

}  // namespace
}  // namespace pinlab::io
