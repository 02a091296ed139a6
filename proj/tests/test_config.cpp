#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "pinlab/io/config.hpp"
#include "pinlab/rng.hpp"

namespace pinlab::io {
namespace {

bool mentions(const ParseResult& r, const std::string& key, int line) {
  return std::any_of(r.errors.begin(), r.errors.end(),
                     [&](const ConfigIssue& i) { return i.key == key && i.line == line; });
}

TEST(ParseConfig, ValidWithDefaults) {
  const auto r = parse_config("rho=1.0\nbeta=2.0\nd=3", Subcommand::Annealed);
  ASSERT_TRUE(r.ok());
  RunConfig expect;
  expect.command = Subcommand::Annealed;
  expect.rho = 1.0;
  expect.beta = {2.0};
  expect.d = 3;
  EXPECT_EQ(*r.config, expect);
}

TEST(ParseConfig, RangeErrorNamesKey) {
  const auto r = parse_config("rho=-1", Subcommand::Green);
  ASSERT_FALSE(r.ok());
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].key, "rho");
  EXPECT_EQ(r.errors[0].line, 1);
  EXPECT_NE(format_issue(r.errors[0]).find("rho"), std::string::npos);
}

TEST(ParseConfig, CollectsEveryError) {
  const auto r = parse_config("d = 0\nbogus = 1\n# fine\nbeta = 1, x\nn = 2.5\nseed = -3\nd = 2\nonset = yes\n",
                              Subcommand::Quenched);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "d", 1));
  EXPECT_TRUE(mentions(r, "bogus", 2));
  EXPECT_TRUE(mentions(r, "beta", 4));
  EXPECT_TRUE(mentions(r, "n", 5));
  EXPECT_TRUE(mentions(r, "seed", 6));
  EXPECT_TRUE(mentions(r, "d", 7));  // duplicate
  EXPECT_TRUE(mentions(r, "onset", 8));
  EXPECT_EQ(r.errors.size(), 7u);
}

TEST(ParseConfig, SectionsOverrideGlobals) {
  const std::string text = "d = 1\nbeta = 1\n[lowtemp]\nbeta = 10, 20\nt = 50\n[annealed]\nd = 3\n";
  const auto low = parse_config(text, Subcommand::LowTemp);
  ASSERT_TRUE(low.ok());
  EXPECT_EQ(low.config->beta, (std::vector<double>{10, 20}));
  EXPECT_EQ(low.config->d, 1);
  const auto ann = parse_config(text, Subcommand::Annealed);
  ASSERT_TRUE(ann.ok());
  EXPECT_EQ(ann.config->d, 3);
  EXPECT_EQ(ann.config->beta, (std::vector<double>{1}));
}

TEST(ParseConfig, StructuralErrors) {
  EXPECT_TRUE(mentions(parse_config("[nosuch]\n", Subcommand::Green), "nosuch", 1));
  EXPECT_TRUE(mentions(parse_config("[green]\ncommand = green\n", Subcommand::Green), "command", 2));
  EXPECT_FALSE(parse_config("just words\n", Subcommand::Green).ok());
  EXPECT_FALSE(parse_config("[green\n", Subcommand::Green).ok());
  EXPECT_FALSE(parse_config("d = 3\n").ok());  // no subcommand anywhere
  const auto r = parse_config("command = sandwich\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.config->command, Subcommand::Sandwich);
}

TEST(ParseConfig, SubcommandRules) {
  EXPECT_FALSE(parse_config("d = 2\nrho = 1\n", Subcommand::Smoothing).ok());
  EXPECT_FALSE(parse_config("d = 3\nrho = 0\n", Subcommand::Smoothing).ok());
  EXPECT_FALSE(parse_config("d = 3\nrho = 1\nbeta = 3, 2\n", Subcommand::Smoothing).ok());
  EXPECT_TRUE(parse_config("d = 3\nrho = 1\nbeta = 2, 3\n", Subcommand::Smoothing).ok());
  EXPECT_FALSE(parse_config("beta = 0\n", Subcommand::Sandwich).ok());
  EXPECT_FALSE(parse_config("beta = -1\n", Subcommand::LowTemp).ok());
  EXPECT_FALSE(parse_config("beta = -1\n", Subcommand::RenewalMc).ok());
  EXPECT_TRUE(parse_config("beta = -1\n", Subcommand::Quenched).ok());
  EXPECT_FALSE(parse_config("n = 1\n", Subcommand::Quenched).ok());
  EXPECT_FALSE(parse_config("t = 5, 2\n", Subcommand::Quenched).ok());
  EXPECT_FALSE(parse_config("window_lo = 0.1\nwindow_hi = 0.01\n", Subcommand::Annealed).ok());
}

TEST(ParseConfig, Kernels) {
  const auto r = parse_config("d = 1\nkernel = (1):0.25 (-1):0.25 (2):0.25 (-2):0.25\n", Subcommand::Green);
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r.config->kernel.simple);
  EXPECT_EQ(r.config->kernel.jumps.size(), 4u);
  EXPECT_FALSE(make_kernel(*r.config).is_simple());
  // Wrong dimension, asymmetric, garbage.
  EXPECT_FALSE(parse_config("d = 2\nkernel = (1):0.5 (-1):0.5\n", Subcommand::Green).ok());
  EXPECT_FALSE(parse_config("d = 1\nkernel = (1):0.7 (-1):0.3\n", Subcommand::Green).ok());
  EXPECT_FALSE(parse_config("d = 1\nkernel = (1:0.5\n", Subcommand::Green).ok());
}

// Generated configs over the valid domain: serialize then parse gives the
// same config back, field for field.
RunConfig random_config(RandomStream& rng) {
  const auto& commands = all_subcommands();
  const auto real = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  const auto integer = [&](int lo, int hi) { return lo + int(rng.next_u64() % std::uint64_t(hi - lo + 1)); };
  RunConfig c;
  c.command = commands[rng.next_u64() % commands.size()];
  c.run_id = "r" + std::to_string(rng.next_u64() % 100000);
  c.d = c.command == Subcommand::Smoothing ? integer(3, 5) : integer(1, 5);
  if (rng.uniform() < 0.3 && c.d <= 2) {
    c.kernel.simple = false;
    const double p = real(0.05, 0.45);
    if (c.d == 1)
      c.kernel.jumps = {{{1}, p}, {{-1}, p}, {{2}, 0.5 - p}, {{-2}, 0.5 - p}};
    else
      c.kernel.jumps = {{{1, 0}, p}, {{-1, 0}, p}, {{1, 1}, 0.5 - p}, {{-1, -1}, 0.5 - p}};
  }
  c.rho = c.command == Subcommand::Smoothing ? real(0.1, 4.0) : (rng.uniform() < 0.2 ? 0.0 : real(0.0, 4.0));
  c.beta.clear();
  double b = real(0.01, 2.0);
  for (int i = integer(1, 6); i > 0; --i) {
    c.beta.push_back(b);
    b += real(1e-3, 5.0);
  }
  c.t.clear();
  double t = real(0.1, 5.0);
  for (int i = integer(1, 5); i > 0; --i) {
    c.t.push_back(t);
    t += real(0.0, 20.0);
  }
  c.n = integer(2, 5000);
  c.seed = rng.next_u64();
  c.tolerance = std::exp(real(-30.0, 0.0));
  c.series_tolerance = std::exp(real(-40.0, -5.0));
  c.max_step = rng.uniform() < 0.5 ? 0.0 : real(0.01, 2.0);
  c.initial_radius = integer(0, 200);
  c.max_sites = integer(0, 4000);
  c.delta_beta = std::exp(real(-15.0, -1.0));
  c.threads = integer(0, 64);
  c.out = "out/run_" + std::to_string(rng.next_u64() % 1000);
  c.onset = rng.uniform() < 0.5;
  c.window_lo = real(1e-4, 1e-2);
  c.window_hi = c.window_lo * real(1.5, 100.0);
  c.window_points = integer(8, 40);
  c.step_cap = 1 + rng.next_u64() % 100'000'000;
  return c;
}

TEST(ParseConfig, SerializeRoundTripProperty) {
  RandomStream rng(2024, 0);
  for (int i = 0; i < 500; ++i) {
    const auto c = random_config(rng);
    const auto text = serialize_config(c);
    const auto r = parse_config(text);
    ASSERT_TRUE(r.ok()) << text << (r.errors.empty() ? "" : format_issue(r.errors[0]));
    EXPECT_EQ(*r.config, c) << text;
    EXPECT_EQ(serialize_config(*r.config), text);
  }
}

TEST(Subcommands, NamesRoundTrip) {
  for (auto c : all_subcommands()) EXPECT_EQ(parse_subcommand(to_string(c)), c);
  EXPECT_EQ(to_string(Subcommand::RenewalMc), "renewal-mc");
  EXPECT_FALSE(parse_subcommand("renewal").has_value());
  EXPECT_EQ(all_subcommands().size(), 7u);
}

}  // namespace
}  // namespace pinlab::io
