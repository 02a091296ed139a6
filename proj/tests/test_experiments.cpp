#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "pinlab/annealed.hpp"
#include "pinlab/error.hpp"
#include "pinlab/experiments.hpp"
#include "pinlab/fk_engine.hpp"

namespace pinlab {
namespace {

ExperimentOptions threads(int n) {
  ExperimentOptions o;
  o.threads = n;
  return o;
}

TEST(ParallelFor, RunsEveryIndexAndRethrowsFirstFailure) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), 3, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);

  std::atomic<int> ran{0};
  try {
    parallel_for(50, 4, [&](std::size_t i) {
      ++ran;
      if (i == 7 || i == 30) throw std::runtime_error("cell " + std::to_string(i));
    });
    FAIL() << "expected a rethrow";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "cell 7");
  }
  EXPECT_EQ(ran.load(), 50);
}

TEST(ParallelFor, ThreadResolution) {
  EXPECT_EQ(resolve_threads(5), 5);
  setenv("PINLAB_THREADS", "3", 1);
  EXPECT_EQ(resolve_threads(0), 3);
  unsetenv("PINLAB_THREADS");
  EXPECT_GE(resolve_threads(0), 1);
}

TEST(QuenchedEstimate, IndependentOfThreadCountAndUsesNestedPaths) {
  const auto k = JumpKernel::simple(1);
  const std::vector<double> grid{2.0, 4.0};
  const auto a = quenched_fe_estimate(k, 1.0, 1.0, grid, 5, 11, threads(1));
  const auto b = quenched_fe_estimate(k, 1.0, 1.0, grid, 5, 11, threads(3));
  ASSERT_EQ(a.records.size(), 10u);
  for (std::size_t i = 0; i < a.records.size(); ++i)
    EXPECT_EQ(a.records[i].result.log_z, b.records[i].result.log_z);  // bitwise
  EXPECT_EQ(a.mean, b.mean);
  // Sample 2 at t = 2 is the prefix of the t = 4 path of the same stream.
  const auto y = sample_disorder(k, 1.0, 4.0, 11, 2);
  EXPECT_EQ(a.records[2].result.log_z, pinned_log_partition(k, y, 1.0, 2.0).log_z);
  EXPECT_EQ(a.records[2].result.t2, 2.0);
  EXPECT_EQ(a.records[7].result.t2, 4.0);
  EXPECT_EQ(a.valid, (std::vector<int>{5, 5}));
}

TEST(QuenchedEstimate, JensenAgainstAnnealed) {
  const auto k = JumpKernel::simple(1);
  const auto c = quenched_fe_estimate(k, 2.0, 1.0, {6.0}, 8, 3);
  EXPECT_LE(c.mean[0], annealed_free_energy(k, 2.0, 1.0) + 3 * c.stderr_[0]);
}

TEST(LowTemp, FormulaOnHandBuiltPath) {
  const auto k = JumpKernel::simple(1);
  const DisorderPath y(1, 1.0, 5.0, 0, {{1.0, {1}}, {1.3, {-1}}, {4.0, {1}}});
  const double beta = 4.0, cap = std::pow(4.0, -2.0 / 3.0);
  const auto corr = [&](double em, double ep) { return std::log(1 - (std::exp(-beta * em) + std::exp(-beta * ep)) / 2); };
  const double expect = 3.0 + (3 * std::log(0.25) + corr(cap, 0.15) + corr(0.15, cap) + corr(cap, cap)) / 5.0;
  EXPECT_NEAR(lowtemp_lower_bound_formula(k, y, beta, 5.0), expect, 1e-14);
  // No jumps: just beta - 1.
  EXPECT_EQ(lowtemp_lower_bound_formula(k, DisorderPath::constant(1, 5.0), beta, 5.0), 3.0);
}

TEST(LowTemp, BoundNeverExceedsSolver) {
  const auto k1 = JumpKernel::simple(1);
  const auto k2 = JumpKernel::from_pmf(2, {{{1, 0}, 0.2}, {{-1, 0}, 0.2}, {{1, 1}, 0.3}, {{-1, -1}, 0.3}});
  for (const auto& k : {k1, k2})
    for (std::uint64_t i = 0; i < 6; ++i) {
      const auto y = sample_disorder(k, 1.0, 8.0, 40, i);
      for (double beta : {2.0, 8.0, 20.0}) {
        const double solver = pinned_log_partition(k, y, beta, 8.0).log_z / 8.0;
        EXPECT_LE(lowtemp_lower_bound_formula(k, y, beta, 8.0), solver + 1e-6) << beta << " " << i;
      }
    }
}

TEST(LowTemp, PredictionAndReport) {
  EXPECT_NEAR(lowtemp_prediction(JumpKernel::simple(1), 1.0, 20.0), 19.0 - std::log(20.0), 1e-14);
  EXPECT_NEAR(lowtemp_prediction(JumpKernel::simple(3), 2.0, 10.0), 9.0 - 2.0 * std::log(30.0), 1e-13);
  const auto report = lowtemp_report(JumpKernel::simple(1), 1.0, {10.0, 20.0}, 10.0, 4, 5);
  ASSERT_EQ(report.rows.size(), 2u);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.valid, 4);
    EXPECT_EQ(row.violations, 0);
    EXPECT_GE(row.worst_margin, -1e-6);
    EXPECT_NEAR(row.deviation, row.measured - row.prediction, 1e-12);
  }
  EXPECT_THROW(lowtemp_report(JumpKernel::simple(1), 1.0, {10.0}, 10.0, 1, 5), Error);
}

TEST(Sandwich, BoundsHoldOnSmallGrid) {
  const auto cells = sandwich_report(JumpKernel::simple(1), {1.0, 5.0}, {1.0, 2.0});
  ASSERT_EQ(cells.size(), 4u);
  for (const auto& c : cells) {
    EXPECT_TRUE(c.status.ok) << c.status.error;
    EXPECT_TRUE(c.ok) << c.beta << " " << c.t;
    EXPECT_NEAR(c.lower, (c.beta - 1) * c.t, 1e-14);
    EXPECT_NEAR(c.upper, (c.beta - 1 + 1 / c.beta) * c.t + std::log(1 + 1 / c.beta), 1e-14);
  }
}

TEST(AnnealedIdentity, SmallRun) {
  const auto r = annealed_identity_check(JumpKernel::simple(1), 1.0, 1.0, 2.0, 3000, 6);
  EXPECT_EQ(r.valid, 3000);
  EXPECT_NEAR(r.reference,
              std::exp(pinned_log_partition(JumpKernel::simple(1), DisorderPath::constant(1, 4.0), 0.5, 4.0).log_z),
              1e-9);
  EXPECT_NEAR(r.mean_z, r.reference, 3 * r.stderr_);
}

TEST(Superadditivity, RandomSplits) {
  const auto r = superadditivity_check(JumpKernel::simple(1), 1.0, 3.0, 10.0, 30, 2);
  EXPECT_EQ(r.instances, 30);
  EXPECT_EQ(r.violations, 0);
  EXPECT_GE(r.worst_margin, -1e-6);
}

TEST(Smoothing, ReportStructure) {
  const auto r = smoothing_report(JumpKernel::simple(3), 1.0, {1.5, 3.0}, 4.0, 4, 3);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_NEAR(r.green, 1.516386059151978, 1e-9);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.valid, 4);
    EXPECT_EQ(row.envelope_defined, r.critical_found);
    EXPECT_NEAR(row.annealed, annealed_free_energy(JumpKernel::simple(3), row.beta, 1.0), 1e-12);
  }
  if (r.critical_found) {
    ASSERT_EQ(r.diagnostic.size(), 3u);
    EXPECT_EQ(r.diagnostic[0].t, 1.0);
    EXPECT_EQ(r.diagnostic[1].t, 2.0);
    EXPECT_EQ(r.diagnostic[2].t, 4.0);
    for (const auto& d : r.diagnostic) {
      EXPECT_GE(d.mean_fraction, 0.0);
      EXPECT_LE(d.mean_fraction, 1.0);
    }
  }
  EXPECT_THROW(smoothing_report(JumpKernel::simple(1), 1.0, {1.5}, 4.0, 4, 3), Error);
}

}  // namespace
}  // namespace pinlab
