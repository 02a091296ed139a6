#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pinlab/error.hpp"
#include "pinlab/fk_engine.hpp"
#include "pinlab/numerics.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/walk_core.hpp"

namespace pinlab {
namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix multiply(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  Matrix c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

// exp(M) by scaling and squaring of a Taylor polynomial.
Matrix expm(Matrix m) {
  const std::size_t n = m.size();
  double norm = 0.0;
  for (const auto& row : m) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    norm = std::max(norm, s);
  }
  int squarings = 0;
  while (norm > 0.25) {
    norm /= 2;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (auto& row : m)
    for (double& v : row) v *= scale;
  Matrix result(n, std::vector<double>(n, 0.0)), term(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) result[i][i] = term[i][i] = 1.0;
  for (int k = 1; k <= 18; ++k) {
    term = multiply(term, m);
    for (auto& row : term)
      for (double& v : row) v /= k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) result = multiply(result, result);
  return result;
}

// Feynman-Kac in the absolute frame for d = 1 on {-R..R} (killed outside):
// between jumps of Y the potential beta sits at Y's current site.
double dense_log_partition(const JumpKernel& kernel, const DisorderPath& y, double beta, double t, bool pinned,
                           int R = 40) {
  const int n = 2 * R + 1;
  const auto generator = [&](int defect) {
    Matrix q(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      q[i][i] = -1.0;
      for (const auto& jump : kernel.jumps()) {
        const int j = i + jump.displacement[0];
        if (j >= 0 && j < n) q[i][j] += jump.probability;
      }
    }
    q[defect + R][defect + R] += beta;
    return q;
  };
  std::vector<double> row(n, 0.0);
  row[R] = 1.0;
  double s = 0.0;
  int position = 0;
  const auto advance = [&](double dt) {
    auto m = generator(position);
    for (auto& r : m)
      for (double& v : r) v *= dt;
    const auto e = expm(m);
    std::vector<double> next(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) next[j] += row[i] * e[i][j];
    row = next;
  };
  for (const auto& jump : y.jumps()) {
    if (jump.time > t) break;
    advance(jump.time - s);
    s = jump.time;
    position += jump.displacement[0];
  }
  advance(t - s);
  if (pinned) return std::log(row[position + R]);
  double total = 0.0;
  for (double v : row) total += v;
  return std::log(total);
}

// One path of X: local time with Y and whether X_t = Y_t.
std::pair<double, bool> simulate_overlap(const JumpKernel& kernel, const DisorderPath& y, double t, RandomStream& rng) {
  double s = 0.0, local = 0.0;
  int x = 0;
  std::size_t next_y = 0;
  double next_x = rng.exponential(1.0);
  while (true) {
    const double ty = next_y < y.jumps().size() ? y.jumps()[next_y].time : INFINITY;
    const double event = std::min({next_x, ty, t});
    if (x == y.position(s)[0]) local += event - s;
    s = event;
    if (event == t) break;
    if (event == next_x) {
      x += kernel.sample(rng)[0];
      next_x = s + rng.exponential(1.0);
    } else {
      ++next_y;
    }
  }
  return {local, x == y.position(t)[0]};
}

const JumpKernel& simple1() {
  static const auto k = JumpKernel::simple(1);
  return k;
}

TEST(FkEngine, ZeroCouplingGivesReturnProbability) {
  const auto r = pinned_log_partition(simple1(), DisorderPath::constant(1, 1.0), 0.0, 1.0);
  EXPECT_NEAR(r.log_z, -0.764085641493, 1e-9);
  const auto k3 = JumpKernel::simple(3);
  EXPECT_NEAR(pinned_log_partition(k3, DisorderPath::constant(3, 1.0), 0.0, 1.0).log_z,
              std::log(0.399621141614625), 1e-8);
  EXPECT_NEAR(free_log_partition(k3, DisorderPath::constant(3, 2.0), 0.0, 2.0).log_z, 0.0, 1e-8);
}

TEST(FkEngine, PinnedMatchesDenseOracleWithoutDisorder) {
  for (double beta : {-1.0, 0.5, 1.0, 3.0}) {
    const auto y = DisorderPath::constant(1, 10.0);
    const auto r = pinned_log_partition(simple1(), y, beta, 10.0);
    EXPECT_NEAR(r.log_z, dense_log_partition(simple1(), y, beta, 10.0, true), 1e-7) << beta;
    EXPECT_LE(std::abs(r.certificate), 1e-6);
  }
  EXPECT_NEAR(pinned_log_partition(simple1(), DisorderPath::constant(1, 10.0), 1.0, 10.0).log_z,
              3.795783, 1e-6);
}

TEST(FkEngine, MatchesDenseOracleAlongDisorderPath) {
  const auto kernels = {simple1(), JumpKernel::from_pmf(1, {{{1}, 0.25}, {{-1}, 0.25}, {{2}, 0.25}, {{-2}, 0.25}})};
  for (const auto& k : kernels) {
    const auto y = sample_disorder(k, 1.0, 6.0, 3, 0);
    ASSERT_GT(y.jumps().size(), 2u);
    for (double beta : {0.7, 2.0}) {
      EXPECT_NEAR(pinned_log_partition(k, y, beta, 6.0).log_z, dense_log_partition(k, y, beta, 6.0, true), 1e-7);
      EXPECT_NEAR(free_log_partition(k, y, beta, 6.0).log_z, dense_log_partition(k, y, beta, 6.0, false), 1e-7);
    }
  }
}

TEST(FkEngine, AgreesWithEventDrivenMonteCarlo) {
  const double beta = 3.0, t = 4.0;
  const auto y = sample_disorder(simple1(), 1.0, t, 17, 0);
  RandomStream rng(99, 0);
  num::RunningStats z;
  for (int i = 0; i < 400000; ++i) {
    const auto [local, pinned] = simulate_overlap(simple1(), y, t, rng);
    z.add(pinned ? std::exp(beta * local) : 0.0);
  }
  const double solver = std::exp(pinned_log_partition(simple1(), y, beta, t).log_z);
  EXPECT_NEAR(z.mean(), solver, 3 * z.stderr_of_mean()) << "stderr " << z.stderr_of_mean();
}

TEST(FkEngine, MonotoneInRadiusAndBeta) {
  const auto k = JumpKernel::simple(2);
  const auto y = sample_disorder(k, 1.0, 5.0, 8, 0);
  double previous = -INFINITY;
  for (int R : {4, 8, 16, 32}) {
    const double v = log_partition_at_radius(k, y, 1.5, 0.0, 5.0, R, true);
    EXPECT_GE(v, previous - 1e-12) << R;
    previous = v;
  }
  previous = -INFINITY;
  for (double beta : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
    const double v = pinned_log_partition(k, y, beta, 5.0).log_z;
    EXPECT_GT(v, previous) << beta;
    previous = v;
  }
}

TEST(FkEngine, ConvexInBeta) {
  const auto y = sample_disorder(simple1(), 2.0, 8.0, 12, 0);
  const double h = 0.25;
  for (double beta : {0.5, 1.5, 3.0}) {
    const double lo = pinned_log_partition(simple1(), y, beta - h, 8.0).log_z;
    const double mid = pinned_log_partition(simple1(), y, beta, 8.0).log_z;
    const double hi = pinned_log_partition(simple1(), y, beta + h, 8.0).log_z;
    EXPECT_GE(lo + hi - 2 * mid, -1e-6) << beta;
  }
}

TEST(FkEngine, ElementaryBounds) {
  const auto y = DisorderPath::constant(1, 5.0);
  for (double beta : {0.5, 2.0, 5.0}) {
    const double pin = pinned_log_partition(simple1(), y, beta, 5.0).log_z;
    const double free = free_log_partition(simple1(), y, beta, 5.0).log_z;
    EXPECT_LE(pin, free + 1e-9);
    EXPECT_GE(pin, std::log(return_probability(simple1(), 5.0)));  // L >= 0
    EXPECT_GE(pin, (beta - 1.0) * 5.0);                            // X stays at 0
  }
  // Free Z at d=1, beta=2, t=5 lies inside the exponential sandwich.
  const double free = std::exp(free_log_partition(simple1(), y, 2.0, 5.0).log_z);
  EXPECT_GT(free, std::exp(5.0));
  EXPECT_LT(free, std::exp(1.5 * 5.0) * 1.5);
}

TEST(FkEngine, IntervalEqualsShiftedPath) {
  const auto y = sample_disorder(simple1(), 1.5, 10.0, 31, 0);
  const double t1 = 3.0, t2 = 8.0;
  std::vector<DisorderJump> shifted;
  for (const auto& jump : y.jumps())
    if (jump.time > t1 && jump.time <= t2) shifted.push_back({jump.time - t1, jump.displacement});
  const DisorderPath z(1, y.rate(), t2 - t1, y.seed(), shifted);
  EXPECT_NEAR(interval_log_partition(simple1(), y, 1.2, t1, t2).log_z,
              pinned_log_partition(simple1(), z, 1.2, t2 - t1).log_z, 1e-9);
}

TEST(FkEngine, MeanLocalTime) {
  const auto y = sample_disorder(simple1(), 1.0, 5.0, 2, 0);
  const double lt = mean_local_time(simple1(), y, 1.0, 5.0);
  const double h = 1e-3;
  const double fd = (dense_log_partition(simple1(), y, 1.0 + h, 5.0, true) -
                     dense_log_partition(simple1(), y, 1.0 - h, 5.0, true)) / (2 * h);
  EXPECT_NEAR(lt, fd, 1e-4);
  EXPECT_GE(lt, 0.0);
  EXPECT_LE(lt, 5.0);
  // Long pinned run without disorder: the contact fraction 2/sqrt(5) at beta = 2.
  const double frac = mean_local_time(simple1(), DisorderPath::constant(1, 40.0), 2.0, 40.0) / 40.0;
  EXPECT_NEAR(frac, 2.0 / std::sqrt(5.0), 0.02);
}

TEST(FkEngine, Errors) {
  const auto y = DisorderPath::constant(1, 5.0);
  EXPECT_THROW(pinned_log_partition(simple1(), y, 1.0, -1.0), Error);
  EXPECT_THROW(pinned_log_partition(simple1(), y, 1.0, 6.0), Error);  // past the path horizon
  EXPECT_THROW(pinned_log_partition(JumpKernel::simple(2), y, 1.0, 5.0), Error);
  SolverOptions cramped;
  cramped.max_sites_per_axis = 9;
  try {
    pinned_log_partition(simple1(), DisorderPath::constant(1, 30.0), 0.5, 30.0, cramped);
    FAIL() << "expected ToleranceNotMet";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ToleranceNotMet);
  }
}

}  // namespace
}  // namespace pinlab
