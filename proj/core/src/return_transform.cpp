#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pinlab/bessel.hpp"
#include "pinlab/error.hpp"
#include "pinlab/numerics.hpp"
#include "pinlab/walk_core.hpp"

namespace pinlab {

namespace {

constexpr std::size_t kNodes = 20;
constexpr std::size_t kCheckNodes = 14;
constexpr int kAsymptoticTerms = 12;

// Coefficients C_j of p_t(0) ~ sum_j C_j t^{-d/2-j} for the simple walk,
// from the Hankel expansion e^{-x} I_0(x) ~ (2 pi x)^{-1/2} sum_k a_k x^{-k}.
std::vector<double> simple_walk_tail_coefficients(int d) {
  std::vector<double> a(kAsymptoticTerms, 0.0);
  a[0] = 1.0;
  for (int k = 1; k < kAsymptoticTerms; ++k) a[k] = a[k - 1] * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k);
  std::vector<double> c = a;
  for (int power = 1; power < d; ++power) {
    std::vector<double> next(kAsymptoticTerms, 0.0);
    for (int i = 0; i < kAsymptoticTerms; ++i)
      for (int j = 0; i + j < kAsymptoticTerms; ++j) next[i + j] += c[i] * a[j];
    c = std::move(next);
  }
  const double lead = std::pow(2.0 * std::numbers::pi / d, -0.5 * d);
  for (int j = 0; j < kAsymptoticTerms; ++j) c[j] *= lead * std::pow(static_cast<double>(d), j);
  return c;
}

}  // namespace

struct ReturnTransform::Impl {
  int dimension = 0;
  bool simple = false;
  double error = 0.0;

  // Simple walk: cached quadrature nodes on [0, T*] and the asymptotic tail.
  std::vector<double> t_nodes;
  std::vector<double> t_weights;
  std::vector<double> p_nodes;
  double t_star = 0.0;
  std::vector<double> tail_coef;

  // General kernel: discrete return sequence and fitted tail A k^{-s}(1 + a/k).
  std::vector<double> u;
  double tail_amplitude = 0.0;
  double tail_correction = 0.0;

  void build_simple(double tolerance);
  void build_general(const JumpKernel& kernel);
  LaplaceValue laplace_simple(double b) const;
  LaplaceValue laplace_general(double b) const;
};

void ReturnTransform::Impl::build_simple(double tolerance) {
  const int d = dimension;
  tail_coef = simple_walk_tail_coefficients(d);
  const auto p0 = [d](double t) {
    return std::pow(bessel_i_scaled(0, t / d), static_cast<double>(d));
  };

  // T* doubles until the first omitted asymptotic term integrates below the
  // tolerance (bounded at b = 0 when it is integrable, else at b = 1e-3).
  t_star = 64.0 * d;
  const double omitted_lead = tail_coef.back() * 8.0;
  const double s_omit = 0.5 * d + kAsymptoticTerms;
  while (omitted_lead * num::power_exp_tail(s_omit, 0.0, t_star) > 0.1 * tolerance && t_star < 1e6) t_star *= 2.0;

  // Panels: [0, 2^-12], then two per dyadic interval up to T*.
  std::vector<double> edges{0.0};
  for (double x = std::ldexp(1.0, -12); x < t_star; x *= 2.0) {
    edges.push_back(x);
    edges.push_back(1.5 * x);
  }
  edges.push_back(t_star);

  const auto& rule = num::gauss_legendre(kNodes);
  const auto& check = num::gauss_legendre(kCheckNodes);
  // The b = 1 transform is finite in every dimension; the 20 vs 14 point
  // comparison on it gives the quadrature error estimate.
  double quad_err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    const double half = 0.5 * (edges[i + 1] - edges[i]);
    double fine = 0.0;
    for (std::size_t k = 0; k < kNodes; ++k) {
      const double t = mid + half * rule.nodes[k];
      const double p = p0(t);
      t_nodes.push_back(t);
      t_weights.push_back(half * rule.weights[k]);
      p_nodes.push_back(p);
      fine += half * rule.weights[k] * std::exp(-t / t_star) * p;
    }
    double coarse = 0.0;
    for (std::size_t k = 0; k < kCheckNodes; ++k) {
      const double t = mid + half * check.nodes[k];
      coarse += half * check.weights[k] * std::exp(-t / t_star) * p0(t);
    }
    quad_err += std::abs(fine - coarse);
  }
  if (quad_err > tolerance)
    fail(ErrorKind::QuadratureFailure, "return-probability quadrature misses its tolerance");
  error = quad_err + omitted_lead * num::power_exp_tail(s_omit, 0.0, t_star);
}

LaplaceValue ReturnTransform::Impl::laplace_simple(double b) const {
  LaplaceValue out;
  for (std::size_t i = 0; i < t_nodes.size(); ++i) {
    const double w = t_weights[i] * std::exp(-b * t_nodes[i]) * p_nodes[i];
    out.value += w;
    out.derivative -= t_nodes[i] * w;
  }
  for (int j = 0; j < kAsymptoticTerms; ++j) {
    const double s = 0.5 * dimension + j;
    out.value += tail_coef[j] * num::power_exp_tail(s, b, t_star);
    if (b == 0.0 && s <= 2.0) {
      out.derivative = -std::numeric_limits<double>::infinity();
    } else if (std::isfinite(out.derivative)) {
      out.derivative -= tail_coef[j] * num::power_exp_tail(s - 1.0, b, t_star);
    }
  }
  return out;
}

namespace {

int return_budget(int d) {
  switch (d) {
    case 1: return 16384;
    case 2: return 1024;
    case 3: return 96;
    default: return 32;
  }
}

// Distribution of S_m on a box, advanced one jump at a time.
class DiscreteWalk {
public:
  DiscreteWalk(const JumpKernel& kernel, int radius)
      : kernel_(kernel), box_(kernel.dimension(), radius, kernel.range()),
        current_(box_.size(), 0.0), next_(box_.size(), 0.0) {
    current_[box_.origin()] = 1.0;
    for (const auto& j : kernel.jumps()) {
      offsets_.push_back(box_.offset(j.displacement));
      probs_.push_back(j.probability);
    }
  }

  void step() {
    for (std::size_t start : box_.row_starts()) {
      for (int i = 0; i < box_.row_length(); ++i) {
        const std::size_t idx = start + static_cast<std::size_t>(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < offsets_.size(); ++k)
          acc += probs_[k] * current_[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + offsets_[k])];
        next_[idx] = acc;
      }
    }
    std::swap(current_, next_);
  }

  const std::vector<double>& values() const noexcept { return current_; }

private:
  const JumpKernel& kernel_;
  LatticeBox box_;
  std::vector<double> current_;
  std::vector<double> next_;
  std::vector<std::ptrdiff_t> offsets_;
  std::vector<double> probs_;
};

double inner(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

void ReturnTransform::Impl::build_general(const JumpKernel& kernel) {
  // u_{2m} = sum_x P(S_m = x)^2 and u_{2m+1} = sum_x P(S_m = x) P(S_{m+1} = x),
  // by symmetry, so only half the horizon has to be propagated.
  const int K = return_budget(dimension);
  const int half_steps = K / 2 + 1;
  const double margin = 8.2 * kernel.range() * std::sqrt(static_cast<double>(half_steps));
  const int radius = std::min(kernel.range() * half_steps, static_cast<int>(std::ceil(margin)));
  DiscreteWalk walk(kernel, radius);
  u.assign(static_cast<std::size_t>(K) + 1, 0.0);
  std::vector<double> previous = walk.values();
  u[0] = 1.0;
  for (int m = 1; 2 * m - 1 <= K; ++m) {
    walk.step();
    const auto& now = walk.values();
    u[2 * m - 1] = inner(previous, now);
    if (2 * m <= K) u[2 * m] = inner(now, now);
    previous = now;
  }

  // Fit v_k k^{s} = A + A a / k on pair averages over [K/2, K), with v_k
  // centred at k + 1/2 so that periodic kernels are smoothed out.
  const double s = 0.5 * dimension;
  std::vector<double> xs;
  std::vector<double> ys;
  for (int k = K / 2; k < K; ++k) {
    const double centre = k + 0.5;
    const double v = 0.5 * (u[k] + u[k + 1]);
    xs.push_back(1.0 / centre);
    ys.push_back(v * std::pow(centre, s));
  }
  const auto fit = num::least_squares(xs, ys);
  tail_amplitude = fit.intercept;
  tail_correction = fit.intercept != 0.0 ? fit.slope / fit.intercept : 0.0;
  double misfit = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    misfit = std::max(misfit, std::abs(ys[i] - fit.intercept - fit.slope * xs[i]) / std::abs(fit.intercept));
  // Error: relative misfit and the size of the 1/k correction, applied to the
  // b = 0 tail (or the b = 1e-3 tail when recurrent).
  const double b_ref = dimension >= 3 ? 0.0 : 1e-3;
  const double x0 = K + 0.5;
  const double c = std::log1p(b_ref);
  const double tail_mass = tail_amplitude * num::power_exp_tail(s, c, x0);
  error = std::abs(tail_mass) * (misfit + std::abs(tail_correction) / x0) + 1e-14 * K;
}

LaplaceValue ReturnTransform::Impl::laplace_general(double b) const {
  const double q = 1.0 / (1.0 + b);
  LaplaceValue out;
  double qk = q;  // q^{k+1}
  for (std::size_t k = 0; k < u.size(); ++k) {
    out.value += u[k] * qk;
    out.derivative -= u[k] * static_cast<double>(k + 1) * qk * q;
    qk *= q;
  }
  // sum_{k>K} A k^{-s}(1 + a/k) q^{k+1}, replaced by its integral from K + 1/2.
  const double s = 0.5 * dimension;
  const double x0 = static_cast<double>(u.size()) - 0.5;
  const double c = std::log1p(b);
  const auto P = [&](double power) { return num::power_exp_tail(power, c, x0); };
  const double A = tail_amplitude;
  const double a = tail_correction;
  out.value += q * A * (P(s) + a * P(s + 1.0));
  if (b == 0.0 && s - 1.0 <= 1.0) {
    out.derivative = -std::numeric_limits<double>::infinity();
  } else {
    out.derivative -= q * q * A * (P(s - 1.0) + (1.0 + a) * P(s) + a * P(s + 1.0));
  }
  return out;
}

ReturnTransform::ReturnTransform(const JumpKernel& kernel, double tolerance)
    : impl_(std::make_unique<Impl>()) {
  require(tolerance > 0.0, "return transform tolerance must be positive");
  impl_->dimension = kernel.dimension();
  impl_->simple = kernel.is_simple();
  if (impl_->simple) {
    impl_->build_simple(tolerance);
  } else {
    impl_->build_general(kernel);
  }
}

ReturnTransform::~ReturnTransform() = default;
ReturnTransform::ReturnTransform(ReturnTransform&&) noexcept = default;
ReturnTransform& ReturnTransform::operator=(ReturnTransform&&) noexcept = default;

int ReturnTransform::dimension() const noexcept { return impl_->dimension; }
bool ReturnTransform::transient() const noexcept { return impl_->dimension >= 3; }
double ReturnTransform::error_bound() const noexcept { return impl_->error; }

LaplaceValue ReturnTransform::laplace(double b) const {
  require(b >= 0.0 && std::isfinite(b), "laplace transform requires finite b >= 0");
  if (b == 0.0 && !transient())
    fail(ErrorKind::Divergent, "the Green function is infinite for recurrent walks (d <= 2)");
  return impl_->simple ? impl_->laplace_simple(b) : impl_->laplace_general(b);
}

GreenResult ReturnTransform::green() const {
  const auto v = laplace(0.0);
  return {v.value, impl_->error, impl_->dimension};
}

GreenResult green_function(const JumpKernel& kernel, double tolerance) {
  if (kernel.dimension() <= 2)
    fail(ErrorKind::Divergent, "the Green function is infinite for recurrent walks (d <= 2)");
  return ReturnTransform(kernel, tolerance).green();
}

LaplaceValue laplace_p0(const JumpKernel& kernel, double b) {
  require(b >= 0.0 && std::isfinite(b), "laplace_p0 requires finite b >= 0");
  if (b == 0.0 && kernel.dimension() <= 2)
    fail(ErrorKind::Divergent, "the Green function is infinite for recurrent walks (d <= 2)");
  return ReturnTransform(kernel).laplace(b);
}

}  // namespace pinlab
