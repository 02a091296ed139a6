#include "pinlab/fk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinlab/error.hpp"

namespace pinlab {

int default_max_sites_per_axis(int dimension) noexcept {
  switch (dimension) {
    case 1: return 1024;
    case 2: return 257;
    case 3: return 129;
    case 4: return 33;
    default: return 17;
  }
}

RelativeField::RelativeField(const JumpKernel& kernel, int radius, double beta, double series_tolerance)
    : kernel_(kernel), box_(kernel.dimension(), radius, kernel.range()), beta_(beta),
      shift_c_(1.0 + std::max(0.0, -beta)), series_tolerance_(series_tolerance),
      weights_(box_.size(), 0.0), term_(box_.size(), 0.0), scratch_(box_.size(), 0.0) {
  require(std::isfinite(beta), "beta must be finite");
  require(series_tolerance > 0.0, "series tolerance must be positive");
  // B = Q + beta e0 e0^T + c I is entrywise nonnegative; its row sums are at
  // most c + max(beta, 0).
  norm_bound_ = shift_c_ + std::max(beta, 0.0);
  for (const auto& j : kernel.jumps()) {
    offsets_.push_back(box_.offset(j.displacement));
    probs_.push_back(j.probability);
  }
  weights_[box_.origin()] = 1.0;
}

void RelativeField::apply(const std::vector<double>& in, std::vector<double>& out) const {
  const double diag = shift_c_ - 1.0;
  const int len = box_.row_length();
  const std::size_t nk = offsets_.size();
  for (std::size_t start : box_.row_starts()) {
    const double* src = in.data() + start;
    double* dst = out.data() + start;
    for (int i = 0; i < len; ++i) {
      double acc = diag * src[i];
      for (std::size_t k = 0; k < nk; ++k) acc += probs_[k] * src[i + offsets_[k]];
      dst[i] = acc;
    }
  }
  out[box_.origin()] += beta_ * in[box_.origin()];
}

void RelativeField::step(double s) {
  // exp(sA) v = e^{-cs} sum_k s^k B^k v / k!; every term is nonnegative, so
  // dropping the tail only lowers the result.
  const double x = s * norm_bound_;
  std::copy(weights_.begin(), weights_.end(), term_.begin());
  double coeff = 1.0;  // x^k / k!
  for (int k = 1; k < 1000; ++k) {
    apply(term_, scratch_);
    std::swap(term_, scratch_);
    const double scale = s / k;
    for (std::size_t start : box_.row_starts()) {
      for (int i = 0; i < box_.row_length(); ++i) {
        term_[start + i] *= scale;
        weights_[start + i] += term_[start + i];
      }
    }
    coeff *= x / k;
    const double next = coeff * x / (k + 1);
    const double remainder = next / std::max(1e-300, 1.0 - x / (k + 2));
    if (x < k + 2 && std::exp(-shift_c_ * s) * remainder <= series_tolerance_) break;
  }
  log_scale_ -= shift_c_ * s;
  renormalize();
}

void RelativeField::renormalize() {
  const double peak = *std::max_element(weights_.begin(), weights_.end());
  if (!(peak > 0.0) || !std::isfinite(peak))
    fail(ErrorKind::AbsorbedAll, "all Feynman-Kac weights vanished; the box is too small");
  const double inv = 1.0 / peak;
  for (double& w : weights_) w *= inv;
  log_scale_ += std::log(peak);
}

void RelativeField::evolve(double s, double max_step) {
  require(s >= 0.0 && max_step > 0.0, "evolve needs s >= 0 and a positive step");
  if (s == 0.0) return;
  const auto steps = static_cast<long>(std::ceil(s / max_step - 1e-12));
  const double h = s / static_cast<double>(steps);
  for (long i = 0; i < steps; ++i) step(h);
  time_ += s;
}

void RelativeField::shift(const Site& dy) {
  // new(w) = old(w + dy); |dy|_inf <= range = halo, so the source index is
  // always inside the allocated box and halo sites hold zero.
  const std::ptrdiff_t off = box_.offset(dy);
  std::fill(scratch_.begin(), scratch_.end(), 0.0);
  for (std::size_t start : box_.row_starts()) {
    for (int i = 0; i < box_.row_length(); ++i) {
      const std::size_t idx = start + static_cast<std::size_t>(i);
      scratch_[idx] = weights_[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + off)];
    }
  }
  std::swap(weights_, scratch_);
  renormalize();
}

double RelativeField::log_origin() const {
  const double w = weights_[box_.origin()];
  return (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) + log_scale_;
}

double RelativeField::log_total() const {
  double total = 0.0;
  for (double w : weights_) total += w;
  return std::log(total) + log_scale_;
}

namespace {

double resolve_step(const SolverOptions& opts, double beta) {
  return opts.max_step > 0.0 ? opts.max_step : 1.0 / (1.0 + std::abs(beta));
}

void check_interval(const DisorderPath& y, double t1, double t2) {
  require(std::isfinite(t1) && std::isfinite(t2) && 0.0 <= t1 && t1 <= t2,
          "interval must satisfy 0 <= t1 <= t2");
  require(t2 <= y.horizon() * (1.0 + 1e-15), "interval exceeds the disorder horizon");
}

// Largest |Y_s - Y_{t1}|_inf over s in [t1, t2].
int excursion_on(const DisorderPath& y, double t1, double t2) {
  Site pos(static_cast<std::size_t>(y.dimension()), 0);
  int best = 0;
  for (const auto& j : y.jumps()) {
    if (j.time <= t1) continue;
    if (j.time > t2) break;
    for (std::size_t c = 0; c < pos.size(); ++c) {
      pos[c] += j.displacement[c];
      best = std::max(best, std::abs(pos[c]));
    }
  }
  return best;
}

PartitionResult certified(const JumpKernel& kernel, const DisorderPath& y, double beta, double t1,
                          double t2, bool pinned, const SolverOptions& opts) {
  require(kernel.dimension() == y.dimension(), "kernel and disorder dimensions differ");
  check_interval(y, t1, t2);
  require(opts.truncation_tolerance > 0.0, "truncation tolerance must be positive");
  PartitionResult out;
  out.beta = beta;
  out.t1 = t1;
  out.t2 = t2;
  out.pinned = pinned;
  if (t2 == t1) return out;

  const int sites = opts.max_sites_per_axis > 0 ? opts.max_sites_per_axis
                                                : default_max_sites_per_axis(kernel.dimension());
  const int cap = std::max(1, (sites - 1) / 2);
  int radius = opts.initial_radius > 0
                   ? opts.initial_radius
                   : static_cast<int>(std::ceil(4.0 * std::sqrt(t2 - t1))) + 4 + excursion_on(y, t1, t2);
  radius = std::min(radius, cap);
  int half = std::max(1, radius / 2);
  double previous = log_partition_at_radius(kernel, y, beta, t1, t2, half, pinned, opts);
  while (true) {
    const double current = log_partition_at_radius(kernel, y, beta, t1, t2, radius, pinned, opts);
    out.log_z = current;
    out.radius = radius;
    out.certificate = current - previous;
    if (std::isfinite(current) && std::isfinite(previous) && out.certificate < opts.truncation_tolerance) return out;
    if (radius >= cap) break;
    previous = current;
    radius = std::min(2 * radius, cap);
  }
  fail(ErrorKind::ToleranceNotMet, "truncation certificate above tolerance at the radius cap");
}

}  // namespace

double log_partition_at_radius(const JumpKernel& kernel, const DisorderPath& y, double beta, double t1,
                               double t2, int radius, bool pinned, const SolverOptions& opts) {
  check_interval(y, t1, t2);
  require(radius >= 0, "radius must be nonnegative");
  RelativeField field(kernel, radius, beta, opts.series_tolerance);
  const double h = resolve_step(opts, beta);
  double now = t1;
  for (const auto& j : y.jumps()) {
    if (j.time <= t1) continue;
    if (j.time > t2) break;
    field.evolve(j.time - now, h);
    field.shift(j.displacement);
    now = j.time;
  }
  field.evolve(t2 - now, h);
  return pinned ? field.log_origin() : field.log_total();
}

PartitionResult pinned_log_partition(const JumpKernel& kernel, const DisorderPath& y, double beta,
                                     double t, const SolverOptions& opts) {
  return certified(kernel, y, beta, 0.0, t, true, opts);
}

PartitionResult free_log_partition(const JumpKernel& kernel, const DisorderPath& y, double beta,
                                   double t, const SolverOptions& opts) {
  return certified(kernel, y, beta, 0.0, t, false, opts);
}

PartitionResult interval_log_partition(const JumpKernel& kernel, const DisorderPath& y, double beta,
                                       double t1, double t2, const SolverOptions& opts) {
  return certified(kernel, y, beta, t1, t2, true, opts);
}

double mean_local_time(const JumpKernel& kernel, const DisorderPath& y, double beta, double t,
                       const SolverOptions& opts) {
  require(opts.delta_beta > 0.0, "delta_beta must be positive");
  if (t == 0.0) return 0.0;
  // The radius is certified at beta and then held fixed so both sides of the
  // difference see the same truncation.
  const auto base = pinned_log_partition(kernel, y, beta, t, opts);
  const double db = opts.delta_beta;
  const double up = log_partition_at_radius(kernel, y, beta + db, 0.0, t, base.radius, true, opts);
  const double down = log_partition_at_radius(kernel, y, beta - db, 0.0, t, base.radius, true, opts);
  const double value = (up - down) / (2.0 * db);
  const double slack = 1e-4 * std::max(1.0, t);
  if (!(value >= -slack && value <= t + slack))
    fail(ErrorKind::ToleranceNotMet, "finite-difference local time fell outside [0, t]");
  return std::clamp(value, 0.0, t);
}

}  // namespace pinlab
