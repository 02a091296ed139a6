#include "pinlab/walk_core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "pinlab/bessel.hpp"
#include "pinlab/error.hpp"
#include "pinlab/numerics.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

// ---------------------------------------------------------------- LatticeBox

LatticeBox::LatticeBox(int dimension, int radius, int halo)
    : dimension_(dimension), radius_(radius), halo_(halo), side_(2 * radius + 1 + 2 * halo) {
  require(dimension >= 1, "lattice box dimension must be >= 1");
  require(radius >= 0 && halo >= 0, "lattice box radius and halo must be >= 0");
  strides_.assign(static_cast<std::size_t>(dimension), 1);
  for (int i = dimension - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * side_;
  size_ = static_cast<std::size_t>(strides_[0]) * static_cast<std::size_t>(side_);
  origin_ = index(Site(static_cast<std::size_t>(dimension), 0));

  // Enumerate interior rows: all coordinates of the leading d-1 axes.
  const int width = 2 * radius + 1;
  std::size_t rows = 1;
  for (int i = 0; i + 1 < dimension; ++i) rows *= static_cast<std::size_t>(width);
  row_starts_.reserve(rows);
  Site site(static_cast<std::size_t>(dimension), -radius);
  for (std::size_t r = 0; r < rows; ++r) {
    row_starts_.push_back(index(site));
    for (int axis = dimension - 2; axis >= 0; --axis) {
      if (++site[axis] <= radius) break;
      site[axis] = -radius;
    }
  }
}

std::size_t LatticeBox::interior_size() const noexcept {
  std::size_t n = 1;
  for (int i = 0; i < dimension_; ++i) n *= static_cast<std::size_t>(2 * radius_ + 1);
  return n;
}

std::ptrdiff_t LatticeBox::offset(const Site& displacement) const {
  std::ptrdiff_t off = 0;
  for (int i = 0; i < dimension_; ++i) off += displacement[i] * strides_[i];
  return off;
}

std::size_t LatticeBox::index(const Site& site) const {
  std::ptrdiff_t idx = 0;
  for (int i = 0; i < dimension_; ++i) idx += (site[i] + radius_ + halo_) * strides_[i];
  return static_cast<std::size_t>(idx);
}

bool LatticeBox::in_interior(const Site& site) const noexcept {
  return std::all_of(site.begin(), site.end(), [&](int c) { return std::abs(c) <= radius_; });
}

Site LatticeBox::site_of(std::size_t flat_index) const {
  Site site(static_cast<std::size_t>(dimension_));
  for (int i = 0; i < dimension_; ++i) {
    const auto q = static_cast<std::ptrdiff_t>(flat_index) / strides_[i];
    site[i] = static_cast<int>(q % side_) - radius_ - halo_;
  }
  return site;
}

// ---------------------------------------------------------------- JumpKernel

namespace {

// The support generates Z^d iff the Hermite normal form of the support
// vectors has unit pivots in every column.
bool generates_full_lattice(int d, const std::vector<JumpKernel::Jump>& jumps) {
  std::vector<std::vector<long long>> rows;
  for (const auto& j : jumps) rows.emplace_back(j.displacement.begin(), j.displacement.end());
  std::size_t pivot_row = 0;
  for (int col = 0; col < d; ++col) {
    while (true) {
      std::size_t best = rows.size();
      for (std::size_t r = pivot_row; r < rows.size(); ++r) {
        if (rows[r][col] != 0 && (best == rows.size() || std::llabs(rows[r][col]) < std::llabs(rows[best][col])))
          best = r;
      }
      if (best == rows.size()) return false;
      std::swap(rows[pivot_row], rows[best]);
      bool clean = true;
      for (std::size_t r = pivot_row + 1; r < rows.size(); ++r) {
        if (rows[r][col] == 0) continue;
        const long long q = rows[r][col] / rows[pivot_row][col];
        for (int c = 0; c < d; ++c) rows[r][c] -= q * rows[pivot_row][c];
        if (rows[r][col] != 0) clean = false;
      }
      if (clean) break;
    }
    if (std::llabs(rows[pivot_row][col]) != 1) return false;
    ++pivot_row;
  }
  return true;
}

}  // namespace

JumpKernel::JumpKernel(int dimension, std::vector<Jump> jumps, bool simple)
    : dimension_(dimension), jumps_(std::move(jumps)), simple_(simple), range_(0) {
  double acc = 0.0;
  for (const auto& j : jumps_) {
    acc += j.probability;
    cumulative_.push_back(acc);
    for (int c : j.displacement) range_ = std::max(range_, std::abs(c));
  }
}

JumpKernel JumpKernel::simple(int dimension) {
  require(dimension >= 1, "kernel dimension must be >= 1");
  std::vector<Jump> jumps;
  for (int axis = 0; axis < dimension; ++axis) {
    for (int sign : {1, -1}) {
      Site x(static_cast<std::size_t>(dimension), 0);
      x[axis] = sign;
      jumps.push_back({x, 1.0 / (2.0 * dimension)});
    }
  }
  return JumpKernel(dimension, std::move(jumps), true);
}

JumpKernel JumpKernel::from_pmf(int dimension, std::vector<Jump> jumps) {
  require(dimension >= 1, "kernel dimension must be >= 1");
  require(!jumps.empty(), "kernel support must be non-empty");
  std::map<Site, double> pmf;
  double total = 0.0;
  for (auto& j : jumps) {
    require(static_cast<int>(j.displacement.size()) == dimension,
            "kernel displacement has wrong dimension");
    require(j.probability > 0.0 && std::isfinite(j.probability),
            "kernel probabilities must be positive");
    require(std::any_of(j.displacement.begin(), j.displacement.end(), [](int c) { return c != 0; }),
            "kernel must have p(0) = 0");
    require(pmf.find(j.displacement) == pmf.end(), "duplicate kernel displacement");
    pmf[j.displacement] = j.probability;
    total += j.probability;
  }
  require(std::abs(total - 1.0) < 1e-12, "kernel probabilities must sum to 1");
  for (const auto& [x, p] : pmf) {
    Site minus(x);
    for (int& c : minus) c = -c;
    const auto it = pmf.find(minus);
    require(it != pmf.end() && std::abs(it->second - p) < 1e-12, "kernel must be symmetric");
  }
  std::vector<Jump> ordered;
  for (const auto& [x, p] : pmf) ordered.push_back({x, p / total});
  require(generates_full_lattice(dimension, ordered), "kernel must be irreducible on Z^d");

  bool simple = static_cast<int>(ordered.size()) == 2 * dimension;
  for (const auto& j : ordered) {
    int norm = 0;
    for (int c : j.displacement) norm += std::abs(c);
    simple = simple && norm == 1 && std::abs(j.probability - 1.0 / (2.0 * dimension)) < 1e-15;
  }
  if (simple) return JumpKernel::simple(dimension);
  return JumpKernel(dimension, std::move(ordered), false);
}

double JumpKernel::probability(const Site& displacement) const {
  for (const auto& j : jumps_)
    if (j.displacement == displacement) return j.probability;
  return 0.0;
}

double JumpKernel::covariance_determinant() const {
  const auto d = static_cast<std::size_t>(dimension_);
  std::vector<double> m(d * d, 0.0);
  for (const auto& j : jumps_)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        m[a * d + b] += j.probability * j.displacement[a] * j.displacement[b];
  // Gaussian elimination; the matrix is symmetric positive definite.
  double det = 1.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double pivot = m[c * d + c];
    det *= pivot;
    for (std::size_t r = c + 1; r < d; ++r) {
      const double f = m[r * d + c] / pivot;
      for (std::size_t k = c; k < d; ++k) m[r * d + k] -= f * m[c * d + k];
    }
  }
  return det;
}

const Site& JumpKernel::sample(RandomStream& rng) const {
  return jumps_[rng.pick(cumulative_)].displacement;
}

double JumpKernel::entropy_constant() const {
  double h = 0.0;
  for (const auto& j : jumps_) h -= j.probability * std::log(2.0 * j.probability);
  return h;
}

// -------------------------------------------------------------- DisorderPath

DisorderPath::DisorderPath(int dimension, double rate, double horizon, std::uint64_t seed,
                           std::vector<DisorderJump> jumps)
    : dimension_(dimension), rate_(rate), horizon_(horizon), seed_(seed), jumps_(std::move(jumps)) {
  require(dimension >= 1, "disorder path dimension must be >= 1");
  require(rate >= 0.0 && horizon >= 0.0, "disorder path needs rate >= 0 and horizon >= 0");
  double last = 0.0;
  for (const auto& j : jumps_) {
    require(j.time > 0.0 && j.time <= horizon_ && j.time >= last,
            "disorder jump times must be ascending within (0, horizon]");
    require(static_cast<int>(j.displacement.size()) == dimension_,
            "disorder displacement has wrong dimension");
    last = j.time;
  }
}

DisorderPath DisorderPath::constant(int dimension, double horizon) {
  return DisorderPath(dimension, 0.0, horizon, 0, {});
}

std::size_t DisorderPath::jump_count(double s) const noexcept {
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), s,
                                   [](double v, const DisorderJump& j) { return v < j.time; });
  return static_cast<std::size_t>(it - jumps_.begin());
}

Site DisorderPath::position(double s) const {
  Site y(static_cast<std::size_t>(dimension_), 0);
  const std::size_t n = jump_count(s);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < dimension_; ++c) y[c] += jumps_[i].displacement[c];
  return y;
}

int DisorderPath::max_excursion() const noexcept {
  Site y(static_cast<std::size_t>(dimension_), 0);
  int best = 0;
  for (const auto& j : jumps_) {
    for (int c = 0; c < dimension_; ++c) {
      y[c] += j.displacement[c];
      best = std::max(best, std::abs(y[c]));
    }
  }
  return best;
}

std::string DisorderPath::to_json() const {
  nlohmann::json doc;
  doc["rho"] = rate_;
  doc["t"] = horizon_;
  doc["seed"] = seed_;
  doc["d"] = dimension_;
  auto jumps = nlohmann::json::array();
  for (const auto& j : jumps_) jumps.push_back({{"time", j.time}, {"dx", j.displacement}});
  doc["jumps"] = std::move(jumps);
  return doc.dump();
}

DisorderPath DisorderPath::from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    std::vector<DisorderJump> jumps;
    int dimension = doc.contains("d") ? doc.at("d").get<int>() : 0;
    for (const auto& j : doc.at("jumps")) {
      DisorderJump jump{j.at("time").get<double>(), j.at("dx").get<Site>()};
      if (dimension == 0) dimension = static_cast<int>(jump.displacement.size());
      jumps.push_back(std::move(jump));
    }
    require(dimension >= 1, "disorder JSON without jumps must carry its dimension 'd'");
    return DisorderPath(dimension, doc.at("rho").get<double>(), doc.at("t").get<double>(),
                        doc.at("seed").get<std::uint64_t>(), std::move(jumps));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("malformed disorder JSON: ") + e.what());
  }
}

bool operator==(const DisorderPath& a, const DisorderPath& b) {
  if (a.dimension_ != b.dimension_ || a.rate_ != b.rate_ || a.horizon_ != b.horizon_ ||
      a.seed_ != b.seed_ || a.jumps_.size() != b.jumps_.size())
    return false;
  for (std::size_t i = 0; i < a.jumps_.size(); ++i) {
    if (a.jumps_[i].time != b.jumps_[i].time ||
        a.jumps_[i].displacement != b.jumps_[i].displacement)
      return false;
  }
  return true;
}

// ------------------------------------------------------ transition kernels

double BoxDistribution::at(const Site& site) const {
  std::size_t idx = 0;
  const int width = 2 * radius + 1;
  for (int c : site) {
    if (std::abs(c) > radius) return 0.0;
    idx = idx * static_cast<std::size_t>(width) + static_cast<std::size_t>(c + radius);
  }
  return values[idx];
}

double BoxDistribution::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

namespace {

// One application of the jump operator: out(w) = sum_z p(z) in(w + z), on the
// interior of the box. The halo must be at least the kernel range.
void apply_jump_operator(const JumpKernel& kernel, const LatticeBox& box,
                         std::span<const double> in, std::span<double> out) {
  std::vector<std::ptrdiff_t> offsets;
  std::vector<double> probs;
  for (const auto& j : kernel.jumps()) {
    offsets.push_back(box.offset(j.displacement));
    probs.push_back(j.probability);
  }
  const int len = box.row_length();
  for (std::size_t start : box.row_starts()) {
    for (int i = 0; i < len; ++i) {
      const std::size_t idx = start + static_cast<std::size_t>(i);
      double acc = 0.0;
      for (std::size_t k = 0; k < offsets.size(); ++k)
        acc += probs[k] * in[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + offsets[k])];
      out[idx] = acc;
    }
  }
}

// Hoeffding radius beyond which k jumps of size <= range leave mass < 1e-16.
int hoeffding_radius(int range, double steps, int dimension) {
  const double r = range * std::sqrt(2.0 * steps * std::log(2.0 * dimension * 1e16));
  return static_cast<int>(std::ceil(std::min(r, range * steps))) + range;
}

// Uniformization: p_t = sum_k Pois(k; t) P^k delta_0 on a box whose radius
// covers the requested one plus a Hoeffding margin.
BoxDistribution uniformized_distribution(const JumpKernel& kernel, double t, int radius) {
  const int d = kernel.dimension();
  const double kmax = t + 12.0 * std::sqrt(t) + 30.0;
  const int work_radius = std::max(radius, hoeffding_radius(kernel.range(), kmax, d));
  const LatticeBox box(d, work_radius, kernel.range());
  std::vector<double> current(box.size(), 0.0);
  std::vector<double> next(box.size(), 0.0);
  std::vector<double> acc(box.size(), 0.0);
  current[box.origin()] = 1.0;
  for (std::size_t k = 0;; ++k) {
    const double weight = std::exp(num::log_poisson_pmf(k, t));
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weight * current[i];
    if (static_cast<double>(k) > kmax) break;
    apply_jump_operator(kernel, box, current, next);
    std::swap(current, next);
  }
  BoxDistribution out{d, radius, {}};
  const LatticeBox target(d, radius, 0);
  out.values.reserve(target.interior_size());
  for (std::size_t start : target.row_starts()) {
    for (int i = 0; i < target.row_length(); ++i) {
      out.values.push_back(acc[box.index(target.site_of(start + static_cast<std::size_t>(i)))]);
    }
  }
  return out;
}

}  // namespace

double transition_probability(const JumpKernel& kernel, double t, const Site& x) {
  require(t >= 0.0 && std::isfinite(t), "transition_probability requires t >= 0");
  require(static_cast<int>(x.size()) == kernel.dimension(), "site has wrong dimension");
  if (kernel.is_simple()) {
    const double per_axis = t / kernel.dimension();
    double p = 1.0;
    for (int c : x) p *= bessel_i_scaled(c, per_axis);
    return p;
  }
  int radius = 0;
  for (int c : x) radius = std::max(radius, std::abs(c));
  return uniformized_distribution(kernel, t, radius).at(x);
}

double return_probability(const JumpKernel& kernel, double t) {
  return transition_probability(kernel, t, Site(static_cast<std::size_t>(kernel.dimension()), 0));
}

BoxDistribution transition_distribution(const JumpKernel& kernel, double t, int radius) {
  require(t >= 0.0 && radius >= 0, "transition_distribution requires t >= 0, radius >= 0");
  if (!kernel.is_simple()) return uniformized_distribution(kernel, t, radius);
  const int d = kernel.dimension();
  const int width = 2 * radius + 1;
  std::vector<double> axis(static_cast<std::size_t>(width));
  for (int c = -radius; c <= radius; ++c) axis[c + radius] = bessel_i_scaled(c, t / d);
  BoxDistribution out{d, radius, {}};
  const LatticeBox box(d, radius, 0);
  out.values.reserve(box.interior_size());
  for (std::size_t start : box.row_starts()) {
    for (int i = 0; i < width; ++i) {
      const Site s = box.site_of(start + static_cast<std::size_t>(i));
      double p = 1.0;
      for (int c : s) p *= axis[c + radius];
      out.values.push_back(p);
    }
  }
  return out;
}

// --------------------------------------------------------- disorder sampling

DisorderPath sample_disorder(const JumpKernel& kernel, double rho, double t, std::uint64_t seed,
                             std::uint64_t task) {
  require(rho >= 0.0 && std::isfinite(rho), "sample_disorder requires rho >= 0");
  require(t >= 0.0 && std::isfinite(t), "sample_disorder requires t >= 0");
  std::vector<DisorderJump> jumps;
  if (rho > 0.0) {
    RandomStream rng(seed, task);
    double time = 0.0;
    while (true) {
      time += rng.exponential(rho);
      const Site& dx = kernel.sample(rng);
      if (time > t) break;
      jumps.push_back({time, dx});
    }
  }
  return DisorderPath(kernel.dimension(), rho, t, seed, std::move(jumps));
}

double disorder_likelihood_ratio(const DisorderPath& path, double rho, double rho_prime, double L) {
  require(rho > 0.0 && rho_prime > 0.0, "likelihood ratio requires positive rates");
  require(L >= 0.0 && L <= path.horizon(), "likelihood ratio horizon must lie within the path");
  const auto kappa = static_cast<double>(path.jump_count(L));
  return std::exp(L * (rho_prime - rho) + kappa * std::log(rho / rho_prime));
}

}  // namespace pinlab
