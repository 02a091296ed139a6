#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace pinlab {

/// Philox4x32-10 counter-based block cipher (Salmon et al.). Stateless: the
/// output is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// A reproducible random stream keyed by (run seed, task index). Two streams
/// with different task indices never overlap, so parallel work can be
/// scheduled in any order without changing results.
///
/// Satisfies UniformRandomBitGenerator, but the sampling helpers below are
/// preferred: they are bit-identical across standard libraries.
class RandomStream {
public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t task) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Exponential with the given rate (rate > 0).
  double exponential(double rate) noexcept;
  /// Index drawn from a cumulative distribution (last entry ~ 1).
  std::size_t pick(std::span<const double> cumulative) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t task() const noexcept { return task_; }

private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t task_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace pinlab
