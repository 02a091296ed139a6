#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pinlab {

using Site = std::vector<int>;

/// Geometry of the cube {w : |w|_inf <= radius} in Z^d, stored row-major with
/// a zero halo of the given width so stencil sweeps need no bounds checks.
class LatticeBox {
public:
  LatticeBox(int dimension, int radius, int halo);

  int dimension() const noexcept { return dimension_; }
  int radius() const noexcept { return radius_; }
  int halo() const noexcept { return halo_; }
  int side() const noexcept { return side_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t interior_size() const noexcept;

  /// Flat offset of a displacement vector.
  std::ptrdiff_t offset(const Site& displacement) const;
  /// Flat index of a site with |w|_inf <= radius + halo.
  std::size_t index(const Site& site) const;
  std::size_t origin() const noexcept { return origin_; }
  bool in_interior(const Site& site) const noexcept;

  /// Flat indices where each interior row (along the last axis) starts.
  const std::vector<std::size_t>& row_starts() const noexcept { return row_starts_; }
  int row_length() const noexcept { return 2 * radius_ + 1; }

  /// Interior site coordinates, in the same order as interior traversal.
  Site site_of(std::size_t flat_index) const;

private:
  int dimension_;
  int radius_;
  int halo_;
  int side_;
  std::size_t size_;
  std::size_t origin_;
  std::vector<std::ptrdiff_t> strides_;
  std::vector<std::size_t> row_starts_;
};

}  // namespace pinlab
