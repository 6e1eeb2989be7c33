#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tubeflock/model.hpp"
#include "tubeflock/vec3.hpp"

namespace tubeflock {

/// 1D cell list along the tube axis. Cell c holds the particles with
/// floor(x.n / w) == c; the transverse extent is bounded by the tube.
class AxialCellIndex {
 public:
  AxialCellIndex() = default;
  AxialCellIndex(std::span<const Vec3> positions, const Vec3& axis, double cell_width, double range);

  std::size_t size() const { return positions_.size(); }
  std::size_t cell_count() const { return cells_.size(); }
  double cell_width() const { return width_; }
  double range() const { return range_; }

  std::int64_t cell_of(std::size_t i) const { return cell_of_[i]; }
  /// Particle indices in cell c, ascending; empty if the cell is unoccupied.
  std::span<const std::size_t> cell(std::int64_t c) const;

  /// All j != i with |x_i - x_j| <= range, ascending.
  void neighbors(std::size_t i, std::vector<std::size_t>& out) const;
  std::vector<std::size_t> neighbors(std::size_t i) const;

  /// Visits each pair i < j within range once, ordered by (i, j).
  template <class Fn>
  void for_each_pair(Fn&& fn) const {
    std::vector<std::size_t> buf;
    for (std::size_t i = 0; i < size(); ++i) {
      neighbors(i, buf);
      for (std::size_t j : buf) {
        if (j > i) fn(i, j);
      }
    }
  }

 private:
  struct Cell {
    std::int64_t key;
    std::size_t begin;
    std::size_t end;
  };

  std::vector<Vec3> positions_;
  std::vector<std::int64_t> cell_of_;
  std::vector<std::size_t> members_;  // grouped by cell, ascending within
  std::vector<Cell> cells_;           // sorted by key
  double width_ = 0.0;
  double range_ = 0.0;
  std::int64_t reach_ = 1;
};

AxialCellIndex build_index(const Configuration& config, const TubeGeometry& geometry, double cell_width,
                           double range);

/// Cell width used by the dynamics: at least rbar and at least the tube diameter.
double default_cell_width(const ModelParams& params);

}  // namespace tubeflock
