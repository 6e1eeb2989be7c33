#include "tubeflock/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tubeflock/errors.hpp"

namespace tubeflock {

AxialCellIndex::AxialCellIndex(std::span<const Vec3> positions, const Vec3& axis, double cell_width,
                               double range)
    : positions_(positions.begin(), positions.end()), width_(cell_width), range_(range) {
  if (!(range > 0.0) || !(cell_width >= range)) {
    throw InvalidCellWidth("cell width must be at least the interaction range");
  }
  reach_ = static_cast<std::int64_t>(std::ceil(range / cell_width));

  const std::size_t n = positions_.size();
  cell_of_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cell_of_[i] = static_cast<std::int64_t>(std::floor(dot(positions_[i], axis) / width_));
  }
  members_.resize(n);
  std::iota(members_.begin(), members_.end(), std::size_t{0});
  std::stable_sort(members_.begin(), members_.end(),
                   [&](std::size_t a, std::size_t b) { return cell_of_[a] < cell_of_[b]; });
  for (std::size_t k = 0; k < n;) {
    std::size_t e = k;
    while (e < n && cell_of_[members_[e]] == cell_of_[members_[k]]) ++e;
    cells_.push_back({cell_of_[members_[k]], k, e});
    k = e;
  }
}

std::span<const std::size_t> AxialCellIndex::cell(std::int64_t c) const {
  auto it = std::lower_bound(cells_.begin(), cells_.end(), c,
                             [](const Cell& cell, std::int64_t key) { return cell.key < key; });
  if (it == cells_.end() || it->key != c) return {};
  return std::span<const std::size_t>(members_).subspan(it->begin, it->end - it->begin);
}

void AxialCellIndex::neighbors(std::size_t i, std::vector<std::size_t>& out) const {
  out.clear();
  const Vec3& xi = positions_[i];
  const std::int64_t c = cell_of_[i];
  auto it = std::lower_bound(cells_.begin(), cells_.end(), c - reach_,
                             [](const Cell& cell, std::int64_t key) { return cell.key < key; });
  for (; it != cells_.end() && it->key <= c + reach_; ++it) {
    for (std::size_t k = it->begin; k < it->end; ++k) {
      const std::size_t j = members_[k];
      if (j != i && norm(xi - positions_[j]) <= range_) out.push_back(j);
    }
  }
  // ascending within a cell only
  std::sort(out.begin(), out.end());
}

std::vector<std::size_t> AxialCellIndex::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  neighbors(i, out);
  return out;
}

AxialCellIndex build_index(const Configuration& config, const TubeGeometry& geometry, double cell_width,
                           double range) {
  std::vector<Vec3> positions;
  positions.reserve(config.size());
  for (const auto& p : config.particles) positions.push_back(p.x);
  return AxialCellIndex(positions, geometry.axis, cell_width, range);
}

double default_cell_width(const ModelParams& params) {
  return std::max(params.interaction_range(), 2.0 * params.geometry.radius);
}

}  // namespace tubeflock
