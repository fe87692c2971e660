#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "navforge/scene.hpp"

namespace navforge {

inline constexpr double kDefaultCellSizeCm = 25.0;
inline const double kSqrt2 = 1.4142135623730951;

struct GridIndex {
  int x = 0;  // column
  int y = 0;  // row

  bool operator==(const GridIndex& o) const = default;
};

// Path cost as exact step counts; a + b*sqrt(2) comparisons stay in integer
// arithmetic so two optimal paths can never disagree by a rounding ulp.
struct PathCost {
  std::int64_t straight = 0;
  std::int64_t diagonal = 0;

  bool operator==(const PathCost& o) const = default;

  PathCost operator+(const PathCost& o) const {
    return {straight + o.straight, diagonal + o.diagonal};
  }

  double length_cm(double cell_size) const {
    return cell_size * (static_cast<double>(straight) + static_cast<double>(diagonal) * kSqrt2);
  }
};

// Exact a + b*sqrt(2) comparison via sign analysis and integer squaring.
bool cost_less(const PathCost& a, const PathCost& b);

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double cell_size, double origin_x, double origin_y);

  // A cell is occupied iff some non-road actor's AABB footprint overlaps it
  // with positive area. Cells not wholly inside the ground square are
  // occupied. Road and ground surfaces stay walkable.
  static OccupancyGrid build(const SceneGraph& scene, const AssetCatalog& catalog,
                             double cell_size = kDefaultCellSizeCm);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }

  bool in_bounds(GridIndex c) const {
    return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
  }
  bool occupied(GridIndex c) const;           // out-of-bounds counts occupied
  bool free(GridIndex c) const { return in_bounds(c) && !occupied(c); }
  void set_occupied(GridIndex c, bool value);

  GridIndex cell_of(double x, double y) const;
  // World coordinates of the cell center.
  double center_x(GridIndex c) const { return origin_x_ + (c.x + 0.5) * cell_size_; }
  double center_y(GridIndex c) const { return origin_y_ + (c.y + 0.5) * cell_size_; }

  std::size_t cell_index(GridIndex c) const {
    return static_cast<std::size_t>(c.y) * width_ + c.x;
  }

  std::vector<GridIndex> free_cells() const;  // row-major order
  std::size_t free_count() const;

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = kDefaultCellSizeCm;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  std::vector<std::uint8_t> occupied_;
};

struct PathResult {
  std::vector<GridIndex> cells;  // start .. goal inclusive
  PathCost cost;
  double length_cm = 0.0;
};

// 8-connected A* with octile heuristic. Diagonal moves require both adjacent
// orthogonal cells free (no corner cutting). Returns nullopt when no path.
std::optional<PathResult> shortest_path(const OccupancyGrid& grid, GridIndex start,
                                        GridIndex goal);

// Dijkstra distances from every reachable cell to `goal`, exact costs.
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(const OccupancyGrid& grid, GridIndex goal);

  bool reachable(GridIndex c) const;
  PathCost cost(GridIndex c) const;     // pre: reachable
  double distance_cm(GridIndex c) const;
  GridIndex goal() const { return goal_; }

 private:
  const OccupancyGrid* grid_ = nullptr;
  GridIndex goal_;
  std::vector<std::uint8_t> reached_;
  std::vector<PathCost> costs_;
};

// Geodesic between world points; the query point snaps to its cell, the goal
// point snaps to the nearest free cell when its own cell is blocked.
std::optional<double> geodesic_distance(const OccupancyGrid& grid, double from_x, double from_y,
                                        double to_x, double to_y);

// Nearest free cell to any cell of `seeds` by BFS, deterministic tie order.
std::optional<GridIndex> nearest_free(const OccupancyGrid& grid,
                                      const std::vector<GridIndex>& seeds);

// Supercover traversal; true when no occupied cell blocks the segment between
// the two cell centers. Cells listed in `transparent` never block.
bool line_of_sight(const OccupancyGrid& grid, GridIndex from, GridIndex to,
                   const std::vector<std::uint8_t>* transparent = nullptr);

// Cells whose rect the XY footprint of `box` overlaps with positive area.
std::vector<GridIndex> footprint_cells(const OccupancyGrid& grid, const Aabb& box);

}  // namespace navforge
