#include "navforge/navgrid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include "navforge/error.hpp"

namespace navforge {

bool cost_less(const PathCost& a, const PathCost& b) {
  std::int64_t ds = a.straight - b.straight;
  std::int64_t dd = b.diagonal - a.diagonal;
  // a < b  <=>  ds < dd * sqrt(2)
  if (ds < 0 && dd >= 0) return true;
  if (ds >= 0 && dd <= 0) return false;
  if (ds >= 0) return ds * ds < 2 * dd * dd;  // dd > 0
  return ds * ds > 2 * dd * dd;               // ds < 0, dd < 0
}

OccupancyGrid::OccupancyGrid(int width, int height, double cell_size, double origin_x,
                             double origin_y)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      origin_x_(origin_x),
      origin_y_(origin_y),
      occupied_(static_cast<std::size_t>(width) * height, 0) {
  if (width <= 0 || height <= 0 || cell_size <= 0) {
    throw_schema("bad-args", "grid dimensions and cell size must be positive");
  }
}

OccupancyGrid OccupancyGrid::build(const SceneGraph& scene, const AssetCatalog& catalog,
                                   double cell_size) {
  if (cell_size <= 0 || !std::isfinite(cell_size)) {
    throw_schema("bad-args", "cell_size must be positive");
  }
  double half = scene.ground_half_extent;
  int cells = static_cast<int>(std::ceil((2.0 * half) / cell_size));
  OccupancyGrid grid(cells, cells, cell_size, -half, -half);

  // Cells poking past the ground square are blocked.
  for (int y = 0; y < cells; ++y) {
    for (int x = 0; x < cells; ++x) {
      double x1 = grid.origin_x_ + (x + 1) * cell_size;
      double y1 = grid.origin_y_ + (y + 1) * cell_size;
      if (x1 > half + 1e-9 || y1 > half + 1e-9) grid.set_occupied({x, y}, true);
    }
  }

  for (const ActorRecord* rec : scene.actors_in_level()) {
    if (rec->category == Category::Road) continue;
    Aabb box = world_aabb(*rec, catalog);
    for (GridIndex c : footprint_cells(grid, box)) grid.set_occupied(c, true);
  }
  return grid;
}

bool OccupancyGrid::occupied(GridIndex c) const {
  if (!in_bounds(c)) return true;
  return occupied_[cell_index(c)] != 0;
}

void OccupancyGrid::set_occupied(GridIndex c, bool value) {
  if (!in_bounds(c)) throw_schema("bad-args", "cell outside grid");
  occupied_[cell_index(c)] = value ? 1 : 0;
}

GridIndex OccupancyGrid::cell_of(double x, double y) const {
  return {static_cast<int>(std::floor((x - origin_x_) / cell_size_)),
          static_cast<int>(std::floor((y - origin_y_) / cell_size_))};
}

std::vector<GridIndex> OccupancyGrid::free_cells() const {
  std::vector<GridIndex> out;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (!occupied_[static_cast<std::size_t>(y) * width_ + x]) out.push_back({x, y});
    }
  }
  return out;
}

std::size_t OccupancyGrid::free_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : occupied_) {
    if (!v) ++n;
  }
  return n;
}

std::vector<GridIndex> footprint_cells(const OccupancyGrid& grid, const Aabb& box) {
  std::vector<GridIndex> out;
  // Positive-area overlap: boundary-touching cells stay out.
  double eps = 1e-9;
  int x0 = static_cast<int>(std::floor((box.min.x - grid.origin_x()) / grid.cell_size() + eps));
  int x1 = static_cast<int>(std::ceil((box.max.x - grid.origin_x()) / grid.cell_size() - eps)) - 1;
  int y0 = static_cast<int>(std::floor((box.min.y - grid.origin_y()) / grid.cell_size() + eps));
  int y1 = static_cast<int>(std::ceil((box.max.y - grid.origin_y()) / grid.cell_size() - eps)) - 1;
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, grid.width() - 1);
  y1 = std::min(y1, grid.height() - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) out.push_back({x, y});
  }
  return out;
}

namespace {

struct Neighbor {
  int dx, dy;
  bool diagonal;
};

constexpr Neighbor kNeighbors[8] = {
    {1, 0, false}, {-1, 0, false}, {0, 1, false}, {0, -1, false},
    {1, 1, true},  {1, -1, true},  {-1, 1, true}, {-1, -1, true},
};

PathCost octile(GridIndex a, GridIndex b) {
  std::int64_t dx = std::llabs(static_cast<std::int64_t>(a.x) - b.x);
  std::int64_t dy = std::llabs(static_cast<std::int64_t>(a.y) - b.y);
  std::int64_t dmin = std::min(dx, dy);
  std::int64_t dmax = std::max(dx, dy);
  return {dmax - dmin, dmin};
}

struct HeapEntry {
  PathCost f;
  std::uint64_t order;  // insertion counter, deterministic tie-break
  std::int32_t node;
};

struct HeapCompare {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (!(a.f == b.f)) return cost_less(b.f, a.f);  // min-heap
    return a.order > b.order;
  }
};

bool step_allowed(const OccupancyGrid& grid, GridIndex from, const Neighbor& n,
                  GridIndex to) {
  if (!grid.free(to)) return false;
  if (!n.diagonal) return true;
  // Diagonal movement needs both orthogonal shoulders free.
  return grid.free({from.x + n.dx, from.y}) && grid.free({from.x, from.y + n.dy});
}

}  // namespace

std::optional<PathResult> shortest_path(const OccupancyGrid& grid, GridIndex start,
                                        GridIndex goal) {
  if (!grid.free(start) || !grid.free(goal)) return std::nullopt;
  if (start == goal) {
    return PathResult{{start}, {0, 0}, 0.0};
  }
  std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  std::vector<PathCost> g(n);
  std::vector<std::uint8_t> state(n, 0);  // 0 unseen, 1 open, 2 closed
  std::vector<std::int32_t> parent(n, -1);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCompare> open;
  std::uint64_t order = 0;

  auto idx = [&](GridIndex c) { return grid.cell_index(c); };
  std::size_t si = idx(start);
  g[si] = {0, 0};
  state[si] = 1;
  open.push({octile(start, goal), order++, static_cast<std::int32_t>(si)});

  std::size_t gi = idx(goal);
  while (!open.empty()) {
    HeapEntry top = open.top();
    open.pop();
    std::size_t ci = static_cast<std::size_t>(top.node);
    if (state[ci] == 2) continue;
    state[ci] = 2;
    if (ci == gi) break;
    GridIndex cell{static_cast<int>(ci % grid.width()), static_cast<int>(ci / grid.width())};
    for (const Neighbor& nb : kNeighbors) {
      GridIndex next{cell.x + nb.dx, cell.y + nb.dy};
      if (!step_allowed(grid, cell, nb, next)) continue;
      std::size_t ni = idx(next);
      if (state[ni] == 2) continue;
      PathCost cand = g[ci] + (nb.diagonal ? PathCost{0, 1} : PathCost{1, 0});
      if (state[ni] == 1 && !cost_less(cand, g[ni])) continue;
      g[ni] = cand;
      parent[ni] = static_cast<std::int32_t>(ci);
      state[ni] = 1;
      open.push({cand + octile(next, goal), order++, static_cast<std::int32_t>(ni)});
    }
  }
  if (state[gi] != 2) return std::nullopt;

  PathResult result;
  result.cost = g[gi];
  result.length_cm = result.cost.length_cm(grid.cell_size());
  std::vector<GridIndex> rev;
  for (std::int64_t at = static_cast<std::int64_t>(gi); at >= 0; at = parent[at]) {
    rev.push_back({static_cast<int>(at % grid.width()), static_cast<int>(at / grid.width())});
    if (static_cast<std::size_t>(at) == si) break;
  }
  result.cells.assign(rev.rbegin(), rev.rend());
  return result;
}

DistanceField::DistanceField(const OccupancyGrid& grid, GridIndex goal)
    : grid_(&grid), goal_(goal) {
  std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  reached_.assign(n, 0);
  costs_.assign(n, {});
  if (!grid.free(goal)) return;
  std::vector<std::uint8_t> closed(n, 0);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCompare> open;
  std::uint64_t order = 0;
  std::size_t gi = grid.cell_index(goal);
  costs_[gi] = {0, 0};
  reached_[gi] = 1;
  open.push({{0, 0}, order++, static_cast<std::int32_t>(gi)});
  while (!open.empty()) {
    HeapEntry top = open.top();
    open.pop();
    std::size_t ci = static_cast<std::size_t>(top.node);
    if (closed[ci]) continue;
    closed[ci] = 1;
    GridIndex cell{static_cast<int>(ci % grid.width()), static_cast<int>(ci / grid.width())};
    for (const Neighbor& nb : kNeighbors) {
      GridIndex next{cell.x + nb.dx, cell.y + nb.dy};
      if (!step_allowed(grid, cell, nb, next)) continue;
      std::size_t ni = grid.cell_index(next);
      if (closed[ni]) continue;
      PathCost cand = costs_[ci] + (nb.diagonal ? PathCost{0, 1} : PathCost{1, 0});
      if (reached_[ni] && !cost_less(cand, costs_[ni])) continue;
      costs_[ni] = cand;
      reached_[ni] = 1;
      open.push({cand, order++, static_cast<std::int32_t>(ni)});
    }
  }
}

bool DistanceField::reachable(GridIndex c) const {
  if (!grid_ || !grid_->in_bounds(c)) return false;
  return reached_[grid_->cell_index(c)] != 0;
}

PathCost DistanceField::cost(GridIndex c) const {
  if (!reachable(c)) throw_domain("unreachable", "cell has no path to the field goal");
  return costs_[grid_->cell_index(c)];
}

double DistanceField::distance_cm(GridIndex c) const {
  return cost(c).length_cm(grid_->cell_size());
}

std::optional<GridIndex> nearest_free(const OccupancyGrid& grid,
                                      const std::vector<GridIndex>& seeds) {
  std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  std::vector<std::uint8_t> seen(n, 0);
  std::deque<GridIndex> frontier;
  for (GridIndex c : seeds) {
    if (!grid.in_bounds(c) || seen[grid.cell_index(c)]) continue;
    seen[grid.cell_index(c)] = 1;
    frontier.push_back(c);
  }
  // 4-connected rings; row-major seed order keeps expansion deterministic.
  while (!frontier.empty()) {
    GridIndex c = frontier.front();
    frontier.pop_front();
    if (grid.free(c)) return c;
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      GridIndex next{c.x + dx[k], c.y + dy[k]};
      if (!grid.in_bounds(next) || seen[grid.cell_index(next)]) continue;
      seen[grid.cell_index(next)] = 1;
      frontier.push_back(next);
    }
  }
  return std::nullopt;
}

std::optional<double> geodesic_distance(const OccupancyGrid& grid, double from_x, double from_y,
                                        double to_x, double to_y) {
  GridIndex a = grid.cell_of(from_x, from_y);
  GridIndex b = grid.cell_of(to_x, to_y);
  if (!grid.free(a)) return std::nullopt;
  if (!grid.free(b)) {
    auto snapped = nearest_free(grid, {b});
    if (!snapped) return std::nullopt;
    b = *snapped;
  }
  auto path = shortest_path(grid, a, b);
  if (!path) return std::nullopt;
  return path->length_cm;
}

bool line_of_sight(const OccupancyGrid& grid, GridIndex from, GridIndex to,
                   const std::vector<std::uint8_t>* transparent) {
  // Amanatides-Woo traversal between cell centers.
  double x0 = from.x + 0.5, y0 = from.y + 0.5;
  double x1 = to.x + 0.5, y1 = to.y + 0.5;
  double dx = x1 - x0, dy = y1 - y0;
  int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  GridIndex cur = from;
  auto blocked = [&](GridIndex c) {
    if (transparent && grid.in_bounds(c) && (*transparent)[grid.cell_index(c)]) return false;
    return grid.occupied(c);
  };
  if (!(cur == to) && blocked(cur)) return false;
  double t_max_x = step_x != 0 ? ((cur.x + (step_x > 0 ? 1 : 0)) - x0) / dx : 1e300;
  double t_max_y = step_y != 0 ? ((cur.y + (step_y > 0 ? 1 : 0)) - y0) / dy : 1e300;
  double t_delta_x = step_x != 0 ? std::fabs(1.0 / dx) : 1e300;
  double t_delta_y = step_y != 0 ? std::fabs(1.0 / dy) : 1e300;
  while (!(cur == to)) {
    if (t_max_x < t_max_y) {
      cur.x += step_x;
      t_max_x += t_delta_x;
    } else if (t_max_y < t_max_x) {
      cur.y += step_y;
      t_max_y += t_delta_y;
    } else {
      // Exact corner: visit both shoulder cells like a supercover walk.
      GridIndex side_a{cur.x + step_x, cur.y};
      GridIndex side_b{cur.x, cur.y + step_y};
      if (blocked(side_a) && blocked(side_b)) return false;
      cur.x += step_x;
      cur.y += step_y;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    }
    if (cur == to) break;
    if (blocked(cur)) return false;
  }
  return true;
}

}  // namespace navforge
