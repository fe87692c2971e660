#include "navforge/episode.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "navforge/error.hpp"
#include "navforge/geometry.hpp"

namespace navforge {

using nlohmann::ordered_json;

std::string to_string(TaskType t) {
  return t == TaskType::PointNav ? "pointnav" : "objectnav";
}

std::optional<TaskType> task_type_from_string(const std::string& tag) {
  if (tag == "pointnav") return TaskType::PointNav;
  if (tag == "objectnav") return TaskType::ObjectNav;
  return std::nullopt;
}

const std::array<DifficultyLevel, 8>& difficulty_table() {
  static const std::array<DifficultyLevel, 8> table = {{
      {0, 400, 800, 15, 0.00},
      {1, 600, 1000, 30, 0.05},
      {2, 800, 1400, 45, 0.10},
      {3, 1000, 1800, 60, 0.15},
      {4, 1200, 2200, 90, 0.20},
      {5, 1500, 2600, 120, 0.25},
      {6, 2000, 3000, 150, 0.30},
      {7, 2500, 3500, 180, 0.35},
  }};
  return table;
}

const DifficultyLevel& difficulty_level(int level) {
  if (level < 0 || level > 7) throw_domain("bad-level", "difficulty level must lie in 0..7");
  return difficulty_table()[static_cast<std::size_t>(level)];
}

namespace {

std::string episode_id(std::uint64_t seed, int ordinal) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "ep_%016llx_%04d",
                static_cast<unsigned long long>(splitmix64(seed)), ordinal);
  return buf;
}

double bearing_deg(double from_x, double from_y, double to_x, double to_y) {
  return rad_to_deg(std::atan2(to_y - from_y, to_x - from_x));
}

struct InstancePick {
  const ActorRecord* rec = nullptr;
  std::vector<GridIndex> footprint;
};

}  // namespace

Episode sample_episode(const OccupancyGrid& grid, const SceneGraph& scene,
                       const AssetCatalog& catalog, const SampleOptions& options, Rng& rng,
                       SampleStats* stats_out) {
  if (options.bounds.min_cm < 0 || options.bounds.max_cm < options.bounds.min_cm) {
    throw_schema("bad-args", "path bounds must satisfy 0 <= min <= max");
  }
  std::vector<GridIndex> free = grid.free_cells();
  if (free.empty()) throw_domain("sampling-failed", "grid has no free cells");

  std::vector<InstancePick> instances;
  if (options.task == TaskType::ObjectNav) {
    auto cat = category_from_string(options.goal_category);
    if (!cat) throw_schema("unknown-category", "unknown goal category '" + options.goal_category + "'");
    for (const ActorRecord* rec : scene.actors_in_level()) {
      if (rec->category != *cat) continue;
      instances.push_back({rec, footprint_cells(grid, world_aabb(*rec, catalog))});
    }
    if (instances.empty()) {
      throw_domain("no-instance",
                   "scene holds no '" + options.goal_category + "' instance to navigate to");
    }
  }

  SampleStats stats;
  for (int attempt = 0; attempt < options.max_tries; ++attempt) {
    ++stats.tried;
    GridIndex start = free[rng.index(free.size())];

    GridIndex goal_cell;
    const InstancePick* instance = nullptr;
    if (options.task == TaskType::PointNav) {
      goal_cell = free[rng.index(free.size())];
    } else {
      instance = &instances[rng.index(instances.size())];
      auto adjacent = nearest_free(grid, instance->footprint);
      if (!adjacent) {
        ++stats.rejected_unreachable;
        continue;
      }
      goal_cell = *adjacent;
    }
    if (goal_cell == start) {
      ++stats.rejected_same_cell;
      continue;
    }

    // Straight-line prefilter: the geodesic can only be longer.
    double sx = grid.center_x(start), sy = grid.center_y(start);
    double gx = grid.center_x(goal_cell), gy = grid.center_y(goal_cell);
    double straight = std::hypot(gx - sx, gy - sy);
    if (straight > options.bounds.max_cm) {
      ++stats.rejected_length;
      continue;
    }

    auto path = shortest_path(grid, start, goal_cell);
    if (!path) {
      ++stats.rejected_unreachable;
      continue;
    }
    if (path->length_cm < options.bounds.min_cm || path->length_cm > options.bounds.max_cm) {
      ++stats.rejected_length;
      continue;
    }

    if (options.task == TaskType::ObjectNav) {
      // The object must be visible from somewhere along the route; its own
      // footprint never blocks the ray.
      std::vector<std::uint8_t> transparent(
          static_cast<std::size_t>(grid.width()) * grid.height(), 0);
      for (GridIndex c : instance->footprint) transparent[grid.cell_index(c)] = 1;
      GridIndex target = grid.cell_of(instance->rec->transform.location.x,
                                      instance->rec->transform.location.y);
      bool visible = false;
      for (GridIndex wp : path->cells) {
        if (line_of_sight(grid, wp, target, &transparent)) {
          visible = true;
          break;
        }
      }
      if (!visible) {
        ++stats.rejected_visibility;
        continue;
      }
    }

    Episode ep;
    ep.seed = rng.seed();
    ep.id = episode_id(rng.seed(), options.ordinal);
    ep.scene_ref = options.scene_ref;
    ep.task = options.task;
    ep.start_x = sx;
    ep.start_y = sy;
    double offset = options.heading_offset_max_deg >= 180.0
                        ? rng.uniform(-180.0, 180.0)
                        : rng.uniform(-options.heading_offset_max_deg,
                                      options.heading_offset_max_deg);
    ep.start_yaw = normalize_deg(bearing_deg(sx, sy, gx, gy) + offset);
    ep.goal.task = options.task;
    ep.goal.x = gx;
    ep.goal.y = gy;
    if (instance) {
      ep.goal.object_category = options.goal_category;
      ep.goal.object_name = instance->rec->name;
    }
    for (GridIndex c : path->cells) {
      ep.waypoints.emplace_back(grid.center_x(c), grid.center_y(c));
    }
    ep.l_star_cm = path->length_cm;
    ep.d0_cm = path->length_cm;
    ep.level = options.level_tag;
    if (stats_out) *stats_out = stats;
    return ep;
  }

  if (stats_out) *stats_out = stats;
  std::ostringstream msg;
  msg << "episode sampling exhausted " << options.max_tries << " tries (same-cell "
      << stats.rejected_same_cell << ", unreachable " << stats.rejected_unreachable
      << ", length " << stats.rejected_length << ", visibility "
      << stats.rejected_visibility << ")";
  throw_domain("sampling-failed", msg.str());
}

AugmentResult apply_difficulty(const SceneGraph& scene, const AssetCatalog& catalog,
                               int level, Rng& rng, double cell_size) {
  const DifficultyLevel& spec = difficulty_level(level);
  AugmentResult result;
  result.scene = scene;
  result.heading_offset_max_deg = spec.heading_offset_max_deg;
  result.grid = OccupancyGrid::build(result.scene, catalog, cell_size);
  std::vector<GridIndex> walkable = result.grid.free_cells();
  result.walkable_before = walkable.size();
  if (spec.obstacle_density <= 0.0 || walkable.empty()) return result;

  std::size_t target =
      static_cast<std::size_t>(std::llround(spec.obstacle_density *
                                            static_cast<double>(walkable.size())));
  // Bulky blockers do the coarse fill, single-cell cones land the exact count.
  const AssetDescriptor& blocker = catalog.get("prop_road_blocker");
  const AssetDescriptor& cone = catalog.get("prop_road_cone");

  std::set<std::size_t> blocked_new;
  int spawned = 0;
  std::size_t guard = 0;
  std::size_t guard_limit = walkable.size() * 8 + 1024;
  while (blocked_new.size() < target && guard++ < guard_limit) {
    std::size_t remaining = target - blocked_new.size();
    GridIndex at = walkable[rng.index(walkable.size())];
    if (result.grid.occupied(at)) continue;
    bool use_blocker = remaining >= 16;
    const AssetDescriptor& asset = use_blocker ? blocker : cone;
    Transform t;
    t.location = {result.grid.center_x(at), result.grid.center_y(at), asset.base_extent.z};
    char name[32];
    std::snprintf(name, sizeof(name), "Obst_%05d", ++spawned);
    const ActorRecord& rec = result.scene.spawn_actor(name, asset.asset_id, t, catalog, true);
    std::vector<GridIndex> covered =
        footprint_cells(result.grid, world_aabb(rec, catalog));
    std::size_t newly = 0;
    for (GridIndex c : covered) {
      if (!result.grid.occupied(c)) ++newly;
    }
    if (newly == 0 || blocked_new.size() + newly > target) {
      result.scene.delete_actor(name);
      --spawned;
      if (use_blocker) continue;  // retry; cones eventually land exactly
      continue;
    }
    for (GridIndex c : covered) {
      if (!result.grid.occupied(c)) {
        result.grid.set_occupied(c, true);
        blocked_new.insert(result.grid.cell_index(c));
      }
    }
  }
  if (blocked_new.size() + 1 < target) {
    throw_domain("density-unreachable",
                 "could not reach the obstacle density target before the resample budget");
  }
  result.obstacles_added = spawned;
  result.cells_blocked = blocked_new.size();
  // Rebuild from the augmented scene so grid and scene can never drift.
  result.grid = OccupancyGrid::build(result.scene, catalog, cell_size);
  return result;
}

std::vector<Episode> sample_episodes_at_level(const SceneGraph& scene,
                                              const AssetCatalog& catalog, int level,
                                              int count, Rng& rng,
                                              const std::string& scene_ref,
                                              AugmentResult* augmented_out) {
  const DifficultyLevel& spec = difficulty_level(level);
  AugmentResult augmented = apply_difficulty(scene, catalog, level, rng);
  SampleOptions options;
  options.task = TaskType::PointNav;
  options.bounds = {spec.path_min_cm, spec.path_max_cm};
  options.heading_offset_max_deg = spec.heading_offset_max_deg;
  options.level_tag = level;
  options.scene_ref = scene_ref;
  std::vector<Episode> episodes;
  for (int i = 0; i < count; ++i) {
    options.ordinal = i;
    Episode ep = sample_episode(augmented.grid, augmented.scene, catalog, options, rng);
    ep.id += "_L" + std::to_string(level);
    episodes.push_back(std::move(ep));
  }
  if (augmented_out) *augmented_out = std::move(augmented);
  return episodes;
}

ordered_json episode_to_json(const Episode& e) {
  ordered_json j;
  j["id"] = e.id;
  j["scene_ref"] = e.scene_ref;
  j["task"] = to_string(e.task);
  j["start"] = {{"x", e.start_x}, {"y", e.start_y}, {"yaw", e.start_yaw}};
  ordered_json goal;
  goal["x"] = e.goal.x;
  goal["y"] = e.goal.y;
  if (e.task == TaskType::ObjectNav) {
    goal["category"] = e.goal.object_category;
    goal["instance"] = e.goal.object_name;
  }
  j["goal"] = std::move(goal);
  ordered_json wps = ordered_json::array();
  for (const auto& [x, y] : e.waypoints) wps.push_back({x, y});
  j["waypoints"] = std::move(wps);
  j["l_star_cm"] = e.l_star_cm;
  j["d0_cm"] = e.d0_cm;
  if (e.level) {
    j["level"] = *e.level;
  } else {
    j["level"] = nullptr;
  }
  j["seed"] = e.seed;
  return j;
}

Episode episode_from_json(const ordered_json& j) {
  Episode e;
  try {
    e.id = j.at("id").get<std::string>();
    e.scene_ref = j.at("scene_ref").get<std::string>();
    auto task = task_type_from_string(j.at("task").get<std::string>());
    if (!task) throw_schema("bad-json", "unknown task type");
    e.task = *task;
    e.start_x = j.at("start").at("x").get<double>();
    e.start_y = j.at("start").at("y").get<double>();
    e.start_yaw = j.at("start").at("yaw").get<double>();
    e.goal.task = e.task;
    e.goal.x = j.at("goal").at("x").get<double>();
    e.goal.y = j.at("goal").at("y").get<double>();
    if (e.task == TaskType::ObjectNav) {
      e.goal.object_category = j.at("goal").at("category").get<std::string>();
      e.goal.object_name = j.at("goal").at("instance").get<std::string>();
    }
    for (const auto& wp : j.at("waypoints")) {
      e.waypoints.emplace_back(wp.at(0).get<double>(), wp.at(1).get<double>());
    }
    e.l_star_cm = j.at("l_star_cm").get<double>();
    e.d0_cm = j.at("d0_cm").get<double>();
    if (j.contains("level") && !j.at("level").is_null()) e.level = j.at("level").get<int>();
    e.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& ex) {
    throw_schema("bad-json", std::string("episode record malformed: ") + ex.what());
  }
  if (e.waypoints.empty()) throw_schema("bad-json", "episode has no waypoints");
  return e;
}

void save_episodes(const std::vector<Episode>& episodes, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw_schema("io-error", "cannot write episodes file " + file.string());
  for (const Episode& e : episodes) {
    out << episode_to_json(e).dump() << "\n";
  }
}

std::vector<Episode> load_episodes(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw_schema("io-error", "cannot open episodes file " + file.string());
  std::vector<Episode> episodes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw_schema("bad-json", "episodes line " + std::to_string(line_no) + ": " + e.what());
    }
    episodes.push_back(episode_from_json(j));
  }
  return episodes;
}

}  // namespace navforge
