#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "navforge/navgrid.hpp"
#include "navforge/rng.hpp"

namespace navforge {

inline constexpr double kDefaultMinPathCm = 300.0;   // 3 m
inline constexpr double kDefaultMaxPathCm = 2000.0;  // 20 m
inline constexpr int kDefaultSampleTries = 400;

enum class TaskType { PointNav, ObjectNav };

std::string to_string(TaskType t);
std::optional<TaskType> task_type_from_string(const std::string& tag);

struct PathBounds {
  double min_cm = kDefaultMinPathCm;
  double max_cm = kDefaultMaxPathCm;
};

struct DifficultyLevel {
  int index = 0;
  double path_min_cm = 0.0;
  double path_max_cm = 0.0;
  double heading_offset_max_deg = 0.0;  // start yaw offset from goal bearing
  double obstacle_density = 0.0;        // fraction of walkable cells to block
};

// Eight rungs; path windows lengthen, heading offsets widen and obstacle
// density grows monotonically.
const std::array<DifficultyLevel, 8>& difficulty_table();
const DifficultyLevel& difficulty_level(int level);  // throws outside 0..7

struct GoalSpec {
  TaskType task = TaskType::PointNav;
  double x = 0.0;  // navigation target, cm
  double y = 0.0;
  std::string object_category;  // ObjectNav only
  std::string object_name;      // chosen instance
};

struct Episode {
  std::string id;
  std::string scene_ref;
  TaskType task = TaskType::PointNav;
  double start_x = 0.0;
  double start_y = 0.0;
  double start_yaw = 0.0;
  GoalSpec goal;
  std::vector<std::pair<double, double>> waypoints;  // cell centers, cm
  double l_star_cm = 0.0;
  double d0_cm = 0.0;  // equals l_star_cm at creation
  std::optional<int> level;
  std::uint64_t seed = 0;
};

struct SampleStats {
  int tried = 0;
  int rejected_same_cell = 0;
  int rejected_unreachable = 0;
  int rejected_length = 0;
  int rejected_visibility = 0;
  int rejected_no_instance = 0;
};

struct SampleOptions {
  TaskType task = TaskType::PointNav;
  PathBounds bounds;
  std::string goal_category;  // ObjectNav: category tag to seek
  int max_tries = kDefaultSampleTries;
  // Start yaw = bearing to goal + uniform(-offset, +offset); 180 means a
  // uniformly random heading.
  double heading_offset_max_deg = 180.0;
  std::optional<int> level_tag;
  std::string scene_ref;
  int ordinal = 0;  // distinguishes episodes drawn from one stream
};

// Rejection sampling over free cells. Throws sampling-failed with the filter
// statistics when max_tries runs out.
Episode sample_episode(const OccupancyGrid& grid, const SceneGraph& scene,
                       const AssetCatalog& catalog, const SampleOptions& options, Rng& rng,
                       SampleStats* stats_out = nullptr);

struct AugmentResult {
  SceneGraph scene;     // copy with obstacle props added
  OccupancyGrid grid;   // rebuilt
  double heading_offset_max_deg = 0.0;
  int obstacles_added = 0;
  std::size_t cells_blocked = 0;    // originally-walkable cells now occupied
  std::size_t walkable_before = 0;
};

// Scatters prop obstacles until the blocked fraction of originally-walkable
// cells reaches the level's density within one cell, then rebuilds the grid.
AugmentResult apply_difficulty(const SceneGraph& scene, const AssetCatalog& catalog,
                               int level, Rng& rng,
                               double cell_size = kDefaultCellSizeCm);

// Difficulty-level sampling: augment first, then draw episodes on the new
// grid with the level's path window and heading-offset policy.
std::vector<Episode> sample_episodes_at_level(const SceneGraph& scene,
                                              const AssetCatalog& catalog, int level,
                                              int count, Rng& rng,
                                              const std::string& scene_ref = "",
                                              AugmentResult* augmented_out = nullptr);

nlohmann::ordered_json episode_to_json(const Episode& e);
Episode episode_from_json(const nlohmann::ordered_json& j);

void save_episodes(const std::vector<Episode>& episodes, const std::filesystem::path& file);
std::vector<Episode> load_episodes(const std::filesystem::path& file);

}  // namespace navforge
