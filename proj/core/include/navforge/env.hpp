#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "navforge/episode.hpp"

namespace navforge {

inline constexpr int kEgoRasterSize = 224;         // 56 m window at 25 cm cells
inline constexpr double kStepSizeCm = 25.0;
inline constexpr double kTurnSizeDeg = 15.0;
inline constexpr double kSuccessRadiusCm = 100.0;  // 1 m
inline constexpr int kDefaultMaxSteps = 40;

// Ego raster codes: 0 walkable ground, 1 road surface (also walkable), 2+
// category-coded obstacles, 255 outside the grid. A cell is free iff < 2.
inline constexpr std::uint8_t kRasterGround = 0;
inline constexpr std::uint8_t kRasterRoad = 1;
inline constexpr std::uint8_t kRasterOutside = 255;

std::uint8_t raster_code(Category c);  // 2.. per category

enum class Action { MoveForward, TurnLeft, TurnRight, Stop };

std::string to_string(Action a);
std::optional<Action> action_from_string(const std::string& tag);

struct AgentPose {
  double x = 0.0;    // cm
  double y = 0.0;
  double yaw = 0.0;  // degrees, [-180, 180), 0 faces +x, counterclockwise

  bool operator==(const AgentPose& o) const = default;
};

struct EnvConfig {
  int max_steps = kDefaultMaxSteps;
  double success_radius_cm = kSuccessRadiusCm;
  double step_cm = kStepSizeCm;
  double turn_deg = kTurnSizeDeg;
  int raster_size = kEgoRasterSize;
  bool render_raster = true;  // rollouts that ignore pixels can skip the fill
  double step_penalty = 0.01;
  double success_bonus = 1.0;
};

struct Observation {
  std::vector<std::uint8_t> ego_raster;  // raster_size^2, heading up
  int raster_size = 0;
  double bearing_deg = 0.0;   // signed, [-180, 180), left negative
  double distance_m = 0.0;    // geodesic to goal
  int step_count = 0;
  bool goal_unreachable = false;
  bool forward_free = true;   // the cell one step ahead, mirrors the raster
};

struct StepInfo {
  bool success = false;
  double distance_m = 0.0;
  bool collision = false;
  bool goal_unreachable = false;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

struct StepLog {
  int step = 0;
  Action action = Action::Stop;
  AgentPose pose;              // after the action
  double bearing_deg = 0.0;
  double distance_m = 0.0;
  double reward = 0.0;
  bool collision = false;
  bool terminated = false;
  bool truncated = false;
};

nlohmann::ordered_json step_log_to_json(const StepLog& log);

// Dense progress shaping plus a terminal bonus; the progress terms telescope
// to (d0 - d_final) / d0 over an episode.
double compute_reward(double prev_d_cm, double new_d_cm, double d0_cm, bool success_stop,
                      const EnvConfig& config);

// Precomputed per-scene state shared by every episode on that scene.
struct SceneWorkspace {
  OccupancyGrid grid;
  std::vector<std::uint8_t> category_codes;  // per cell, raster codes

  static SceneWorkspace build(const SceneGraph& scene, const AssetCatalog& catalog,
                              double cell_size = kDefaultCellSizeCm);
};

class NavEnv {
 public:
  NavEnv(const SceneGraph& scene, const AssetCatalog& catalog, Episode episode,
         EnvConfig config = {});
  NavEnv(std::shared_ptr<const SceneWorkspace> workspace, Episode episode,
         EnvConfig config = {});

  // Deterministic: the seed is accepted for interface parity and recorded,
  // but every quantity is a pure function of episode and actions.
  Observation reset(std::uint64_t seed = 0);
  StepResult step(Action action);  // throws episode-over after termination

  bool active() const { return started_ && !terminated_ && !truncated_; }
  const AgentPose& pose() const { return pose_; }
  GridIndex cell() const;
  double distance_cm() const;
  int step_count() const { return step_count_; }
  const Episode& episode() const { return episode_; }
  const EnvConfig& config() const { return config_; }
  const OccupancyGrid& grid() const { return workspace_->grid; }
  const DistanceField& field() const { return field_; }
  const std::vector<StepLog>& log() const { return log_; }

  void write_log(const std::filesystem::path& file) const;

 private:
  Observation observe() const;
  double lookup_distance_cm(GridIndex c, bool* unreachable) const;

  std::shared_ptr<const SceneWorkspace> workspace_;
  Episode episode_;
  EnvConfig config_;
  DistanceField field_;
  GridIndex goal_cell_;
  AgentPose pose_;
  int step_count_ = 0;
  bool started_ = false;
  bool terminated_ = false;
  bool truncated_ = false;
  double last_distance_cm_ = 0.0;
  std::vector<StepLog> log_;
};

}  // namespace navforge
