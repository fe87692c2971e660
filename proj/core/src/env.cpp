#include "navforge/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "navforge/error.hpp"

namespace navforge {

std::uint8_t raster_code(Category c) {
  switch (c) {
    case Category::Road:
      return kRasterRoad;
    case Category::Building:
      return 2;
    case Category::Tree:
      return 3;
    case Category::Vehicle:
      return 4;
    case Category::StreetFurniture:
      return 5;
    case Category::Prop:
      return 6;
    case Category::Container:
      return 7;
  }
  return kRasterOutside;
}

std::string to_string(Action a) {
  switch (a) {
    case Action::MoveForward:
      return "move_forward";
    case Action::TurnLeft:
      return "turn_left";
    case Action::TurnRight:
      return "turn_right";
    case Action::Stop:
      return "stop";
  }
  return "stop";
}

std::optional<Action> action_from_string(const std::string& tag) {
  if (tag == "move_forward") return Action::MoveForward;
  if (tag == "turn_left") return Action::TurnLeft;
  if (tag == "turn_right") return Action::TurnRight;
  if (tag == "stop") return Action::Stop;
  return std::nullopt;
}

nlohmann::ordered_json step_log_to_json(const StepLog& log) {
  return nlohmann::ordered_json{{"step", log.step},
                                {"action", to_string(log.action)},
                                {"x", log.pose.x},
                                {"y", log.pose.y},
                                {"yaw", log.pose.yaw},
                                {"bearing_deg", log.bearing_deg},
                                {"distance_m", log.distance_m},
                                {"reward", log.reward},
                                {"collision", log.collision},
                                {"terminated", log.terminated},
                                {"truncated", log.truncated}};
}

double compute_reward(double prev_d_cm, double new_d_cm, double d0_cm, bool success_stop,
                      const EnvConfig& config) {
  double d0 = std::max(d0_cm, 1e-9);
  double reward = (prev_d_cm - new_d_cm) / d0 - config.step_penalty;
  if (success_stop) reward += config.success_bonus;
  return reward;
}

SceneWorkspace SceneWorkspace::build(const SceneGraph& scene, const AssetCatalog& catalog,
                                     double cell_size) {
  SceneWorkspace ws;
  ws.grid = OccupancyGrid::build(scene, catalog, cell_size);
  ws.category_codes.assign(
      static_cast<std::size_t>(ws.grid.width()) * ws.grid.height(), kRasterGround);

  auto paint = [&](const ActorRecord& rec) {
    Aabb box = world_aabb(rec, catalog);
    std::uint8_t code = raster_code(rec.category);
    for (GridIndex c : footprint_cells(ws.grid, box)) {
      ws.category_codes[ws.grid.cell_index(c)] = code;
    }
  };

  // Roads go down first; obstacles follow bottom-to-top so the tallest actor
  // wins contested cells, matching the top-down render.
  std::vector<const ActorRecord*> obstacles;
  for (const ActorRecord* rec : scene.actors_in_level()) {
    if (rec->category == Category::Road) {
      paint(*rec);
    } else {
      obstacles.push_back(rec);
    }
  }
  std::stable_sort(obstacles.begin(), obstacles.end(),
                   [&](const ActorRecord* a, const ActorRecord* b) {
                     double za = world_aabb(*a, catalog).max.z;
                     double zb = world_aabb(*b, catalog).max.z;
                     if (za != zb) return za < zb;
                     return a->name < b->name;
                   });
  for (const ActorRecord* rec : obstacles) paint(*rec);

  // Margin cells clipped by the ground boundary carry no actor; mark them as
  // outside so code >= 2 stays equivalent to "not walkable".
  for (int y = 0; y < ws.grid.height(); ++y) {
    for (int x = 0; x < ws.grid.width(); ++x) {
      GridIndex c{x, y};
      std::size_t i = ws.grid.cell_index(c);
      if (ws.grid.occupied(c) && ws.category_codes[i] < 2) {
        ws.category_codes[i] = kRasterOutside;
      }
    }
  }
  return ws;
}

namespace {

double atan2_deg(double y, double x) { return rad_to_deg(std::atan2(y, x)); }

void validate_config(const EnvConfig& config) {
  if (config.max_steps <= 0) throw_schema("bad-args", "max_steps must be positive");
  if (config.raster_size <= 0 || config.raster_size % 2 != 0) {
    throw_schema("bad-args", "raster_size must be positive and even");
  }
  if (config.step_cm <= 0 || config.turn_deg <= 0 || config.success_radius_cm <= 0) {
    throw_schema("bad-args", "step, turn and success radius must be positive");
  }
}

}  // namespace

NavEnv::NavEnv(const SceneGraph& scene, const AssetCatalog& catalog, Episode episode,
               EnvConfig config)
    : NavEnv(std::make_shared<SceneWorkspace>(SceneWorkspace::build(scene, catalog)),
             std::move(episode), config) {}

NavEnv::NavEnv(std::shared_ptr<const SceneWorkspace> workspace, Episode episode,
               EnvConfig config)
    : workspace_(std::move(workspace)), episode_(std::move(episode)), config_(config) {
  validate_config(config_);
  if (!workspace_) throw_schema("bad-args", "null workspace");
  const OccupancyGrid& grid = workspace_->grid;

  GridIndex raw_goal = grid.cell_of(episode_.goal.x, episode_.goal.y);
  if (grid.free(raw_goal)) {
    goal_cell_ = raw_goal;
  } else {
    auto snapped = nearest_free(grid, {raw_goal});
    if (!snapped) throw_domain("goal-unreachable", "no free cell near the goal");
    goal_cell_ = *snapped;
    episode_.goal.x = grid.center_x(goal_cell_);
    episode_.goal.y = grid.center_y(goal_cell_);
  }
  field_ = DistanceField(grid, goal_cell_);

  GridIndex start = grid.cell_of(episode_.start_x, episode_.start_y);
  if (grid.occupied(start)) throw_domain("start-blocked", "start cell is occupied");
}

GridIndex NavEnv::cell() const { return workspace_->grid.cell_of(pose_.x, pose_.y); }

double NavEnv::lookup_distance_cm(GridIndex c, bool* unreachable) const {
  if (unreachable) *unreachable = false;
  if (c == goal_cell_) {
    return std::hypot(episode_.goal.x - pose_.x, episode_.goal.y - pose_.y);
  }
  if (field_.reachable(c)) return field_.distance_cm(c);
  if (unreachable) *unreachable = true;
  return std::hypot(episode_.goal.x - pose_.x, episode_.goal.y - pose_.y);
}

double NavEnv::distance_cm() const { return lookup_distance_cm(cell(), nullptr); }

Observation NavEnv::reset(std::uint64_t) {
  pose_ = {episode_.start_x, episode_.start_y, normalize_deg(episode_.start_yaw)};
  step_count_ = 0;
  started_ = true;
  terminated_ = false;
  truncated_ = false;
  log_.clear();
  if (episode_.d0_cm <= 0) {
    episode_.d0_cm = std::max(lookup_distance_cm(cell(), nullptr), 1.0);
  }
  last_distance_cm_ = lookup_distance_cm(cell(), nullptr);
  return observe();
}

StepResult NavEnv::step(Action action) {
  if (!started_) throw_domain("env-not-reset", "call reset before step");
  if (terminated_ || truncated_) {
    throw_domain("episode-over", "step after termination; call reset");
  }
  ++step_count_;

  bool collision = false;
  bool success = false;
  const OccupancyGrid& grid = workspace_->grid;

  switch (action) {
    case Action::MoveForward: {
      double yaw_rad = deg_to_rad(pose_.yaw);
      double nx = pose_.x + std::cos(yaw_rad) * config_.step_cm;
      double ny = pose_.y + std::sin(yaw_rad) * config_.step_cm;
      if (grid.occupied(grid.cell_of(nx, ny))) {
        collision = true;  // bump: the agent stays put
      } else {
        pose_.x = nx;
        pose_.y = ny;
      }
      break;
    }
    case Action::TurnLeft:
      pose_.yaw = normalize_deg(pose_.yaw + config_.turn_deg);
      break;
    case Action::TurnRight:
      pose_.yaw = normalize_deg(pose_.yaw - config_.turn_deg);
      break;
    case Action::Stop:
      terminated_ = true;
      break;
  }
  // Hitting the budget truncates; a Stop exactly at the budget is both.
  if (step_count_ >= config_.max_steps) truncated_ = true;

  bool unreachable = false;
  double new_d = lookup_distance_cm(cell(), &unreachable);
  if (action == Action::Stop) success = new_d < config_.success_radius_cm;

  StepResult result;
  result.reward = compute_reward(last_distance_cm_, new_d, episode_.d0_cm,
                                 terminated_ && success, config_);
  last_distance_cm_ = new_d;
  result.observation = observe();
  result.terminated = terminated_;
  result.truncated = truncated_;
  result.info = {terminated_ && success, new_d / 100.0, collision, unreachable};

  log_.push_back({step_count_, action, pose_, result.observation.bearing_deg, new_d / 100.0,
                  result.reward, collision, terminated_, truncated_});
  return result;
}

Observation NavEnv::observe() const {
  const OccupancyGrid& grid = workspace_->grid;
  Observation obs;
  obs.raster_size = config_.raster_size;
  obs.step_count = step_count_;

  bool unreachable = false;
  obs.distance_m = lookup_distance_cm(cell(), &unreachable) / 100.0;
  obs.goal_unreachable = unreachable;
  obs.bearing_deg = normalize_deg(
      pose_.yaw - atan2_deg(episode_.goal.y - pose_.y, episode_.goal.x - pose_.x));

  double yaw_rad = deg_to_rad(pose_.yaw);
  double fx = std::cos(yaw_rad), fy = std::sin(yaw_rad);   // forward
  double rx = std::sin(yaw_rad), ry = -std::cos(yaw_rad);  // right

  obs.forward_free =
      !grid.occupied(grid.cell_of(pose_.x + fx * config_.step_cm, pose_.y + fy * config_.step_cm));

  if (config_.render_raster) {
    int size = config_.raster_size;
    int half = size / 2;
    double cell = grid.cell_size();
    obs.ego_raster.assign(static_cast<std::size_t>(size) * size, kRasterOutside);
    // Pixel (r, c) samples the world point pose + fwd*(half-r)*cell +
    // right*(c-half)*cell; row half-1, column half is therefore exactly one
    // step ahead, so the raster agrees with move_forward by construction.
    for (int r = 0; r < size; ++r) {
      double a = (half - r) * cell;
      for (int c = 0; c < size; ++c) {
        double b = (c - half) * cell;
        GridIndex g = grid.cell_of(pose_.x + fx * a + rx * b, pose_.y + fy * a + ry * b);
        if (grid.in_bounds(g)) {
          obs.ego_raster[static_cast<std::size_t>(r) * size + c] =
              workspace_->category_codes[grid.cell_index(g)];
        }
      }
    }
  }
  return obs;
}

void NavEnv::write_log(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw_schema("io-error", "cannot open " + file.string());
  for (const StepLog& entry : log_) out << step_log_to_json(entry).dump() << "\n";
}

}  // namespace navforge
