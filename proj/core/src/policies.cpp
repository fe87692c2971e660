#include "navforge/policies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "navforge/error.hpp"

namespace navforge {

namespace {

double atan2_deg(double y, double x) { return rad_to_deg(std::atan2(y, x)); }

struct Delta {
  int dx, dy;
};
constexpr Delta kMoves[8] = {{1, 0}, {-1, 0}, {0, 1},  {0, -1},
                             {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

}  // namespace

// ---------------------------------------------------------------------------
// Failure taxonomy

std::string to_string(FailureCategory c) {
  switch (c) {
    case FailureCategory::Loop:
      return "loop";
    case FailureCategory::Directional:
      return "directional";
    case FailureCategory::GoalProximity:
      return "goal_proximity";
    case FailureCategory::ObstacleAvoidance:
      return "obstacle_avoidance";
    case FailureCategory::Timeout:
      return "timeout";
  }
  return "timeout";
}

std::optional<FailureCategory> failure_category_from_string(const std::string& tag) {
  if (tag == "loop") return FailureCategory::Loop;
  if (tag == "directional") return FailureCategory::Directional;
  if (tag == "goal_proximity") return FailureCategory::GoalProximity;
  if (tag == "obstacle_avoidance") return FailureCategory::ObstacleAvoidance;
  if (tag == "timeout") return FailureCategory::Timeout;
  return std::nullopt;
}

bool has_entry_loop(const std::vector<GridIndex>& entry_cells, const std::vector<int>& entry_steps,
                    GridIndex* which) {
  std::map<std::pair<int, int>, std::vector<int>> by_cell;
  for (std::size_t i = 0; i < entry_cells.size(); ++i) {
    by_cell[{entry_cells[i].x, entry_cells[i].y}].push_back(entry_steps[i]);
  }
  for (const auto& [cell, steps] : by_cell) {
    for (std::size_t i = 0; i + kLoopEntryCount <= steps.size(); ++i) {
      if (steps[i + kLoopEntryCount - 1] - steps[i] <= kLoopWindowSteps - 1) {
        if (which) *which = {cell.first, cell.second};
        return true;
      }
    }
  }
  return false;
}

std::vector<FailureEvent> extract_failures(const EpisodeTrace& trace, double success_radius_m,
                                           double turn_deg) {
  std::vector<FailureEvent> out;
  if (trace.success) return out;

  // Entry events: the start cell counts, then every cell change.
  std::vector<GridIndex> entry_cells{trace.start_cell};
  std::vector<int> entry_steps{0};
  GridIndex prev = trace.start_cell;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (!(trace.steps[i].cell == prev)) {
      entry_cells.push_back(trace.steps[i].cell);
      entry_steps.push_back(static_cast<int>(i) + 1);
      prev = trace.steps[i].cell;
    }
  }

  GridIndex loop_cell{};
  if (has_entry_loop(entry_cells, entry_steps, &loop_cell)) {
    FailureEvent f;
    f.category = FailureCategory::Loop;
    f.episode_id = trace.episode_id;
    f.cell = loop_cell;
    f.detail = "cell (" + std::to_string(loop_cell.x) + ", " + std::to_string(loop_cell.y) +
               ") entered " + std::to_string(kLoopEntryCount) + " times within " +
               std::to_string(kLoopWindowSteps) + " steps";
    out.push_back(f);
  }

  int directional_count = 0;
  int directional_first = -1;
  double directional_spread = 0.0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const StepTrace& s = trace.steps[i];
    bool turn = s.action == Action::TurnLeft || s.action == Action::TurnRight;
    if (turn && std::abs(s.bearing_deg) <= turn_deg && s.forward_free) {
      ++directional_count;
      if (directional_first < 0) directional_first = static_cast<int>(i) + 1;
      directional_spread = std::max(directional_spread, std::abs(s.bearing_deg));
    }
  }
  if (directional_count > 0) {
    FailureEvent f;
    f.category = FailureCategory::Directional;
    f.episode_id = trace.episode_id;
    f.step = directional_first;
    f.bearing_deg = directional_spread;
    f.detail = std::to_string(directional_count) + " turns while aligned and clear";
    out.push_back(f);
  }

  if (trace.stopped && trace.final_distance_m >= success_radius_m) {
    FailureEvent f;
    f.category = FailureCategory::GoalProximity;
    f.episode_id = trace.episode_id;
    f.step = static_cast<int>(trace.steps.size());
    f.distance_m = trace.final_distance_m;
    f.detail = "stopped outside the goal radius";
    out.push_back(f);
  } else if (!trace.stopped && trace.min_distance_m < success_radius_m) {
    FailureEvent f;
    f.category = FailureCategory::GoalProximity;
    f.episode_id = trace.episode_id;
    f.distance_m = trace.min_distance_m;
    f.detail = "walked through the goal radius without stopping";
    out.push_back(f);
  }

  std::map<std::pair<int, int>, int> bumps;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const StepTrace& s = trace.steps[i];
    if (!s.collision) continue;
    int n = ++bumps[{s.blocked_cell.x, s.blocked_cell.y}];
    if (n == 3) {
      FailureEvent f;
      f.category = FailureCategory::ObstacleAvoidance;
      f.episode_id = trace.episode_id;
      f.step = static_cast<int>(i) + 1;
      f.cell = s.blocked_cell;
      f.detail = "three bumps into the same cell";
      out.push_back(f);
      break;
    }
  }

  if (trace.truncated && !trace.stopped) {
    FailureEvent f;
    f.category = FailureCategory::Timeout;
    f.episode_id = trace.episode_id;
    f.step = static_cast<int>(trace.steps.size());
    f.distance_m = trace.final_distance_m;
    f.detail = "step budget exhausted";
    out.push_back(f);
  }
  return out;
}

nlohmann::ordered_json failure_to_json(const FailureEvent& f) {
  return nlohmann::ordered_json{{"category", to_string(f.category)},
                                {"episode_id", f.episode_id},
                                {"step", f.step},
                                {"cell", {f.cell.x, f.cell.y}},
                                {"bearing_deg", f.bearing_deg},
                                {"distance_m", f.distance_m},
                                {"detail", f.detail}};
}

// ---------------------------------------------------------------------------
// Rules

bool condition_matches(const RuleCondition& c, const RuleContext& ctx) {
  if (c.min_distance_m && ctx.distance_m < *c.min_distance_m) return false;
  if (c.max_distance_m && ctx.distance_m >= *c.max_distance_m) return false;
  double ab = std::abs(ctx.bearing_deg);
  if (c.abs_bearing_max_deg && ab > *c.abs_bearing_max_deg) return false;
  if (c.abs_bearing_min_deg && ab < *c.abs_bearing_min_deg) return false;
  if (c.bearing_sign < 0 && !(ctx.bearing_deg < 0)) return false;
  if (c.bearing_sign > 0 && !(ctx.bearing_deg > 0)) return false;
  if (c.forward_blocked && *c.forward_blocked == ctx.forward_free) return false;
  if (c.revisit && *c.revisit != ctx.revisit) return false;
  return true;
}

const Rule* RuleList::find(const std::string& id) const {
  for (const Rule& r : rules) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::vector<Rule> synthesize_rules(const std::vector<FailureEvent>& failures, int episode_index,
                                   double success_radius_m, double turn_deg) {
  std::vector<Rule> out;
  auto seen = [&](FailureCategory c) {
    for (const Rule& r : out) {
      if (r.category == to_string(c)) return true;
    }
    return false;
  };
  for (const FailureEvent& f : failures) {
    if (seen(f.category)) continue;
    Rule r;
    r.category = to_string(f.category);
    r.created_episode = episode_index;
    r.last_active_episode = episode_index;
    switch (f.category) {
      case FailureCategory::GoalProximity:
        r.id = "stop-at-goal";
        r.priority = 100;
        r.condition.max_distance_m = success_radius_m;
        r.directive = {Action::Stop};
        break;
      case FailureCategory::Loop:
        r.id = "loop-escape";
        r.priority = 90;
        r.condition.revisit = true;
        r.condition.min_distance_m = success_radius_m;
        r.directive = {Action::TurnRight, Action::TurnRight};
        break;
      case FailureCategory::ObstacleAvoidance:
        r.id = "sidestep";
        r.priority = 80;
        r.condition.forward_blocked = true;
        r.condition.min_distance_m = success_radius_m;
        r.directive = {Action::TurnRight, Action::MoveForward, Action::MoveForward,
                       Action::TurnLeft};
        break;
      case FailureCategory::Directional:
        r.id = "hold-heading";
        r.priority = 70;
        // Widen the keep-walking cone to cover the bearings that were
        // needlessly corrected, never past two turn increments.
        r.condition.abs_bearing_max_deg =
            std::clamp(f.bearing_deg, turn_deg, 2.0 * turn_deg);
        r.condition.forward_blocked = false;
        r.condition.min_distance_m = success_radius_m;
        r.directive = {Action::MoveForward};
        break;
      case FailureCategory::Timeout:
        r.id = "push-forward";
        r.priority = 60;
        r.condition.abs_bearing_max_deg = 3.0 * turn_deg;
        r.condition.forward_blocked = false;
        r.condition.min_distance_m = success_radius_m;
        r.directive = {Action::MoveForward};
        break;
    }
    out.push_back(std::move(r));
  }
  return out;
}

void update_rules(RuleList& list, const std::vector<Rule>& fresh, int episode_index) {
  std::erase_if(list.rules, [&](const Rule& r) {
    return r.last_active_episode <= episode_index - kRuleIdleEpisodes;
  });
  for (const Rule& candidate : fresh) {
    if (candidate.directive.empty()) {
      throw_schema("bad-rule", "rule " + candidate.id + " has an empty directive");
    }
    if (list.find(candidate.id)) continue;
    bool contradicts = false;
    for (const Rule& incumbent : list.rules) {
      if (incumbent.condition == candidate.condition &&
          incumbent.directive != candidate.directive) {
        contradicts = true;  // the incumbent keeps its claim on the condition
        break;
      }
    }
    if (contradicts) continue;
    list.rules.push_back(candidate);
  }
  std::stable_sort(list.rules.begin(), list.rules.end(),
                   [](const Rule& a, const Rule& b) { return a.priority > b.priority; });
  while (list.rules.size() > static_cast<std::size_t>(kRuleCap)) {
    auto newest = list.rules.begin();
    for (auto it = list.rules.begin(); it != list.rules.end(); ++it) {
      if (it->created_episode >= newest->created_episode) newest = it;
    }
    list.rules.erase(newest);
  }
}

nlohmann::ordered_json rule_to_json(const Rule& r) {
  nlohmann::ordered_json cond = nlohmann::ordered_json::object();
  if (r.condition.min_distance_m) cond["min_distance_m"] = *r.condition.min_distance_m;
  if (r.condition.max_distance_m) cond["max_distance_m"] = *r.condition.max_distance_m;
  if (r.condition.abs_bearing_max_deg) {
    cond["abs_bearing_max_deg"] = *r.condition.abs_bearing_max_deg;
  }
  if (r.condition.abs_bearing_min_deg) {
    cond["abs_bearing_min_deg"] = *r.condition.abs_bearing_min_deg;
  }
  if (r.condition.bearing_sign != 0) cond["bearing_sign"] = r.condition.bearing_sign;
  if (r.condition.forward_blocked) cond["forward_blocked"] = *r.condition.forward_blocked;
  if (r.condition.revisit) cond["revisit"] = *r.condition.revisit;

  nlohmann::ordered_json directive = nlohmann::ordered_json::array();
  for (Action a : r.directive) directive.push_back(to_string(a));

  return nlohmann::ordered_json{{"id", r.id},
                                {"category", r.category},
                                {"priority", r.priority},
                                {"condition", cond},
                                {"directive", directive},
                                {"created_episode", r.created_episode},
                                {"last_active_episode", r.last_active_episode},
                                {"activations", r.activations}};
}

Rule rule_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw_schema("bad-rule", "rule must be an object");
  Rule r;
  try {
    r.id = j.at("id").get<std::string>();
    r.category = j.value("category", std::string{});
    r.priority = j.value("priority", 0);
    const auto& cond = j.at("condition");
    if (cond.contains("min_distance_m")) r.condition.min_distance_m = cond["min_distance_m"];
    if (cond.contains("max_distance_m")) r.condition.max_distance_m = cond["max_distance_m"];
    if (cond.contains("abs_bearing_max_deg")) {
      r.condition.abs_bearing_max_deg = cond["abs_bearing_max_deg"];
    }
    if (cond.contains("abs_bearing_min_deg")) {
      r.condition.abs_bearing_min_deg = cond["abs_bearing_min_deg"];
    }
    r.condition.bearing_sign = cond.value("bearing_sign", 0);
    if (cond.contains("forward_blocked")) r.condition.forward_blocked = cond["forward_blocked"];
    if (cond.contains("revisit")) r.condition.revisit = cond["revisit"];
    for (const auto& tag : j.at("directive")) {
      auto a = action_from_string(tag.get<std::string>());
      if (!a) throw_schema("bad-rule", "unknown action in directive");
      r.directive.push_back(*a);
    }
    r.created_episode = j.value("created_episode", 0);
    r.last_active_episode = j.value("last_active_episode", r.created_episode);
    r.activations = j.value("activations", 0);
  } catch (const nlohmann::ordered_json::exception& e) {
    throw_schema("bad-rule", e.what());
  }
  if (r.id.empty()) throw_schema("bad-rule", "rule id must be non-empty");
  if (r.directive.empty()) throw_schema("bad-rule", "rule directive must be non-empty");
  if (r.condition.bearing_sign < -1 || r.condition.bearing_sign > 1) {
    throw_schema("bad-rule", "bearing_sign must be -1, 0 or 1");
  }
  return r;
}

nlohmann::ordered_json rule_list_to_json(const RuleList& list) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Rule& r : list.rules) arr.push_back(rule_to_json(r));
  return nlohmann::ordered_json{{"rules", arr}};
}

RuleList rule_list_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array()) {
    throw_schema("bad-rule", "expected an object with a rules array");
  }
  RuleList list;
  for (const auto& rj : j["rules"]) {
    Rule r = rule_from_json(rj);
    if (list.find(r.id)) throw_schema("bad-rule", "duplicate rule id " + r.id);
    list.rules.push_back(std::move(r));
  }
  return list;
}

void save_rules(const RuleList& list, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw_schema("io-error", "cannot open " + file.string());
  out << rule_list_to_json(list).dump(2) << "\n";
}

RuleList load_rules(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw_schema("io-error", "cannot open " + file.string());
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(in, nullptr, false);
  if (j.is_discarded()) throw_schema("bad-rule", "invalid JSON in " + file.string());
  return rule_list_from_json(j);
}

// ---------------------------------------------------------------------------
// Policies

Action GreedyPolicy::act(const Observation& obs) {
  if (obs.distance_m < radius_m_) return Action::Stop;
  if (!obs.forward_free) return Action::TurnRight;
  if (std::abs(obs.bearing_deg) > turn_deg_ / 2.0) {
    return obs.bearing_deg < 0 ? Action::TurnLeft : Action::TurnRight;
  }
  return Action::MoveForward;
}

Action OraclePolicy::act(const Observation& obs) {
  if (!env_) throw_domain("no-episode", "oracle used before begin_episode");
  const EnvConfig& config = env_->config();
  if (obs.distance_m < config.success_radius_cm / 100.0) return Action::Stop;

  const OccupancyGrid& grid = env_->grid();
  const DistanceField& field = env_->field();
  GridIndex cell = env_->cell();
  if (!field.reachable(cell)) return Action::Stop;  // separated pocket: give up

  bool found = false;
  GridIndex best{};
  PathCost best_cost{};
  for (const Delta& d : kMoves) {
    GridIndex n{cell.x + d.dx, cell.y + d.dy};
    if (!grid.free(n)) continue;
    if (d.dx != 0 && d.dy != 0 &&
        (!grid.free({cell.x + d.dx, cell.y}) || !grid.free({cell.x, cell.y + d.dy}))) {
      continue;  // no corner cutting
    }
    if (!field.reachable(n)) continue;
    if (!found || cost_less(field.cost(n), best_cost)) {
      found = true;
      best = n;
      best_cost = field.cost(n);
    }
  }
  if (!found) return Action::Stop;

  const AgentPose& pose = env_->pose();
  double desired = atan2_deg(grid.center_y(best) - pose.y, grid.center_x(best) - pose.x);
  double delta = normalize_deg(desired - pose.yaw);
  if (std::abs(delta) <= config.turn_deg / 2.0) {
    if (obs.forward_free) return Action::MoveForward;
    return delta >= 0 ? Action::TurnLeft : Action::TurnRight;
  }
  return delta > 0 ? Action::TurnLeft : Action::TurnRight;
}

void Odometer::reset() {
  x_ = y_ = yaw_ = 0.0;
  step_ = 0;
  entry_cells_ = {GridIndex{0, 0}};
  entry_steps_ = {0};
}

void Odometer::apply(Action action, bool forward_was_free, double step_cm, double turn_deg) {
  ++step_;
  if (action == Action::TurnLeft) yaw_ = normalize_deg(yaw_ + turn_deg);
  if (action == Action::TurnRight) yaw_ = normalize_deg(yaw_ - turn_deg);
  if (action == Action::MoveForward && forward_was_free) {
    x_ += std::cos(deg_to_rad(yaw_)) * step_cm;
    y_ += std::sin(deg_to_rad(yaw_)) * step_cm;
    GridIndex cell{static_cast<int>(std::lround(x_ / step_cm)),
                   static_cast<int>(std::lround(y_ / step_cm))};
    if (!(cell == entry_cells_.back())) {
      entry_cells_.push_back(cell);
      entry_steps_.push_back(step_);
    }
  }
}

bool Odometer::revisit() const {
  const GridIndex& current = entry_cells_.back();
  int count = 0;
  for (std::size_t i = 0; i < entry_cells_.size(); ++i) {
    if (entry_steps_[i] >= step_ - (kLoopWindowSteps - 1) && entry_cells_[i] == current) ++count;
  }
  return count >= kLoopEntryCount;
}

void RulePolicy::begin_episode(const NavEnv& env) {
  step_cm_ = env.config().step_cm;
  pending_.clear();
  odometer_.reset();
}

Action RulePolicy::act(const Observation& obs) {
  Action action;
  if (!pending_.empty()) {
    action = pending_.front();
    pending_.pop_front();
  } else {
    RuleContext ctx{obs.distance_m, obs.bearing_deg, obs.forward_free, odometer_.revisit()};
    Rule* fired = nullptr;
    for (Rule& r : rules_->rules) {
      if (condition_matches(r.condition, ctx)) {
        fired = &r;
        break;
      }
    }
    if (fired) {
      ++fired->activations;
      fired->last_active_episode = episode_index_;
      pending_.assign(fired->directive.begin(), fired->directive.end());
      action = pending_.front();
      pending_.pop_front();
    } else {
      action = fallback_.act(obs);
    }
  }
  odometer_.apply(action, obs.forward_free, step_cm_, turn_deg_);
  return action;
}

// ---------------------------------------------------------------------------
// Rollout harness

RolloutResult run_episode(NavEnv& env, Policy& policy) {
  Observation obs = env.reset();
  policy.begin_episode(env);

  RolloutResult out;
  const Episode& episode = env.episode();
  out.trace.episode_id = episode.id;
  out.trace.level = episode.level;
  out.trace.start_cell = env.cell();
  out.trace.min_distance_m = obs.distance_m;

  TrajectoryRecord& traj = out.trajectory;
  traj.episode_id = episode.id;
  traj.scene_ref = episode.scene_ref;
  traj.level = episode.level;
  traj.l_star_cm = episode.l_star_cm;
  traj.d0_cm = episode.d0_cm;
  traj.reference = PointList(episode.waypoints.begin(), episode.waypoints.end());
  traj.path.emplace_back(episode.start_x, episode.start_y);

  const OccupancyGrid& grid = env.grid();
  StepResult res;
  do {
    StepTrace st;
    st.bearing_deg = obs.bearing_deg;
    st.distance_m = obs.distance_m;
    st.forward_free = obs.forward_free;
    st.action = policy.act(obs);
    if (st.action == Action::MoveForward) {
      double yaw_rad = deg_to_rad(env.pose().yaw);
      st.blocked_cell = grid.cell_of(env.pose().x + std::cos(yaw_rad) * env.config().step_cm,
                                     env.pose().y + std::sin(yaw_rad) * env.config().step_cm);
    }
    res = env.step(st.action);
    st.collision = res.info.collision;
    st.cell = env.cell();
    out.trace.steps.push_back(st);
    out.total_reward += res.reward;
    traj.path.emplace_back(env.pose().x, env.pose().y);
    if (res.info.collision) ++traj.collisions;
    out.trace.min_distance_m = std::min(out.trace.min_distance_m, res.info.distance_m);
    obs = res.observation;
  } while (!res.terminated && !res.truncated);

  out.trace.stopped = res.terminated;
  out.trace.truncated = res.truncated;
  out.trace.success = res.info.success;
  out.trace.final_distance_m = res.info.distance_m;

  traj.success = res.info.success;
  traj.stopped = res.terminated;
  traj.steps = env.step_count();
  traj.final_distance_cm = res.info.distance_m * 100.0;
  return out;
}

}  // namespace navforge
