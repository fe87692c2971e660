#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "navforge/env.hpp"
#include "navforge/metrics.hpp"

namespace navforge {

inline constexpr int kRuleCap = 30;
inline constexpr int kRuleIdleEpisodes = 20;  // prune rules idle this long
inline constexpr int kLoopWindowSteps = 10;
inline constexpr int kLoopEntryCount = 3;

// ---------------------------------------------------------------------------
// Failure taxonomy

enum class FailureCategory { Loop, Directional, GoalProximity, ObstacleAvoidance, Timeout };

std::string to_string(FailureCategory c);
std::optional<FailureCategory> failure_category_from_string(const std::string& tag);

struct FailureEvent {
  FailureCategory category = FailureCategory::Timeout;
  std::string episode_id;
  int step = -1;               // representative step, -1 when episode-wide
  GridIndex cell{};            // loop / blocked-cell evidence
  double bearing_deg = 0.0;    // directional evidence
  double distance_m = 0.0;     // proximity evidence
  std::string detail;
};

// Per-step record a rollout keeps for post-episode analysis.
struct StepTrace {
  Action action = Action::Stop;
  double bearing_deg = 0.0;  // before the action
  double distance_m = 0.0;   // before the action
  bool forward_free = true;  // before the action
  bool collision = false;
  GridIndex blocked_cell{};  // destination cell when collision
  GridIndex cell{};          // after the action
};

struct EpisodeTrace {
  std::string episode_id;
  std::optional<int> level;
  GridIndex start_cell{};
  std::vector<StepTrace> steps;
  bool stopped = false;
  bool truncated = false;
  bool success = false;
  double final_distance_m = 0.0;
  double min_distance_m = 0.0;
};

// A visit is a cell-entry event; turning in place never re-visits. True when
// some cell collects `kLoopEntryCount` entries inside a window of
// `kLoopWindowSteps` consecutive steps.
bool has_entry_loop(const std::vector<GridIndex>& entry_cells,
                    const std::vector<int>& entry_steps, GridIndex* which = nullptr);

std::vector<FailureEvent> extract_failures(const EpisodeTrace& trace, double success_radius_m,
                                           double turn_deg);

nlohmann::ordered_json failure_to_json(const FailureEvent& f);

// ---------------------------------------------------------------------------
// Rule grammar: every predicate optional, AND semantics, first match fires.

struct RuleCondition {
  std::optional<double> min_distance_m;       // distance >= v
  std::optional<double> max_distance_m;       // distance <  v
  std::optional<double> abs_bearing_max_deg;  // |bearing| <= v
  std::optional<double> abs_bearing_min_deg;  // |bearing| >= v
  int bearing_sign = 0;                       // -1 left, +1 right, 0 any
  std::optional<bool> forward_blocked;
  std::optional<bool> revisit;  // trailing-window loop at the current cell

  bool operator==(const RuleCondition& o) const = default;
};

struct RuleContext {
  double distance_m = 0.0;
  double bearing_deg = 0.0;
  bool forward_free = true;
  bool revisit = false;
};

bool condition_matches(const RuleCondition& c, const RuleContext& ctx);

struct Rule {
  std::string id;
  std::string category;  // failure tag that spawned it, or "seed"
  int priority = 0;      // list kept priority-descending, stable
  RuleCondition condition;
  std::vector<Action> directive;  // macro, executed one action per step
  int created_episode = 0;
  int last_active_episode = 0;
  int activations = 0;
};

struct RuleList {
  std::vector<Rule> rules;

  const Rule* find(const std::string& id) const;
};

// One candidate rule per failure category, thresholds taken from the
// evidence (bearing spread, success radius) rather than hard-coded.
std::vector<Rule> synthesize_rules(const std::vector<FailureEvent>& failures,
                                   int episode_index, double success_radius_m,
                                   double turn_deg);

// Prune idle rules, then merge candidates: duplicate ids are dropped, a
// newcomer whose condition matches an incumbent with a different directive
// is dropped as contradictory, the cap drops newest first.
void update_rules(RuleList& list, const std::vector<Rule>& fresh, int episode_index);

nlohmann::ordered_json rule_to_json(const Rule& r);
Rule rule_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json rule_list_to_json(const RuleList& list);
RuleList rule_list_from_json(const nlohmann::ordered_json& j);
void save_rules(const RuleList& list, const std::filesystem::path& file);
RuleList load_rules(const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Policies

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const NavEnv& env) { (void)env; }
  virtual Action act(const Observation& obs) = 0;
};

// Observation-only baseline: stop inside the goal radius, rotate clear of
// obstacles, close the bearing, otherwise walk.
class GreedyPolicy : public Policy {
 public:
  GreedyPolicy(double success_radius_m, double turn_deg)
      : radius_m_(success_radius_m), turn_deg_(turn_deg) {}
  std::string name() const override { return "greedy"; }
  Action act(const Observation& obs) override;

 private:
  double radius_m_;
  double turn_deg_;
};

// Stops immediately; the floor every other policy must beat.
class NullPolicy : public Policy {
 public:
  std::string name() const override { return "null"; }
  Action act(const Observation&) override { return Action::Stop; }
};

// Privileged shortest-path follower: steers down the goal distance field.
class OraclePolicy : public Policy {
 public:
  std::string name() const override { return "oracle"; }
  void begin_episode(const NavEnv& env) override { env_ = &env; }
  Action act(const Observation& obs) override;

 private:
  const NavEnv* env_ = nullptr;
};

// Dead-reckoned trail: motion is deterministic and collisions predictable
// from forward_free, so a policy can track its own cell honestly.
class Odometer {
 public:
  void reset();
  void apply(Action action, bool forward_was_free, double step_cm, double turn_deg);
  bool revisit() const;  // trailing-window loop at the current cell
  int entries() const { return static_cast<int>(entry_steps_.size()); }

 private:
  double x_ = 0.0, y_ = 0.0, yaw_ = 0.0;
  int step_ = 0;
  std::vector<GridIndex> entry_cells_;
  std::vector<int> entry_steps_;
};

// First matching rule fires its macro; greedy fills the gaps.
class RulePolicy : public Policy {
 public:
  RulePolicy(std::shared_ptr<RuleList> rules, double success_radius_m, double turn_deg)
      : rules_(std::move(rules)),
        fallback_(success_radius_m, turn_deg),
        radius_m_(success_radius_m),
        turn_deg_(turn_deg) {}
  std::string name() const override { return "rules"; }
  void begin_episode(const NavEnv& env) override;
  Action act(const Observation& obs) override;

  void set_episode_index(int index) { episode_index_ = index; }
  const RuleList& rules() const { return *rules_; }

 private:
  std::shared_ptr<RuleList> rules_;
  GreedyPolicy fallback_;
  double radius_m_;
  double turn_deg_;
  int episode_index_ = 0;
  double step_cm_ = kStepSizeCm;
  Odometer odometer_;
  std::deque<Action> pending_;
};

// ---------------------------------------------------------------------------
// Rollout harness

struct RolloutResult {
  TrajectoryRecord trajectory;
  EpisodeTrace trace;
  double total_reward = 0.0;
};

RolloutResult run_episode(NavEnv& env, Policy& policy);

}  // namespace navforge
