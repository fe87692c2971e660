#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "navforge/judge.hpp"
#include "navforge/rng.hpp"
#include "navforge/session.hpp"
#include "navforge/skills.hpp"

namespace navforge {

inline constexpr int kMaxPlacementRevisions = 5;   // nudges per actor
inline constexpr double kRevisionMarginCm = 20.0;  // clearance added per nudge
inline constexpr int kMaxJudgeRounds = 3;
inline constexpr double kBuildCollisionFloor = 0.98;

enum class Archetype {
  DowntownIntersection,
  Residential,
  Industrial,
  CommercialAvenue,
  MixedUse,
};

const std::vector<Archetype>& all_archetypes();
std::string to_string(Archetype a);
std::optional<Archetype> archetype_from_string(const std::string& tag);

// Minimum clear gap between two placed boxes, the tighter category wins.
double category_spacing_cm(Category c);

struct SceneRequest {
  Archetype archetype = Archetype::DowntownIntersection;
  double ground_half_extent = kDefaultGroundHalfExtent;
  std::string time_of_day;  // archetype default when empty
  int target_actors = 0;    // 0 keeps the archetype's own budget
};

struct PlannedActor {
  std::string name;
  std::string asset_id;
  Category category = Category::Prop;
  Transform transform;
};

struct LayoutPlan {
  Archetype archetype = Archetype::DowntownIntersection;
  double ground_half_extent = kDefaultGroundHalfExtent;
  std::string time_of_day = "noon";
  std::vector<PlannedActor> actors;
  std::map<Category, int> expected_counts;
};

// Deterministic per-archetype layout. Throws layout-infeasible naming the
// binding constraint when the requested density cannot respect the spacing
// floors on the given ground.
LayoutPlan plan_layout(const SceneRequest& request, const AssetCatalog& catalog, Rng& rng);

struct RevisionEvent {
  std::string actor;
  int nudges = 0;
  bool deleted = false;  // ran out of nudges
  std::string note;
};

struct BuildReport {
  LayoutPlan plan;
  std::vector<std::string> skills_used;
  std::vector<RevisionEvent> revisions;
  std::vector<Verdict> verdicts;  // one per judge round
  int judge_rounds = 0;
  bool accepted = false;
  SceneMetricSet metrics;
  std::vector<std::string> screenshots;
  std::vector<FailureSignature> failures;
  std::vector<std::string> promoted_skills;
};

// Drives a tool session from plan to accepted scene: spawn batch, collision
// nudges, judge rounds with issue-scoped corrections, invariant enforcement,
// then the six-view screenshot tour.
class SceneBuilder {
 public:
  SceneBuilder(Session& session, Judge& judge, SkillIndex* skills = nullptr,
               FailureStore* failures = nullptr);

  BuildReport generate_scene(const SceneRequest& request, Rng& rng);

  std::vector<SkillDoc> acquire_context(Archetype archetype) const;
  int generation_index() const { return generation_index_; }

 private:
  void construct(const LayoutPlan& plan, BuildReport& report);
  void resolve_collisions(BuildReport& report, std::map<std::string, int>& nudges);
  void verify_semantic(const SceneRequest& request, BuildReport& report, Rng& rng);
  void apply_corrections(const Verdict& verdict, BuildReport& report, Rng& rng);
  void enforce_invariants(BuildReport& report);
  void process_failures(BuildReport& report);

  Session& session_;
  Judge& judge_;
  SkillIndex* skills_;
  FailureStore* failures_;
  int generation_index_ = 0;
};

// Trace format: one {"kind":"meta",...} line, then {"kind":"call",...} per
// logged session event; replaying the calls rebuilds the scene byte for byte.
void write_build_trace(const Session& session, const SceneRequest& request,
                       const std::filesystem::path& file);
SceneGraph replay_build_trace(const std::filesystem::path& file,
                              const AssetCatalog* catalog = nullptr);

}  // namespace navforge
