#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "navforge/verify.hpp"

namespace navforge {

// Rubric scores are integers on a 0..10 anchor scale; normalized() maps to
// [0, 1]. 10 = fully satisfied, 7 = minor deviations, 5 = partial, 3 = vague
// resemblance, 0 = unrelated.
struct RubricScore {
  int raw = 0;

  double normalized() const { return static_cast<double>(raw) / 10.0; }
  bool operator==(const RubricScore& o) const = default;
};

RubricScore make_rubric_score(int raw);  // throws outside 0..10

enum class VerdictStatus { Pass, NeedsImprovement, Fail };

std::string to_string(VerdictStatus s);
std::optional<VerdictStatus> verdict_status_from_string(const std::string& tag);

struct Verdict {
  VerdictStatus status = VerdictStatus::NeedsImprovement;
  std::vector<std::string> issues;                // empty only when passing
  std::map<std::string, RubricScore> scores;      // keyed "PF", "LAES", ...
};

nlohmann::ordered_json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::ordered_json& j);

struct SceneSummary {
  std::size_t actor_count = 0;
  std::map<std::string, int> category_counts;  // keyed by category tag
  SceneMetricSet metrics;
  std::vector<std::string> screenshots;  // file names from the view tour
};

SceneSummary summarize_scene(const SceneGraph& scene, const AssetCatalog& catalog,
                             const MetricSpec& spec, const SceneGraph* baseline = nullptr,
                             std::vector<std::string> screenshots = {});

nlohmann::ordered_json scene_summary_to_json(const SceneSummary& summary);

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string name() const = 0;
  virtual Verdict judge(const std::string& request_text, const SceneSummary& summary) = 0;
};

// Deterministic threshold judge over the rule metrics. Pass requires clean
// collisions, perfect grounding and a near-complete count match; a scene
// with heavy interpenetration fails outright.
class ThresholdJudge : public Judge {
 public:
  std::string name() const override { return "builtin"; }
  Verdict judge(const std::string& request_text, const SceneSummary& summary) override;
};

Verdict judge_scene(Judge& judge, const std::string& request_text, const SceneSummary& summary);

// Judges are looked up by name; unknown names raise judge-unavailable rather
// than silently passing scenes.
class JudgeRegistry {
 public:
  using Factory = std::function<std::unique_ptr<Judge>()>;

  static JudgeRegistry& instance();

  void register_judge(const std::string& name, Factory factory);
  std::unique_ptr<Judge> create(const std::string& name) const;
  bool contains(const std::string& name) const;

 private:
  JudgeRegistry();
  std::map<std::string, Factory> factories_;
};

}  // namespace navforge
