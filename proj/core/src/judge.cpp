#include "navforge/judge.hpp"

#include <cmath>

#include "navforge/error.hpp"

namespace navforge {

using nlohmann::ordered_json;

namespace {

constexpr double kPassCollisionFloor = 0.95;
constexpr double kFailCollisionCeiling = 0.5;
constexpr double kPassCountFloor = 0.8;

std::string format_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

RubricScore make_rubric_score(int raw) {
  if (raw < 0 || raw > 10) throw_schema("bad-score", "rubric score must lie in 0..10");
  return RubricScore{raw};
}

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass: return "PASS";
    case VerdictStatus::NeedsImprovement: return "NEEDS_IMPROVEMENT";
    case VerdictStatus::Fail: return "FAIL";
  }
  return "NEEDS_IMPROVEMENT";
}

std::optional<VerdictStatus> verdict_status_from_string(const std::string& tag) {
  if (tag == "PASS") return VerdictStatus::Pass;
  if (tag == "NEEDS_IMPROVEMENT") return VerdictStatus::NeedsImprovement;
  if (tag == "FAIL") return VerdictStatus::Fail;
  return std::nullopt;
}

ordered_json verdict_to_json(const Verdict& v) {
  ordered_json j;
  j["status"] = to_string(v.status);
  j["issues"] = v.issues;
  ordered_json scores;
  for (const auto& [key, score] : v.scores) scores[key] = score.raw;
  j["scores"] = std::move(scores);
  return j;
}

Verdict verdict_from_json(const ordered_json& j) {
  Verdict v;
  try {
    auto status = verdict_status_from_string(j.at("status").get<std::string>());
    if (!status) throw_schema("bad-json", "unknown verdict status");
    v.status = *status;
    for (const auto& issue : j.at("issues")) v.issues.push_back(issue.get<std::string>());
    if (j.contains("scores")) {
      for (const auto& [key, raw] : j.at("scores").items()) {
        v.scores[key] = make_rubric_score(raw.get<int>());
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw_schema("bad-json", std::string("verdict malformed: ") + e.what());
  }
  if (v.status == VerdictStatus::Fail && v.issues.empty()) {
    throw_schema("bad-json", "failing verdict carries no issues");
  }
  return v;
}

SceneSummary summarize_scene(const SceneGraph& scene, const AssetCatalog& catalog,
                             const MetricSpec& spec, const SceneGraph* baseline,
                             std::vector<std::string> screenshots) {
  SceneSummary summary;
  summary.actor_count = scene.actor_count();
  for (const ActorRecord* rec : scene.actors_in_level()) {
    summary.category_counts[to_string(rec->category)] += 1;
  }
  summary.metrics = compute_rule_metrics(scene, catalog, spec, baseline);
  summary.screenshots = std::move(screenshots);
  return summary;
}

nlohmann::ordered_json scene_summary_to_json(const SceneSummary& summary) {
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) metrics[key] = *v;
  };
  put("cnt", summary.metrics.cnt);
  put("div", summary.metrics.div);
  put("col", summary.metrics.col);
  put("grav", summary.metrics.grav);
  put("oob", summary.metrics.oob);
  put("pres", summary.metrics.pres);
  put("ecnt", summary.metrics.ecnt);
  return nlohmann::ordered_json{{"actor_count", summary.actor_count},
                                {"category_counts", summary.category_counts},
                                {"metrics", metrics},
                                {"screenshots", summary.screenshots}};
}

Verdict ThresholdJudge::judge(const std::string& request_text, const SceneSummary& summary) {
  (void)request_text;
  const SceneMetricSet& m = summary.metrics;
  double col = m.col.value_or(1.0);
  double grav = m.grav.value_or(1.0);
  double oob = m.oob.value_or(1.0);

  Verdict v;
  if (m.col && col < kPassCollisionFloor) {
    v.issues.push_back("collision: collision_free_rate " + format_rate(col) + " below " +
                       format_rate(kPassCollisionFloor));
  }
  if (m.grav && grav < 1.0) {
    v.issues.push_back("gravity: grounded fraction " + format_rate(grav) + " below 1.000");
  }
  if (m.cnt && *m.cnt < kPassCountFloor) {
    v.issues.push_back("count: category completion " + format_rate(*m.cnt) + " below " +
                       format_rate(kPassCountFloor));
  }
  if (m.oob && oob < 1.0) {
    v.issues.push_back("bounds: in-bounds rate " + format_rate(oob) + " below 1.000");
  }

  if (m.col && col < kFailCollisionCeiling) {
    v.status = VerdictStatus::Fail;
  } else if (v.issues.empty()) {
    v.status = VerdictStatus::Pass;
  } else {
    v.status = VerdictStatus::NeedsImprovement;
  }

  // Heuristic rubric fills: prompt following tracks count completion, layout
  // soundness tracks physical cleanliness. The rest stay unset.
  double cnt = m.cnt.value_or(1.0);
  v.scores["PF"] = RubricScore{static_cast<int>(std::lround(10.0 * std::min(cnt, col)))};
  v.scores["LAES"] =
      RubricScore{static_cast<int>(std::lround(10.0 * std::min({col, grav, oob})))};
  return v;
}

Verdict judge_scene(Judge& judge, const std::string& request_text, const SceneSummary& summary) {
  Verdict v = judge.judge(request_text, summary);
  if (v.status == VerdictStatus::Fail && v.issues.empty()) {
    throw_domain("bad-verdict", "judge returned FAIL without issues");
  }
  return v;
}

JudgeRegistry::JudgeRegistry() {
  factories_["builtin"] = [] { return std::make_unique<ThresholdJudge>(); };
}

JudgeRegistry& JudgeRegistry::instance() {
  static JudgeRegistry registry;
  return registry;
}

void JudgeRegistry::register_judge(const std::string& name, Factory factory) {
  factories_[name] = std::move(factory);
}

std::unique_ptr<Judge> JudgeRegistry::create(const std::string& name) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) {
    throw_domain("judge-unavailable", "no judge registered under '" + name + "'");
  }
  return it->second();
}

bool JudgeRegistry::contains(const std::string& name) const {
  return factories_.count(name) > 0;
}

}  // namespace navforge
