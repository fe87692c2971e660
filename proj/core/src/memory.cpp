#include "navforge/memory.hpp"

#include <algorithm>
#include <fstream>

#include "navforge/error.hpp"

namespace navforge {

std::string density_tier(double obstacle_density) {
  if (obstacle_density < kDensityTierMid) return "low";
  if (obstacle_density < kDensityTierHigh) return "mid";
  return "high";
}

std::string length_tier(double path_length_m) {
  if (path_length_m < kLengthTierMediumM) return "short";
  if (path_length_m < kLengthTierLongM) return "medium";
  return "long";
}

double retrieval_score(const SummaryMemory& m, const MemoryQuery& q) {
  double score = 0.0;
  if (!q.density_tier.empty() && m.density_tier == q.density_tier) {
    score += kRetrievalDensityWeight;
  }
  if (!q.length_tier.empty() && m.length_tier == q.length_tier) {
    score += kRetrievalLengthWeight;
  }
  if (!q.archetype.empty() && m.archetype == q.archetype) {
    score += kRetrievalArchetypeWeight;
  }
  return score;
}

namespace {

std::string advice_for(const std::map<std::string, int>& failure_counts, double sr) {
  if (failure_counts.empty()) {
    return sr >= 0.999 ? "clean window, keep the current behavior"
                       : "misses without a dominant failure, vary the approach";
  }
  auto top = failure_counts.begin();
  for (auto it = failure_counts.begin(); it != failure_counts.end(); ++it) {
    if (it->second > top->second) top = it;
  }
  if (top->first == "loop") return "break pacing cycles early with a firm turn";
  if (top->first == "directional") return "hold the heading while the bearing is small";
  if (top->first == "goal_proximity") return "stop as soon as the goal radius is entered";
  if (top->first == "obstacle_avoidance") return "sidestep after repeated bumps on one cell";
  if (top->first == "timeout") return "commit to forward progress on long legs";
  return "review " + top->first + " failures";
}

}  // namespace

void MemoryStore::record_episode(const EpisodeMemory& episode) {
  if (episode.episode_index != static_cast<int>(episodes_.size()) + 1) {
    throw_schema("bad-episode-index",
                 "episodes must be recorded in order starting at 1, got index " +
                     std::to_string(episode.episode_index));
  }
  episodes_.push_back(episode);

  SummaryMemory summary;
  summary.episode_index = episode.episode_index;
  summary.episode_id = episode.episode_id;
  summary.density_tier = density_tier(episode.obstacle_density);
  summary.length_tier = length_tier(episode.path_length_m);
  summary.archetype = episode.archetype;
  summary.success = episode.success;
  summary.note = episode.success
                     ? "reached the goal in " + std::to_string(episode.steps) + " steps"
                     : (episode.failure_tags.empty() ? "missed the goal"
                                                     : "failed: " + episode.failure_tags.front());
  summaries_.push_back(std::move(summary));

  if (episode.episode_index % kDistillEvery == 0) {
    DistilledMemory d;
    d.episode_index = episode.episode_index;
    d.window_start = episode.episode_index - kDistillEvery + 1;
    d.window_end = episode.episode_index;
    int hits = 0;
    for (int i = d.window_start; i <= d.window_end; ++i) {
      const EpisodeMemory& e = episodes_[static_cast<std::size_t>(i) - 1];
      if (e.success) ++hits;
      for (const std::string& tag : e.failure_tags) ++d.failure_counts[tag];
    }
    d.sr = static_cast<double>(hits) / kDistillEvery;
    d.advice = advice_for(d.failure_counts, d.sr);
    distilled_.push_back(std::move(d));
  }
}

std::vector<SummaryMemory> MemoryStore::retrieve(const MemoryQuery& query,
                                                 std::size_t k) const {
  std::vector<const SummaryMemory*> ranked;
  ranked.reserve(summaries_.size());
  for (const SummaryMemory& m : summaries_) ranked.push_back(&m);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](const SummaryMemory* a, const SummaryMemory* b) {
                     double sa = retrieval_score(*a, query);
                     double sb = retrieval_score(*b, query);
                     if (sa != sb) return sa > sb;
                     return a->episode_index > b->episode_index;
                   });
  if (ranked.size() > k) ranked.resize(k);
  std::vector<SummaryMemory> out;
  out.reserve(ranked.size());
  for (const SummaryMemory* m : ranked) out.push_back(*m);
  return out;
}

namespace {

nlohmann::ordered_json episode_memory_to_json(const EpisodeMemory& e) {
  nlohmann::ordered_json j{{"episode_index", e.episode_index},
                           {"episode_id", e.episode_id},
                           {"scene_ref", e.scene_ref},
                           {"level", nullptr},
                           {"success", e.success},
                           {"spl", e.spl},
                           {"steps", e.steps},
                           {"obstacle_density", e.obstacle_density},
                           {"path_length_m", e.path_length_m},
                           {"archetype", e.archetype},
                           {"failure_tags", e.failure_tags}};
  if (e.level) j["level"] = *e.level;
  return j;
}

EpisodeMemory episode_memory_from_json(const nlohmann::ordered_json& j) {
  EpisodeMemory e;
  e.episode_index = j.at("episode_index").get<int>();
  e.episode_id = j.value("episode_id", std::string{});
  e.scene_ref = j.value("scene_ref", std::string{});
  if (j.contains("level") && !j["level"].is_null()) e.level = j["level"].get<int>();
  e.success = j.at("success").get<bool>();
  e.spl = j.value("spl", 0.0);
  e.steps = j.value("steps", 0);
  e.obstacle_density = j.value("obstacle_density", 0.0);
  e.path_length_m = j.value("path_length_m", 0.0);
  e.archetype = j.value("archetype", std::string{});
  if (j.contains("failure_tags")) {
    e.failure_tags = j["failure_tags"].get<std::vector<std::string>>();
  }
  return e;
}

}  // namespace

nlohmann::ordered_json MemoryStore::to_json() const {
  nlohmann::ordered_json episodes = nlohmann::ordered_json::array();
  for (const EpisodeMemory& e : episodes_) episodes.push_back(episode_memory_to_json(e));

  nlohmann::ordered_json summaries = nlohmann::ordered_json::array();
  for (const SummaryMemory& m : summaries_) {
    summaries.push_back(nlohmann::ordered_json{{"episode_index", m.episode_index},
                                               {"episode_id", m.episode_id},
                                               {"density_tier", m.density_tier},
                                               {"length_tier", m.length_tier},
                                               {"archetype", m.archetype},
                                               {"success", m.success},
                                               {"note", m.note}});
  }

  nlohmann::ordered_json distilled = nlohmann::ordered_json::array();
  for (const DistilledMemory& d : distilled_) {
    distilled.push_back(nlohmann::ordered_json{{"episode_index", d.episode_index},
                                               {"window_start", d.window_start},
                                               {"window_end", d.window_end},
                                               {"sr", d.sr},
                                               {"failure_counts", d.failure_counts},
                                               {"advice", d.advice}});
  }
  return nlohmann::ordered_json{
      {"episodes", episodes}, {"summaries", summaries}, {"distilled", distilled}};
}

MemoryStore MemoryStore::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("episodes")) {
    throw_schema("bad-memory", "expected an object with an episodes array");
  }
  MemoryStore store;
  try {
    // Rebuilding from L1 re-derives L2 and L3, so stale tiers cannot survive
    // a round trip.
    for (const auto& ej : j.at("episodes")) {
      store.record_episode(episode_memory_from_json(ej));
    }
  } catch (const nlohmann::ordered_json::exception& e) {
    throw_schema("bad-memory", e.what());
  }
  return store;
}

void MemoryStore::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw_schema("io-error", "cannot open " + file.string());
  out << to_json().dump(2) << "\n";
}

MemoryStore MemoryStore::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw_schema("io-error", "cannot open " + file.string());
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(in, nullptr, false);
  if (j.is_discarded()) throw_schema("bad-memory", "invalid JSON in " + file.string());
  return from_json(j);
}

}  // namespace navforge
