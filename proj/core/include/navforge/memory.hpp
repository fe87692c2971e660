#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace navforge {

inline constexpr int kDistillEvery = 10;  // episodes per distillation
inline constexpr double kDensityTierMid = 0.10;
inline constexpr double kDensityTierHigh = 0.25;
inline constexpr double kLengthTierMediumM = 10.0;
inline constexpr double kLengthTierLongM = 22.0;

std::string density_tier(double obstacle_density);  // low | mid | high
std::string length_tier(double path_length_m);      // short | medium | long

// L1: the raw per-episode record.
struct EpisodeMemory {
  int episode_index = 0;  // 1-based
  std::string episode_id;
  std::string scene_ref;
  std::optional<int> level;
  bool success = false;
  double spl = 0.0;
  int steps = 0;
  double obstacle_density = 0.0;
  double path_length_m = 0.0;  // shortest-path length
  std::string archetype;       // scene family tag
  std::vector<std::string> failure_tags;
};

// L2: the episode reduced to its retrieval tags.
struct SummaryMemory {
  int episode_index = 0;
  std::string episode_id;
  std::string density_tier;
  std::string length_tier;
  std::string archetype;
  bool success = false;
  std::string note;
};

// L3: a distilled window of kDistillEvery episodes.
struct DistilledMemory {
  int episode_index = 0;  // when distilled
  int window_start = 0;
  int window_end = 0;
  double sr = 0.0;
  std::map<std::string, int> failure_counts;
  std::string advice;
};

struct MemoryQuery {
  std::string density_tier;
  std::string length_tier;
  std::string archetype;
};

inline constexpr double kRetrievalDensityWeight = 2.0;
inline constexpr double kRetrievalLengthWeight = 1.0;
inline constexpr double kRetrievalArchetypeWeight = 1.0;

double retrieval_score(const SummaryMemory& m, const MemoryQuery& q);

class MemoryStore {
 public:
  // Appends L1 and L2; distills L3 exactly when the 1-based episode index is
  // a multiple of kDistillEvery.
  void record_episode(const EpisodeMemory& episode);

  const std::vector<EpisodeMemory>& episodes() const { return episodes_; }
  const std::vector<SummaryMemory>& summaries() const { return summaries_; }
  const std::vector<DistilledMemory>& distilled() const { return distilled_; }

  // Highest score first; equal scores break toward the more recent episode.
  std::vector<SummaryMemory> retrieve(const MemoryQuery& query, std::size_t k) const;

  nlohmann::ordered_json to_json() const;
  static MemoryStore from_json(const nlohmann::ordered_json& j);
  void save(const std::filesystem::path& file) const;
  static MemoryStore load(const std::filesystem::path& file);

 private:
  std::vector<EpisodeMemory> episodes_;
  std::vector<SummaryMemory> summaries_;
  std::vector<DistilledMemory> distilled_;
};

}  // namespace navforge
