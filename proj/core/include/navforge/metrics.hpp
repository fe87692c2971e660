#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace navforge {

inline constexpr double kNdtwEtaM = 5.0;  // softness scale, meters

using PointList = std::vector<std::pair<double, double>>;

// Everything a rollout leaves behind that metrics need. Coordinates in cm.
struct TrajectoryRecord {
  std::string episode_id;
  std::string scene_ref;
  std::optional<int> level;
  bool success = false;  // stopped inside the goal radius
  bool stopped = false;  // episode ended by Stop rather than the budget
  int steps = 0;
  int collisions = 0;
  double l_star_cm = 0.0;
  double d0_cm = 0.0;
  double final_distance_cm = 0.0;
  PointList path;       // agent positions, start included
  PointList reference;  // shortest-path waypoints
};

double path_length(const PointList& pts);  // unit-agnostic polyline length

// Classic dynamic-time-warping distance with Euclidean local cost; both
// sequences must be non-empty.
double dtw_distance(const PointList& a, const PointList& b);

// exp(-DTW / (eta * |reference|)) with inputs in meters.
double ndtw(const PointList& path_m, const PointList& reference_m, double eta_m = kNdtwEtaM);

struct EpisodeMetrics {
  std::string episode_id;
  std::optional<int> level;
  double success = 0.0;
  double spl = 0.0;
  double softspl = 0.0;
  double ndtw = 0.0;
  int steps = 0;
  int collisions = 0;
  double final_distance_m = 0.0;
};

EpisodeMetrics compute_metrics(const TrajectoryRecord& trajectory);

struct MetricSummary {
  std::size_t count = 0;
  double sr = 0.0;
  double spl = 0.0;
  double softspl = 0.0;
  double ndtw = 0.0;
  double mean_steps = 0.0;
  double mean_collisions = 0.0;
};

MetricSummary aggregate(const std::vector<EpisodeMetrics>& rows);
std::map<int, MetricSummary> aggregate_by_level(const std::vector<EpisodeMetrics>& rows);

nlohmann::ordered_json trajectory_to_json(const TrajectoryRecord& t);
TrajectoryRecord trajectory_from_json(const nlohmann::ordered_json& j);
void save_trajectories(const std::vector<TrajectoryRecord>& rows,
                       const std::filesystem::path& file);
std::vector<TrajectoryRecord> load_trajectories(const std::filesystem::path& file);

nlohmann::ordered_json episode_metrics_to_json(const EpisodeMetrics& m);
nlohmann::ordered_json summary_to_json(const MetricSummary& s);
void write_metrics_csv(const std::vector<EpisodeMetrics>& rows,
                       const std::filesystem::path& file);

}  // namespace navforge
