#include "navforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "navforge/error.hpp"

namespace navforge {

namespace {

double dist(const std::pair<double, double>& a, const std::pair<double, double>& b) {
  return std::hypot(a.first - b.first, a.second - b.second);
}

PointList to_meters(const PointList& cm) {
  PointList m;
  m.reserve(cm.size());
  for (const auto& [x, y] : cm) m.emplace_back(x / 100.0, y / 100.0);
  return m;
}

}  // namespace

double path_length(const PointList& pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += dist(pts[i - 1], pts[i]);
  return total;
}

double dtw_distance(const PointList& a, const PointList& b) {
  if (a.empty() || b.empty()) throw_schema("bad-args", "dtw needs non-empty sequences");
  const std::size_t n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = dist(a[i - 1], b[j - 1]) + best;
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double ndtw(const PointList& path_m, const PointList& reference_m, double eta_m) {
  if (reference_m.empty() || path_m.empty()) return 0.0;
  double d = dtw_distance(path_m, reference_m);
  return std::exp(-d / (eta_m * static_cast<double>(reference_m.size())));
}

EpisodeMetrics compute_metrics(const TrajectoryRecord& t) {
  EpisodeMetrics m;
  m.episode_id = t.episode_id;
  m.level = t.level;
  m.steps = t.steps;
  m.collisions = t.collisions;
  m.final_distance_m = t.final_distance_cm / 100.0;
  m.success = t.success ? 1.0 : 0.0;

  double l = path_length(t.path);
  double denom = std::max(l, t.l_star_cm);
  double ratio = denom > 0 ? t.l_star_cm / denom : (t.success ? 1.0 : 0.0);
  m.spl = t.success ? ratio : 0.0;

  double d0 = std::max(t.d0_cm, 1e-9);
  m.softspl = std::max(0.0, 1.0 - t.final_distance_cm / d0) * ratio;

  if (!t.path.empty() && !t.reference.empty()) {
    m.ndtw = ndtw(to_meters(t.path), to_meters(t.reference));
  }
  return m;
}

MetricSummary aggregate(const std::vector<EpisodeMetrics>& rows) {
  MetricSummary s;
  s.count = rows.size();
  if (rows.empty()) return s;
  for (const EpisodeMetrics& m : rows) {
    s.sr += m.success;
    s.spl += m.spl;
    s.softspl += m.softspl;
    s.ndtw += m.ndtw;
    s.mean_steps += m.steps;
    s.mean_collisions += m.collisions;
  }
  double n = static_cast<double>(rows.size());
  s.sr /= n;
  s.spl /= n;
  s.softspl /= n;
  s.ndtw /= n;
  s.mean_steps /= n;
  s.mean_collisions /= n;
  return s;
}

std::map<int, MetricSummary> aggregate_by_level(const std::vector<EpisodeMetrics>& rows) {
  std::map<int, std::vector<EpisodeMetrics>> buckets;
  for (const EpisodeMetrics& m : rows) buckets[m.level.value_or(-1)].push_back(m);
  std::map<int, MetricSummary> out;
  for (const auto& [level, bucket] : buckets) out[level] = aggregate(bucket);
  return out;
}

namespace {

nlohmann::ordered_json points_to_json(const PointList& pts) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& [x, y] : pts) arr.push_back(nlohmann::ordered_json::array({x, y}));
  return arr;
}

PointList points_from_json(const nlohmann::ordered_json& arr, const char* what) {
  if (!arr.is_array()) throw_schema("bad-trajectory", std::string(what) + " must be an array");
  PointList out;
  out.reserve(arr.size());
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw_schema("bad-trajectory", std::string(what) + " entries must be [x, y]");
    }
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

}  // namespace

nlohmann::ordered_json trajectory_to_json(const TrajectoryRecord& t) {
  nlohmann::ordered_json j{{"episode_id", t.episode_id},
                           {"scene_ref", t.scene_ref},
                           {"level", nullptr},
                           {"success", t.success},
                           {"stopped", t.stopped},
                           {"steps", t.steps},
                           {"collisions", t.collisions},
                           {"l_star_cm", t.l_star_cm},
                           {"d0_cm", t.d0_cm},
                           {"final_distance_cm", t.final_distance_cm},
                           {"path", points_to_json(t.path)},
                           {"reference", points_to_json(t.reference)}};
  if (t.level) j["level"] = *t.level;
  return j;
}

TrajectoryRecord trajectory_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw_schema("bad-trajectory", "trajectory must be an object");
  TrajectoryRecord t;
  try {
    t.episode_id = j.at("episode_id").get<std::string>();
    t.scene_ref = j.value("scene_ref", std::string{});
    if (j.contains("level") && !j.at("level").is_null()) t.level = j.at("level").get<int>();
    t.success = j.at("success").get<bool>();
    t.stopped = j.value("stopped", t.success);
    t.steps = j.at("steps").get<int>();
    t.collisions = j.value("collisions", 0);
    t.l_star_cm = j.at("l_star_cm").get<double>();
    t.d0_cm = j.at("d0_cm").get<double>();
    t.final_distance_cm = j.at("final_distance_cm").get<double>();
    t.path = points_from_json(j.at("path"), "path");
    t.reference = points_from_json(j.at("reference"), "reference");
  } catch (const nlohmann::ordered_json::exception& e) {
    throw_schema("bad-trajectory", e.what());
  }
  return t;
}

void save_trajectories(const std::vector<TrajectoryRecord>& rows,
                       const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw_schema("io-error", "cannot open " + file.string());
  for (const TrajectoryRecord& t : rows) out << trajectory_to_json(t).dump() << "\n";
}

std::vector<TrajectoryRecord> load_trajectories(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw_schema("io-error", "cannot open " + file.string());
  std::vector<TrajectoryRecord> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw_schema("bad-trajectory",
                   file.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    rows.push_back(trajectory_from_json(j));
  }
  return rows;
}

nlohmann::ordered_json episode_metrics_to_json(const EpisodeMetrics& m) {
  nlohmann::ordered_json j{{"episode_id", m.episode_id},
                           {"level", nullptr},
                           {"success", m.success},
                           {"spl", m.spl},
                           {"softspl", m.softspl},
                           {"ndtw", m.ndtw},
                           {"steps", m.steps},
                           {"collisions", m.collisions},
                           {"final_distance_m", m.final_distance_m}};
  if (m.level) j["level"] = *m.level;
  return j;
}

nlohmann::ordered_json summary_to_json(const MetricSummary& s) {
  return nlohmann::ordered_json{{"count", s.count},
                                {"sr", s.sr},
                                {"spl", s.spl},
                                {"softspl", s.softspl},
                                {"ndtw", s.ndtw},
                                {"mean_steps", s.mean_steps},
                                {"mean_collisions", s.mean_collisions}};
}

void write_metrics_csv(const std::vector<EpisodeMetrics>& rows,
                       const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw_schema("io-error", "cannot open " + file.string());
  out << "episode_id,level,success,spl,softspl,ndtw,steps,collisions,final_distance_m\n";
  for (const EpisodeMetrics& m : rows) {
    out << m.episode_id << "," << (m.level ? std::to_string(*m.level) : "") << "," << m.success
        << "," << m.spl << "," << m.softspl << "," << m.ndtw << "," << m.steps << ","
        << m.collisions << "," << m.final_distance_m << "\n";
  }
}

}  // namespace navforge
