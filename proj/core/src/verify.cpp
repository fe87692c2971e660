#include "navforge/verify.hpp"

#include <algorithm>
#include <cmath>

#include "navforge/error.hpp"

namespace navforge {

namespace {

bool is_environment(const ActorRecord& rec) { return rec.category == Category::Road; }

bool collision_eligible(const ActorRecord& rec, const Aabb& box) {
  if (is_environment(rec)) return false;
  Vec3 he = box.half_extent();
  return std::max({he.x, he.y, he.z}) > kCollisionEligibleExtent;
}

bool in_scope(const VerifyScope& scope, const std::string& name) {
  return !scope.names || scope.names->count(name) > 0;
}

struct Boxed {
  const ActorRecord* rec;
  Aabb box;
};

std::vector<Boxed> boxed_actors(const SceneGraph& scene, const AssetCatalog& catalog,
                                const VerifyScope& scope) {
  std::vector<Boxed> out;
  for (const ActorRecord* rec : scene.actors_in_level()) {
    if (!in_scope(scope, rec->name)) continue;
    out.push_back({rec, world_aabb(*rec, catalog)});
  }
  return out;
}

}  // namespace

CollisionReport check_collisions(const SceneGraph& scene, const AssetCatalog& catalog,
                                 const VerifyScope& scope, double min_area_cm2) {
  if (min_area_cm2 < 0.0 || !std::isfinite(min_area_cm2)) {
    throw_schema("bad-args", "min_area_cm2 must be non-negative");
  }
  CollisionReport report;
  std::vector<Boxed> eligible;
  for (const Boxed& b : boxed_actors(scene, catalog, scope)) {
    if (collision_eligible(*b.rec, b.box)) eligible.push_back(b);
  }
  report.eligible_count = eligible.size();
  std::set<std::string> in_pair;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    for (std::size_t j = i + 1; j < eligible.size(); ++j) {
      const Boxed& a = eligible[i];
      const Boxed& b = eligible[j];
      if (!aabb_overlaps(a.box, b.box)) continue;
      double area = aabb_xy_overlap_area(a.box, b.box);
      if (area <= 0.0 || area < min_area_cm2) continue;
      CollisionPair pair{a.rec->name, b.rec->name, area};
      if (pair.b < pair.a) std::swap(pair.a, pair.b);
      in_pair.insert(pair.a);
      in_pair.insert(pair.b);
      report.pairs.push_back(std::move(pair));
    }
  }
  std::sort(report.pairs.begin(), report.pairs.end(),
            [](const CollisionPair& x, const CollisionPair& y) {
              return std::tie(x.a, x.b) < std::tie(y.a, y.b);
            });
  report.collision_free_rate =
      eligible.empty() ? 1.0
                       : 1.0 - static_cast<double>(in_pair.size()) /
                                   static_cast<double>(eligible.size());
  return report;
}

SupportReport check_vertical_support(const SceneGraph& scene, const AssetCatalog& catalog,
                                     const VerifyScope& scope, double ground_z,
                                     double tolerance_cm) {
  if (tolerance_cm < 0.0 || !std::isfinite(tolerance_cm)) {
    throw_schema("bad-args", "tolerance_cm must be non-negative");
  }
  SupportReport report;
  std::vector<Boxed> scoped = boxed_actors(scene, catalog, scope);
  // Support may come from any actor in the scene, scoped or not.
  std::vector<Boxed> everyone = boxed_actors(scene, catalog, VerifyScope{});
  std::size_t checked = 0;
  for (const Boxed& b : scoped) {
    if (is_environment(*b.rec)) continue;
    ++checked;
    double bottom = b.box.min.z;
    if (bottom <= ground_z + tolerance_cm) continue;
    bool supported = false;
    for (const Boxed& other : everyone) {
      if (other.rec->name == b.rec->name) continue;
      if (std::fabs(bottom - other.box.max.z) > tolerance_cm) continue;
      if (aabb_xy_overlaps(b.box, other.box)) {
        supported = true;
        break;
      }
    }
    if (!supported) report.floating.push_back({b.rec->name, bottom - ground_z});
  }
  std::sort(report.floating.begin(), report.floating.end(),
            [](const FloatingActor& x, const FloatingActor& y) { return x.name < y.name; });
  report.supported_rate =
      checked == 0 ? 1.0
                   : 1.0 - static_cast<double>(report.floating.size()) /
                               static_cast<double>(checked);
  return report;
}

double score_gravity(const SceneGraph& scene, const AssetCatalog& catalog, double ground_z,
                     double tolerance_cm) {
  std::size_t total = 0;
  std::size_t grounded = 0;
  for (const ActorRecord* rec : scene.actors_in_level()) {
    if (is_environment(*rec)) continue;
    ++total;
    double bottom = world_aabb(*rec, catalog).min.z;
    if (std::fabs(bottom - ground_z) <= tolerance_cm) ++grounded;
  }
  return total == 0 ? 1.0 : static_cast<double>(grounded) / static_cast<double>(total);
}

BoundsReport check_bounds(const SceneGraph& scene, const AssetCatalog& catalog,
                          double bound_cm) {
  BoundsReport report;
  std::size_t total = 0;
  for (const ActorRecord* rec : scene.actors_in_level()) {
    ++total;
    Vec3 center = world_aabb(*rec, catalog).center();
    if (std::fabs(center.x) > bound_cm || std::fabs(center.y) > bound_cm) {
      report.out_of_bounds.push_back(rec->name);
    }
  }
  report.in_bounds_rate =
      total == 0 ? 1.0
                 : 1.0 - static_cast<double>(report.out_of_bounds.size()) /
                             static_cast<double>(total);
  return report;
}

SceneMetricSet compute_rule_metrics(const SceneGraph& scene, const AssetCatalog& catalog,
                                    const MetricSpec& spec, const SceneGraph* baseline) {
  SceneMetricSet m;

  std::map<Category, int> placed;
  std::map<Category, std::set<std::string>> used_assets;
  for (const ActorRecord* rec : scene.actors_in_level()) {
    placed[rec->category] += 1;
    used_assets[rec->category].insert(rec->asset_id);
  }

  bool any_requested = false;
  double cnt_sum = 0.0;
  int cnt_n = 0;
  std::set<std::string> used_in_requested;
  std::set<std::string> available_in_requested;
  for (const auto& [cat, expected] : spec.expected_counts) {
    if (expected <= 0) continue;
    any_requested = true;
    int got = placed.count(cat) ? placed.at(cat) : 0;
    cnt_sum += static_cast<double>(std::min(got, expected)) / static_cast<double>(expected);
    ++cnt_n;
    for (const auto& id : used_assets[cat]) used_in_requested.insert(id);
    for (const auto& d : catalog.list(cat)) available_in_requested.insert(d.asset_id);
  }
  if (any_requested) {
    m.cnt = cnt_sum / cnt_n;
    if (available_in_requested.empty()) {
      m.div = 1.0;
    } else {
      m.div = std::min(1.0, static_cast<double>(used_in_requested.size()) /
                                static_cast<double>(available_in_requested.size()));
    }
  }

  m.col = check_collisions(scene, catalog).collision_free_rate;
  m.grav = score_gravity(scene, catalog, scene.ground_z);
  m.oob = check_bounds(scene, catalog, scene.ground_half_extent).in_bounds_rate;

  if (baseline && spec.edit) {
    const EditSpec& edit = *spec.edit;
    std::size_t untouched_total = 0;
    std::size_t untouched_preserved = 0;
    int moved = 0;
    int removed = 0;
    for (const auto& [name, rec] : baseline->actors()) {
      const ActorRecord* now = scene.find(name);
      bool gone = now == nullptr;
      bool changed = !gone && !(now->transform == rec.transform);
      if (gone) ++removed;
      if (changed) ++moved;
      if (!edit.targets.count(name)) {
        ++untouched_total;
        if (!gone && !changed) ++untouched_preserved;
      }
    }
    int added = 0;
    for (const auto& [name, rec] : scene.actors()) {
      if (!baseline->actors().count(name)) ++added;
    }
    m.pres = untouched_total == 0
                 ? 1.0
                 : static_cast<double>(untouched_preserved) /
                       static_cast<double>(untouched_total);
    int edits = added + removed + moved;
    m.ecnt = (edits >= edit.min_edits && edits <= edit.max_edits) ? 1.0 : 0.0;
  }

  return m;
}

}  // namespace navforge
