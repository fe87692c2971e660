#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "navforge/scene.hpp"

namespace navforge {

// Actors take part in collision checks only when bulky enough to matter and
// not part of the drivable environment.
inline constexpr double kCollisionEligibleExtent = 100.0;
inline constexpr double kSupportToleranceCm = 10.0;
inline constexpr double kGravityToleranceCm = 200.0;
inline constexpr double kBoundsLimitCm = 9500.0;

struct CollisionPair {
  std::string a;  // a < b lexicographically
  std::string b;
  double overlap_area_cm2 = 0.0;

  bool operator==(const CollisionPair& o) const = default;
};

struct CollisionReport {
  std::vector<CollisionPair> pairs;  // sorted by (a, b)
  double collision_free_rate = 1.0;  // over eligible actors
  std::size_t eligible_count = 0;
};

struct FloatingActor {
  std::string name;
  double gap_cm = 0.0;  // bottom minus ground_z

  bool operator==(const FloatingActor& o) const = default;
};

struct SupportReport {
  std::vector<FloatingActor> floating;  // sorted by name
  double supported_rate = 1.0;
};

struct BoundsReport {
  std::vector<std::string> out_of_bounds;  // sorted
  double in_bounds_rate = 1.0;
};

// When `names` is set, only pairs/actors fully inside the set are examined.
struct VerifyScope {
  std::optional<std::set<std::string>> names;
};

CollisionReport check_collisions(const SceneGraph& scene, const AssetCatalog& catalog,
                                 const VerifyScope& scope = {}, double min_area_cm2 = 0.0);

SupportReport check_vertical_support(const SceneGraph& scene, const AssetCatalog& catalog,
                                     const VerifyScope& scope = {},
                                     double ground_z = kDefaultGroundZ,
                                     double tolerance_cm = kSupportToleranceCm);

// Fraction of non-road actors whose box bottom sits within tolerance of the
// ground plane.
double score_gravity(const SceneGraph& scene, const AssetCatalog& catalog,
                     double ground_z = kDefaultGroundZ,
                     double tolerance_cm = kGravityToleranceCm);

BoundsReport check_bounds(const SceneGraph& scene, const AssetCatalog& catalog,
                          double bound_cm = kBoundsLimitCm);

struct EditSpec {
  std::set<std::string> targets;  // names the edit was allowed to touch
  int min_edits = 0;
  int max_edits = 0;
};

struct MetricSpec {
  std::map<Category, int> expected_counts;
  std::optional<EditSpec> edit;
};

struct SceneMetricSet {
  std::optional<double> cnt;
  std::optional<double> div;
  std::optional<double> col;
  std::optional<double> grav;
  std::optional<double> oob;
  std::optional<double> pres;
  std::optional<double> ecnt;
};

SceneMetricSet compute_rule_metrics(const SceneGraph& scene, const AssetCatalog& catalog,
                                    const MetricSpec& spec,
                                    const SceneGraph* baseline = nullptr);

}  // namespace navforge
