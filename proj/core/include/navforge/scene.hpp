#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "navforge/catalog.hpp"
#include "navforge/geometry.hpp"

namespace navforge {

inline constexpr double kDefaultGroundHalfExtent = 9500.0;  // 190 m plane
inline constexpr double kDefaultGroundZ = 0.0;

struct EnvSettings {
  std::string time_of_day = "noon";
  std::string sky = "clear";

  bool operator==(const EnvSettings& o) const = default;
};

struct ActorRecord {
  std::string name;
  std::string asset_id;
  Category category = Category::Prop;
  Transform transform;
  bool spawned_in_session = false;

  bool operator==(const ActorRecord& o) const = default;
};

// World-space AABB of a scaled, yaw-rotated box centered at the actor's
// location. Pitch and roll are ignored by design: footprints stay upright.
Aabb world_aabb(const ActorRecord& actor, const AssetCatalog& catalog);
Aabb world_aabb(const Transform& transform, const Vec3& base_extent);

// Glob with '*' and '?'.
bool glob_match(const std::string& pattern, const std::string& text);

class SceneGraph {
 public:
  double ground_half_extent = kDefaultGroundHalfExtent;
  double ground_z = kDefaultGroundZ;
  EnvSettings env_settings;

  // pre: no actors yet, unless allow_reinit.
  void setup_environment(double ground_size, const std::string& time_of_day,
                         bool allow_reinit = false);

  const ActorRecord& spawn_actor(const std::string& name, const std::string& asset_id,
                                 const Transform& transform, const AssetCatalog& catalog,
                                 bool spawned_in_session = true);

  void delete_actor(const std::string& name);

  // Removes every actor flagged spawned_in_session; returns how many.
  std::size_t delete_all_spawned();

  const ActorRecord& set_actor_transform(const std::string& name,
                                         const std::optional<Vec3>& location,
                                         const std::optional<Rotation>& rotation,
                                         const std::optional<Vec3>& scale);

  // Deserialization path: inserts a fully-formed record, no catalog lookup.
  const ActorRecord& insert_record(ActorRecord record);

  const ActorRecord* find(const std::string& name) const;
  const ActorRecord& get(const std::string& name) const;  // throws unknown-name

  // Lexicographic by name.
  std::vector<const ActorRecord*> actors_in_level() const;
  std::vector<const ActorRecord*> find_actors_by_name(const std::string& pattern) const;

  std::size_t actor_count() const { return actors_.size(); }
  bool empty() const { return actors_.empty(); }

  const std::map<std::string, ActorRecord>& actors() const { return actors_; }

 private:
  std::map<std::string, ActorRecord> actors_;
};

}  // namespace navforge
