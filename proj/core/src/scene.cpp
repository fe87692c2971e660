#include "navforge/scene.hpp"

#include <cmath>

#include "navforge/error.hpp"

namespace navforge {

Aabb world_aabb(const Transform& transform, const Vec3& base_extent) {
  double hx = base_extent.x * transform.scale.x;
  double hy = base_extent.y * transform.scale.y;
  double hz = base_extent.z * transform.scale.z;
  double c = std::cos(deg_to_rad(transform.rotation.yaw));
  double s = std::sin(deg_to_rad(transform.rotation.yaw));
  double ex = std::fabs(c * hx) + std::fabs(s * hy);
  double ey = std::fabs(s * hx) + std::fabs(c * hy);
  const Vec3& p = transform.location;
  return {{p.x - ex, p.y - ey, p.z - hz}, {p.x + ex, p.y + ey, p.z + hz}};
}

Aabb world_aabb(const ActorRecord& actor, const AssetCatalog& catalog) {
  return world_aabb(actor.transform, catalog.get(actor.asset_id).base_extent);
}

namespace {

bool glob_match_impl(const char* p, const char* t) {
  while (*p) {
    if (*p == '*') {
      while (*(p + 1) == '*') ++p;
      if (!*(p + 1)) return true;
      for (const char* s = t; ; ++s) {
        if (glob_match_impl(p + 1, s)) return true;
        if (!*s) return false;
      }
    }
    if (!*t) return false;
    if (*p != '?' && *p != *t) return false;
    ++p;
    ++t;
  }
  return !*t;
}

void validate_pattern(const std::string& pattern) {
  for (char c : pattern) {
    if (c == '[' || c == ']' || c == '\\') {
      throw_schema("bad-pattern", "unsupported metacharacter in pattern '" + pattern + "'");
    }
  }
}

}  // namespace

bool glob_match(const std::string& pattern, const std::string& text) {
  return glob_match_impl(pattern.c_str(), text.c_str());
}

void SceneGraph::setup_environment(double ground_size, const std::string& time_of_day,
                                   bool allow_reinit) {
  if (!(ground_size > 0.0) || !std::isfinite(ground_size)) {
    throw_domain("bad-ground-size", "ground_size must be positive");
  }
  if (!actors_.empty() && !allow_reinit) {
    throw_domain("reinit-denied", "environment already holds actors; reinitialization not permitted");
  }
  ground_half_extent = ground_size / 2.0;
  ground_z = 0.0;
  env_settings.time_of_day = time_of_day.empty() ? "noon" : time_of_day;
  actors_.clear();
}

const ActorRecord& SceneGraph::spawn_actor(const std::string& name, const std::string& asset_id,
                                           const Transform& transform, const AssetCatalog& catalog,
                                           bool spawned_in_session) {
  if (name.empty()) throw_schema("bad-name", "actor name must be non-empty");
  if (actors_.count(name)) throw_domain("duplicate-name", "actor '" + name + "' already exists");
  std::string why;
  if (!valid_transform(transform, &why)) throw_domain("invalid-transform", why);
  const AssetDescriptor& asset = catalog.get(asset_id);
  Transform stored = transform;
  stored.rotation = Rotation::make(transform.rotation.yaw, transform.rotation.pitch,
                                   transform.rotation.roll);
  ActorRecord rec{name, asset.asset_id, asset.category, stored, spawned_in_session};
  return actors_.emplace(name, std::move(rec)).first->second;
}

void SceneGraph::delete_actor(const std::string& name) {
  if (!actors_.erase(name)) throw_domain("unknown-name", "no actor named '" + name + "'");
}

std::size_t SceneGraph::delete_all_spawned() {
  std::size_t removed = 0;
  for (auto it = actors_.begin(); it != actors_.end();) {
    if (it->second.spawned_in_session) {
      it = actors_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

const ActorRecord& SceneGraph::set_actor_transform(const std::string& name,
                                                   const std::optional<Vec3>& location,
                                                   const std::optional<Rotation>& rotation,
                                                   const std::optional<Vec3>& scale) {
  auto it = actors_.find(name);
  if (it == actors_.end()) throw_domain("unknown-name", "no actor named '" + name + "'");
  Transform next = it->second.transform;
  if (location) next.location = *location;
  if (rotation) next.rotation = Rotation::make(rotation->yaw, rotation->pitch, rotation->roll);
  if (scale) next.scale = *scale;
  std::string why;
  if (!valid_transform(next, &why)) throw_domain("invalid-transform", why);
  it->second.transform = next;
  return it->second;
}

const ActorRecord& SceneGraph::insert_record(ActorRecord record) {
  if (record.name.empty()) throw_schema("bad-name", "actor name must be non-empty");
  auto [it, inserted] = actors_.emplace(record.name, std::move(record));
  if (!inserted) throw_domain("duplicate-name", "actor '" + it->first + "' already exists");
  return it->second;
}

const ActorRecord* SceneGraph::find(const std::string& name) const {
  auto it = actors_.find(name);
  return it == actors_.end() ? nullptr : &it->second;
}

const ActorRecord& SceneGraph::get(const std::string& name) const {
  const ActorRecord* rec = find(name);
  if (!rec) throw_domain("unknown-name", "no actor named '" + name + "'");
  return *rec;
}

std::vector<const ActorRecord*> SceneGraph::actors_in_level() const {
  std::vector<const ActorRecord*> out;
  out.reserve(actors_.size());
  for (const auto& [name, rec] : actors_) out.push_back(&rec);
  return out;
}

std::vector<const ActorRecord*> SceneGraph::find_actors_by_name(const std::string& pattern) const {
  validate_pattern(pattern);
  std::vector<const ActorRecord*> out;
  for (const auto& [name, rec] : actors_) {
    if (glob_match(pattern, name)) out.push_back(&rec);
  }
  return out;
}

}  // namespace navforge
