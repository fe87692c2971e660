#include "navforge/scene_io.hpp"

#include <fstream>
#include <sstream>

#include "navforge/error.hpp"
#include "navforge/rng.hpp"

namespace navforge {

using nlohmann::ordered_json;

ordered_json actor_to_json(const ActorRecord& actor) {
  ordered_json j;
  j["name"] = actor.name;
  j["asset_id"] = actor.asset_id;
  j["category"] = to_string(actor.category);
  j["location"] = {actor.transform.location.x, actor.transform.location.y,
                   actor.transform.location.z};
  j["rotation"] = {actor.transform.rotation.yaw, actor.transform.rotation.pitch,
                   actor.transform.rotation.roll};
  j["scale"] = {actor.transform.scale.x, actor.transform.scale.y, actor.transform.scale.z};
  j["spawned_in_session"] = actor.spawned_in_session;
  return j;
}

namespace {

Vec3 vec3_from(const ordered_json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) {
    throw_schema("bad-json", std::string(field) + " must be a 3-element array");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

ActorRecord actor_from_json(const ordered_json& j) {
  ActorRecord rec;
  try {
    rec.name = j.at("name").get<std::string>();
    rec.asset_id = j.at("asset_id").get<std::string>();
    auto cat = category_from_string(j.at("category").get<std::string>());
    if (!cat) throw_schema("unknown-category", "unknown category tag");
    rec.category = *cat;
    rec.transform.location = vec3_from(j.at("location"), "location");
    Vec3 r = vec3_from(j.at("rotation"), "rotation");
    rec.transform.rotation = {r.x, r.y, r.z};
    rec.transform.scale = vec3_from(j.at("scale"), "scale");
    rec.spawned_in_session = j.at("spawned_in_session").get<bool>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw_schema("bad-json", std::string("actor record malformed: ") + e.what());
  }
  return rec;
}

ordered_json scene_to_json(const SceneGraph& scene) {
  ordered_json j;
  j["version"] = kSceneFileVersion;
  j["ground_half_extent"] = scene.ground_half_extent;
  j["ground_z"] = scene.ground_z;
  j["env_settings"] = {{"time_of_day", scene.env_settings.time_of_day},
                       {"sky", scene.env_settings.sky}};
  ordered_json actors = ordered_json::array();
  for (const ActorRecord* rec : scene.actors_in_level()) {
    actors.push_back(actor_to_json(*rec));
  }
  j["actors"] = std::move(actors);
  return j;
}

SceneGraph scene_from_json(const ordered_json& j) {
  SceneGraph scene;
  try {
    std::string version = j.at("version").get<std::string>();
    if (version != kSceneFileVersion) {
      throw_schema("bad-version", "unsupported scene file version '" + version + "'");
    }
    scene.ground_half_extent = j.at("ground_half_extent").get<double>();
    scene.ground_z = j.at("ground_z").get<double>();
    const auto& env = j.at("env_settings");
    scene.env_settings.time_of_day = env.at("time_of_day").get<std::string>();
    scene.env_settings.sky = env.at("sky").get<std::string>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw_schema("bad-json", std::string("scene header malformed: ") + e.what());
  }

  const auto it = j.find("actors");
  if (it == j.end() || !it->is_array()) {
    throw_schema("bad-json", "scene file missing actors array");
  }
  // Validation here is structural; the catalog is not consulted so scenes
  // built against other catalogs stay loadable.
  for (const auto& aj : *it) {
    ActorRecord rec = actor_from_json(aj);
    std::string why;
    if (!valid_transform(rec.transform, &why)) throw_schema("bad-json", why);
    rec.transform.rotation = Rotation::make(rec.transform.rotation.yaw,
                                            rec.transform.rotation.pitch,
                                            rec.transform.rotation.roll);
    try {
      scene.insert_record(std::move(rec));
    } catch (const Error& e) {
      throw_schema("bad-json", e.what());
    }
  }
  return scene;
}

std::string serialize_scene(const SceneGraph& scene) {
  return scene_to_json(scene).dump(2) + "\n";
}

SceneGraph parse_scene(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw_schema("bad-json", std::string("scene parse failure: ") + e.what());
  }
  return scene_from_json(j);
}

void save_scene(const SceneGraph& scene, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw_schema("io-error", "cannot write scene file " + file.string());
  out << serialize_scene(scene);
}

SceneGraph load_scene(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw_schema("io-error", "cannot open scene file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

std::uint64_t scene_hash(const SceneGraph& scene) {
  return fnv1a64(serialize_scene(scene));
}

std::string scene_hash_hex(const SceneGraph& scene) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(scene_hash(scene)));
  return buf;
}

}  // namespace navforge
