#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "navforge/scene.hpp"

namespace navforge {

inline constexpr const char* kSceneFileVersion = "1";

nlohmann::ordered_json actor_to_json(const ActorRecord& actor);
ActorRecord actor_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json scene_to_json(const SceneGraph& scene);
SceneGraph scene_from_json(const nlohmann::ordered_json& j);

// Canonical text form: fixed key order, actors sorted by name, 2-space
// indent, trailing newline. serialize(parse(serialize(s))) is byte-identical.
std::string serialize_scene(const SceneGraph& scene);
SceneGraph parse_scene(const std::string& text);

void save_scene(const SceneGraph& scene, const std::filesystem::path& file);
SceneGraph load_scene(const std::filesystem::path& file);

std::uint64_t scene_hash(const SceneGraph& scene);
std::string scene_hash_hex(const SceneGraph& scene);

}  // namespace navforge
