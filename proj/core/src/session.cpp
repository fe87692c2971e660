#include "navforge/session.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "navforge/error.hpp"
#include "navforge/raster.hpp"
#include "navforge/scene_io.hpp"
#include "navforge/verify.hpp"

namespace navforge {

const std::vector<std::string>& tool_names() {
  static const std::vector<std::string> names = {
      "batch_commands",     "check_collisions",   "check_vertical_support",
      "delete_actor",       "delete_all_spawned", "find_actors_by_name",
      "get_actors_in_level", "list_assets",       "set_actor_transform",
      "setup_environment",  "spawn_actor",        "spawn_blueprint_actor",
      "take_screenshot",    "verify_scene"};
  return names;
}

namespace {

using ordered_json = nlohmann::ordered_json;

// Batch failures carry the index of the offending command.
class BatchFailure : public Error {
 public:
  BatchFailure(const Error& inner, int index)
      : Error(inner.kind(), "batch-failed",
              "command " + std::to_string(index) + " (" + inner.code() + "): " + inner.what()),
        index_(index),
        inner_code_(inner.code()) {}

  int index() const { return index_; }
  const std::string& inner_code() const { return inner_code_; }

 private:
  int index_;
  std::string inner_code_;
};

bool is_mutating(const std::string& tool) {
  return tool == "setup_environment" || tool == "spawn_actor" ||
         tool == "spawn_blueprint_actor" || tool == "delete_actor" ||
         tool == "delete_all_spawned" || tool == "set_actor_transform" ||
         tool == "batch_commands";
}

std::string string_arg(const ordered_json& args, const char* key) {
  if (!args.contains(key) || !args[key].is_string()) {
    throw_schema("bad-args", std::string("missing string argument '") + key + "'");
  }
  std::string v = args[key].get<std::string>();
  if (v.empty()) throw_schema("bad-args", std::string("argument '") + key + "' must be non-empty");
  return v;
}

double number_arg(const ordered_json& args, const char* key, double fallback) {
  if (!args.contains(key)) return fallback;
  if (!args[key].is_number()) {
    throw_schema("bad-args", std::string("argument '") + key + "' must be a number");
  }
  return args[key].get<double>();
}

Vec3 vec3_arg(const ordered_json& j, const char* what) {
  if (!j.is_object() || !j.contains("x") || !j.contains("y") || !j.contains("z") ||
      !j["x"].is_number() || !j["y"].is_number() || !j["z"].is_number()) {
    throw_schema("bad-args", std::string(what) + " must be an object {x, y, z}");
  }
  return {j["x"].get<double>(), j["y"].get<double>(), j["z"].get<double>()};
}

Rotation rotation_arg(const ordered_json& j) {
  if (!j.is_object()) throw_schema("bad-args", "rotation must be an object");
  for (const char* key : {"yaw", "pitch", "roll"}) {
    if (j.contains(key) && !j[key].is_number()) {
      throw_schema("bad-args", std::string("rotation ") + key + " must be a number");
    }
  }
  return Rotation::make(j.value("yaw", 0.0), j.value("pitch", 0.0), j.value("roll", 0.0));
}

Transform transform_args(const ordered_json& args) {
  Transform t;
  if (!args.contains("location")) throw_schema("bad-args", "missing 'location'");
  t.location = vec3_arg(args["location"], "location");
  if (args.contains("rotation")) t.rotation = rotation_arg(args["rotation"]);
  if (args.contains("scale")) t.scale = vec3_arg(args["scale"], "scale");
  return t;
}

VerifyScope scope_args(const ordered_json& args) {
  VerifyScope scope;
  if (args.contains("names")) {
    if (!args["names"].is_array()) throw_schema("bad-args", "'names' must be an array");
    std::set<std::string> names;
    for (const auto& n : args["names"]) {
      if (!n.is_string()) throw_schema("bad-args", "'names' entries must be strings");
      names.insert(n.get<std::string>());
    }
    scope.names = std::move(names);
  }
  return scope;
}

// Blueprint ids are asset ids behind an optional path and BP_ prefix.
std::string asset_from_blueprint(const std::string& blueprint) {
  std::string tail = blueprint.substr(blueprint.find_last_of('/') + 1);
  if (tail.size() > 3 && (tail.rfind("BP_", 0) == 0 || tail.rfind("bp_", 0) == 0)) {
    tail = tail.substr(3);
  }
  if (tail.empty()) throw_schema("bad-args", "blueprint id is empty");
  return tail;
}

ordered_json collision_json(const CollisionReport& report) {
  ordered_json pairs = ordered_json::array();
  for (const CollisionPair& p : report.pairs) {
    pairs.push_back(
        ordered_json{{"a", p.a}, {"b", p.b}, {"overlap_area_cm2", p.overlap_area_cm2}});
  }
  return ordered_json{{"collision_free_rate", report.collision_free_rate},
                      {"eligible_count", report.eligible_count},
                      {"pairs", pairs}};
}

ordered_json support_json(const SupportReport& report) {
  ordered_json floating = ordered_json::array();
  for (const FloatingActor& f : report.floating) {
    floating.push_back(ordered_json{{"name", f.name}, {"gap_cm", f.gap_cm}});
  }
  return ordered_json{{"supported_rate", report.supported_rate}, {"floating", floating}};
}

}  // namespace

Session::Session(SessionOptions options)
    : options_(std::move(options)),
      catalog_(options_.catalog ? options_.catalog : &default_catalog()) {}

nlohmann::ordered_json Session::call(const std::string& tool, const nlohmann::ordered_json& args) {
  ordered_json result = dispatch(tool, args, false);
  if (is_mutating(tool)) events_.push_back(ordered_json{{"tool", tool}, {"args", args}});
  return result;
}

nlohmann::ordered_json Session::dispatch(const std::string& tool, const nlohmann::ordered_json& args,
                                         bool in_batch) {
  if (!args.is_object() && !args.is_null()) throw_schema("bad-args", "args must be an object");
  const ordered_json a = args.is_null() ? ordered_json::object() : args;

  if (tool == "setup_environment") {
    double size = number_arg(a, "ground_size", kDefaultGroundHalfExtent);
    std::string tod = a.contains("time_of_day") ? string_arg(a, "time_of_day") : "noon";
    bool reinit = a.value("allow_reinit", false);
    scene_.setup_environment(size, tod, reinit);
    return ordered_json{{"ground_half_extent", scene_.ground_half_extent},
                        {"time_of_day", scene_.env_settings.time_of_day}};
  }
  if (tool == "spawn_actor" || tool == "spawn_blueprint_actor") {
    std::string name = string_arg(a, "name");
    std::string asset_id = tool == "spawn_actor"
                               ? string_arg(a, "asset_id")
                               : asset_from_blueprint(string_arg(a, "blueprint"));
    const ActorRecord& rec = scene_.spawn_actor(name, asset_id, transform_args(a), *catalog_);
    return ordered_json{{"actor", actor_to_json(rec)}};
  }
  if (tool == "delete_actor") {
    std::string name = string_arg(a, "name");
    scene_.delete_actor(name);
    return ordered_json{{"deleted", name}};
  }
  if (tool == "delete_all_spawned") {
    return ordered_json{{"deleted_count", scene_.delete_all_spawned()}};
  }
  if (tool == "get_actors_in_level") {
    ordered_json actors = ordered_json::array();
    for (const ActorRecord* rec : scene_.actors_in_level()) actors.push_back(actor_to_json(*rec));
    return ordered_json{{"actors", actors}, {"count", actors.size()}};
  }
  if (tool == "find_actors_by_name") {
    std::string pattern = string_arg(a, "pattern");
    ordered_json names = ordered_json::array();
    for (const ActorRecord* rec : scene_.find_actors_by_name(pattern)) names.push_back(rec->name);
    return ordered_json{{"names", names}, {"count", names.size()}};
  }
  if (tool == "set_actor_transform") {
    std::string name = string_arg(a, "name");
    if (!a.contains("location") && !a.contains("rotation") && !a.contains("scale")) {
      throw_schema("bad-args", "set_actor_transform needs location, rotation or scale");
    }
    std::optional<Vec3> location, scale;
    std::optional<Rotation> rotation;
    if (a.contains("location")) location = vec3_arg(a["location"], "location");
    if (a.contains("rotation")) rotation = rotation_arg(a["rotation"]);
    if (a.contains("scale")) scale = vec3_arg(a["scale"], "scale");
    const ActorRecord& rec = scene_.set_actor_transform(name, location, rotation, scale);
    return ordered_json{{"actor", actor_to_json(rec)}};
  }
  if (tool == "take_screenshot") {
    if (in_batch) {
      throw_schema("bad-args", "take_screenshot writes files and cannot run inside a batch");
    }
    std::vector<int> views;
    if (a.contains("views")) {
      if (!a["views"].is_array()) throw_schema("bad-args", "'views' must be an array");
      for (const auto& v : a["views"]) {
        if (!v.is_number_integer()) throw_schema("bad-args", "'views' entries must be integers");
        views.push_back(v.get<int>());
      }
    } else if (a.contains("view")) {
      if (!a["view"].is_number_integer()) throw_schema("bad-args", "'view' must be an integer");
      views.push_back(a["view"].get<int>());
    } else {
      views.push_back(0);
    }
    for (int v : views) {
      if (v < 0 || v >= kViewTourCount) {
        throw_schema("bad-args",
                     "view must be 0.." + std::to_string(kViewTourCount - 1));
      }
    }
    std::filesystem::create_directories(options_.screenshot_dir);
    ordered_json files = ordered_json::array();
    for (int v : views) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "shot_%04d.pgm", ++screenshot_counter_);
      write_pgm(render_view(scene_, *catalog_, v), options_.screenshot_dir / buf);
      files.push_back(std::string(buf));
    }
    return ordered_json{{"files", files}};
  }
  if (tool == "list_assets") {
    std::optional<Category> category;
    if (a.contains("category")) {
      std::string tag = string_arg(a, "category");
      category = category_from_string(tag);
      if (!category) throw_schema("unknown-category", "unknown category '" + tag + "'");
    }
    ordered_json assets = ordered_json::array();
    for (const AssetDescriptor& d : catalog_->list(category)) {
      assets.push_back(ordered_json{{"asset_id", d.asset_id},
                                    {"category", to_string(d.category)},
                                    {"base_extent",
                                     {{"x", d.base_extent.x},
                                      {"y", d.base_extent.y},
                                      {"z", d.base_extent.z}}}});
    }
    return ordered_json{{"assets", assets}, {"count", assets.size()}};
  }
  if (tool == "verify_scene") {
    VerifyScope scope = scope_args(a);
    double min_area = number_arg(a, "min_area_cm2", 0.0);
    double bound = number_arg(a, "bound_cm", scene_.ground_half_extent);
    CollisionReport col = check_collisions(scene_, *catalog_, scope, min_area);
    SupportReport sup = check_vertical_support(scene_, *catalog_, scope, scene_.ground_z);
    BoundsReport bounds = check_bounds(scene_, *catalog_, bound);
    ordered_json result{{"collision_free_rate", col.collision_free_rate},
                        {"supported_rate", sup.supported_rate},
                        {"gravity_score", score_gravity(scene_, *catalog_, scene_.ground_z)},
                        {"in_bounds_rate", bounds.in_bounds_rate},
                        {"collisions", collision_json(col)},
                        {"support", support_json(sup)},
                        {"out_of_bounds", bounds.out_of_bounds}};
    return result;
  }
  if (tool == "check_collisions") {
    return collision_json(
        check_collisions(scene_, *catalog_, scope_args(a), number_arg(a, "min_area_cm2", 0.0)));
  }
  if (tool == "check_vertical_support") {
    return support_json(check_vertical_support(scene_, *catalog_, scope_args(a), scene_.ground_z,
                                               number_arg(a, "tolerance_cm",
                                                          kSupportToleranceCm)));
  }
  if (tool == "batch_commands") {
    if (in_batch) throw_schema("bad-args", "batches cannot nest");
    if (!a.contains("commands") || !a["commands"].is_array()) {
      throw_schema("bad-args", "batch_commands needs a 'commands' array");
    }
    SceneGraph backup = scene_;
    ordered_json results = ordered_json::array();
    int index = 0;
    for (const auto& cmd : a["commands"]) {
      try {
        if (!cmd.is_object() || !cmd.contains("tool") || !cmd["tool"].is_string()) {
          throw_schema("bad-args", "each command must be {tool, args}");
        }
        results.push_back(dispatch(cmd["tool"].get<std::string>(),
                                   cmd.value("args", ordered_json::object()), true));
      } catch (const Error& e) {
        scene_ = std::move(backup);  // a batch applies fully or not at all
        throw BatchFailure(e, index);
      }
      ++index;
    }
    return ordered_json{{"results", results}, {"count", results.size()}};
  }
  if (!in_batch && options_.extension) {
    if (auto result = options_.extension(tool, a)) return *result;
  }
  throw_schema("unknown-tool", "unknown tool '" + tool + "'");
}

nlohmann::ordered_json Session::handle(const nlohmann::ordered_json& frame) {
  auto error_frame = [](const ordered_json& id, const std::string& code,
                        const std::string& message) {
    return ordered_json{{"id", id},
                        {"ok", false},
                        {"error", ordered_json{{"code", code}, {"message", message}}}};
  };

  if (!frame.is_object()) {
    return error_frame(nullptr, "bad-frame", "request must be a JSON object");
  }
  if (!frame.contains("id") || !frame["id"].is_number_integer()) {
    return error_frame(nullptr, "bad-frame", "request needs an integer 'id'");
  }
  std::int64_t id = frame["id"].get<std::int64_t>();
  if (id <= last_id_) {
    return error_frame(frame["id"], "bad-id",
                       "ids must increase; last seen " + std::to_string(last_id_));
  }
  if (!frame.contains("tool") || !frame["tool"].is_string()) {
    return error_frame(frame["id"], "bad-frame", "request needs a string 'tool'");
  }
  last_id_ = id;  // a well-formed frame consumes its id even when the tool fails

  try {
    ordered_json result = call(frame["tool"].get<std::string>(),
                               frame.value("args", ordered_json::object()));
    return ordered_json{{"id", id}, {"ok", true}, {"result", result}};
  } catch (const BatchFailure& e) {
    ordered_json err{{"code", e.code()},
                     {"message", e.what()},
                     {"failed_index", e.index()},
                     {"inner_code", e.inner_code()}};
    return ordered_json{{"id", id}, {"ok", false}, {"error", err}};
  } catch (const Error& e) {
    return error_frame(frame["id"], e.code(), e.what());
  } catch (const std::exception& e) {
    return error_frame(frame["id"], "internal", e.what());
  }
}

nlohmann::ordered_json Session::handle_line(const std::string& line) {
  ordered_json frame = ordered_json::parse(line, nullptr, false);
  if (frame.is_discarded()) {
    return ordered_json{
        {"id", nullptr},
        {"ok", false},
        {"error", ordered_json{{"code", "bad-frame"}, {"message", "invalid JSON"}}}};
  }
  return handle(frame);
}

Session Session::replay(const std::vector<nlohmann::ordered_json>& events,
                        SessionOptions options) {
  Session session(std::move(options));
  for (const ordered_json& event : events) {
    session.call(event.at("tool").get<std::string>(), event.value("args", ordered_json::object()));
  }
  return session;
}

}  // namespace navforge
