#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "navforge/scene.hpp"

namespace navforge {

// The scene-editing tool surface. Every mutation flows through one of these
// named tools, so an event log of successful calls replays to the same scene.
const std::vector<std::string>& tool_names();  // sorted, 14 entries

struct SessionOptions {
  std::filesystem::path screenshot_dir = ".";
  const AssetCatalog* catalog = nullptr;  // built-in catalog when null
  // Consulted for tools the session does not know. Extension tools carry
  // their own state, so they are barred from batches (no rollback).
  std::function<std::optional<nlohmann::ordered_json>(const std::string& tool,
                                                      const nlohmann::ordered_json& args)>
      extension;
};

class Session {
 public:
  explicit Session(SessionOptions options = {});

  // Typed entry point: returns the tool result or throws navforge::Error.
  nlohmann::ordered_json call(const std::string& tool, const nlohmann::ordered_json& args);

  // Protocol entry point: one request frame {"id", "tool", "args"} in, one
  // response frame out. Never throws; malformed frames answer with id null.
  // Frame ids must be integers and strictly increasing within the session.
  nlohmann::ordered_json handle(const nlohmann::ordered_json& frame);
  nlohmann::ordered_json handle_line(const std::string& line);

  const SceneGraph& scene() const { return scene_; }
  const AssetCatalog& catalog() const { return *catalog_; }
  const std::vector<nlohmann::ordered_json>& events() const { return events_; }
  std::int64_t last_id() const { return last_id_; }

  // Rebuilds a session by re-calling every logged mutation.
  static Session replay(const std::vector<nlohmann::ordered_json>& events,
                        SessionOptions options = {});

 private:
  nlohmann::ordered_json dispatch(const std::string& tool, const nlohmann::ordered_json& args,
                                  bool in_batch);

  SessionOptions options_;
  const AssetCatalog* catalog_;
  SceneGraph scene_;
  std::vector<nlohmann::ordered_json> events_;
  std::int64_t last_id_ = 0;
  int screenshot_counter_ = 0;
};

}  // namespace navforge
