#pragma once

#include <atomic>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "navforge/judge.hpp"
#include "navforge/policies.hpp"
#include "navforge/session.hpp"

namespace navforge {

// One NDJSON request frame per input line, one response frame per output
// line; returns at end of stream.
void serve_stream(std::istream& in, std::ostream& out, Session& session);

// Adds embodied-environment tools (env_load_scene, env_load_episodes,
// env_reset, env_step, env_state) on top of a session, so a remote process
// can drive episodes over the wire.
class EnvService {
 public:
  explicit EnvService(const AssetCatalog* catalog = nullptr);
  std::optional<nlohmann::ordered_json> operator()(const std::string& tool,
                                                   const nlohmann::ordered_json& args);

 private:
  const AssetCatalog* catalog_;
  std::shared_ptr<const SceneWorkspace> workspace_;
  std::string scene_ref_;
  std::vector<Episode> episodes_;
  std::unique_ptr<NavEnv> env_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 binds a free port
  SessionOptions session;
  bool env_service = false;
};

// TCP NDJSON server, one thread and one fresh session per connection.
class ToolServer {
 public:
  explicit ToolServer(ServerOptions options);
  ~ToolServer();

  ToolServer(const ToolServer&) = delete;
  ToolServer& operator=(const ToolServer&) = delete;

  void start();  // binds, listens, accepts in the background
  void stop();
  int port() const { return port_; }

 private:
  void accept_loop();
  void serve_connection(int fd);

  ServerOptions options_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex mutex_;
  std::vector<int> connection_fds_;
  std::vector<std::thread> connection_threads_;
};

// Blocking NDJSON client with monotonically increasing frame ids. Transport
// failures surface as experiment errors (service-unreachable, service-io).
class NdjsonClient {
 public:
  NdjsonClient() = default;
  ~NdjsonClient();
  NdjsonClient(NdjsonClient&& o) noexcept;
  NdjsonClient& operator=(NdjsonClient&& o) noexcept;
  NdjsonClient(const NdjsonClient&) = delete;
  NdjsonClient& operator=(const NdjsonClient&) = delete;

  static NdjsonClient connect(const std::string& host, int port);

  // Sends {id, tool, args}; returns result on ok, otherwise throws an
  // experiment error carrying the remote code.
  nlohmann::ordered_json request(const std::string& tool, const nlohmann::ordered_json& args);
  bool connected() const { return fd_ >= 0; }
  void close();

 private:
  std::string read_line();

  int fd_ = -1;
  std::int64_t next_id_ = 1;
  std::string buffer_;
};

// Policy served by a remote NDJSON process: begin_episode once, then one
// act request per step answering {"action": "..."}.
class ExternalPolicy : public Policy {
 public:
  ExternalPolicy(const std::string& host, int port);
  std::string name() const override { return "external"; }
  void begin_episode(const NavEnv& env) override;
  Action act(const Observation& obs) override;

 private:
  NdjsonClient client_;
};

// Judge served by a remote NDJSON process: one judge request per verdict.
class ExternalJudge : public Judge {
 public:
  ExternalJudge(const std::string& host, int port);
  std::string name() const override { return "external"; }
  Verdict judge(const std::string& request_text, const SceneSummary& summary) override;

 private:
  NdjsonClient client_;
};

}  // namespace navforge
