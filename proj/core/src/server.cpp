#include "navforge/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "navforge/error.hpp"
#include "navforge/scene_io.hpp"

namespace navforge {

namespace {

using ordered_json = nlohmann::ordered_json;

void send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) throw_experiment("service-io", "send failed: " + std::string(strerror(errno)));
    sent += static_cast<std::size_t>(n);
  }
}

void set_timeouts(int fd, int seconds) {
  timeval tv{};
  tv.tv_sec = seconds;
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

ordered_json observation_json(const Observation& obs) {
  return ordered_json{{"bearing_deg", obs.bearing_deg},
                      {"distance_m", obs.distance_m},
                      {"forward_free", obs.forward_free},
                      {"goal_unreachable", obs.goal_unreachable},
                      {"step_count", obs.step_count}};
}

}  // namespace

void serve_stream(std::istream& in, std::ostream& out, Session& session) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << session.handle_line(line).dump() << "\n" << std::flush;
  }
}

// ---------------------------------------------------------------------------
// EnvService

EnvService::EnvService(const AssetCatalog* catalog)
    : catalog_(catalog ? catalog : &default_catalog()) {}

std::optional<nlohmann::ordered_json> EnvService::operator()(const std::string& tool,
                                                             const nlohmann::ordered_json& args) {
  if (tool == "env_load_scene") {
    SceneGraph scene;
    if (args.contains("scene")) {
      scene = scene_from_json(args["scene"]);
      scene_ref_ = "inline";
    } else if (args.contains("path") && args["path"].is_string()) {
      scene = load_scene(args["path"].get<std::string>());
      scene_ref_ = args["path"].get<std::string>();
    } else {
      throw_schema("bad-args", "env_load_scene needs 'path' or inline 'scene'");
    }
    workspace_ =
        std::make_shared<const SceneWorkspace>(SceneWorkspace::build(scene, *catalog_));
    env_.reset();
    return ordered_json{{"scene_ref", scene_ref_},
                        {"grid_width", workspace_->grid.width()},
                        {"grid_height", workspace_->grid.height()},
                        {"free_cells", workspace_->grid.free_count()}};
  }
  if (tool == "env_load_episodes") {
    if (!args.contains("path") || !args["path"].is_string()) {
      throw_schema("bad-args", "env_load_episodes needs a 'path'");
    }
    episodes_ = load_episodes(args["path"].get<std::string>());
    return ordered_json{{"count", episodes_.size()}};
  }
  if (tool == "env_reset") {
    if (!workspace_) throw_domain("no-scene", "load a scene before env_reset");
    if (episodes_.empty()) throw_domain("no-episodes", "load episodes before env_reset");
    if (!args.contains("episode")) throw_schema("bad-args", "env_reset needs 'episode'");
    const Episode* episode = nullptr;
    if (args["episode"].is_number_integer()) {
      auto index = args["episode"].get<std::int64_t>();
      if (index < 0 || index >= static_cast<std::int64_t>(episodes_.size())) {
        throw_schema("bad-args", "episode index out of range");
      }
      episode = &episodes_[static_cast<std::size_t>(index)];
    } else if (args["episode"].is_string()) {
      auto id = args["episode"].get<std::string>();
      for (const Episode& e : episodes_) {
        if (e.id == id) {
          episode = &e;
          break;
        }
      }
      if (!episode) throw_schema("bad-args", "unknown episode id " + id);
    } else {
      throw_schema("bad-args", "'episode' must be an index or an id");
    }
    EnvConfig config;
    config.render_raster = false;  // observations travel as scalars
    if (args.contains("max_steps")) {
      if (!args["max_steps"].is_number_integer()) {
        throw_schema("bad-args", "'max_steps' must be an integer");
      }
      config.max_steps = args["max_steps"].get<int>();
    }
    env_ = std::make_unique<NavEnv>(workspace_, *episode, config);
    Observation obs = env_->reset();
    return ordered_json{{"episode_id", env_->episode().id},
                        {"observation", observation_json(obs)}};
  }
  if (tool == "env_step") {
    if (!env_) throw_domain("no-episode", "env_reset before env_step");
    if (!args.contains("action") || !args["action"].is_string()) {
      throw_schema("bad-args", "env_step needs an 'action'");
    }
    auto action = action_from_string(args["action"].get<std::string>());
    if (!action) {
      throw_schema("bad-args", "unknown action '" + args["action"].get<std::string>() + "'");
    }
    StepResult res = env_->step(*action);
    return ordered_json{{"observation", observation_json(res.observation)},
                        {"reward", res.reward},
                        {"terminated", res.terminated},
                        {"truncated", res.truncated},
                        {"info",
                         ordered_json{{"success", res.info.success},
                                      {"distance_m", res.info.distance_m},
                                      {"collision", res.info.collision}}}};
  }
  if (tool == "env_state") {
    if (!env_) throw_domain("no-episode", "env_reset before env_state");
    return ordered_json{{"episode_id", env_->episode().id},
                        {"x", env_->pose().x},
                        {"y", env_->pose().y},
                        {"yaw", env_->pose().yaw},
                        {"step_count", env_->step_count()},
                        {"active", env_->active()}};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ToolServer

ToolServer::ToolServer(ServerOptions options) : options_(std::move(options)) {}

ToolServer::~ToolServer() { stop(); }

void ToolServer::start() {
  if (running_) return;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw_experiment("service-io", "socket: " + std::string(strerror(errno)));
  int one = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(options_.port));
  if (inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw_schema("bad-args", "host must be an IPv4 address, got " + options_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    std::string why = strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw_experiment("service-io", "bind/listen " + options_.host + ": " + why);
  }
  socklen_t len = sizeof(addr);
  getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);

  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void ToolServer::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      continue;
    }
    set_timeouts(fd, 300);
    std::lock_guard<std::mutex> lock(mutex_);
    connection_fds_.push_back(fd);
    connection_threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void ToolServer::serve_connection(int fd) {
  SessionOptions session_options = options_.session;
  std::shared_ptr<EnvService> env_service;
  if (options_.env_service) {
    env_service = std::make_shared<EnvService>(session_options.catalog);
    session_options.extension = [env_service](const std::string& tool,
                                              const nlohmann::ordered_json& args) {
      return (*env_service)(tool, args);
    };
  }
  Session session(std::move(session_options));

  std::string buffer;
  char chunk[4096];
  while (true) {
    ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (line.empty()) continue;
      try {
        send_all(fd, session.handle_line(line).dump() + "\n");
      } catch (const Error&) {
        ::close(fd);
        return;  // peer went away mid-response
      }
    }
  }
  ::close(fd);
}

void ToolServer::stop() {
  if (!running_) return;
  running_ = false;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  listen_fd_ = -1;
  if (accept_thread_.joinable()) accept_thread_.join();
  std::lock_guard<std::mutex> lock(mutex_);
  for (int fd : connection_fds_) ::shutdown(fd, SHUT_RDWR);
  for (std::thread& t : connection_threads_) {
    if (t.joinable()) t.join();
  }
  connection_fds_.clear();
  connection_threads_.clear();
}

// ---------------------------------------------------------------------------
// NdjsonClient

NdjsonClient::~NdjsonClient() { close(); }

NdjsonClient::NdjsonClient(NdjsonClient&& o) noexcept
    : fd_(o.fd_), next_id_(o.next_id_), buffer_(std::move(o.buffer_)) {
  o.fd_ = -1;
}

NdjsonClient& NdjsonClient::operator=(NdjsonClient&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.fd_;
    next_id_ = o.next_id_;
    buffer_ = std::move(o.buffer_);
    o.fd_ = -1;
  }
  return *this;
}

void NdjsonClient::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

NdjsonClient NdjsonClient::connect(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* info = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &info) != 0 || !info) {
    throw_experiment("service-unreachable", "cannot resolve " + host);
  }
  int fd = ::socket(info->ai_family, info->ai_socktype, info->ai_protocol);
  if (fd < 0) {
    freeaddrinfo(info);
    throw_experiment("service-unreachable", "socket: " + std::string(strerror(errno)));
  }
  if (::connect(fd, info->ai_addr, info->ai_addrlen) != 0) {
    std::string why = strerror(errno);
    freeaddrinfo(info);
    ::close(fd);
    throw_experiment("service-unreachable",
                     host + ":" + std::to_string(port) + " refused: " + why);
  }
  freeaddrinfo(info);
  set_timeouts(fd, 30);
  NdjsonClient client;
  client.fd_ = fd;
  return client;
}

std::string NdjsonClient::read_line() {
  while (true) {
    std::size_t pos = buffer_.find('\n');
    if (pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      return line;
    }
    char chunk[4096];
    ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n == 0) throw_experiment("service-io", "connection closed by the service");
    if (n < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        throw_experiment("service-timeout", "service did not answer in time");
      }
      throw_experiment("service-io", "recv failed: " + std::string(strerror(errno)));
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

nlohmann::ordered_json NdjsonClient::request(const std::string& tool,
                                             const nlohmann::ordered_json& args) {
  if (fd_ < 0) throw_experiment("service-io", "client is not connected");
  std::int64_t id = next_id_++;
  send_all(fd_, ordered_json{{"id", id}, {"tool", tool}, {"args", args}}.dump() + "\n");
  ordered_json response = ordered_json::parse(read_line(), nullptr, false);
  if (response.is_discarded() || !response.is_object()) {
    throw_experiment("service-io", "service sent an invalid frame");
  }
  if (!response.contains("id") || !response["id"].is_number_integer() ||
      response["id"].get<std::int64_t>() != id) {
    throw_experiment("service-io", "service answered with a mismatched id");
  }
  if (response.value("ok", false)) return response.value("result", ordered_json::object());
  std::string code = "remote-error";
  std::string message = "service reported an error";
  if (response.contains("error") && response["error"].is_object()) {
    code = response["error"].value("code", code);
    message = response["error"].value("message", message);
  }
  throw_experiment(code, message);
}

// ---------------------------------------------------------------------------
// External adapters

ExternalPolicy::ExternalPolicy(const std::string& host, int port)
    : client_(NdjsonClient::connect(host, port)) {}

void ExternalPolicy::begin_episode(const NavEnv& env) {
  const Episode& episode = env.episode();
  ordered_json args{{"episode_id", episode.id},
                    {"level", nullptr},
                    {"d0_m", episode.d0_cm / 100.0},
                    {"l_star_m", episode.l_star_cm / 100.0},
                    {"max_steps", env.config().max_steps},
                    {"success_radius_m", env.config().success_radius_cm / 100.0}};
  if (episode.level) args["level"] = *episode.level;
  client_.request("begin_episode", args);
}

Action ExternalPolicy::act(const Observation& obs) {
  ordered_json result = client_.request("act", observation_json(obs));
  if (!result.contains("action") || !result["action"].is_string()) {
    throw_experiment("bad-remote-action", "policy service answered without an action");
  }
  auto action = action_from_string(result["action"].get<std::string>());
  if (!action) {
    throw_experiment("bad-remote-action",
                     "unknown action '" + result["action"].get<std::string>() + "'");
  }
  return *action;
}

ExternalJudge::ExternalJudge(const std::string& host, int port)
    : client_(NdjsonClient::connect(host, port)) {}

Verdict ExternalJudge::judge(const std::string& request_text, const SceneSummary& summary) {
  ordered_json result = client_.request(
      "judge", ordered_json{{"request", request_text}, {"summary", scene_summary_to_json(summary)}});
  try {
    return verdict_from_json(result);
  } catch (const Error& e) {
    throw_experiment("bad-remote-verdict", e.what());
  }
}

}  // namespace navforge
