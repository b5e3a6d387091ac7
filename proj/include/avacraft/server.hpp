#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "avacraft/observation.hpp"
#include "avacraft/scenario.hpp"

namespace ava {

enum class SessionMode : std::uint8_t { PvE, PvP };

struct ServerConfig {
    RenderConfig render;
    std::chrono::milliseconds step_deadline{2000};
    std::size_t max_sessions = 1024;
};

/// Outcome of one applied step, kept briefly so PvP waiters can collect it.
struct AppliedStep {
    std::vector<std::string> applied[2];
    nlohmann::json rejections[2] = {nlohmann::json::array(), nlohmann::json::array()};
    int reward = 0;  // P1 perspective
    bool done = false;
    Result result = Result::Ongoing;
};

struct Session {
    std::string id;
    std::string scenario;
    std::uint64_t seed = 0;
    SessionMode mode = SessionMode::PvE;
    Team team = Team::P1;  // PvE side
    std::chrono::milliseconds step_deadline{2000};

    std::mutex mu;
    std::condition_variable cv;
    BattleState state;
    bool closed = false;
    // PvP barrier: one pending submission per team for the current step.
    std::optional<ActionSet> pending[2];
    std::vector<nlohmann::json> pending_parse_rejections[2];
    std::chrono::steady_clock::time_point first_submit;
    std::uint64_t generation = 0;  // bumped by reset
    std::map<int, AppliedStep> results;  // keyed by the decision step the actions were issued at
};

/// Transport-independent request handler. Thread-safe: every session has its
/// own lock and the session table has another.
class SessionManager {
public:
    SessionManager(const UnitCatalog& units, const ScenarioCatalog& scenarios, ServerConfig config = {});

    /// Never throws; failures come back as {ok: false, code, message}.
    nlohmann::json handle(const nlohmann::json& request);
    std::string handle_line(std::string_view line);

    std::size_t session_count() const;
    const ServerConfig& config() const { return config_; }

private:
    nlohmann::json create(const nlohmann::json& req);
    nlohmann::json reset(const nlohmann::json& req);
    nlohmann::json observe(const nlohmann::json& req);
    nlohmann::json step(const nlohmann::json& req);
    nlohmann::json close(const nlohmann::json& req);
    nlohmann::json info() const;

    std::shared_ptr<Session> find(const nlohmann::json& req) const;
    nlohmann::json observation(const Session& s, Team team, bool include_image) const;
    void apply(Session& s);
    nlohmann::json step_response(const Session& s, const AppliedStep& r, Team team, bool include_image) const;

    const UnitCatalog& units_;
    const ScenarioCatalog& scenarios_;
    ServerConfig config_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
};

/// Newline-delimited JSON over TCP, one thread per connection.
class Server {
public:
    /// Binds immediately; throws BindError. Port 0 picks a free port.
    Server(SessionManager& manager, std::uint16_t port, const std::string& host = "127.0.0.1");
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    std::uint16_t port() const;
    /// Blocks until stop() or, with handle_signals, SIGINT/SIGTERM.
    void run(bool handle_signals = false);
    /// Safe from any thread; idempotent.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ava
