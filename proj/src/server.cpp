#include "avacraft/server.hpp"

#include <sys/socket.h>

#include <atomic>
#include <boost/asio.hpp>
#include <csignal>
#include <iostream>

#include "avacraft/error.hpp"
#include "avacraft/wire.hpp"

namespace ava {

using nlohmann::json;

namespace {

struct Fail {
    std::string code;
    std::string message;
};

int side(Team t) { return t == Team::P1 ? 0 : 1; }

Team team_field(const json& req, const char* key, Team fallback) {
    if (!req.contains(key)) return fallback;
    if (!req[key].is_string()) throw Fail{"BAD_REQUEST", std::string(key) + " must be \"P1\" or \"P2\""};
    const auto t = team_from_name(req[key].get<std::string>());
    if (!t) throw Fail{"BAD_REQUEST", std::string(key) + " must be \"P1\" or \"P2\""};
    return *t;
}

bool image_flag(const json& req) {
    if (!req.contains("include_image")) return true;
    if (!req["include_image"].is_boolean()) throw Fail{"BAD_REQUEST", "include_image must be a boolean"};
    return req["include_image"].get<bool>();
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

SessionManager::SessionManager(const UnitCatalog& units, const ScenarioCatalog& scenarios, ServerConfig config)
    : units_(units), scenarios_(scenarios), config_(std::move(config)) {
    validate(config_.render);
}

std::size_t SessionManager::session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

std::string SessionManager::handle_line(std::string_view line) {
    json req;
    json resp;
    try {
        req = json::parse(line);
        resp = handle(req);
    } catch (const json::parse_error& e) {
        resp = {{"ok", false}, {"code", "BAD_REQUEST"}, {"message", std::string("invalid JSON: ") + e.what()}};
    }
    return resp.dump(-1, ' ', false, json::error_handler_t::replace);
}

json SessionManager::handle(const json& req) {
    json resp;
    try {
        if (!req.is_object()) throw Fail{"BAD_REQUEST", "request must be an object"};
        if (!req.contains("op") || !req["op"].is_string()) throw Fail{"BAD_REQUEST", "missing op"};
        const auto op = req["op"].get<std::string>();
        if (op == "create") resp = create(req);
        else if (op == "reset") resp = reset(req);
        else if (op == "observe") resp = observe(req);
        else if (op == "step") resp = step(req);
        else if (op == "close") resp = close(req);
        else if (op == "info") resp = info();
        else throw Fail{"BAD_REQUEST", "unknown op " + op};
        resp["ok"] = true;
    } catch (const Fail& f) {
        resp = {{"ok", false}, {"code", f.code}, {"message", f.message}};
    } catch (const UnknownScenario& e) {
        resp = {{"ok", false}, {"code", "UNKNOWN_SCENARIO"}, {"message", e.what()}};
    } catch (const json::exception& e) {
        resp = {{"ok", false}, {"code", "BAD_REQUEST"}, {"message", e.what()}};
    } catch (const std::exception& e) {
        resp = {{"ok", false}, {"code", "BAD_REQUEST"}, {"message", e.what()}};
    }
    if (req.is_object() && req.contains("id")) resp["id"] = req["id"];
    return resp;
}

json SessionManager::info() const {
    json ids = json::array();
    for (const auto& s : scenarios_.list()) ids.push_back(s.id);
    return {{"protocol", kProtocolName},
            {"version", kProtocolVersion},
            {"scenarios", ids},
            {"render", {{"height", config_.render.height}, {"width", config_.render.width}}},
            {"step_deadline_ms", config_.step_deadline.count()}};
}

json SessionManager::create(const json& req) {
    if (!req.contains("scenario") || !req["scenario"].is_string()) throw Fail{"BAD_REQUEST", "scenario must be a string"};
    const auto scenario = req["scenario"].get<std::string>();
    std::uint64_t seed = 0;
    if (req.contains("seed")) {
        if (!req["seed"].is_number_integer() || req["seed"].get<std::int64_t>() < 0)
            throw Fail{"BAD_REQUEST", "seed must be a non-negative integer"};
        seed = req["seed"].get<std::uint64_t>();
    }
    auto s = std::make_shared<Session>();
    const auto mode = lower(req.value("mode", std::string("PvE")));
    if (mode == "pve") s->mode = SessionMode::PvE;
    else if (mode == "pvp") s->mode = SessionMode::PvP;
    else throw Fail{"BAD_REQUEST", "mode must be PvE or PvP"};
    s->team = team_field(req, "team", Team::P1);
    s->step_deadline = config_.step_deadline;
    if (req.contains("step_deadline_ms")) {
        if (!req["step_deadline_ms"].is_number_integer() || req["step_deadline_ms"].get<std::int64_t>() <= 0)
            throw Fail{"BAD_REQUEST", "step_deadline_ms must be a positive integer"};
        s->step_deadline = std::chrono::milliseconds(req["step_deadline_ms"].get<std::int64_t>());
    }
    s->scenario = scenario;
    s->seed = seed;
    s->state = instantiate(scenarios_.get(scenario), units_, seed);

    std::lock_guard lock(mu_);
    if (sessions_.size() >= config_.max_sessions) throw Fail{"BAD_REQUEST", "too many open sessions"};
    s->id = "s" + std::to_string(next_id_++);
    sessions_[s->id] = s;
    return {{"session_id", s->id},
            {"scenario", scenario},
            {"seed", seed},
            {"mode", s->mode == SessionMode::PvE ? "PvE" : "PvP"},
            {"team", to_string(s->team)},
            {"protocol", kProtocolName},
            {"version", kProtocolVersion}};
}

std::shared_ptr<Session> SessionManager::find(const json& req) const {
    if (!req.contains("session_id") || !req["session_id"].is_string())
        throw Fail{"BAD_REQUEST", "session_id must be a string"};
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(req["session_id"].get<std::string>());
    if (it == sessions_.end()) throw Fail{"UNKNOWN_SESSION", "no session " + req["session_id"].get<std::string>()};
    return it->second;
}

json SessionManager::observation(const Session& s, Team team, bool include_image) const {
    return encode_observation(ava::observe(s.state, team, config_.render, include_image), include_image);
}

json SessionManager::reset(const json& req) {
    auto s = find(req);
    const bool img = image_flag(req);
    std::lock_guard lock(s->mu);
    if (s->closed) throw Fail{"UNKNOWN_SESSION", "session closed"};
    const Team team = team_field(req, "team", s->team);
    s->state = instantiate(scenarios_.get(s->scenario), units_, s->seed);
    s->pending[0].reset();
    s->pending[1].reset();
    s->pending_parse_rejections[0].clear();
    s->pending_parse_rejections[1].clear();
    s->results.clear();
    ++s->generation;
    s->cv.notify_all();
    return {{"observation", observation(*s, team, img)}, {"done", false}};
}

json SessionManager::observe(const json& req) {
    auto s = find(req);
    const bool img = image_flag(req);
    std::lock_guard lock(s->mu);
    if (s->closed) throw Fail{"UNKNOWN_SESSION", "session closed"};
    const Team team = team_field(req, "team", s->team);
    return {{"observation", observation(*s, team, img)}, {"done", check_termination(s->state).done()}};
}

json SessionManager::close(const json& req) {
    auto s = find(req);
    {
        std::lock_guard lock(mu_);
        sessions_.erase(s->id);
    }
    std::lock_guard lock(s->mu);
    s->closed = true;
    s->cv.notify_all();
    return {{"session_id", s->id}};
}

// Caller holds s.mu. Missing submissions count as empty action sets.
void SessionManager::apply(Session& s) {
    const int at = s.state.decision_step;
    ActionSet sets[2] = {s.pending[0].value_or(ActionSet{}), s.pending[1].value_or(ActionSet{})};
    const StepResult res = apply_step(s.state, sets[0], sets[1]);

    AppliedStep out;
    out.reward = res.reward;
    out.done = res.done;
    out.result = res.outcome.result;
    for (int t = 0; t < 2; ++t) {
        for (auto& r : s.pending_parse_rejections[t]) out.rejections[t].push_back(std::move(r));
        for (const auto& a : sets[t]) {
            bool rejected = false;
            for (const auto& r : res.rejections)
                if (side(r.team) == t && r.action == a) rejected = true;
            if (!rejected) out.applied[t].push_back(format_action(a));
        }
    }
    for (const auto& r : res.rejections)
        out.rejections[side(r.team)].push_back({{"line", format_action(r.action)}, {"reason", to_string(r.reason)}});

    s.results[at] = std::move(out);
    while (!s.results.empty() && s.results.begin()->first < at - 8) s.results.erase(s.results.begin());
    s.pending[0].reset();
    s.pending[1].reset();
    s.pending_parse_rejections[0].clear();
    s.pending_parse_rejections[1].clear();
    s.cv.notify_all();
}

json SessionManager::step_response(const Session& s, const AppliedStep& r, Team team, bool include_image) const {
    return {{"observation", observation(s, team, include_image)},
            {"reward", team == Team::P1 ? r.reward : -r.reward},
            {"done", r.done},
            {"outcome", to_string(r.result)},
            {"decision_step", s.state.decision_step},
            {"applied", r.applied[side(team)]},
            {"rejections", r.rejections[side(team)]}};
}

json SessionManager::step(const json& req) {
    auto s = find(req);
    const bool img = image_flag(req);
    if (!req.contains("actions") || !req["actions"].is_array()) throw Fail{"BAD_REQUEST", "actions must be a list of strings"};
    ActionSet actions;
    std::vector<json> parse_rejections;
    for (const auto& line : req["actions"]) {
        if (!line.is_string()) throw Fail{"BAD_REQUEST", "actions must be a list of strings"};
        const auto text = line.get<std::string>();
        const auto p = parse_action_line(text);
        if (p.action) actions.push_back(*p.action);
        else parse_rejections.push_back({{"line", text}, {"reason", to_string(*p.error)}});
    }

    std::unique_lock lock(s->mu);
    if (s->closed) throw Fail{"UNKNOWN_SESSION", "session closed"};
    const Team team = team_field(req, "team", s->team);
    if (s->mode == SessionMode::PvE && team != s->team)
        throw Fail{"BAD_REQUEST", "this PvE session controls " + std::string(to_string(s->team))};
    if (check_termination(s->state).done()) throw Fail{"SESSION_DONE", "battle is over; reset or close"};

    const int at = s->state.decision_step;
    const int me = side(team);
    if (s->mode == SessionMode::PvE) {
        s->pending[me] = std::move(actions);
        s->pending_parse_rejections[me] = std::move(parse_rejections);
        s->pending[1 - me] = builtin_opponent(s->state, opponent(team));
        apply(*s);
        return step_response(*s, s->results.at(at), team, img);
    }

    if (s->pending[me]) throw Fail{"DUPLICATE_SUBMIT", "already submitted for step " + std::to_string(at)};
    if (!s->pending[1 - me]) s->first_submit = std::chrono::steady_clock::now();
    s->pending[me] = std::move(actions);
    s->pending_parse_rejections[me] = std::move(parse_rejections);
    const auto gen = s->generation;
    if (s->pending[1 - me]) {
        apply(*s);
    } else {
        const auto deadline = s->first_submit + s->step_deadline;
        const bool advanced = s->cv.wait_until(lock, deadline, [&] {
            return s->closed || s->generation != gen || s->state.decision_step != at;
        });
        if (s->closed) throw Fail{"SESSION_DONE", "session closed while waiting"};
        if (s->generation != gen) throw Fail{"SESSION_DONE", "session reset while waiting"};
        if (!advanced) apply(*s);
    }
    const auto it = s->results.find(at);
    if (it == s->results.end()) throw Fail{"SESSION_DONE", "step result expired"};
    return step_response(*s, it->second, team, img);
}

namespace asio = boost::asio;
using asio::ip::tcp;

struct Server::Impl {
    struct Conn {
        std::shared_ptr<tcp::socket> socket;
        std::thread thread;
        std::shared_ptr<std::atomic<bool>> finished;
    };

    SessionManager& manager;
    asio::io_context io;
    tcp::acceptor acceptor{io};
    std::optional<asio::signal_set> signals;
    std::mutex mu;
    std::vector<Conn> conns;
    bool stopping = false;

    explicit Impl(SessionManager& m) : manager(m) {}

    void accept() {
        acceptor.async_accept([this](const boost::system::error_code& ec, tcp::socket sock) {
            if (ec) return;
            std::lock_guard lock(mu);
            if (stopping) return;
            reap();
            Conn c;
            c.socket = std::make_shared<tcp::socket>(std::move(sock));
            c.finished = std::make_shared<std::atomic<bool>>(false);
            c.thread = std::thread([this, s = c.socket, f = c.finished] {
                serve(*s);
                f->store(true);
            });
            conns.push_back(std::move(c));
            accept();
        });
    }

    // Caller holds mu.
    void reap() {
        for (auto it = conns.begin(); it != conns.end();) {
            if (it->finished->load()) {
                it->thread.join();
                it = conns.erase(it);
            } else {
                ++it;
            }
        }
    }

    void serve(tcp::socket& sock) {
        asio::streambuf buf(16 * 1024 * 1024);
        for (;;) {
            boost::system::error_code ec;
            const std::size_t n = asio::read_until(sock, buf, '\n', ec);
            if (ec == asio::error::not_found) {
                const std::string msg = R"({"ok":false,"code":"BAD_REQUEST","message":"message too long"})"
                                        "\n";
                asio::write(sock, asio::buffer(msg), ec);
                break;
            }
            if (ec) break;
            std::string line(asio::buffers_begin(buf.data()), asio::buffers_begin(buf.data()) + static_cast<std::ptrdiff_t>(n));
            buf.consume(n);
            while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            const std::string out = manager.handle_line(line) + "\n";
            asio::write(sock, asio::buffer(out), ec);
            if (ec) break;
        }
        boost::system::error_code ignored;
        sock.shutdown(tcp::socket::shutdown_both, ignored);
    }

    void join_all() {
        std::vector<Conn> left;
        {
            std::lock_guard lock(mu);
            left.swap(conns);
        }
        for (auto& c : left)
            if (c.thread.joinable()) c.thread.join();
    }
};

Server::Server(SessionManager& manager, std::uint16_t port, const std::string& host) : impl_(std::make_unique<Impl>(manager)) {
    try {
        const tcp::endpoint ep(asio::ip::make_address(host), port);
        impl_->acceptor.open(ep.protocol());
        impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
        impl_->acceptor.bind(ep);
        impl_->acceptor.listen();
    } catch (const boost::system::system_error& e) {
        throw BindError("cannot listen on " + host + ":" + std::to_string(port) + ": " + e.what());
    }
}

Server::~Server() {
    stop();
    impl_->join_all();
}

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run(bool handle_signals) {
    {
        std::lock_guard lock(impl_->mu);
        if (impl_->stopping) return;
    }
    if (handle_signals) {
        impl_->signals.emplace(impl_->io, SIGINT, SIGTERM);
        impl_->signals->async_wait([this](const boost::system::error_code& ec, int) {
            if (!ec) stop();
        });
    }
    impl_->accept();
    impl_->io.run();
    impl_->join_all();
}

void Server::stop() {
    {
        std::lock_guard lock(impl_->mu);
        if (impl_->stopping) return;
        impl_->stopping = true;
        // Unblock connection threads parked in a read.
        for (auto& c : impl_->conns) ::shutdown(c.socket->native_handle(), SHUT_RDWR);
    }
    asio::post(impl_->io, [impl = impl_.get()] {
        boost::system::error_code ignored;
        impl->acceptor.close(ignored);
        if (impl->signals) impl->signals->cancel(ignored);
    });
}

}  // namespace ava
