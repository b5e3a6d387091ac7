#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <thread>

#include "avacraft/error.hpp"
#include "avacraft/harness.hpp"
#include "avacraft/paths.hpp"
#include "avacraft/server.hpp"
#include "avacraft/wire.hpp"

namespace py = pybind11;
using namespace ava;
using nlohmann::json;

namespace {

py::object to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list l;
            for (const auto& x : j) l.append(to_py(x));
            return std::move(l);
        }
        default: {
            py::dict d;
            for (const auto& [k, v] : j.items()) d[py::str(k)] = to_py(v);
            return std::move(d);
        }
    }
}

py::array_t<std::uint8_t> to_array(const Image& img) {
    py::array_t<std::uint8_t> a({img.height, img.width, 3});
    std::copy(img.rgb.begin(), img.rgb.end(), a.mutable_data());
    return a;
}

std::shared_ptr<const Assets> load(const std::string& dir) {
    return std::make_shared<const Assets>(Assets::load(dir.empty() ? data_dir() : std::filesystem::path(dir)));
}

py::dict observation_dict(const Observation& o) {
    py::dict d = to_py(encode_observation(o, false));
    d["image"] = o.image ? py::object(to_array(*o.image)) : py::none();
    return d;
}

ActionSet parse_lines(const std::vector<std::string>& lines, py::list& rejected) {
    ActionSet out;
    for (const auto& l : lines) {
        const auto p = parse_action_line(l);
        if (p.action) out.push_back(*p.action);
        else rejected.append(py::make_tuple(l, std::string(to_string(*p.error))));
    }
    return out;
}

/// In-process environment: one battle, optional builtin opponent.
class Env {
public:
    Env(std::string scenario, std::uint64_t seed, std::string data, int frame)
        : assets_(load(data)), scenario_(std::move(scenario)), seed_(seed) {
        render_.height = render_.width = frame;
        validate(render_);
        reset();
    }
    py::dict reset() {
        state_ = instantiate(assets_->scenarios.get(scenario_), assets_->units, seed_);
        return observation_dict(observe(state_, Team::P1, render_));
    }
    py::dict observe_team(const std::string& team, bool image) const {
        return observation_dict(observe(state_, parse_team(team), render_, image));
    }
    py::tuple step(const std::vector<std::string>& p1, std::optional<std::vector<std::string>> p2) {
        if (check_termination(state_).done()) throw Error("battle is over; call reset()");
        py::list rejected;
        const ActionSet a1 = parse_lines(p1, rejected);
        const ActionSet a2 = p2 ? parse_lines(*p2, rejected) : builtin_opponent(state_, Team::P2);
        const auto r = apply_step(state_, a1, a2);
        for (const auto& x : r.rejections)
            rejected.append(py::make_tuple(format_action(x.action), std::string(to_string(x.reason))));
        return py::make_tuple(observation_dict(observe(state_, Team::P1, render_)), r.reward, r.done, rejected);
    }
    int decision_step() const { return state_.decision_step; }
    std::string digest() const { return state_digest(state_); }
    std::string describe(const std::string& team) const { return describe_state(state_, parse_team(team)); }

private:
    static Team parse_team(const std::string& t) {
        const auto team = team_from_name(t);
        if (!team) throw py::value_error("team must be 'P1' or 'P2'");
        return *team;
    }
    std::shared_ptr<const Assets> assets_;
    std::string scenario_;
    std::uint64_t seed_;
    RenderConfig render_;
    BattleState state_;
};

class BackgroundServer {
public:
    BackgroundServer(int port, std::string host, int deadline_ms, std::string data)
        : assets_(load(data)) {
        ServerConfig c;
        c.step_deadline = std::chrono::milliseconds(deadline_ms);
        manager_ = std::make_unique<SessionManager>(assets_->units, assets_->scenarios, c);
        server_ = std::make_unique<Server>(*manager_, static_cast<std::uint16_t>(port), host);
        thread_ = std::thread([this] { server_->run(); });
    }
    ~BackgroundServer() { stop(); }
    int port() const { return server_->port(); }
    void stop() {
        if (!thread_.joinable()) return;
        py::gil_scoped_release release;
        server_->stop();
        thread_.join();
    }

private:
    std::shared_ptr<const Assets> assets_;
    std::unique_ptr<SessionManager> manager_;
    std::unique_ptr<Server> server_;
    std::thread thread_;
};

PipelineConfig pipeline(bool role, bool mpi, bool rag) {
    PipelineConfig p;
    p.ablation = {role, mpi, rag};
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "AVACraft battle simulator and agent pipeline";

    // Translators are tried newest first, so the base class goes first.
    py::register_exception<Error>(m, "AvacraftError", PyExc_RuntimeError);
    py::register_exception<UnknownScenario>(m, "UnknownScenario", PyExc_KeyError);
    py::register_exception<CorruptReplay>(m, "CorruptReplay", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<BindError>(m, "BindError", PyExc_OSError);

    m.def("default_data_dir", [] { return data_dir().string(); });
    m.def("scenarios", [](const std::string& data) {
        py::list out;
        for (const auto& s : load(data)->scenarios.list())
            out.append(py::dict(py::arg("id") = s.id, py::arg("mode") = std::string(to_string(s.mode)),
                                py::arg("description") = s.description));
        return out;
    }, py::arg("data_dir") = "");

    m.def("parse_action", [](const std::string& line) -> py::object {
        const auto p = parse_action_line(line);
        if (!p.action) throw py::value_error(std::string(to_string(*p.error)));
        return py::str(format_action(*p.action));
    }, "Canonical form of one action line; ValueError names the parse error.");

    m.def("parse_skill_plan", [](const std::string& text) -> py::object {
        const auto plan = parse_skill_plan(text);
        if (!plan) return py::none();
        auto skill = [](const Skill& s) {
            return py::dict(py::arg("name") = s.name, py::arg("description") = s.description, py::arg("steps") = s.steps);
        };
        py::list secondary;
        for (const auto& s : plan->secondary_skills) secondary.append(skill(s));
        return py::dict(py::arg("primary_skill") = skill(plan->primary_skill), py::arg("secondary_skills") = secondary);
    });
    m.def("parse_priorities", [](const std::string& text) {
        py::list out;
        for (const auto& p : parse_priorities(text))
            out.append(py::dict(py::arg("label") = p.class_label, py::arg("tag") = p.tag, py::arg("reason") = p.reason));
        return out;
    });

    m.def("knowledge", [](const std::string& cls, const std::string& data) {
        const auto assets = load(data);
        const auto& e = assets->knowledge.retrieve(cls);
        return py::dict(py::arg("class_key") = e.class_key, py::arg("summary") = e.specifications.summary,
                        py::arg("dps") = e.specifications.dps, py::arg("strong_against") = e.strong_against,
                        py::arg("weak_against") = e.weak_against, py::arg("insights") = e.insights);
    }, py::arg("class_key"), py::arg("data_dir") = "");

    py::class_<Env>(m, "Env")
        .def(py::init<std::string, std::uint64_t, std::string, int>(), py::arg("scenario"), py::arg("seed") = 0,
             py::arg("data_dir") = "", py::arg("frame_size") = 512)
        .def("reset", &Env::reset)
        .def("observe", &Env::observe_team, py::arg("team") = "P1", py::arg("include_image") = true)
        .def("step", &Env::step, py::arg("p1_actions"), py::arg("p2_actions") = py::none(),
             "Returns (observation, reward, done, rejections). Without p2_actions the builtin opponent plays P2.")
        .def("describe", &Env::describe, py::arg("team") = "P1")
        .def_property_readonly("decision_step", &Env::decision_step)
        .def_property_readonly("digest", &Env::digest);

    m.def("run_episode", [](const std::string& scenario, std::uint64_t seed, const std::string& backend,
                            const std::string& opponent, int max_steps, bool role, bool mpi, bool rag, const std::string& data) {
        RunConfig c;
        c.scenarios = {scenario};
        c.backend = backend;
        c.opponent = opponent;
        c.episodes = 1;
        c.seed = seed;
        c.max_steps = max_steps;
        c.workers = 1;
        c.pipeline = pipeline(role, mpi, rag);
        const auto assets = load(data);
        WinRateReport r;
        {
            py::gil_scoped_release release;
            r = cmd_run(*assets, c);
        }
        return to_py(r.to_json()["scenarios"][0]["results"][0]);
    }, py::arg("scenario"), py::arg("seed") = 0, py::arg("backend") = "scripted:focus_fire", py::arg("opponent") = "builtin",
       py::arg("max_steps") = 600, py::arg("role") = true, py::arg("mpi") = true, py::arg("rag") = true, py::arg("data_dir") = "");

    m.def("win_rates", [](const std::vector<std::string>& scenarios, const std::string& backend, const std::string& opponent,
                          int episodes, std::uint64_t seed, bool role, bool mpi, bool rag, const std::string& data) {
        RunConfig c;
        c.scenarios = scenarios;
        c.backend = backend;
        c.opponent = opponent;
        c.episodes = episodes;
        c.seed = seed;
        c.pipeline = pipeline(role, mpi, rag);
        const auto assets = load(data);
        WinRateReport r;
        {
            py::gil_scoped_release release;
            r = cmd_run(*assets, c);
        }
        py::dict d = to_py(r.to_json());
        d["text"] = r.to_text();
        return d;
    }, py::arg("scenarios"), py::arg("backend") = "scripted:focus_fire", py::arg("opponent") = "builtin",
       py::arg("episodes") = 20, py::arg("seed") = 0, py::arg("role") = true, py::arg("mpi") = true, py::arg("rag") = true,
       py::arg("data_dir") = "");

    m.def("pvp", [](const std::string& scenario, const std::string& a, const std::string& b, int matches, std::uint64_t seed,
                    const std::string& data) {
        PvpConfig c;
        c.scenario = scenario;
        c.backend_a = a;
        c.backend_b = b;
        c.matches = matches;
        c.seed = seed;
        const auto assets = load(data);
        PvpReport r;
        {
            py::gil_scoped_release release;
            r = cmd_pvp(*assets, c);
        }
        py::dict d = to_py(r.to_json());
        d["text"] = r.to_text();
        return d;
    }, py::arg("scenario"), py::arg("backend_a"), py::arg("backend_b"), py::arg("matches") = 20, py::arg("seed") = 0,
       py::arg("data_dir") = "");

    py::class_<SessionManager>(m, "SessionManager")
        .def(py::init([](const std::string& data, int deadline_ms) {
                 // The manager borrows the catalogs; keep them alive for the process.
                 static std::vector<std::shared_ptr<const Assets>> keep;
                 keep.push_back(load(data));
                 ServerConfig c;
                 c.step_deadline = std::chrono::milliseconds(deadline_ms);
                 return std::make_unique<SessionManager>(keep.back()->units, keep.back()->scenarios, c);
             }),
             py::arg("data_dir") = "", py::arg("step_deadline_ms") = 2000)
        .def("handle", [](SessionManager& s, const std::string& line) {
            py::gil_scoped_release release;
            return s.handle_line(line);
        }, "One request line in, one response line out (wire protocol, without the newline).");

    py::class_<BackgroundServer>(m, "Server")
        .def(py::init<int, std::string, int, std::string>(), py::arg("port") = 0, py::arg("host") = "127.0.0.1",
             py::arg("step_deadline_ms") = 2000, py::arg("data_dir") = "")
        .def_property_readonly("port", &BackgroundServer::port)
        .def("stop", &BackgroundServer::stop)
        .def("__enter__", [](BackgroundServer& s) -> BackgroundServer& { return s; })
        .def("__exit__", [](BackgroundServer& s, py::args) { s.stop(); });
}
