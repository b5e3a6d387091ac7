// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fail.
#include <boost/asio.hpp>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "avacraft/error.hpp"
#include "avacraft/grid.hpp"
#include "avacraft/harness.hpp"
#include "avacraft/paths.hpp"
#include "avacraft/server.hpp"
#include "avacraft/wire.hpp"

using namespace ava;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass) ++failures;
    char t[32];
    std::snprintf(t, sizeof t, "%.2fs", secs);
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << t << "]" << std::endl;
}

const Assets& assets() {
    static const Assets a = Assets::load(data_dir());
    return a;
}

/// Uniform over the grammar with living own-team actors; targets may be any
/// uid, so some actions are rejected by the engine on purpose.
ActionSet random_actions(const BattleState& s, Team team, std::mt19937_64& rng) {
    ActionSet out;
    std::vector<Uid> all;
    for (const auto& u : s.units) all.push_back(u.uid);
    static const char* abilities[] = {"Stimpack", "Blink", "Heal", "SiegeMode", "Unsiege"};
    for (const auto& u : s.units) {
        if (!u.alive || u.team != team) continue;
        switch (rng() % 5) {
            case 0:
            case 1: out.push_back(AttackAction{u.uid, all[rng() % all.size()]}); break;
            case 2: out.push_back(MoveGridAction{u.uid, {static_cast<int>(rng() % 10) + 1, static_cast<int>(rng() % 10) + 1}}); break;
            case 3: out.push_back(MoveDirAction{u.uid, static_cast<Direction>(rng() % 4)}); break;
            default: {
                AbilityAction a{u.uid, abilities[rng() % 5], {}};
                if (a.ability == "Heal") a.target = all[rng() % all.size()];
                if (a.ability == "Blink") a.target = GridCell{static_cast<int>(rng() % 10) + 1, static_cast<int>(rng() % 10) + 1};
                out.push_back(a);
            }
        }
    }
    return out;
}

Outcome determinism() {
    std::vector<std::string> digests;
    double worst = 0;
    for (int i = 0; i < 3; ++i) {
        ScriptedBackend b(ScriptedPolicy::FocusFire, 42);
        const auto t0 = Clock::now();
        const auto run = run_episode(assets(), "3m", 42, &b, nullptr, {});
        worst = std::max(worst, std::chrono::duration<double>(Clock::now() - t0).count());
        digests.push_back(run.replay.digest());
    }
    const bool same = digests[0] == digests[1] && digests[1] == digests[2];
    return {same && worst < 1.0, "replay digest " + digests[0] + (same ? " x3" : " differs") + ", slowest episode " +
                                     std::to_string(worst).substr(0, 5) + "s"};
}

Outcome conservation() {
    int episodes = 0, mismatches = 0;
    for (const char* id : {"3m", "mixed_units"})
        for (std::uint64_t seed = 0; seed < 50; ++seed, ++episodes) {
            auto s = instantiate(assets().scenarios.get(id), assets().units, seed);
            std::mt19937_64 rng(seed * 7919 + 1);
            std::map<Uid, Milli> pool0, damage, healing;
            for (const auto& u : s.units) pool0[u.uid] = u.health + u.shields;
            StepResult r;
            while (!r.done) {
                r = apply_step(s, random_actions(s, Team::P1, rng), random_actions(s, Team::P2, rng));
                for (const auto& d : r.damage) damage[d.target] += d.shield_damage + d.health_damage;
                for (const auto& h : r.heals) healing[h.target] += h.amount;
            }
            for (const auto& u : s.units)
                if (pool0[u.uid] - (u.health + u.shields) + healing[u.uid] != damage[u.uid]) ++mismatches;
        }
    return {mismatches == 0, std::to_string(episodes) + " random episodes, " + std::to_string(mismatches) + " unbalanced unit ledgers"};
}

Outcome reward_termination() {
    const auto list = assets().scenarios.list();
    int bad = 0, draws = 0, cap_draws = 0, wipe_draws = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto& id = list[static_cast<std::size_t>(i) % list.size()].id;
        auto s = instantiate(assets().scenarios.get(id), assets().units, static_cast<std::uint64_t>(i));
        std::mt19937_64 rng(static_cast<std::uint64_t>(i) + 99);
        StepResult r;
        while (!r.done) {
            r = apply_step(s, random_actions(s, Team::P1, rng), random_actions(s, Team::P2, rng));
            if (r.reward < -1 || r.reward > 1 || (!r.done && r.reward != 0)) ++bad;
            if (s.decision_step > kMaxDecisionSteps) {
                ++bad;
                break;
            }
        }
        const int p1 = s.alive_count(Team::P1), p2 = s.alive_count(Team::P2);
        const bool wiped = p1 == 0 && p2 == 0;
        const bool capped = s.decision_step == kMaxDecisionSteps && p1 > 0 && p2 > 0;
        const bool is_draw = r.outcome.result == Result::Draw;
        if (is_draw != (wiped || capped)) ++bad;
        if ((r.outcome.result == Result::Victory) != (r.reward == 1) || (r.outcome.result == Result::Defeat) != (r.reward == -1)) ++bad;
        if (is_draw) {
            ++draws;
            (wiped ? wipe_draws : cap_draws)++;
        }
    }
    return {bad == 0, "1000 episodes over " + std::to_string(list.size()) + " scenarios, " + std::to_string(bad) +
                          " contract violations, draws " + std::to_string(draws) + " (" + std::to_string(cap_draws) +
                          " step cap, " + std::to_string(wipe_draws) + " mutual wipe)"};
}

Outcome grid_round_trip() {
    int bad = 0, checked = 0;
    for (Milli side : {32000, 48000}) {
        Arena a{side, side};
        for (int x = 1; x <= kGridSize; ++x)
            for (int y = 1; y <= kGridSize; ++y, ++checked)
                if (!(grid_of(cell_center({x, y}, a), a) == GridCell{x, y})) ++bad;
    }
    return {bad == 0 && checked == 200, std::to_string(checked) + " cells over 32x32 and 48x48 arenas, " + std::to_string(bad) + " mismatches"};
}

Outcome parser_fuzz() {
    std::mt19937_64 rng(2024);
    int round_trip_bad = 0, crashes = 0, untyped = 0;
    static const char* names[] = {"Stimpack", "Blink", "Heal", "SiegeMode", "Unsiege"};
    for (int i = 0; i < 10000; ++i) {
        const Uid u = rng() % 200 + 1;
        Action a;
        switch (rng() % 4) {
            case 0: a = AttackAction{u, static_cast<Uid>(rng() % 200 + 1)}; break;
            case 1: a = MoveGridAction{u, {static_cast<int>(rng() % 10) + 1, static_cast<int>(rng() % 10) + 1}}; break;
            case 2: a = MoveDirAction{u, static_cast<Direction>(rng() % 4)}; break;
            default: {
                AbilityAction ab{u, names[rng() % 5], {}};
                if (rng() % 3 == 0) ab.target = static_cast<Uid>(rng() % 200 + 1);
                else if (rng() % 2 == 0) ab.target = GridCell{static_cast<int>(rng() % 10) + 1, static_cast<int>(rng() % 10) + 1};
                a = ab;
            }
        }
        const auto p = parse_action_line(format_action(a));
        if (!p.action || !(*p.action == a)) ++round_trip_bad;
    }
    static const std::string alphabet = "AttackMoveAbilityUPDOWNLEFTRIGHT0123456789 -+.,()\t\n\r#@!xyz";
    for (int i = 0; i < 10000; ++i) {
        std::string line;
        const std::size_t len = rng() % 40;
        for (std::size_t k = 0; k < len; ++k)
            line += rng() % 8 == 0 ? static_cast<char>(rng() % 256) : alphabet[rng() % alphabet.size()];
        try {
            const auto p = parse_action_line(line);
            if (!p.action && !p.error) ++untyped;
            if (p.action && !(*parse_action_line(format_action(*p.action)).action == *p.action)) ++round_trip_bad;
        } catch (...) {
            ++crashes;
        }
    }
    return {round_trip_bad == 0 && crashes == 0 && untyped == 0,
            "10000 valid lines round-trip (" + std::to_string(round_trip_bad) + " failures), 10000 arbitrary lines: " +
                std::to_string(crashes) + " crashes, " + std::to_string(untyped) + " untyped rejections"};
}

Outcome golden_replay() {
    auto rec = RecordedBackend::from_transcript(data_dir() / "transcripts" / "mixed_units_golden.jsonl");
    EpisodeOptions opt;
    opt.max_steps = 10;
    const auto run = run_episode(assets(), "mixed_units", 42, rec.get(), nullptr, opt);
    std::ifstream in(data_dir() / "transcripts" / "mixed_units_golden.actions.json");
    const auto expected = json::parse(in)["actions"];
    int mismatched = 0;
    for (std::size_t i = 0; i < 10; ++i)
        if (i >= run.p1_actions.size() || format_actions(run.p1_actions[i]) != expected[i].get<std::vector<std::string>>()) ++mismatched;
    // The step-0 LaTeX-format outputs must parse without fallback.
    const bool parsed = run.transcript.count(RecordKind::Parse) == 0 && !run.p1_actions.empty() &&
                        format_actions(run.p1_actions[0]).front() == "Attack 1 7";
    return {!run.error && mismatched == 0 && parsed && rec->remaining() == 0,
            "10 steps, " + std::to_string(mismatched) + " mismatched action sets, plan/priority blocks parsed " +
                (parsed ? "cleanly" : "with fallbacks")};
}

Outcome ablation_gating() {
    RunConfig c;
    c.scenarios = {"mixed_units"};
    c.episodes = 3;
    c.max_steps = 40;
    const auto report = cmd_ablate(assets(), c, ablation_rows());
    bool ok = report.rows.size() == 8;
    std::ostringstream os;
    for (const auto& r : report.rows) {
        const auto& a = r.ablation;
        ok = ok && r.gating_ok && (a.mpi_enabled == (r.analyze_calls > 0)) && (a.role_enabled == (r.role_calls > 0)) &&
             ((a.rag_enabled && a.mpi_enabled) == (r.retrievals > 0));
        for (const auto& row : r.report.rows) ok = ok && row.errors == 0;
        os << ablation_code(a) << "(A" << r.analyze_calls << ",K" << r.retrievals << ",R" << r.role_calls << ") ";
    }
    return {ok, std::to_string(report.rows.size()) + " rows " + os.str()};
}

Outcome tactic_dominance() {
    PvpConfig c;
    c.scenario = "3m";
    c.backend_a = "scripted:focus_fire";
    c.backend_b = "scripted:random_target";
    c.matches = 200;
    const auto t0 = Clock::now();
    const auto r = cmd_pvp(assets(), c);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const double rate = static_cast<double>(r.a_wins) / r.matches;
    return {rate >= 0.70 && secs < 60.0 && r.errors == 0,
            "focus-fire " + r.cell() + " (" + std::to_string(rate * 100).substr(0, 5) + "% of 200, draws " +
                std::to_string(r.draws) + ") in " + std::to_string(secs).substr(0, 5) + "s"};
}

Outcome knowledge_fidelity() {
    const auto& e = assets().knowledge.retrieve("Marine");
    bool has = true;
    for (const char* c : {"Hydralisk", "Immortal", "Marauder"})
        has = has && std::find(e.strong_against.begin(), e.strong_against.end(), c) != e.strong_against.end();
    const bool dps = e.specifications.dps == 9.8;
    return {has && dps, "Marine dps " + std::to_string(e.specifications.dps).substr(0, 4) + ", strong_against " +
                            json(e.strong_against).dump()};
}

class LineClient {
public:
    explicit LineClient(std::uint16_t port) : socket_(io_) { socket_.connect({boost::asio::ip::make_address("127.0.0.1"), port}); }
    json call(const json& j) {
        boost::asio::write(socket_, boost::asio::buffer(j.dump() + "\n"));
        const std::size_t n = boost::asio::read_until(socket_, buf_, '\n');
        std::string line(boost::asio::buffers_begin(buf_.data()), boost::asio::buffers_begin(buf_.data()) + static_cast<std::ptrdiff_t>(n));
        buf_.consume(n);
        return json::parse(line);
    }

private:
    boost::asio::io_context io_;
    boost::asio::ip::tcp::socket socket_;
    boost::asio::streambuf buf_;
};

Outcome server_fidelity() {
    SessionManager manager(assets().units, assets().scenarios, {});
    Server server(manager, 0);
    std::thread runner([&] { server.run(); });
    struct Stop {
        Server& s;
        std::thread& t;
        ~Stop() {
            s.stop();
            t.join();
        }
    } stop{server, runner};

    LineClient client(server.port());
    const auto created = client.call({{"op", "create"}, {"scenario", "3m"}, {"seed", 42}, {"mode", "PvE"}, {"team", "P1"}});
    const auto id = created.at("session_id");
    auto local = instantiate(assets().scenarios.get("3m"), assets().units, 42);
    auto resp = client.call({{"op", "reset"}, {"session_id", id}});
    int compared = 0, diffs = 0, resets = 0;
    auto compare = [&] {
        const auto expect = observe(local, Team::P1);
        const auto got = decode_observation(resp.at("observation"));
        ++compared;
        if (got.text != expect.text || !got.image || !(*got.image == *expect.image) ||
            encode_observation(got, false) != encode_observation(expect, false))
            ++diffs;
    };
    compare();
    for (int i = 0; i < 50; ++i) {
        // Fixed script: cycle attack, grid move and direction move lines.
        std::vector<std::string> lines;
        const Uid u = 1 + i % 3;
        if (i % 3 == 0) lines = {"Attack " + std::to_string(u) + " " + std::to_string(4 + i % 3)};
        else if (i % 3 == 1) lines = {"Move " + std::to_string(u) + " " + std::to_string(1 + i % 10) + " 6"};
        else lines = {"Move " + std::to_string(u) + " LEFT", "Attack 3 5"};
        ActionSet mine;
        for (const auto& l : lines) mine.push_back(*parse_action_line(l).action);
        apply_step(local, mine, builtin_opponent(local, Team::P2));
        resp = client.call({{"op", "step"}, {"session_id", id}, {"team", "P1"}, {"actions", lines}});
        if (resp.value("ok", false) != true) return {false, "step failed: " + resp.dump()};
        compare();
        // A finished battle restarts on both sides so the script runs all 50 steps.
        if (check_termination(local).done()) {
            local = instantiate(assets().scenarios.get("3m"), assets().units, 42);
            resp = client.call({{"op", "reset"}, {"session_id", id}});
            ++resets;
            compare();
        }
    }
    // PvP barrier: only P1 submits; the default 2 s deadline must apply the step.
    const auto pvp = client.call({{"op", "create"}, {"scenario", "mixed_units_pvp"}, {"seed", 1}, {"mode", "PvP"}});
    const auto t0 = Clock::now();
    const auto stepped = client.call({{"op", "step"}, {"session_id", pvp.at("session_id")}, {"team", "P1"}, {"actions", json::array()}, {"include_image", false}});
    const double waited = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool barrier = stepped.value("ok", false) && stepped.at("decision_step") == 1 && waited < 2.5;
    return {diffs == 0 && compared >= 51 && barrier,
            "50 scripted steps (" + std::to_string(resets) + " resets), " + std::to_string(compared) + " observations compared, " + std::to_string(diffs) + " differ; PvP silent-side step applied after " +
                std::to_string(waited).substr(0, 4) + "s"};
}

Outcome scenario_coverage() {
    const auto list = assets().scenarios.list();
    int ok = 0, total = 0;
    std::string failures_detail;
    for (const auto& s : list)
        for (std::uint64_t seed = 0; seed < 20; ++seed, ++total) {
            try {
                const auto run = run_episode(assets(), s.id, seed, nullptr, nullptr, {});
                if (run.outcome.done() && !run.error) ++ok;
                else failures_detail += " " + s.id + "/" + std::to_string(seed);
            } catch (const std::exception& e) {
                failures_detail += " " + s.id + "/" + std::to_string(seed) + "(" + e.what() + ")";
            }
        }
    return {ok == total && list.size() == 13,
            std::to_string(list.size()) + " scenarios x 20 seeds, " + std::to_string(ok) + "/" + std::to_string(total) + " completed" + failures_detail};
}

}  // namespace

int main() {
    report("determinism", determinism);
    report("conservation", conservation);
    report("reward-termination", reward_termination);
    report("grid-round-trip", grid_round_trip);
    report("parser-fuzz", parser_fuzz);
    report("golden-pipeline-replay", golden_replay);
    report("ablation-gating", ablation_gating);
    report("tactic-dominance", tactic_dominance);
    report("knowledge-fidelity", knowledge_fidelity);
    report("server-fidelity", server_fidelity);
    report("scenario-coverage", scenario_coverage);
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
