#include "avacraft/harness.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "avacraft/error.hpp"
#include "avacraft/png.hpp"

namespace ava {

using nlohmann::json;

namespace {

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
    };
    const unsigned w = worker_count(workers, n);
    if (w <= 1) {
        loop();
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
}

void check_backend(const std::string& spec, bool allow_builtin) {
    if (allow_builtin && spec == "builtin") return;
    validate_backend_spec(spec);
}

std::unique_ptr<DecisionBackend> backend_for(const std::string& spec, std::uint64_t seed, bool dry_run) {
    if (spec == "builtin") return nullptr;
    return make_backend(spec, seed, dry_run);
}

std::string fixed1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right = false, std::size_t display = std::string::npos) {
    const std::size_t len = display == std::string::npos ? s.size() : display;
    if (len >= width) return s;
    const std::string fill(width - len, ' ');
    return right ? fill + s : s + fill;
}

EpisodeResult summarize(const std::string& scenario, std::uint64_t seed, const EpisodeRun& run) {
    EpisodeResult r;
    r.scenario = scenario;
    r.seed = seed;
    r.outcome = run.error ? Result::Ongoing : run.outcome.result;
    r.steps = run.steps;
    r.reward = run.reward;
    r.transcript_digest = run.transcript.digest();
    r.replay_digest = run.replay.digest();
    r.error = run.error;
    r.analyze_calls = run.transcript.count(RecordKind::Call, Stage::Analyze);
    r.role_calls = run.transcript.count(RecordKind::Call, Stage::Role);
    r.retrievals = run.transcript.count(RecordKind::Retrieve);
    return r;
}

void save(EpisodeResult& r, const EpisodeRun& run, const std::filesystem::path& dir) {
    const std::string stem = r.scenario + "_" + std::to_string(r.seed) + (r.swapped ? "_swapped" : "");
    run.replay.write(dir / (stem + ".replay.jsonl"));
    run.transcript.write(dir / (stem + ".transcript.jsonl"));
    r.replay_path = (dir / (stem + ".replay.jsonl")).string();
}

json episode_json(const EpisodeResult& r) {
    json j{{"scenario", r.scenario},
           {"seed", r.seed},
           {"outcome", r.error ? "Error" : std::string(to_string(r.outcome))},
           {"steps", r.steps},
           {"reward", r.reward},
           {"transcript_digest", r.transcript_digest},
           {"replay_digest", r.replay_digest}};
    if (!r.replay_path.empty()) j["replay_path"] = r.replay_path;
    if (r.error) j["error"] = *r.error;
    if (r.swapped) j["swapped"] = true;
    return j;
}

json ablation_json(const AblationConfig& a) {
    return {{"role", a.role_enabled}, {"mpi", a.mpi_enabled}, {"rag", a.rag_enabled}, {"code", ablation_code(a)}};
}

void tally(ScenarioRow& row) {
    row.episodes = static_cast<int>(row.results.size());
    for (const auto& r : row.results) {
        if (r.error) ++row.errors;
        else if (r.outcome == Result::Victory) ++row.wins;
        else if (r.outcome == Result::Defeat) ++row.losses;
        else ++row.draws;
    }
    row.win_rate = row.episodes == 0 ? 0.0 : static_cast<double>(row.wins) / row.episodes;
}

}  // namespace

WinRateReport cmd_run(const Assets& assets, const RunConfig& config) {
    if (config.scenarios.empty()) throw ConfigError("no scenarios selected");
    if (config.episodes <= 0) throw ConfigError("episodes must be positive");
    if (config.max_steps <= 0 || config.max_steps > kMaxDecisionSteps) throw ConfigError("max_steps must be in 1..600");
    for (const auto& s : config.scenarios) assets.scenarios.get(s);
    check_backend(config.backend, true);
    check_backend(config.opponent, true);
    validate(config.pipeline.render);
    if (config.replay_dir) std::filesystem::create_directories(*config.replay_dir);

    WinRateReport report;
    report.backend = config.backend;
    report.opponent = config.opponent;
    report.ablation = config.pipeline.ablation;
    report.seed = config.seed;
    report.episodes = config.episodes;

    const std::size_t per = static_cast<std::size_t>(config.episodes);
    std::vector<EpisodeResult> results(config.scenarios.size() * per);
    parallel_for(results.size(), config.workers, [&](std::size_t i) {
        const auto& scenario = config.scenarios[i / per];
        const std::uint64_t seed = config.seed + i % per;
        EpisodeResult r;
        try {
            auto p1 = backend_for(config.backend, seed, config.dry_run);
            auto p2 = backend_for(config.opponent, seed, config.dry_run);
            EpisodeOptions opt;
            opt.pipeline = config.pipeline;
            opt.max_steps = config.max_steps;
            opt.p1_name = config.backend;
            opt.p2_name = config.opponent;
            const auto run = run_episode(assets, scenario, seed, p1.get(), p2.get(), opt);
            r = summarize(scenario, seed, run);
            if (config.replay_dir) save(r, run, *config.replay_dir);
        } catch (const std::exception& e) {
            r.scenario = scenario;
            r.seed = seed;
            r.error = e.what();
        }
        results[i] = std::move(r);
    });

    double sum = 0;
    for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
        ScenarioRow row;
        row.scenario = config.scenarios[s];
        row.results.assign(std::make_move_iterator(results.begin() + static_cast<std::ptrdiff_t>(s * per)),
                           std::make_move_iterator(results.begin() + static_cast<std::ptrdiff_t>((s + 1) * per)));
        tally(row);
        sum += row.win_rate;
        report.rows.push_back(std::move(row));
    }
    report.average = sum / static_cast<double>(report.rows.size());
    return report;
}

json WinRateReport::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows) {
        json eps = json::array();
        for (const auto& e : r.results) eps.push_back(episode_json(e));
        rows_j.push_back({{"scenario", r.scenario},
                          {"episodes", r.episodes},
                          {"wins", r.wins},
                          {"losses", r.losses},
                          {"draws", r.draws},
                          {"errors", r.errors},
                          {"win_rate", r.win_rate},
                          {"results", eps}});
    }
    return {{"report", "win_rate"},
            {"config", {{"backend", backend}, {"opponent", opponent}, {"ablation", ablation_json(ablation)}, {"seed", seed}, {"episodes", episodes}}},
            {"scenarios", rows_j},
            {"average_win_rate", average}};
}

std::string WinRateReport::to_text() const {
    std::ostringstream os;
    os << "Win rates: " << backend << " vs " << opponent << " (RMG " << ablation_code(ablation) << ", seeds " << seed << ".."
       << seed + static_cast<std::uint64_t>(episodes) - 1 << ")\n";
    std::size_t w = 8;
    for (const auto& r : rows) w = std::max(w, r.scenario.size());
    os << pad("Scenario", w + 2) << "Episodes  Wins  Losses  Draws  Errors  Win Rate (%)\n";
    for (const auto& r : rows)
        os << pad(r.scenario, w + 2) << pad(std::to_string(r.episodes), 8, true) << pad(std::to_string(r.wins), 6, true)
           << pad(std::to_string(r.losses), 8, true) << pad(std::to_string(r.draws), 7, true)
           << pad(std::to_string(r.errors), 8, true) << pad(fixed1(r.win_rate * 100), 14, true) << '\n';
    os << pad("Average", w + 2) << pad(fixed1(average * 100), 51, true) << '\n';
    return os.str();
}

AblationReport cmd_ablate(const Assets& assets, const RunConfig& config, const std::vector<AblationConfig>& rows) {
    if (rows.empty()) throw ConfigError("no ablation rows selected");
    AblationReport out;
    out.scenario = config.scenarios.empty() ? "" : config.scenarios.front();
    out.backend = config.backend;
    for (const auto& a : rows) {
        RunConfig c = config;
        c.pipeline.ablation = a;
        if (config.replay_dir) c.replay_dir = *config.replay_dir / ablation_code(a);
        AblationRow row;
        row.ablation = a;
        row.report = cmd_run(assets, c);
        for (const auto& sr : row.report.rows)
            for (const auto& e : sr.results) {
                row.analyze_calls += e.analyze_calls;
                row.role_calls += e.role_calls;
                row.retrievals += e.retrievals;
            }
        row.gating_ok = (a.mpi_enabled || row.analyze_calls == 0) && (a.rag_enabled || row.retrievals == 0) &&
                        (a.role_enabled || row.role_calls == 0);
        out.rows.push_back(std::move(row));
    }
    return out;
}

json AblationReport::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"ablation", ablation_json(r.ablation)},
                          {"win_rate", r.report.average},
                          {"analyze_calls", r.analyze_calls},
                          {"retrievals", r.retrievals},
                          {"role_calls", r.role_calls},
                          {"gating_ok", r.gating_ok},
                          {"report", r.report.to_json()}});
    return {{"report", "ablation"}, {"scenario", scenario}, {"backend", backend}, {"rows", rows_j}};
}

std::string AblationReport::to_text() const {
    std::ostringstream os;
    os << "Ablation: " << backend << " on " << scenario;
    if (!rows.empty()) os << ", " << rows.front().report.episodes << " episodes per row";
    os << '\n';
    os << "Role  MPI  RAG  Win Rate (%)  Analyze  Retrieve  RoleCalls  Gating\n";
    auto mark = [](bool on) { return on ? std::string(" ✓   ") : std::string(" -   "); };
    for (const auto& r : rows)
        os << mark(r.ablation.role_enabled) << mark(r.ablation.mpi_enabled) << mark(r.ablation.rag_enabled)
           << pad(fixed1(r.report.average * 100), 13, true) << pad(std::to_string(r.analyze_calls), 9, true)
           << pad(std::to_string(r.retrievals), 10, true) << pad(std::to_string(r.role_calls), 11, true)
           << (r.gating_ok ? "  ok" : "  VIOLATED") << '\n';
    return os.str();
}

PvpReport cmd_pvp(const Assets& assets, const PvpConfig& config) {
    if (config.matches <= 0) throw ConfigError("matches must be positive");
    if (config.max_steps <= 0 || config.max_steps > kMaxDecisionSteps) throw ConfigError("max_steps must be in 1..600");
    assets.scenarios.get(config.scenario);
    check_backend(config.backend_a, false);
    check_backend(config.backend_b, false);
    validate(config.pipeline.render);

    PvpReport report;
    report.scenario = config.scenario;
    report.backend_a = config.backend_a;
    report.backend_b = config.backend_b;
    report.matches = config.matches;
    report.results.resize(static_cast<std::size_t>(config.matches));

    parallel_for(report.results.size(), config.workers, [&](std::size_t i) {
        const std::uint64_t seed = config.seed + i / 2;
        const bool swapped = i % 2 == 1;
        EpisodeResult r;
        try {
            auto a = make_backend(config.backend_a, seed, config.dry_run);
            auto b = make_backend(config.backend_b, seed, config.dry_run);
            EpisodeOptions opt;
            opt.pipeline = config.pipeline;
            opt.max_steps = config.max_steps;
            opt.p1_name = swapped ? config.backend_b : config.backend_a;
            opt.p2_name = swapped ? config.backend_a : config.backend_b;
            const auto run = swapped ? run_episode(assets, config.scenario, seed, b.get(), a.get(), opt)
                                     : run_episode(assets, config.scenario, seed, a.get(), b.get(), opt);
            r = summarize(config.scenario, seed, run);
        } catch (const std::exception& e) {
            r.scenario = config.scenario;
            r.seed = seed;
            r.error = e.what();
        }
        r.swapped = swapped;
        report.results[i] = std::move(r);
    });

    for (const auto& r : report.results) {
        if (r.error) {
            ++report.errors;
            continue;
        }
        // Outcomes are recorded from P1's side.
        const bool a_is_p1 = !r.swapped;
        if (r.outcome == Result::Victory) ++(a_is_p1 ? report.a_wins : report.b_wins);
        else if (r.outcome == Result::Defeat) ++(a_is_p1 ? report.b_wins : report.a_wins);
        else ++report.draws;
    }
    return report;
}

std::string PvpReport::cell() const { return std::to_string(a_wins) + ":" + std::to_string(b_wins); }

json PvpReport::to_json() const {
    json eps = json::array();
    for (const auto& e : results) eps.push_back(episode_json(e));
    return {{"report", "pvp"},
            {"scenario", scenario},
            {"backend_a", backend_a},
            {"backend_b", backend_b},
            {"matches", matches},
            {"a_wins", a_wins},
            {"b_wins", b_wins},
            {"draws", draws},
            {"errors", errors},
            {"record", cell()},
            {"results", eps}};
}

std::string PvpReport::to_text() const {
    std::ostringstream os;
    os << "Head-to-head on " << scenario << ", " << matches << " matches (sides alternate)\n";
    const std::string a = "A: " + backend_a, b = "B: " + backend_b;
    const std::size_t w = std::max(a.size(), b.size()) + 2;
    os << pad("Model", w) << pad("A", 8) << "B\n";
    os << pad(a, w) << pad("--", 8) << cell() << '\n';
    os << pad(b, w) << pad(std::to_string(b_wins) + ":" + std::to_string(a_wins), 8) << "--\n";
    os << "Draws: " << draws << "  Errors: " << errors << '\n';
    return os.str();
}

ReplayExport cmd_replay(const Assets& assets, const std::filesystem::path& replay_path, const std::filesystem::path& frames_dir,
                        const RenderConfig& render) {
    validate(render);
    const Replay replay = read_replay(replay_path);
    std::filesystem::create_directories(frames_dir);
    ReplayExport out;
    resimulate(assets, replay, [&](const BattleState& state, const ReplayStep* step) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04zu.png", out.frames);
        write_png(frames_dir / name, render_frame(state, render));
        ++out.frames;
        if (step == nullptr) return;
        std::ostringstream line;
        line << "step " << step->step << " digest " << step->digest << " reward " << step->reward
             << (step->done ? " done" : "") << " | P1:";
        for (const auto& l : step->p1) line << ' ' << l << ';';
        line << " | P2:";
        for (const auto& l : step->p2) line << ' ' << l << ';';
        if (!step->rejections.empty()) {
            line << " | rejected:";
            for (const auto& r : step->rejections) line << ' ' << to_string(r.team) << ' ' << r.action << " (" << r.reason << ");";
        }
        out.step_log.push_back(line.str());
    });
    std::ofstream log(frames_dir / "steps.log");
    for (const auto& l : out.step_log) log << l << '\n';
    return out;
}

}  // namespace ava
