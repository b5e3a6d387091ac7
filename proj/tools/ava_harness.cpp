// Batch evaluation and operations front end: run, ablate, pvp, replay, serve, list.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "avacraft/error.hpp"
#include "avacraft/harness.hpp"
#include "avacraft/paths.hpp"
#include "avacraft/server.hpp"

namespace {

using namespace ava;

struct Common {
    std::string data_dir;
    unsigned workers = 0;
    int frame_size = 512;
};

struct PipelineFlags {
    bool no_role = false;
    bool no_mpi = false;
    bool no_rag = false;
    bool separate_synthesize = false;
    std::size_t history = 5;
    std::size_t max_context = kDefaultMaxContextChars;

    void add(CLI::App* app) {
        app->add_flag("--no-role", no_role, "Disable role assignment");
        app->add_flag("--no-mpi", no_mpi, "Disable priority inference");
        app->add_flag("--no-rag", no_rag, "Disable knowledge retrieval");
        app->add_flag("--separate-synthesize", separate_synthesize, "Call the synthesize stage separately");
        app->add_option("--history", history, "History buffer size")->capture_default_str();
        app->add_option("--max-context", max_context, "Knowledge context budget in characters")->capture_default_str();
    }
    PipelineConfig build(int frame_size) const {
        PipelineConfig p;
        p.ablation = {!no_role, !no_mpi, !no_rag};
        p.history_capacity = history;
        p.max_context_chars = max_context;
        p.separate_synthesize_stage = separate_synthesize;
        p.render.height = p.render.width = frame_size;
        return p;
    }
};

Assets load_assets(const Common& c) { return Assets::load(c.data_dir.empty() ? data_dir() : std::filesystem::path(c.data_dir)); }

std::vector<std::string> scenario_list(const Assets& assets, const std::vector<std::string>& requested) {
    std::vector<std::string> out;
    for (const auto& r : requested) {
        if (r == "all") {
            for (const auto& s : assets.scenarios.list()) out.push_back(s.id);
        } else {
            out.push_back(r);
        }
    }
    return out;
}

void emit(const std::string& text, const nlohmann::json& j, const std::string& out) {
    std::cout << text;
    if (out.empty()) return;
    std::filesystem::path json_path(out), text_path(out);
    json_path.replace_extension(".json");
    text_path.replace_extension(".txt");
    if (json_path.has_parent_path()) std::filesystem::create_directories(json_path.parent_path());
    std::ofstream(json_path) << j.dump(2) << '\n';
    std::ofstream(text_path) << text;
    std::cerr << "wrote " << json_path.string() << " and " << text_path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AVACraft evaluation harness"};
    app.set_config("--config", "", "TOML/INI config file; command-line flags win");
    app.require_subcommand(1);
    Common common;
    app.add_option("--data-dir", common.data_dir, "Directory with units.json, scenarios/, knowledge/, prompts/");
    app.add_option("--workers", common.workers, "Worker threads (0 = all cores)");
    app.add_option("--frame-size", common.frame_size, "Rendered frame height and width")->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "Win-rate run against an opponent");
    std::vector<std::string> run_scenarios{"3m"};
    RunConfig rc;
    PipelineFlags run_pf;
    std::string run_out, run_replays;
    run->add_option("--scenario", run_scenarios, "Scenario id(s) or 'all'")->delimiter(',')->capture_default_str();
    run->add_option("--backend", rc.backend, "scripted:<policy> | recorded:<path> | remote:<model>")->capture_default_str();
    run->add_option("--opponent", rc.opponent, "Backend spec or 'builtin'")->capture_default_str();
    run->add_option("--episodes", rc.episodes, "Episodes per scenario")->capture_default_str();
    run->add_option("--seed", rc.seed, "First seed; episode i uses seed + i")->capture_default_str();
    run->add_option("--max-steps", rc.max_steps, "Decision step cap")->capture_default_str();
    run->add_option("--out", run_out, "Write <out>.json and <out>.txt");
    run->add_option("--replay-dir", run_replays, "Save replay and transcript files here");
    run->add_flag("--dry-run", rc.dry_run, "Print remote prompts instead of sending them");
    run_pf.add(run);

    // ablate
    auto* ablate = app.add_subcommand("ablate", "Ablation sweep over Role/MPI/RAG toggles");
    RunConfig ac;
    std::string ablate_scenario = "mixed_units", ablate_out, ablate_replays;
    PipelineFlags ablate_pf;
    bool grid = false;
    ablate->add_option("--scenario", ablate_scenario, "Scenario id")->capture_default_str();
    ablate->add_option("--backend", ac.backend, "Backend spec")->capture_default_str();
    ablate->add_option("--opponent", ac.opponent, "Backend spec or 'builtin'")->capture_default_str();
    ablate->add_option("--episodes", ac.episodes, "Episodes per row")->capture_default_str();
    ablate->add_option("--seed", ac.seed, "First seed")->capture_default_str();
    ablate->add_option("--max-steps", ac.max_steps, "Decision step cap")->capture_default_str();
    ablate->add_option("--out", ablate_out, "Write <out>.json and <out>.txt");
    ablate->add_option("--replay-dir", ablate_replays, "Save replay and transcript files here");
    ablate->add_flag("--grid", grid, "Run all eight toggle rows");
    ablate->add_flag("--dry-run", ac.dry_run, "Print remote prompts instead of sending them");
    ablate_pf.add(ablate);

    // pvp
    auto* pvp = app.add_subcommand("pvp", "Head-to-head matches with side alternation");
    PvpConfig pc;
    pc.scenario = "mixed_units_pvp";
    PipelineFlags pvp_pf;
    std::string pvp_out;
    pvp->add_option("--scenario", pc.scenario, "Scenario id")->capture_default_str();
    pvp->add_option("--backend-a", pc.backend_a, "Backend spec for A")->required();
    pvp->add_option("--backend-b", pc.backend_b, "Backend spec for B")->required();
    pvp->add_option("--matches", pc.matches, "Matches; sides swap every match")->capture_default_str();
    pvp->add_option("--seed", pc.seed, "First seed; side-swap pairs share a seed")->capture_default_str();
    pvp->add_option("--max-steps", pc.max_steps, "Decision step cap")->capture_default_str();
    pvp->add_option("--out", pvp_out, "Write <out>.json and <out>.txt");
    pvp->add_flag("--dry-run", pc.dry_run, "Print remote prompts instead of sending them");
    pvp_pf.add(pvp);

    // replay
    auto* replay = app.add_subcommand("replay", "Re-simulate a replay and export frames");
    std::string replay_in, replay_frames = "frames";
    replay->add_option("--in", replay_in, "Replay file (.jsonl)")->required();
    replay->add_option("--frames", replay_frames, "Output directory for PNG frames and steps.log")->capture_default_str();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the environment server");
    int port = 7777;
    std::string host = "127.0.0.1";
    int deadline_ms = 2000;
    serve->add_option("--port", port, "TCP port")->capture_default_str()->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Listen address")->capture_default_str();
    serve->add_option("--deadline-ms", deadline_ms, "PvP step deadline")->capture_default_str()->check(CLI::PositiveNumber);

    // list
    auto* list = app.add_subcommand("list", "List bundled scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        const Assets assets = load_assets(common);
        if (run->parsed()) {
            rc.scenarios = scenario_list(assets, run_scenarios);
            rc.pipeline = run_pf.build(common.frame_size);
            rc.workers = common.workers;
            if (!run_replays.empty()) rc.replay_dir = run_replays;
            const auto report = cmd_run(assets, rc);
            emit(report.to_text(), report.to_json(), run_out);
        } else if (ablate->parsed()) {
            ac.scenarios = {ablate_scenario};
            ac.pipeline = ablate_pf.build(common.frame_size);
            ac.workers = common.workers;
            if (!ablate_replays.empty()) ac.replay_dir = ablate_replays;
            const auto rows = grid ? ablation_rows() : std::vector<AblationConfig>{ac.pipeline.ablation};
            const auto report = cmd_ablate(assets, ac, rows);
            emit(report.to_text(), report.to_json(), ablate_out);
            for (const auto& r : report.rows)
                if (!r.gating_ok) return 1;
        } else if (pvp->parsed()) {
            pc.pipeline = pvp_pf.build(common.frame_size);
            pc.workers = common.workers;
            const auto report = cmd_pvp(assets, pc);
            emit(report.to_text(), report.to_json(), pvp_out);
        } else if (replay->parsed()) {
            RenderConfig render;
            render.height = render.width = common.frame_size;
            const auto ex = cmd_replay(assets, replay_in, replay_frames, render);
            for (const auto& l : ex.step_log) std::cout << l << '\n';
            std::cout << ex.frames << " frames written to " << replay_frames << '\n';
        } else if (serve->parsed()) {
            ServerConfig sc;
            sc.render.height = sc.render.width = common.frame_size;
            sc.step_deadline = std::chrono::milliseconds(deadline_ms);
            SessionManager manager(assets.units, assets.scenarios, sc);
            Server server(manager, static_cast<std::uint16_t>(port), host);
            std::cout << "listening on " << host << ':' << server.port() << std::endl;
            server.run(true);
            std::cout << "stopped" << std::endl;
        } else if (list->parsed()) {
            for (const auto& s : assets.scenarios.list())
                std::cout << s.id << "  [" << to_string(s.mode) << "]  " << s.description << '\n';
        }
    } catch (const CorruptReplay& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const UnknownScenario& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
