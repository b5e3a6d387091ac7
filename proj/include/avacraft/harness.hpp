#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "avacraft/pipeline.hpp"

namespace ava {

struct EpisodeResult {
    std::string scenario;
    std::uint64_t seed = 0;
    Result outcome = Result::Ongoing;  // Ongoing only when the episode errored
    int steps = 0;
    int reward = 0;
    std::string transcript_digest;
    std::string replay_digest;
    std::string replay_path;
    std::optional<std::string> error;
    bool swapped = false;  // PvP: backend A played P2
    std::size_t analyze_calls = 0;
    std::size_t role_calls = 0;
    std::size_t retrievals = 0;
};

struct RunConfig {
    std::vector<std::string> scenarios;
    std::string backend = "scripted:focus_fire";
    std::string opponent = "builtin";
    int episodes = 20;
    std::uint64_t seed = 0;
    PipelineConfig pipeline;
    int max_steps = 600;
    unsigned workers = 0;  // 0 = hardware concurrency
    bool dry_run = false;
    std::optional<std::filesystem::path> replay_dir;
};

struct ScenarioRow {
    std::string scenario;
    int episodes = 0;
    int wins = 0;
    int losses = 0;
    int draws = 0;
    int errors = 0;
    double win_rate = 0;
    std::vector<EpisodeResult> results;  // ordered by seed
};

struct WinRateReport {
    std::string backend;
    std::string opponent;
    AblationConfig ablation;
    std::uint64_t seed = 0;
    int episodes = 0;
    std::vector<ScenarioRow> rows;
    double average = 0;  // mean of scenario win rates

    nlohmann::json to_json() const;
    std::string to_text() const;
};

struct AblationRow {
    AblationConfig ablation;
    WinRateReport report;
    std::size_t analyze_calls = 0;
    std::size_t role_calls = 0;
    std::size_t retrievals = 0;
    /// Zero Analyze calls with MPI off, zero retrievals with RAG off, zero
    /// Role calls with Role off.
    bool gating_ok = true;
};

struct AblationReport {
    std::string scenario;
    std::string backend;
    std::vector<AblationRow> rows;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

struct PvpConfig {
    std::string scenario;
    std::string backend_a;
    std::string backend_b;
    int matches = 20;
    std::uint64_t seed = 0;
    PipelineConfig pipeline;
    int max_steps = 600;
    unsigned workers = 0;
    bool dry_run = false;
};

struct PvpReport {
    std::string scenario;
    std::string backend_a;
    std::string backend_b;
    int matches = 0;
    int a_wins = 0;
    int b_wins = 0;
    int draws = 0;
    int errors = 0;
    std::vector<EpisodeResult> results;

    /// "a_wins:b_wins", the head-to-head cell format.
    std::string cell() const;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

struct ReplayExport {
    std::size_t frames = 0;
    std::vector<std::string> step_log;
};

/// Runs `episodes` seeds per scenario in a worker pool. Throws on invalid
/// configuration; per-episode backend failures are counted as errors.
WinRateReport cmd_run(const Assets& assets, const RunConfig& config);

/// One report per configuration in `rows`, in the given order.
AblationReport cmd_ablate(const Assets& assets, const RunConfig& config, const std::vector<AblationConfig>& rows);

/// Match i uses seed base + i/2; odd matches swap sides.
PvpReport cmd_pvp(const Assets& assets, const PvpConfig& config);

/// Writes frame_0000.png (initial state) through frame_NNNN.png plus
/// steps.log into `frames_dir`. Throws CorruptReplay.
ReplayExport cmd_replay(const Assets& assets, const std::filesystem::path& replay_path,
                        const std::filesystem::path& frames_dir, const RenderConfig& render = {});

}  // namespace ava
