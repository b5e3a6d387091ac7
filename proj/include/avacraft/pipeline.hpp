#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "avacraft/backend.hpp"
#include "avacraft/knowledge.hpp"
#include "avacraft/observation.hpp"
#include "avacraft/prompts.hpp"
#include "avacraft/scenario.hpp"
#include "avacraft/transcript.hpp"

namespace ava {

struct AblationConfig {
    bool role_enabled = true;
    bool mpi_enabled = true;
    bool rag_enabled = true;
    friend bool operator==(const AblationConfig&, const AblationConfig&) = default;
};

/// "RMG" bits, e.g. "101" = roles on, MPI off, RAG on.
std::string ablation_code(const AblationConfig& a);

/// The eight toggle rows, full system first, in the ablation table order.
const std::vector<AblationConfig>& ablation_rows();

struct PipelineConfig {
    AblationConfig ablation;
    std::size_t history_capacity = 5;
    std::size_t max_context_chars = kDefaultMaxContextChars;
    bool separate_synthesize_stage = false;
    RenderConfig render;
};

struct HistoryEntry {
    int decision_step = 0;
    std::string summary;
    std::vector<std::string> actions;
    int reward = 0;
};

/// Fixed-capacity ring of recent steps, oldest first.
class HistoryBuffer {
public:
    explicit HistoryBuffer(std::size_t capacity = 5) : capacity_(capacity) {}
    void push(HistoryEntry e);
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<HistoryEntry>& entries() const { return entries_; }
    std::string render() const;

private:
    std::size_t capacity_;
    std::deque<HistoryEntry> entries_;
};

/// Read-only data every episode needs.
struct Assets {
    UnitCatalog units;
    ScenarioCatalog scenarios;
    KnowledgeStore knowledge;
    PromptLibrary prompts;

    static Assets load(const std::filesystem::path& data_dir);
};

/// Outcome of one agent decision.
struct Decision {
    ActionSet actions;
    std::vector<std::string> lines;  // canonical form of `actions`
    SkillPlan plan;
    PriorityAssessment priorities;
    RoleAssignment roles;
};

/// One team's AVA pipeline: plan, analyze, retrieve, assign roles, act.
class AvaAgent {
public:
    AvaAgent(const Assets& assets, DecisionBackend& backend, Team team, PipelineConfig config,
             Transcript* transcript = nullptr);

    Decision decide(const BattleState& state);
    /// Appends the step outcome to the history buffer.
    void observe_result(const BattleState& after, const Decision& d, int reward);

    const HistoryBuffer& history() const { return history_; }

private:
    std::string ask(Stage stage, const std::string& prompt, const PromptBundle& base,
                    const std::function<std::optional<std::string>(const std::string&)>& problem_of);
    void record_parse(Stage stage, const std::string& outcome, const std::string& detail);

    const Assets& assets_;
    DecisionBackend& backend_;
    Team team_;
    PipelineConfig config_;
    Transcript* transcript_;
    HistoryBuffer history_;
    int step_ = 0;
};

struct EpisodeRun {
    EpisodeOutcome outcome;
    int reward = 0;
    int steps = 0;
    Transcript transcript;
    Replay replay;
    std::optional<std::string> error;  // backend failure; transcript kept up to that point
    std::vector<ActionSet> p1_actions;
};

struct EpisodeOptions {
    PipelineConfig pipeline;
    int max_steps = kMaxDecisionSteps;
    std::string p1_name = "builtin";
    std::string p2_name = "builtin";
};

/// Runs one battle. A null backend plays the builtin opponent for that side.
EpisodeRun run_episode(const Assets& assets, const std::string& scenario_id, std::uint64_t seed, DecisionBackend* p1,
                       DecisionBackend* p2, const EpisodeOptions& options = {});

/// Re-simulates a replay, checking every digest. Calls `on_state` with the
/// initial state and after each step. Throws CorruptReplay.
void resimulate(const Assets& assets, const Replay& replay,
                const std::function<void(const BattleState&, const ReplayStep*)>& on_state);

}  // namespace ava
