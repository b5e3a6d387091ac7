#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "avacraft/observation.hpp"
#include "avacraft/plans.hpp"

namespace ava {

enum class Stage : std::uint8_t { Plan, Analyze, Role, Act, Synthesize };
std::string_view to_string(Stage s);
std::optional<Stage> stage_from_name(std::string_view s);

/// Structured view of the step, handed to backends that do not read prose.
/// Non-owning; valid only for the duration of one query.
struct DecisionContext {
    const BattleState* state = nullptr;
    Team team = Team::P1;
    const SkillPlan* plan = nullptr;
    const PriorityAssessment* priorities = nullptr;  // null when MPI is off
    const RoleAssignment* roles = nullptr;           // null when roles are off
};

struct PromptBundle {
    Stage stage = Stage::Plan;
    std::string text;
    std::optional<std::vector<std::uint8_t>> image_png;
    std::string context;  // knowledge text, if any
    int attempt = 0;      // 1 on the repair retry
    DecisionContext decision;
};

struct BackendCapabilities {
    bool multimodal = false;
    bool deterministic = false;
};

/// Answers prompt bundles with raw text. Implementations either tolerate
/// concurrent use or are created fresh per episode by the harness.
class DecisionBackend {
public:
    virtual ~DecisionBackend() = default;
    virtual BackendCapabilities capabilities() const = 0;
    /// Throws BackendUnavailable when no answer can be produced.
    virtual std::string query(const PromptBundle& bundle) = 0;
    virtual std::string name() const = 0;
};

enum class ScriptedPolicy : std::uint8_t { FocusFire, RandomTarget, Idle, Random };
std::optional<ScriptedPolicy> scripted_policy_from_name(std::string_view s);
std::string_view to_string(ScriptedPolicy p);

/// Deterministic heuristic backend. Answers are a pure function of the
/// decision context and the seed, so one instance may serve many episodes.
class ScriptedBackend final : public DecisionBackend {
public:
    explicit ScriptedBackend(ScriptedPolicy policy, std::uint64_t seed = 0) : policy_(policy), seed_(seed) {}
    BackendCapabilities capabilities() const override { return {false, true}; }
    std::string query(const PromptBundle& bundle) override;
    std::string name() const override;

private:
    ScriptedPolicy policy_;
    std::uint64_t seed_;
};

/// Role a scripted backend gives each class by default.
Role default_role(const UnitSpec& spec);

/// Action lines the scripted policy would issue. Exposed for tests.
std::vector<std::string> scripted_actions(ScriptedPolicy policy, const DecisionContext& ctx, std::uint64_t seed);

struct RecordedResponse {
    Stage stage = Stage::Plan;
    std::string response;
};

/// Replays responses in order. Throws BackendUnavailable when exhausted and
/// Error when the next record is for a different stage.
class RecordedBackend final : public DecisionBackend {
public:
    explicit RecordedBackend(std::vector<RecordedResponse> responses) : responses_(std::move(responses)) {}
    /// Reads the call records of a transcript file, optionally for one team.
    static std::unique_ptr<RecordedBackend> from_transcript(const std::filesystem::path& path,
                                                           std::optional<Team> team = std::nullopt);
    BackendCapabilities capabilities() const override { return {false, true}; }
    std::string query(const PromptBundle& bundle) override;
    std::string name() const override { return "recorded"; }
    std::size_t remaining() const { return responses_.size() - next_; }

private:
    std::vector<RecordedResponse> responses_;
    std::size_t next_ = 0;
};

struct RemoteProfile {
    std::string url;  // e.g. https://host/v1/chat/completions
    std::string api_key;
    std::string model = "gpt-4-turbo";
    std::chrono::milliseconds timeout{60'000};
    int retries = 2;
    bool dry_run = false;
};

/// Reads AVA_API_URL, AVA_API_KEY and optionally AVA_MODEL.
RemoteProfile remote_profile_from_env(const std::string& model = "");

/// Chat-completion request body for one bundle.
std::string chat_request_body(const RemoteProfile& profile, const PromptBundle& bundle);

/// Extracts choices[0].message.content from a chat-completion response.
std::string chat_response_text(const std::string& body);

/// OpenAI-style chat-completion client. In dry-run mode it prints the
/// assembled request to stderr and answers with an empty string.
class RemoteChatBackend final : public DecisionBackend {
public:
    explicit RemoteChatBackend(RemoteProfile profile) : profile_(std::move(profile)) {}
    BackendCapabilities capabilities() const override { return {true, false}; }
    std::string query(const PromptBundle& bundle) override;
    std::string name() const override { return "remote:" + profile_.model; }

private:
    RemoteProfile profile_;
};

/// "scripted:<policy>", "recorded:<path>[#P1|#P2]" or "remote:<model>".
/// Throws ConfigError for anything else.
std::unique_ptr<DecisionBackend> make_backend(const std::string& spec, std::uint64_t seed = 0, bool dry_run = false);

/// Checks a spec string without constructing anything expensive.
void validate_backend_spec(const std::string& spec);

}  // namespace ava
