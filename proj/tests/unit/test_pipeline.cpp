#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "avacraft/error.hpp"
#include "avacraft/pipeline.hpp"
#include "avacraft/transcript.hpp"
#include "fixtures.hpp"

using namespace ava;

namespace {

const Assets& assets() {
    static const Assets a = Assets::load(data_dir());
    return a;
}

class Stub final : public DecisionBackend {
public:
    using Fn = std::function<std::string(const PromptBundle&)>;
    explicit Stub(Fn fn, bool multimodal = false) : fn_(std::move(fn)), multimodal_(multimodal) {}
    BackendCapabilities capabilities() const override { return {multimodal_, true}; }
    std::string query(const PromptBundle& b) override {
        seen.push_back(b);
        return fn_(b);
    }
    std::string name() const override { return "stub"; }
    std::vector<PromptBundle> seen;

private:
    Fn fn_;
    bool multimodal_;
};

std::size_t parse_outcomes(const Transcript& t, const std::string& outcome) {
    std::size_t n = 0;
    for (const auto& r : t.records)
        if (r.kind == RecordKind::Parse && r.outcome == outcome) ++n;
    return n;
}

}  // namespace

TEST_CASE("ablation rows cover the eight configurations in table order") {
    const auto& rows = ablation_rows();
    REQUIRE(rows.size() == 8);
    std::vector<std::string> codes;
    for (const auto& r : rows) codes.push_back(ablation_code(r));
    CHECK(codes == std::vector<std::string>{"111", "110", "101", "011", "100", "010", "001", "000"});
}

TEST_CASE("history buffer keeps the most recent entries") {
    HistoryBuffer h(2);
    CHECK(h.render().find("no previous") != std::string::npos);
    for (int i = 0; i < 4; ++i) h.push({i, "s", {"Attack(1, 2)"}, 0});
    REQUIRE(h.size() == 2);
    CHECK(h.entries().front().decision_step == 2);
    CHECK(h.render().find("Step 3:") != std::string::npos);
    HistoryBuffer none(0);
    none.push({0, "s", {}, 0});
    CHECK(none.size() == 0);
}

TEST_CASE("stage gating follows the ablation switches") {
    for (const auto& row : ablation_rows()) {
        CAPTURE(ablation_code(row));
        ScriptedBackend backend(ScriptedPolicy::FocusFire, 3);
        Transcript t;
        PipelineConfig cfg;
        cfg.ablation = row;
        AvaAgent agent(assets(), backend, Team::P1, cfg, &t);
        const auto s = fixtures::start("mixed_units", 42);
        const auto d = agent.decide(s);
        CHECK(t.count(RecordKind::Call, Stage::Plan) == 1);
        CHECK(t.count(RecordKind::Call, Stage::Analyze) == (row.mpi_enabled ? 1u : 0u));
        CHECK(t.count(RecordKind::Call, Stage::Role) == (row.role_enabled ? 1u : 0u));
        CHECK(t.count(RecordKind::Call, Stage::Act) == 1);
        CHECK(t.count(RecordKind::Call, Stage::Synthesize) == 0);
        const bool retrieves = row.rag_enabled && row.mpi_enabled;
        CHECK((t.count(RecordKind::Retrieve) > 0) == retrieves);
        CHECK(d.roles.empty() == !row.role_enabled);
        CHECK(d.priorities.empty() == !row.mpi_enabled);

        std::string act_prompt;
        for (const auto& r : t.records)
            if (r.kind == RecordKind::Call && r.stage == Stage::Act) act_prompt = r.prompt;
        CHECK((act_prompt.find("Unit knowledge:") != std::string::npos) == retrieves);
        CHECK((act_prompt.find("Priority targets") != std::string::npos) == row.mpi_enabled);
        CHECK((act_prompt.find("Roles:") != std::string::npos) == row.role_enabled);
        CHECK(!d.actions.empty());
    }
}

TEST_CASE("separate synthesize stage is called only with knowledge") {
    ScriptedBackend backend(ScriptedPolicy::FocusFire, 3);
    Transcript t;
    PipelineConfig cfg;
    cfg.separate_synthesize_stage = true;
    AvaAgent agent(assets(), backend, Team::P1, cfg, &t);
    agent.decide(fixtures::start("mixed_units", 42));
    CHECK(t.count(RecordKind::Call, Stage::Synthesize) == 1);
}

TEST_CASE("plan parse failure retries once then falls back") {
    Stub stub([](const PromptBundle& b) -> std::string {
        if (b.stage == Stage::Plan) return "I think we should attack.";
        return "";
    });
    Transcript t;
    AvaAgent agent(assets(), stub, Team::P1, {}, &t);
    const auto d = agent.decide(fixtures::start("3m", 1));
    CHECK(t.count(RecordKind::Call, Stage::Plan) == 2);
    CHECK(stub.seen[1].attempt == 1);
    CHECK(stub.seen[1].text.find("I think we should attack.") != std::string::npos);
    CHECK(d.plan == default_plan());
    CHECK(parse_outcomes(t, "ParseFallback") == 1);
    // Blank answers from the other stages are not retried.
    CHECK(t.count(RecordKind::Call, Stage::Analyze) == 1);
    CHECK(t.count(RecordKind::Call, Stage::Act) == 1);
    CHECK(parse_outcomes(t, "EmptyAssessment") == 1);
    CHECK(d.actions.empty());
}

TEST_CASE("plan retry success uses the second answer") {
    int plans = 0;
    Stub stub([&](const PromptBundle& b) -> std::string {
        if (b.stage != Stage::Plan) return "";
        return plans++ == 0 ? "nope" : R"({"primary_skill":{"name":"Kite","description":"d","steps":["a"]},"secondary_skills":[]})";
    });
    Transcript t;
    AvaAgent agent(assets(), stub, Team::P1, {}, &t);
    const auto d = agent.decide(fixtures::start("3m", 1));
    CHECK(d.plan.primary_skill.name == "Kite");
    CHECK(parse_outcomes(t, "ParseFallback") == 0);
}

TEST_CASE("analyze output keeps only living enemies") {
    const auto s = fixtures::start("3m", 1);
    Stub stub([](const PromptBundle& b) -> std::string {
        if (b.stage == Stage::Analyze)
            return "Unit: Marine_1 (Tag: 4)\nReason: closest\nUnit: Ghost (Tag: 999)\nReason: ?\nUnit: Marine (Tag: 1)\n"
                   "Reason: friendly\nUnit: Marine_2 (Tag: 5)\nReason: next";
        return "";
    });
    Transcript t;
    AvaAgent agent(assets(), stub, Team::P1, {}, &t);
    const auto d = agent.decide(s);
    REQUIRE(d.priorities.size() == 2);
    CHECK(d.priorities[0].tag == 4);
    CHECK(d.priorities[1].tag == 5);
    CHECK(parse_outcomes(t, "DroppedEntries") == 1);
    CHECK(t.count(RecordKind::Retrieve) == 1);  // one class: Marine
    for (const auto& r : t.records)
        if (r.kind == RecordKind::Retrieve) CHECK(r.class_key == "Marine");
}

TEST_CASE("act stage drops invalid lines and retries when nothing parses") {
    const auto s = fixtures::start("3m", 1);
    int acts = 0;
    Stub stub([&](const PromptBundle& b) -> std::string {
        if (b.stage != Stage::Act) return "";
        ++acts;
        if (acts == 1) return "Attack the marines!";
        return "Attack 1 4\nAttack 1 5\nAttack 4 1\nDance 2";
    });
    Transcript t;
    AvaAgent agent(assets(), stub, Team::P1, {}, &t);
    const auto d = agent.decide(s);
    CHECK(acts == 2);
    REQUIRE(d.actions.size() == 1);
    CHECK(d.lines == std::vector<std::string>{"Attack 1 4"});
    CHECK(parse_outcomes(t, "DroppedLines") == 1);
}

TEST_CASE("unparseable act lines after retry give an empty action set") {
    Stub stub([](const PromptBundle& b) -> std::string { return b.stage == Stage::Act ? "charge" : ""; });
    Transcript t;
    AvaAgent agent(assets(), stub, Team::P1, {}, &t);
    CHECK(agent.decide(fixtures::start("3m", 1)).actions.empty());
    CHECK(parse_outcomes(t, "AllLinesInvalid") == 1);
}

TEST_CASE("images are rendered only for multimodal backends") {
    Stub text_only([](const PromptBundle&) { return std::string(); });
    Stub vision([](const PromptBundle&) { return std::string(); }, true);
    Transcript t1, t2;
    AvaAgent(assets(), text_only, Team::P1, {}, &t1).decide(fixtures::start("3m", 1));
    AvaAgent(assets(), vision, Team::P1, {}, &t2).decide(fixtures::start("3m", 1));
    CHECK(!text_only.seen.front().image_png);
    REQUIRE(vision.seen.front().image_png);
    CHECK(t2.records.front().image_digest == fnv1a_hex({reinterpret_cast<const char*>(vision.seen.front().image_png->data()),
                                                        vision.seen.front().image_png->size()}));
    CHECK(!t1.records.front().image_digest);
}

TEST_CASE("scripted roles default the Medivac to Support") {
    ScriptedBackend backend(ScriptedPolicy::FocusFire, 1);
    AvaAgent agent(assets(), backend, Team::P2, {}, nullptr);
    const auto s = fixtures::start("mixed_units", 42);
    const auto d = agent.decide(s);
    for (const auto& u : s.units) {
        if (u.team != Team::P2) continue;
        REQUIRE(d.roles.count(u.uid) == 1);
        if (u.spec->class_name == "Medivac") CHECK(d.roles.at(u.uid) == Role::Support);
    }
}

TEST_CASE("episodes are deterministic for a fixed seed") {
    ScriptedBackend a(ScriptedPolicy::FocusFire, 9), b(ScriptedPolicy::FocusFire, 9);
    EpisodeOptions opt;
    opt.max_steps = 15;
    const auto r1 = run_episode(assets(), "2s3z", 5, &a, nullptr, opt);
    const auto r2 = run_episode(assets(), "2s3z", 5, &b, nullptr, opt);
    CHECK(r1.transcript.digest() == r2.transcript.digest());
    CHECK(r1.replay.digest() == r2.replay.digest());
    CHECK(r1.steps == r2.steps);
}

TEST_CASE("idle agent loses to the builtin opponent") {
    ScriptedBackend idle(ScriptedPolicy::Idle, 0);
    const auto run = run_episode(assets(), "3m", 1, &idle, nullptr, {});
    CHECK(run.outcome.result == Result::Defeat);
    CHECK(run.reward == -1);
}

TEST_CASE("recorded backend exhaustion ends the episode with an error") {
    RecordedBackend rec({{Stage::Plan, "{}"}});
    const auto run = run_episode(assets(), "3m", 1, &rec, nullptr, {});
    REQUIRE(run.error);
    CHECK(run.steps == 0);
    CHECK(!run.outcome.done());
}

TEST_CASE("recorded transcript reproduces the original episode") {
    const auto dir = std::filesystem::temp_directory_path() / "ava_pipeline_test";
    std::filesystem::create_directories(dir);
    ScriptedBackend live(ScriptedPolicy::FocusFire, 4);
    EpisodeOptions opt;
    opt.max_steps = 8;
    const auto first = run_episode(assets(), "mixed_units", 42, &live, nullptr, opt);
    first.transcript.write(dir / "t.jsonl");
    auto rec = RecordedBackend::from_transcript(dir / "t.jsonl");
    const auto second = run_episode(assets(), "mixed_units", 42, rec.get(), nullptr, opt);
    CHECK(!second.error);
    CHECK(second.replay.digest() == first.replay.digest());
    CHECK(rec->remaining() == 0);
}

TEST_CASE("replays resimulate and detect tampering") {
    ScriptedBackend live(ScriptedPolicy::FocusFire, 4);
    EpisodeOptions opt;
    opt.max_steps = 10;
    const auto run = run_episode(assets(), "mixed_units", 42, &live, nullptr, opt);
    REQUIRE(run.replay.steps.size() == 10);

    const auto dir = std::filesystem::temp_directory_path() / "ava_pipeline_test";
    std::filesystem::create_directories(dir);
    run.replay.write(dir / "r.jsonl");
    const auto back = read_replay(dir / "r.jsonl");
    CHECK(back.digest() == run.replay.digest());

    int states = 0;
    resimulate(assets(), back, [&](const BattleState&, const ReplayStep*) { ++states; });
    CHECK(states == 11);

    auto bad = back;
    bad.steps[3].p1.clear();
    bad.steps[3].p1.push_back("Stop(1)");
    bool threw = false;
    try {
        resimulate(assets(), bad, [](const BattleState&, const ReplayStep*) {});
    } catch (const CorruptReplay& e) {
        threw = true;
        CHECK(e.last_good_step() == 3);
    }
    CHECK(threw);

    // Truncation drops the end marker.
    const auto text = run.replay.to_jsonl();
    const auto cut = text.substr(0, text.rfind("\n", text.rfind("\n", text.size() - 2) - 1) + 1);
    std::ofstream(dir / "cut.jsonl") << cut;
    try {
        read_replay(dir / "cut.jsonl");
        FAIL("expected CorruptReplay");
    } catch (const CorruptReplay& e) {
        CHECK(e.last_good_step() == 9);
    }
}

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("bundled mixed_units transcript reproduces the expected actions") {
    auto rec = RecordedBackend::from_transcript(data_dir() / "transcripts" / "mixed_units_golden.jsonl");
    EpisodeOptions opt;
    opt.max_steps = 10;
    const auto run = run_episode(assets(), "mixed_units", 42, rec.get(), nullptr, opt);
    REQUIRE(!run.error);
    CHECK(rec->remaining() == 0);
    CHECK(run.transcript.count(RecordKind::Parse) == 0);

    const auto expected = nlohmann::json::parse(slurp(data_dir() / "transcripts" / "mixed_units_golden.actions.json"));
    REQUIRE(run.p1_actions.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        CAPTURE(i);
        CHECK(format_actions(run.p1_actions[i]) == expected["actions"][i].get<std::vector<std::string>>());
    }
    // The first step follows the golden priorities: Marine_1 (Tag: 7).
    CHECK(format_actions(run.p1_actions[0]).front() == "Attack 1 7");
}

TEST_CASE("assembled step-0 prompts match the golden files") {
    auto rec = RecordedBackend::from_transcript(data_dir() / "transcripts" / "mixed_units_golden.jsonl");
    Transcript t;
    AvaAgent agent(assets(), *rec, Team::P1, {}, &t);
    const auto d = agent.decide(fixtures::start("mixed_units", 42));
    CHECK(d.plan.primary_skill.name == "Focus Fire");
    REQUIRE(d.priorities.size() == 2);
    CHECK(d.priorities[0].class_label == "Marine_1");
    CHECK(d.priorities[1].tag == 9);
    for (const auto& r : t.records) {
        if (r.kind != RecordKind::Call) continue;
        std::string stage(to_string(r.stage));
        for (auto& c : stage) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        CAPTURE(stage);
        CHECK(r.prompt == slurp(std::filesystem::path(AVACRAFT_TEST_DATA_DIR) / ("prompt_mixed_units_seed42_p1_" + stage + ".txt")));
    }
}
