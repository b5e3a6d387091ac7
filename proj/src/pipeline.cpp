#include "avacraft/pipeline.hpp"

#include <chrono>
#include <sstream>

#include "avacraft/error.hpp"
#include "avacraft/png.hpp"

namespace ava {

namespace {

std::string plan_text(const SkillPlan& plan) {
    std::ostringstream os;
    auto skill = [&](const char* tag, const Skill& s) {
        os << tag << ": " << s.name;
        if (!s.description.empty()) os << " - " << s.description;
        os << '\n';
        for (std::size_t i = 0; i < s.steps.size(); ++i) os << "  " << i + 1 << ". " << s.steps[i] << '\n';
    };
    skill("Primary", plan.primary_skill);
    for (const auto& s : plan.secondary_skills) skill("Secondary", s);
    return os.str();
}

std::string annotations_text(const std::vector<Annotation>& anns) {
    std::ostringstream os;
    for (const auto& a : anns)
        os << "- " << a.class_name << " (Tag: " << a.tag << ") center (" << a.center.x << ", " << a.center.y << ") box ["
           << a.box.x0 << ", " << a.box.y0 << ", " << a.box.x1 << ", " << a.box.y1 << "]\n";
    return os.str();
}

std::string priorities_text(const PriorityAssessment& p) {
    std::ostringstream os;
    for (std::size_t i = 0; i < p.size(); ++i) {
        os << i + 1 << ". " << p[i].class_label << " (Tag: " << p[i].tag << ")";
        if (!p[i].reason.empty()) os << ": " << p[i].reason;
        os << '\n';
    }
    return os.str();
}

std::string roles_text(const RoleAssignment& roles) {
    std::ostringstream os;
    for (const auto& [uid, role] : roles) os << "- Tag " << uid << ": " << to_string(role) << '\n';
    return os.str();
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::vector<Uid> living_uids(const BattleState& s, Team team) {
    std::vector<Uid> out;
    for (const auto& u : s.units)
        if (u.alive && u.team == team) out.push_back(u.uid);
    return out;
}

std::string army_summary(const BattleState& s, Team team) {
    auto side = [&](Team t) {
        Milli hp = 0;
        for (const auto& u : s.units)
            if (u.alive && u.team == t) hp += u.health + u.shields;
        return std::to_string(s.alive_count(t)) + " units, " + format_milli(hp) + " hp";
    };
    return "friendly " + side(team) + "; enemy " + side(opponent(team));
}

}  // namespace

std::string ablation_code(const AblationConfig& a) {
    return std::string(1, a.role_enabled ? '1' : '0') + (a.mpi_enabled ? '1' : '0') + (a.rag_enabled ? '1' : '0');
}

const std::vector<AblationConfig>& ablation_rows() {
    static const std::vector<AblationConfig> rows = {
        {true, true, true},  {true, true, false},  {true, false, true},  {false, true, true},
        {true, false, false}, {false, true, false}, {false, false, true}, {false, false, false},
    };
    return rows;
}

void HistoryBuffer::push(HistoryEntry e) {
    if (capacity_ == 0) return;
    while (entries_.size() >= capacity_) entries_.pop_front();
    entries_.push_back(std::move(e));
}

std::string HistoryBuffer::render() const {
    if (entries_.empty()) return "(no previous steps)\n";
    std::ostringstream os;
    for (const auto& e : entries_) {
        os << "Step " << e.decision_step << ": " << e.summary << "; reward " << e.reward << "; commands: ";
        if (e.actions.empty()) os << "none";
        for (std::size_t i = 0; i < e.actions.size(); ++i) os << (i ? ", " : "") << e.actions[i];
        os << '\n';
    }
    return os.str();
}

Assets Assets::load(const std::filesystem::path& data_dir) {
    auto units = load_unit_specs(data_dir / "units.json");
    auto scenarios = ScenarioCatalog::load(data_dir / "scenarios", units);
    auto knowledge = KnowledgeStore::load(data_dir / "knowledge", units);
    auto prompts = PromptLibrary::load(data_dir / "prompts");
    return Assets{std::move(units), std::move(scenarios), std::move(knowledge), std::move(prompts)};
}

AvaAgent::AvaAgent(const Assets& assets, DecisionBackend& backend, Team team, PipelineConfig config, Transcript* transcript)
    : assets_(assets),
      backend_(backend),
      team_(team),
      config_(std::move(config)),
      transcript_(transcript),
      history_(config_.history_capacity) {}

void AvaAgent::record_parse(Stage stage, const std::string& outcome, const std::string& detail) {
    if (transcript_ == nullptr) return;
    TranscriptRecord r;
    r.kind = RecordKind::Parse;
    r.team = team_;
    r.step = step_;
    r.stage = stage;
    r.outcome = outcome;
    r.detail = detail;
    transcript_->records.push_back(std::move(r));
}

std::string AvaAgent::ask(Stage stage, const std::string& prompt, const PromptBundle& base,
                          const std::function<std::optional<std::string>(const std::string&)>& problem_of) {
    auto call = [&](const std::string& text, int attempt) {
        PromptBundle b = base;
        b.stage = stage;
        b.text = text;
        b.attempt = attempt;
        const auto t0 = std::chrono::steady_clock::now();
        std::string response = backend_.query(b);
        const auto t1 = std::chrono::steady_clock::now();
        if (transcript_ != nullptr) {
            TranscriptRecord r;
            r.kind = RecordKind::Call;
            r.team = team_;
            r.step = step_;
            r.stage = stage;
            r.attempt = attempt;
            r.prompt = text;
            if (b.image_png) r.image_digest = fnv1a_hex({reinterpret_cast<const char*>(b.image_png->data()), b.image_png->size()});
            r.context = b.context;
            r.response = response;
            r.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            transcript_->records.push_back(std::move(r));
        }
        return response;
    };
    std::string response = call(prompt, 0);
    const auto problem = problem_of(response);
    if (!problem) return response;
    const std::string repair = assets_.prompts.render_repair({{"original", prompt}, {"problem", *problem}, {"previous", response}});
    return call(repair, 1);
}

Decision AvaAgent::decide(const BattleState& state) {
    step_ = state.decision_step;
    const bool multimodal = backend_.capabilities().multimodal;
    const Observation obs = observe(state, team_, config_.render, multimodal);

    PromptBundle base;
    if (obs.image) base.image_png = encode_png(*obs.image);
    base.decision.state = &state;
    base.decision.team = team_;

    const std::string team = std::string(to_string(team_));
    const std::string history = history_.render();
    Decision d;

    // Stage 1: skill planning. The plan stage always retries once on failure.
    {
        const auto prompt = assets_.prompts.render(Stage::Plan, {{"team", team}, {"observation", obs.text}, {"history", history}});
        const auto response = ask(Stage::Plan, prompt, base, [](const std::string& r) -> std::optional<std::string> {
            if (parse_skill_plan(r)) return std::nullopt;
            return "no JSON object with primary_skill{name, description, steps}";
        });
        if (auto plan = parse_skill_plan(response)) {
            d.plan = std::move(*plan);
        } else {
            d.plan = default_plan();
            record_parse(Stage::Plan, "ParseFallback", "default Focus Fire plan used");
        }
    }
    base.decision.plan = &d.plan;
    const std::string plan = plan_text(d.plan);

    // Stage 2: annotation and priority inference.
    if (config_.ablation.mpi_enabled && !obs.annotations.empty()) {
        const std::string question = "Given the primary skill \"" + d.plan.primary_skill.name +
                                     "\", which enemy units should be eliminated first, and why?";
        const auto prompt = assets_.prompts.render(Stage::Analyze, {{"team", team},
                                                                    {"observation", obs.text},
                                                                    {"annotations", annotations_text(obs.annotations)},
                                                                    {"history", history},
                                                                    {"plan", plan},
                                                                    {"question", question}});
        const auto response = ask(Stage::Analyze, prompt, base, [](const std::string& r) -> std::optional<std::string> {
            if (blank(r) || !parse_priorities(r).empty()) return std::nullopt;
            return "no 'Unit: <Label> (Tag: <n>)' lines";
        });
        const auto raw = parse_priorities(response);
        d.priorities = filter_priorities(raw, state, team_);
        if (raw.empty()) record_parse(Stage::Analyze, "EmptyAssessment", "proceeding without priorities");
        else if (raw.size() != d.priorities.size())
            record_parse(Stage::Analyze, "DroppedEntries",
                         std::to_string(raw.size() - d.priorities.size()) + " entries not naming a living enemy");
    }
    if (config_.ablation.mpi_enabled) base.decision.priorities = &d.priorities;

    // Stage 3: knowledge retrieval.
    std::string knowledge;
    if (config_.ablation.rag_enabled && !d.priorities.empty()) {
        for (const auto& cls : priority_classes(d.priorities, assets_.knowledge)) {
            assets_.knowledge.retrieve(cls);
            if (transcript_ != nullptr) {
                TranscriptRecord r;
                r.kind = RecordKind::Retrieve;
                r.team = team_;
                r.step = step_;
                r.class_key = cls;
                transcript_->records.push_back(std::move(r));
            }
        }
        knowledge = build_knowledge_context(d.priorities, assets_.knowledge, config_.max_context_chars);
    }
    const std::string priorities_section =
        config_.ablation.mpi_enabled ? "Priority targets (most important first):\n" +
                                           (d.priorities.empty() ? std::string("(none identified)\n") : priorities_text(d.priorities)) + "\n"
                                     : "";
    const std::string knowledge_section = knowledge.empty() ? "" : "Unit knowledge:\n" + knowledge;

    std::string guidance;
    if (config_.separate_synthesize_stage && !knowledge.empty()) {
        PromptBundle b = base;
        b.context = knowledge;
        const auto prompt = assets_.prompts.render(Stage::Synthesize, {{"team", team},
                                                                       {"observation", obs.text},
                                                                       {"history", history},
                                                                       {"priorities", priorities_section},
                                                                       {"knowledge", knowledge_section}});
        guidance = ask(Stage::Synthesize, prompt, b, [](const std::string&) { return std::optional<std::string>(); });
    }

    // Role assignment.
    if (config_.ablation.role_enabled) {
        std::ostringstream friends;
        for (const auto& u : state.units)
            if (u.alive && u.team == team_) friends << "- " << unit_label(state, u) << " (Tag: " << u.uid << ")\n";
        std::string context = "Primary skill: " + d.plan.primary_skill.name + "\n";
        if (!d.priorities.empty()) context += "Priority targets:\n" + priorities_text(d.priorities);
        PromptBundle b = base;
        b.context = context;
        const auto prompt = assets_.prompts.render(Stage::Role, {{"team", team},
                                                                 {"role_set", "Assault, Skirmisher, Protector, Support"},
                                                                 {"observation", obs.text},
                                                                 {"context", context},
                                                                 {"friendly_units", friends.str()}});
        const auto response = ask(Stage::Role, prompt, b, [](const std::string& r) -> std::optional<std::string> {
            if (blank(r) || !parse_roles(r).empty()) return std::nullopt;
            return "no 'Role: <tag> -> <role>' lines";
        });
        d.roles = complete_roles(parse_roles(response), state, team_);
        base.decision.roles = &d.roles;
    }

    // Stage 4: action generation.
    {
        const std::string roles_section = config_.ablation.role_enabled ? "Roles:\n" + roles_text(d.roles) + "\n" : "";
        const std::string guidance_section = guidance.empty() ? "" : "Tactical guidance:\n" + guidance + "\n";
        const std::string abilities = state.abilities_enabled
                                          ? "Abilities: Stimpack, SiegeMode, Unsiege (no target); Blink <x> <y>; Heal <target_tag>."
                                          : "Abilities are disabled in this battle.";
        const auto prompt = assets_.prompts.render(Stage::Act, {{"team", team},
                                                                {"observation", obs.text},
                                                                {"history", history},
                                                                {"plan", plan},
                                                                {"priorities", priorities_section},
                                                                {"roles", roles_section},
                                                                {"knowledge", knowledge_section},
                                                                {"guidance", guidance_section},
                                                                {"abilities", abilities}});
        PromptBundle b = base;
        b.context = knowledge;
        const auto friendly = living_uids(state, team_);
        const auto response = ask(Stage::Act, prompt, b, [&](const std::string& r) -> std::optional<std::string> {
            if (blank(r) || !parse_action_block(r, friendly).actions.empty()) return std::nullopt;
            return "no valid command lines";
        });
        auto parsed = parse_action_block(response, friendly);
        if (parsed.actions.empty() && !blank(response)) record_parse(Stage::Act, "AllLinesInvalid", "empty action set used");
        if (!parsed.dropped.empty()) {
            std::string detail;
            for (const auto& x : parsed.dropped) detail += x.line + " [" + x.reason + "]\n";
            record_parse(Stage::Act, "DroppedLines", detail);
        }
        d.actions = std::move(parsed.actions);
        d.lines = format_actions(d.actions);
    }
    return d;
}

void AvaAgent::observe_result(const BattleState& after, const Decision& d, int reward) {
    history_.push({after.decision_step - 1, army_summary(after, team_), d.lines, reward});
}

EpisodeRun run_episode(const Assets& assets, const std::string& scenario_id, std::uint64_t seed, DecisionBackend* p1,
                       DecisionBackend* p2, const EpisodeOptions& options) {
    const auto& spec = assets.scenarios.get(scenario_id);
    BattleState state = instantiate(spec, assets.units, seed);
    EpisodeRun run;
    run.transcript.scenario = scenario_id;
    run.transcript.seed = seed;
    run.replay = {scenario_id, seed, options.p1_name, options.p2_name, state_digest(state), {}};

    std::optional<AvaAgent> a1, a2;
    if (p1 != nullptr) a1.emplace(assets, *p1, Team::P1, options.pipeline, &run.transcript);
    if (p2 != nullptr) a2.emplace(assets, *p2, Team::P2, options.pipeline, &run.transcript);

    while (state.decision_step < options.max_steps) {
        Decision d1, d2;
        try {
            if (a1) d1 = a1->decide(state);
            else d1.actions = builtin_opponent(state, Team::P1);
            if (a2) d2 = a2->decide(state);
            else d2.actions = builtin_opponent(state, Team::P2);
        } catch (const BackendUnavailable& e) {
            run.error = e.what();
            break;
        }
        const StepResult res = apply_step(state, d1.actions, d2.actions);
        run.p1_actions.push_back(d1.actions);

        ReplayStep rs;
        rs.step = state.decision_step;
        rs.digest = state_digest(state);
        rs.p1 = format_actions(d1.actions);
        rs.p2 = format_actions(d2.actions);
        for (const auto& r : res.rejections) rs.rejections.push_back({r.team, format_action(r.action), std::string(to_string(r.reason))});
        rs.reward = res.reward;
        rs.done = res.done;
        run.replay.steps.push_back(std::move(rs));

        if (d1.lines.empty()) d1.lines = format_actions(d1.actions);
        if (d2.lines.empty()) d2.lines = format_actions(d2.actions);
        if (a1) a1->observe_result(state, d1, res.reward);
        if (a2) a2->observe_result(state, d2, -res.reward);
        run.reward += res.reward;
        if (res.done) {
            run.outcome = res.outcome;
            break;
        }
    }
    run.steps = state.decision_step;
    if (!run.outcome.done()) run.outcome = check_termination(state);
    return run;
}

void resimulate(const Assets& assets, const Replay& replay,
                const std::function<void(const BattleState&, const ReplayStep*)>& on_state) {
    if (!assets.scenarios.contains(replay.scenario)) throw CorruptReplay(0, "unknown scenario " + replay.scenario);
    BattleState state = instantiate(assets.scenarios.get(replay.scenario), assets.units, replay.seed);
    if (state_digest(state) != replay.initial_digest) throw CorruptReplay(-1, "initial state digest mismatch");
    on_state(state, nullptr);
    int last_good = 0;
    for (const auto& step : replay.steps) {
        ActionSet sets[2];
        for (int side = 0; side < 2; ++side)
            for (const auto& line : side == 0 ? step.p1 : step.p2) {
                const auto p = parse_action_line(line);
                if (!p.action) throw CorruptReplay(last_good, "unparseable action '" + line + "'");
                sets[side].push_back(*p.action);
            }
        if (check_termination(state).done()) throw CorruptReplay(last_good, "steps recorded after the battle ended");
        const auto res = apply_step(state, sets[0], sets[1]);
        if (state_digest(state) != step.digest || state.decision_step != step.step)
            throw CorruptReplay(last_good, "state digest mismatch at step " + std::to_string(step.step));
        if (res.reward != step.reward || res.done != step.done)
            throw CorruptReplay(last_good, "reward mismatch at step " + std::to_string(step.step));
        on_state(state, &step);
        last_good = step.step;
    }
}

}  // namespace ava
