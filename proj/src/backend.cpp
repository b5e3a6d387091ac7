#include "avacraft/backend.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "avacraft/error.hpp"
#include "avacraft/grid.hpp"

namespace ava {

using nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ull;
    return h ^ (h >> 29);
}

// Cheap fingerprint of the situation, so answers are a pure function of it.
std::uint64_t context_seed(const DecisionContext& ctx, std::uint64_t seed) {
    std::uint64_t h = mix(seed, static_cast<std::uint64_t>(ctx.state->decision_step));
    h = mix(h, static_cast<std::uint64_t>(ctx.team));
    for (const auto& u : ctx.state->units) {
        if (!u.alive) continue;
        h = mix(h, u.uid);
        h = mix(h, static_cast<std::uint64_t>(u.position.x) ^ (static_cast<std::uint64_t>(u.position.y) << 32));
        h = mix(h, static_cast<std::uint64_t>(u.health + u.shields));
    }
    return h;
}

struct Rng {
    std::uint64_t s;
    std::uint64_t next() { return s = mix(s, 0x2545F4914F6CDD1Dull); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

bool can_target(const Weapon& w, const UnitState& target) { return w.armed() && w.targets.allows(target.spec->layer()); }

std::vector<const UnitState*> living(const BattleState& s, Team team) {
    std::vector<const UnitState*> out;
    for (const auto& u : s.units)
        if (u.alive && u.team == team) out.push_back(&u);
    return out;
}

std::string attack(Uid a, Uid t) { return "Attack " + std::to_string(a) + " " + std::to_string(t); }

Milli pool(const UnitState& u) { return u.health + u.shields; }

const UnitState* weakest_target(const UnitState& u, const std::vector<const UnitState*>& enemies) {
    const UnitState* best = nullptr;
    for (const auto* e : enemies) {
        if (!can_target(u.weapon(), *e)) continue;
        if (best == nullptr || pool(*e) < pool(*best)) best = e;  // uid order makes ties go low
    }
    return best;
}

const UnitState* focus_target(const UnitState& u, const DecisionContext& ctx, const std::vector<const UnitState*>& enemies) {
    if (ctx.priorities != nullptr)
        for (const auto& p : *ctx.priorities) {
            const auto* e = ctx.state->find(p.tag);
            if (e != nullptr && e->alive && e->team != ctx.team && can_target(u.weapon(), *e)) return e;
        }
    return weakest_target(u, enemies);
}

// Nearest enemy that can shoot `u` and could reach it within one second.
const UnitState* nearest_threat(const UnitState& u, const std::vector<const UnitState*>& enemies) {
    const UnitState* best = nullptr;
    Milli best_d = 0;
    for (const auto* e : enemies) {
        if (!can_target(e->weapon(), u)) continue;
        const Milli d = distance(u.position, e->position);
        if (d > e->weapon().range + e->spec->movement_speed) continue;
        if (best == nullptr || d < best_d) {
            best = e;
            best_d = d;
        }
    }
    return best;
}

std::optional<Direction> retreat_direction(const UnitState& u, const UnitState& threat, const BattleState& s) {
    const Vec2 away = u.position - threat.position;
    const GridCell g = grid_of(u.position, s.arena);
    auto open = [&](Direction d) {
        switch (d) {
            case Direction::Up: return g.y < kGridSize;
            case Direction::Down: return g.y > 1;
            case Direction::Right: return g.x < kGridSize;
            case Direction::Left: return g.x > 1;
        }
        return false;
    };
    const Direction horiz = away.x >= 0 ? Direction::Right : Direction::Left;
    const Direction vert = away.y >= 0 ? Direction::Up : Direction::Down;
    const bool horizontal_first = std::abs(away.x) >= std::abs(away.y);
    for (Direction d : horizontal_first ? std::array{horiz, vert} : std::array{vert, horiz})
        if (open(d)) return d;
    return std::nullopt;
}

std::optional<std::string> ability_line(const UnitState& u, const UnitState& target, const BattleState& s) {
    if (!s.abilities_enabled) return std::nullopt;
    const auto& spec = *u.spec;
    const Milli d = distance(u.position, target.position);
    if (spec.has_ability(AbilityId::Stimpack) && u.effects.stim_ms == 0 &&
        u.health > s.ability_config.stim_health_cost * 3 && d <= u.weapon().range + to_milli(1))
        return "Ability " + std::to_string(u.uid) + " Stimpack";
    if (spec.has_ability(AbilityId::SiegeMode) && spec.sieged_weapon && !u.effects.sieged && u.effects.transform_ms == 0 &&
        d <= spec.sieged_weapon->range)
        return "Ability " + std::to_string(u.uid) + " SiegeMode";
    return std::nullopt;
}

std::vector<std::string> focus_fire(const DecisionContext& ctx) {
    const auto& s = *ctx.state;
    const auto friends = living(s, ctx.team);
    const auto enemies = living(s, opponent(ctx.team));
    std::vector<std::string> out;
    if (enemies.empty()) return out;
    for (const auto* u : friends) {
        if (!u->weapon().armed()) {
            // Support units trail the nearest armed ally.
            const UnitState* lead = nullptr;
            for (const auto* f : friends)
                if (f->weapon().armed() &&
                    (lead == nullptr || distance(u->position, f->position) < distance(u->position, lead->position)))
                    lead = f;
            if (lead != nullptr && u->mobile() && distance(u->position, lead->position) > to_milli(2)) {
                const GridCell g = grid_of(lead->position, s.arena);
                out.push_back("Move " + std::to_string(u->uid) + " " + std::to_string(g.x) + " " + std::to_string(g.y));
            }
            continue;
        }
        const auto* target = focus_target(*u, ctx, enemies);
        if (target == nullptr) continue;
        const bool may_kite = ctx.roles == nullptr || (ctx.roles->count(u->uid) && ctx.roles->at(u->uid) == Role::Skirmisher);
        if (may_kite && !u->weapon_ready() && u->mobile()) {
            const auto* threat = nearest_threat(*u, enemies);
            if (threat != nullptr && u->weapon().range > threat->weapon().range) {
                if (auto dir = retreat_direction(*u, *threat, s)) {
                    out.push_back("Move " + std::to_string(u->uid) + " " + std::string(to_string(*dir)));
                    continue;
                }
            }
        }
        if (auto ab = ability_line(*u, *target, s)) {
            out.push_back(*ab);
            continue;
        }
        out.push_back(attack(u->uid, target->uid));
    }
    return out;
}

std::vector<std::string> random_target(const DecisionContext& ctx, Rng& rng) {
    const auto enemies = living(*ctx.state, opponent(ctx.team));
    std::vector<std::string> out;
    for (const auto* u : living(*ctx.state, ctx.team)) {
        std::vector<const UnitState*> options;
        for (const auto* e : enemies)
            if (can_target(u->weapon(), *e)) options.push_back(e);
        if (!options.empty()) out.push_back(attack(u->uid, options[rng.below(options.size())]->uid));
    }
    return out;
}

std::vector<std::string> random_lines(const DecisionContext& ctx, Rng& rng) {
    static const char* kAbilities[] = {"Stimpack", "Blink", "Heal", "SiegeMode", "Unsiege"};
    static const char* kDirs[] = {"UP", "RIGHT", "DOWN", "LEFT"};
    std::vector<Uid> everyone;
    for (const auto& u : ctx.state->units) everyone.push_back(u.uid);
    std::vector<std::string> out;
    for (const auto* u : living(*ctx.state, ctx.team)) {
        const std::string id = std::to_string(u->uid);
        const auto cell = [&] { return std::to_string(rng.below(10) + 1) + " " + std::to_string(rng.below(10) + 1); };
        switch (rng.below(6)) {
            case 0: out.push_back(attack(u->uid, everyone[rng.below(everyone.size())])); break;
            case 1: out.push_back(attack(u->uid, everyone[rng.below(everyone.size())])); break;
            case 2: out.push_back("Move " + id + " " + cell()); break;
            case 3: out.push_back("Move " + id + " " + kDirs[rng.below(4)]); break;
            case 4: {
                std::string line = "Ability " + id + " " + kAbilities[rng.below(5)];
                const auto t = rng.below(3);
                if (t == 1) line += " " + std::to_string(everyone[rng.below(everyone.size())]);
                if (t == 2) line += " " + cell();
                out.push_back(line);
                break;
            }
            default: break;
        }
    }
    return out;
}

std::string priority_lines(const DecisionContext& ctx, ScriptedPolicy policy, Rng& rng) {
    auto enemies = living(*ctx.state, opponent(ctx.team));
    if (policy == ScriptedPolicy::FocusFire) {
        std::stable_sort(enemies.begin(), enemies.end(), [](auto* a, auto* b) { return pool(*a) < pool(*b); });
    } else {
        for (std::size_t i = enemies.size(); i > 1; --i) std::swap(enemies[i - 1], enemies[rng.below(i)]);
    }
    std::ostringstream os;
    const std::size_t n = std::min<std::size_t>(3, enemies.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto* e = enemies[i];
        os << "Unit: " << unit_label(*ctx.state, *e) << " (Tag: " << e->uid << ")\n";
        os << "Reason: " << format_milli(pool(*e)) << " combined health and shields left.\n\n";
    }
    return os.str();
}

}  // namespace

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Plan: return "Plan";
        case Stage::Analyze: return "Analyze";
        case Stage::Role: return "Role";
        case Stage::Act: return "Act";
        case Stage::Synthesize: return "Synthesize";
    }
    return "?";
}

std::optional<Stage> stage_from_name(std::string_view s) {
    for (Stage st : {Stage::Plan, Stage::Analyze, Stage::Role, Stage::Act, Stage::Synthesize})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

std::string_view to_string(ScriptedPolicy p) {
    switch (p) {
        case ScriptedPolicy::FocusFire: return "focus_fire";
        case ScriptedPolicy::RandomTarget: return "random_target";
        case ScriptedPolicy::Idle: return "idle";
        case ScriptedPolicy::Random: return "random";
    }
    return "?";
}

std::optional<ScriptedPolicy> scripted_policy_from_name(std::string_view s) {
    std::string norm(s);
    std::replace(norm.begin(), norm.end(), '-', '_');
    for (auto p : {ScriptedPolicy::FocusFire, ScriptedPolicy::RandomTarget, ScriptedPolicy::Idle, ScriptedPolicy::Random})
        if (to_string(p) == norm) return p;
    return std::nullopt;
}

Role default_role(const UnitSpec& spec) {
    if (!spec.weapon.armed()) return Role::Support;
    if (spec.movement_speed == 0 || spec.has_ability(AbilityId::SiegeMode)) return Role::Protector;
    if (spec.weapon.range >= to_milli(4)) return Role::Skirmisher;
    return Role::Assault;
}

std::vector<std::string> scripted_actions(ScriptedPolicy policy, const DecisionContext& ctx, std::uint64_t seed) {
    Rng rng{context_seed(ctx, seed)};
    switch (policy) {
        case ScriptedPolicy::FocusFire: return focus_fire(ctx);
        case ScriptedPolicy::RandomTarget: return random_target(ctx, rng);
        case ScriptedPolicy::Idle: return {};
        case ScriptedPolicy::Random: return random_lines(ctx, rng);
    }
    return {};
}

std::string ScriptedBackend::name() const { return "scripted:" + std::string(to_string(policy_)); }

std::string ScriptedBackend::query(const PromptBundle& bundle) {
    const auto& ctx = bundle.decision;
    if (ctx.state == nullptr) throw BackendUnavailable("scripted backend needs a decision context");
    Rng rng{mix(context_seed(ctx, seed_), static_cast<std::uint64_t>(bundle.stage))};
    switch (bundle.stage) {
        case Stage::Plan: {
            SkillPlan plan = default_plan();
            if (policy_ != ScriptedPolicy::FocusFire) {
                plan.primary_skill = {"Spread Fire", "Engage whatever is available", {"Pick any reachable target"}};
            } else {
                plan.secondary_skills.push_back({"Kiting", "Step back while weapons cool down",
                                                 {"Retreat threatened ranged units during cooldown"}});
            }
            json j;
            auto skill = [](const Skill& s) { return json{{"name", s.name}, {"description", s.description}, {"steps", s.steps}}; };
            j["primary_skill"] = skill(plan.primary_skill);
            j["secondary_skills"] = json::array();
            for (const auto& s : plan.secondary_skills) j["secondary_skills"].push_back(skill(s));
            return j.dump(2);
        }
        case Stage::Analyze:
            if (policy_ == ScriptedPolicy::Idle) return "";
            return priority_lines(ctx, policy_, rng);
        case Stage::Role: {
            std::ostringstream os;
            for (const auto* u : living(*ctx.state, ctx.team))
                os << "Role: " << u->uid << " -> " << to_string(default_role(*u->spec)) << '\n';
            return os.str();
        }
        case Stage::Act: {
            std::string out;
            for (const auto& l : scripted_actions(policy_, ctx, seed_)) out += l + "\n";
            return out;
        }
        case Stage::Synthesize:
            return policy_ == ScriptedPolicy::FocusFire ? "Concentrate fire on the first priority target in range.\n"
                                                        : "Engage freely.\n";
    }
    return "";
}

std::unique_ptr<RecordedBackend> RecordedBackend::from_transcript(const std::filesystem::path& path, std::optional<Team> team) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open transcript " + path.string());
    std::vector<RecordedResponse> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            throw SchemaError(path.string() + ":" + std::to_string(lineno), "not a JSON object");
        if (rec.value("type", "") != "call") continue;
        if (team && rec.value("team", "") != to_string(*team)) continue;
        const auto stage = stage_from_name(rec.value("stage", ""));
        if (!stage) throw SchemaError(path.string() + ":" + std::to_string(lineno), "unknown stage");
        out.push_back({*stage, rec.value("response", "")});
    }
    return std::make_unique<RecordedBackend>(std::move(out));
}

std::string RecordedBackend::query(const PromptBundle& bundle) {
    if (next_ >= responses_.size()) throw BackendUnavailable("recorded transcript exhausted");
    const auto& r = responses_[next_];
    if (r.stage != bundle.stage)
        throw Error("recorded transcript expects a " + std::string(to_string(r.stage)) + " call at position " +
                    std::to_string(next_) + ", got " + std::string(to_string(bundle.stage)));
    ++next_;
    return r.response;
}

void validate_backend_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "scripted") {
        if (!scripted_policy_from_name(arg)) throw ConfigError("unknown scripted policy '" + arg + "'");
    } else if (kind == "recorded") {
        if (arg.empty()) throw ConfigError("recorded backend needs a transcript path");
    } else if (kind != "remote") {
        throw ConfigError("unknown backend '" + spec + "' (expected scripted:<policy>, recorded:<path> or remote:<model>)");
    }
}

std::unique_ptr<DecisionBackend> make_backend(const std::string& spec, std::uint64_t seed, bool dry_run) {
    validate_backend_spec(spec);
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "scripted") return std::make_unique<ScriptedBackend>(*scripted_policy_from_name(arg), seed);
    if (kind == "recorded") {
        std::string path = arg;
        std::optional<Team> team;
        if (const auto hash = path.rfind('#'); hash != std::string::npos) {
            team = team_from_name(path.substr(hash + 1));
            if (!team) throw ConfigError("bad team suffix in '" + spec + "'");
            path.resize(hash);
        }
        return RecordedBackend::from_transcript(path, team);
    }
    auto profile = remote_profile_from_env(arg);
    profile.dry_run = dry_run;
    if (!dry_run && profile.url.empty()) throw ConfigError("remote backend needs AVA_API_URL");
    return std::make_unique<RemoteChatBackend>(std::move(profile));
}

}  // namespace ava
