#include "avacraft/battle.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "avacraft/error.hpp"
#include "avacraft/grid.hpp"

namespace ava {

namespace {

// Chasing units overshoot the range edge by this much so truncated
// integer steps still end inside range.
constexpr Milli kApproachSlack = 10;

constexpr Milli kDamageFloor = 500;

bool in_range(const Vec2& a, const Vec2& b, Milli range) { return length_sq(b - a) <= range * range; }

Milli effective_speed(const UnitState& u, const AbilityConfig& cfg) {
    if (u.effects.stim_ms > 0) return u.spec->movement_speed * cfg.stim_move_speed_permille / kMilli;
    return u.spec->movement_speed;
}

Milli reload_ms(const UnitState& u, const Weapon& w, const AbilityConfig& cfg) {
    if (u.effects.stim_ms > 0) return w.cooldown_ms * kMilli / cfg.stim_attack_speed_permille;
    return w.cooldown_ms;
}

void apply_damage(UnitState& target, Milli amount, Uid source, StepResult& out) {
    if (!target.alive || amount <= 0) return;
    const Milli to_shields = std::min(target.shields, amount);
    const Milli to_health = std::min(target.health, amount - to_shields);
    target.shields -= to_shields;
    target.health -= to_health;
    out.damage.push_back({source, target.uid, to_shields, to_health});
    if (target.health == 0) {
        target.alive = false;
        target.order = IdleOrder{};
    }
}

bool is_heal_candidate(const UnitState& healer, const UnitState& u) {
    return u.alive && u.uid != healer.uid && u.team == healer.team && u.spec->attributes.has(Attribute::Biological) &&
           u.health < u.spec->max_health;
}

Vec2 direction_delta(Direction d, const Arena& arena) {
    const Milli cx = arena.width / kGridSize;
    const Milli cy = arena.height / kGridSize;
    switch (d) {
        case Direction::Up: return {0, cy};
        case Direction::Right: return {cx, 0};
        case Direction::Down: return {0, -cy};
        case Direction::Left: return {-cx, 0};
    }
    return {};
}

struct Hit {
    Uid attacker;
    Uid target;
    const Weapon* weapon;
    Vec2 origin;
};

class StepRunner {
public:
    StepRunner(BattleState& s, StepResult& out) : s_(s), out_(out), cfg_(s.ability_config) {}

    void install(Team team, const ActionSet& actions) {
        std::vector<Uid> claimed;
        for (const auto& a : actions) {
            const Uid actor = actor_of(a);
            auto reason = validate_action(s_, team, a);
            if (!reason && std::find(claimed.begin(), claimed.end(), actor) != claimed.end())
                reason = RejectReason::DuplicateActor;
            if (reason) {
                out_.rejections.push_back({team, a, *reason});
                continue;
            }
            claimed.push_back(actor);
            std::visit([&](const auto& v) { install_one(*s_.find(actor), v); }, a);
        }
    }

    void subtick() {
        const Milli dt = subtick_ms(s_.tick);
        advance_timers(dt);
        drop_stale_orders();
        move_units(dt);
        fire_weapons();
        heal_units(dt);
        ++s_.tick;
    }

private:
    void install_one(UnitState& u, const AttackAction& a) { u.order = AttackOrder{a.target}; }

    void install_one(UnitState& u, const MoveGridAction& a) { u.order = MoveOrder{cell_center(a.cell, s_.arena)}; }

    void install_one(UnitState& u, const MoveDirAction& a) {
        u.order = MoveOrder{clamp_to_arena(u.position + direction_delta(a.dir, s_.arena), s_.arena)};
    }

    void install_one(UnitState& u, const AbilityAction& a) {
        switch (*ability_from_name(a.ability)) {
            case AbilityId::Stimpack: {
                const Milli cost = cfg_.stim_health_cost;
                u.health -= cost;
                out_.damage.push_back({u.uid, u.uid, 0, cost});
                u.effects.stim_ms = cfg_.stim_duration_ms;
                break;
            }
            case AbilityId::Blink: {
                const Vec2 dest = cell_center(std::get<GridCell>(a.target), s_.arena);
                u.position = clamp_to_arena(step_toward(u.position, dest, cfg_.blink_max_distance), s_.arena);
                u.effects.blink_cooldown_ms = cfg_.blink_cooldown_ms;
                u.order = IdleOrder{};
                break;
            }
            case AbilityId::Heal: u.order = HealOrder{std::get<Uid>(a.target)}; break;
            case AbilityId::SiegeMode:
            case AbilityId::Unsiege:
                u.effects.transform_ms = cfg_.siege_transform_ms;
                u.order = IdleOrder{};
                break;
        }
    }

    void advance_timers(Milli dt) {
        for (auto& u : s_.units) {
            if (!u.alive) continue;
            u.cooldown_ms = std::max<Milli>(0, u.cooldown_ms - dt);
            u.effects.stim_ms = std::max<Milli>(0, u.effects.stim_ms - dt);
            u.effects.blink_cooldown_ms = std::max<Milli>(0, u.effects.blink_cooldown_ms - dt);
            if (u.effects.transform_ms > 0) {
                u.effects.transform_ms = std::max<Milli>(0, u.effects.transform_ms - dt);
                if (u.effects.transform_ms == 0) u.effects.sieged = !u.effects.sieged;
            }
        }
    }

    void drop_stale_orders() {
        for (auto& u : s_.units) {
            if (!u.alive) continue;
            Uid target = 0;
            if (const auto* o = std::get_if<AttackOrder>(&u.order)) target = o->target;
            if (const auto* o = std::get_if<HealOrder>(&u.order)) target = o->target;
            if (target == 0) continue;
            const UnitState* t = s_.find(target);
            if (t == nullptr || !t->alive) u.order = IdleOrder{};
        }
    }

    // in_range is exact while distance() floors, so test with in_range.
    void approach(UnitState& u, const Vec2& goal, Milli reach, Milli step) {
        if (in_range(u.position, goal, reach)) return;
        const Milli d = distance(u.position, goal);
        const Milli travel = std::min(step, std::max<Milli>(d - reach, 0) + kApproachSlack);
        u.position = clamp_to_arena(step_toward(u.position, goal, travel), s_.arena);
    }

    void move_units(Milli dt) {
        for (auto& u : s_.units) {
            if (!u.alive || !u.mobile()) continue;
            const Milli step = effective_speed(u, cfg_) * dt / kMilli;
            if (const auto* o = std::get_if<MoveOrder>(&u.order)) {
                u.position = clamp_to_arena(step_toward(u.position, o->destination, step), s_.arena);
                if (u.position == o->destination) u.order = IdleOrder{};
            } else if (const auto* o = std::get_if<AttackOrder>(&u.order)) {
                const UnitState& t = *s_.find(o->target);
                if (!in_range(u.position, t.position, u.weapon().range)) approach(u, t.position, u.weapon().range, step);
            } else if (const auto* o = std::get_if<HealOrder>(&u.order)) {
                const UnitState& t = *s_.find(o->target);
                if (!in_range(u.position, t.position, cfg_.heal_range)) approach(u, t.position, cfg_.heal_range, step);
            }
        }
    }

    void fire_weapons() {
        std::vector<Hit> hits;
        for (auto& u : s_.units) {
            if (!u.alive || u.effects.transform_ms > 0 || !u.weapon_ready()) continue;
            const auto* o = std::get_if<AttackOrder>(&u.order);
            if (o == nullptr) continue;
            const Weapon& w = u.weapon();
            const UnitState& t = *s_.find(o->target);
            if (!w.armed() || !w.targets.allows(t.spec->layer()) || !in_range(u.position, t.position, w.range)) continue;
            hits.push_back({u.uid, t.uid, &w, u.position});
            u.cooldown_ms = reload_ms(u, w, cfg_);
        }
        // All shots of a sub-tick leave before any lands: units killed in this
        // phase still deliver the shot they already fired.
        for (const auto& h : hits) resolve(h);
    }

    void resolve(const Hit& h) {
        const Weapon& w = *h.weapon;
        UnitState& attacker = *s_.find(h.attacker);
        const Team victims = opponent(attacker.team);

        if (const auto* c = std::get_if<CircleSplash>(&w.splash); c != nullptr && c->on_death) {
            for (auto& u : s_.units)
                if (u.alive && u.team == victims && w.targets.allows(u.spec->layer()))
                    if (auto pct = ring_percent(*c, h.origin, u.position))
                        apply_damage(u, compute_damage(w, u) * *pct / 100, h.attacker, out_);
            if (attacker.alive) {
                out_.damage.push_back({attacker.uid, attacker.uid, attacker.shields, attacker.health});
                attacker.shields = 0;
                attacker.health = 0;
                attacker.alive = false;
                attacker.order = IdleOrder{};
            }
            return;
        }

        UnitState& target = *s_.find(h.target);
        if (!target.alive) return;
        const Vec2 impact = target.position;
        apply_damage(target, compute_damage(w, target), h.attacker, out_);

        if (const auto* c = std::get_if<CircleSplash>(&w.splash)) {
            for (auto& u : s_.units)
                if (u.alive && u.uid != target.uid && u.team == victims && w.targets.allows(u.spec->layer()))
                    if (auto pct = ring_percent(*c, impact, u.position))
                        apply_damage(u, compute_damage(w, u) * *pct / 100, h.attacker, out_);
        } else if (const auto* l = std::get_if<LineSplash>(&w.splash)) {
            Vec2 axis = impact - h.origin;
            Milli len = isqrt(length_sq(axis));
            if (len == 0) {
                axis = {kMilli, 0};
                len = kMilli;
            }
            for (auto& u : s_.units) {
                if (!u.alive || u.uid == target.uid || u.team != victims || !w.targets.allows(u.spec->layer())) continue;
                const Vec2 rel = u.position - impact;
                const std::int64_t across = rel.x * axis.y - rel.y * axis.x;
                const std::int64_t along = dot(rel, axis);
                if (std::abs(across) * 2 <= l->length * len && std::abs(along) * 2 <= l->width * len)
                    apply_damage(u, compute_damage(w, u), h.attacker, out_);
            }
        }
    }

    static std::optional<int> ring_percent(const CircleSplash& c, const Vec2& centre, const Vec2& p) {
        const std::int64_t d2 = length_sq(p - centre);
        for (const auto& r : c.rings)
            if (d2 <= r.radius * r.radius) return r.percent;
        return std::nullopt;
    }

    void heal_units(Milli dt) {
        for (auto& healer : s_.units) {
            if (!healer.alive || healer.energy <= 0 || !healer.spec->has_ability(AbilityId::Heal)) continue;
            UnitState* patient = nullptr;
            if (const auto* o = std::get_if<HealOrder>(&healer.order)) {
                UnitState* t = s_.find(o->target);
                if (t != nullptr && is_heal_candidate(healer, *t) && in_range(healer.position, t->position, cfg_.heal_range))
                    patient = t;
            }
            if (patient == nullptr) {
                // Autocast: most injured (by fraction) biological ally in range.
                for (auto& u : s_.units) {
                    if (!is_heal_candidate(healer, u) || !in_range(healer.position, u.position, cfg_.heal_range)) continue;
                    if (patient == nullptr ||
                        u.health * patient->spec->max_health < patient->health * u.spec->max_health)
                        patient = &u;
                }
            }
            if (patient == nullptr) continue;
            Milli amount = healer.spec->heal_rate * dt / kMilli;
            amount = std::min(amount, patient->spec->max_health - patient->health);
            amount = std::min(amount, healer.energy * cfg_.heal_health_per_energy);
            if (amount <= 0) continue;
            const Milli cost = (amount + cfg_.heal_health_per_energy - 1) / cfg_.heal_health_per_energy;
            healer.energy = std::max<Milli>(0, healer.energy - cost);
            patient->health += amount;
            out_.heals.push_back({healer.uid, patient->uid, amount});
        }
    }

    BattleState& s_;
    StepResult& out_;
    const AbilityConfig& cfg_;
};

}  // namespace

std::string_view to_string(Team t) { return t == Team::P1 ? "P1" : "P2"; }

std::optional<Team> team_from_name(std::string_view s) {
    if (s == "P1") return Team::P1;
    if (s == "P2") return Team::P2;
    return std::nullopt;
}

std::string_view to_string(Result r) {
    switch (r) {
        case Result::Ongoing: return "Ongoing";
        case Result::Victory: return "Victory";
        case Result::Defeat: return "Defeat";
        case Result::Draw: return "Draw";
    }
    return "?";
}

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::UnknownActor: return "UnknownActor";
        case RejectReason::DeadActor: return "DeadActor";
        case RejectReason::WrongTeam: return "WrongTeam";
        case RejectReason::DuplicateActor: return "DuplicateActor";
        case RejectReason::BadTarget: return "BadTarget";
        case RejectReason::UnknownAbility: return "UnknownAbility";
        case RejectReason::AbilitiesDisabled: return "AbilitiesDisabled";
        case RejectReason::NotReady: return "NotReady";
        case RejectReason::Immobile: return "Immobile";
        case RejectReason::OutOfGrid: return "OutOfGrid";
    }
    return "?";
}

const Weapon& UnitState::weapon() const {
    if (effects.sieged && spec->sieged_weapon) return *spec->sieged_weapon;
    return spec->weapon;
}

bool UnitState::mobile() const {
    return spec->movement_speed > 0 && !effects.sieged && effects.transform_ms == 0;
}

const UnitState* BattleState::find(Uid uid) const {
    auto it = std::lower_bound(units.begin(), units.end(), uid, [](const UnitState& u, Uid v) { return u.uid < v; });
    return (it != units.end() && it->uid == uid) ? &*it : nullptr;
}

UnitState* BattleState::find(Uid uid) {
    return const_cast<UnitState*>(static_cast<const BattleState&>(*this).find(uid));
}

int BattleState::alive_count(Team t) const {
    return static_cast<int>(std::count_if(units.begin(), units.end(), [t](const UnitState& u) { return u.alive && u.team == t; }));
}

Milli compute_damage(const Weapon& weapon, const UnitState& target) {
    if (!target.alive) throw CannotTarget("target uid " + std::to_string(target.uid) + " is dead");
    if (!weapon.armed() || !weapon.targets.allows(target.spec->layer()))
        throw CannotTarget("weapon cannot reach " + target.spec->class_name);
    Milli dmg = weapon.damage;
    if (weapon.bonus_vs && target.spec->attributes.has(*weapon.bonus_vs)) dmg += weapon.bonus_damage;
    const Milli armor = target.shields > 0 ? 0 : target.spec->armor;
    return std::max(kDamageFloor, dmg - armor);
}

Milli compute_damage(const UnitState& attacker, const UnitState& target) {
    return compute_damage(attacker.weapon(), target);
}

std::optional<RejectReason> validate_action(const BattleState& s, Team team, const Action& a) {
    const UnitState* actor = s.find(actor_of(a));
    if (actor == nullptr) return RejectReason::UnknownActor;
    if (!actor->alive) return RejectReason::DeadActor;
    if (actor->team != team) return RejectReason::WrongTeam;

    if (const auto* atk = std::get_if<AttackAction>(&a)) {
        const UnitState* t = s.find(atk->target);
        const Weapon& w = actor->weapon();
        if (t == nullptr || !t->alive || t->team == team || !w.armed() || !w.targets.allows(t->spec->layer()))
            return RejectReason::BadTarget;
        if (actor->effects.transform_ms > 0) return RejectReason::NotReady;
        return std::nullopt;
    }
    if (const auto* mv = std::get_if<MoveGridAction>(&a)) {
        if (!in_grid(mv->cell)) return RejectReason::OutOfGrid;
        return actor->mobile() ? std::nullopt : std::optional(RejectReason::Immobile);
    }
    if (std::holds_alternative<MoveDirAction>(a)) {
        return actor->mobile() ? std::nullopt : std::optional(RejectReason::Immobile);
    }

    const auto& ab = std::get<AbilityAction>(a);
    const auto id = ability_from_name(ab.ability);
    if (!id || !actor->spec->has_ability(*id)) return RejectReason::UnknownAbility;
    if (!s.abilities_enabled) return RejectReason::AbilitiesDisabled;
    const bool no_target = std::holds_alternative<std::monostate>(ab.target);
    switch (*id) {
        case AbilityId::Stimpack:
            if (!no_target) return RejectReason::BadTarget;
            if (actor->health <= s.ability_config.stim_health_cost) return RejectReason::NotReady;
            return std::nullopt;
        case AbilityId::Blink: {
            const auto* cell = std::get_if<GridCell>(&ab.target);
            if (cell == nullptr) return RejectReason::BadTarget;
            if (!in_grid(*cell)) return RejectReason::OutOfGrid;
            if (actor->effects.blink_cooldown_ms > 0) return RejectReason::NotReady;
            return std::nullopt;
        }
        case AbilityId::Heal: {
            const auto* uid = std::get_if<Uid>(&ab.target);
            if (uid == nullptr) return RejectReason::BadTarget;
            const UnitState* t = s.find(*uid);
            if (t == nullptr || !t->alive || t->team != team || t->uid == actor->uid ||
                !t->spec->attributes.has(Attribute::Biological))
                return RejectReason::BadTarget;
            if (actor->energy <= 0) return RejectReason::NotReady;
            return std::nullopt;
        }
        case AbilityId::SiegeMode:
            if (!no_target) return RejectReason::BadTarget;
            if (actor->effects.sieged || actor->effects.transform_ms > 0) return RejectReason::NotReady;
            return std::nullopt;
        case AbilityId::Unsiege:
            if (!no_target) return RejectReason::BadTarget;
            if (!actor->effects.sieged || actor->effects.transform_ms > 0) return RejectReason::NotReady;
            return std::nullopt;
    }
    return RejectReason::UnknownAbility;
}

StepResult apply_step(BattleState& state, const ActionSet& p1, const ActionSet& p2) {
    if (check_termination(state).done()) throw std::logic_error("apply_step on a finished battle");
    StepResult out;
    StepRunner runner(state, out);
    runner.install(Team::P1, p1);
    runner.install(Team::P2, p2);
    for (int i = 0; i < kTicksPerDecision; ++i) runner.subtick();
    ++state.decision_step;
    out.outcome = check_termination(state);
    out.reward = out.outcome.reward;
    out.done = out.outcome.done();
    return out;
}

EpisodeOutcome check_termination(const BattleState& state) {
    const int p1 = state.alive_count(Team::P1);
    const int p2 = state.alive_count(Team::P2);
    EpisodeOutcome o;
    o.at_step = state.decision_step;
    if (p1 == 0 && p2 == 0) {
        o.result = Result::Draw;
    } else if (p2 == 0) {
        o.result = Result::Victory;
        o.reward = 1;
    } else if (p1 == 0) {
        o.result = Result::Defeat;
        o.reward = -1;
    } else if (state.decision_step >= kMaxDecisionSteps) {
        o.result = Result::Draw;
    }
    return o;
}

ActionSet builtin_opponent(const BattleState& state, Team team) {
    ActionSet out;
    for (const auto& u : state.units) {
        if (!u.alive || u.team != team) continue;
        const Weapon& w = u.weapon();
        // Engage anything reachable this decision step; the attack order
        // closes the remaining gap precisely.
        const Milli reach = w.range + (u.mobile() ? u.spec->movement_speed * kDecisionMs / kMilli : 0);
        const UnitState* engage = nullptr;
        const UnitState* nearest = nullptr;
        std::int64_t engage_d2 = 0;
        std::int64_t nearest_d2 = 0;
        bool nearest_targetable = false;
        for (const auto& e : state.units) {
            if (!e.alive || e.team == team) continue;
            const std::int64_t d2 = length_sq(e.position - u.position);
            const bool targetable = w.armed() && w.targets.allows(e.spec->layer());
            if (targetable && d2 <= reach * reach && (engage == nullptr || d2 < engage_d2)) {
                engage = &e;
                engage_d2 = d2;
            }
            // Prefer targetable enemies when choosing where to walk.
            const bool better = nearest == nullptr || (targetable && !nearest_targetable) ||
                                (targetable == nearest_targetable && d2 < nearest_d2);
            if (better) {
                nearest = &e;
                nearest_d2 = d2;
                nearest_targetable = targetable;
            }
        }
        if (engage != nullptr) {
            out.push_back(AttackAction{u.uid, engage->uid});
            continue;
        }
        if (nearest == nullptr || !u.mobile()) continue;
        const Vec2 d = nearest->position - u.position;
        Direction dir;
        if (std::abs(d.x) >= std::abs(d.y)) dir = d.x >= 0 ? Direction::Right : Direction::Left;
        else dir = d.y >= 0 ? Direction::Up : Direction::Down;
        out.push_back(MoveDirAction{u.uid, dir});
    }
    return out;
}

namespace {

struct Fnv1a {
    std::uint64_t h = 1469598103934665603ull;
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    }
    void i64(std::int64_t v) {
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
        bytes(buf, 8);
    }
    void str(std::string_view s) {
        i64(static_cast<std::int64_t>(s.size()));
        bytes(s.data(), s.size());
    }
};

}  // namespace

std::string state_digest(const BattleState& s) {
    Fnv1a f;
    f.i64(s.tick);
    f.i64(s.decision_step);
    f.i64(s.arena.width);
    f.i64(s.arena.height);
    f.i64(static_cast<std::int64_t>(s.rng_state));
    f.str(s.scenario_id);
    for (const auto& u : s.units) {
        f.i64(u.uid);
        f.str(u.spec->class_name);
        f.i64(static_cast<int>(u.team));
        f.i64(u.position.x);
        f.i64(u.position.y);
        f.i64(u.health);
        f.i64(u.shields);
        f.i64(u.energy);
        f.i64(u.cooldown_ms);
        f.i64(u.effects.stim_ms);
        f.i64(u.effects.blink_cooldown_ms);
        f.i64(u.effects.sieged);
        f.i64(u.effects.transform_ms);
        f.i64(u.alive);
        f.i64(static_cast<std::int64_t>(u.order.index()));
        std::visit(
            [&](const auto& o) {
                using O = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<O, AttackOrder> || std::is_same_v<O, HealOrder>) f.i64(o.target);
                if constexpr (std::is_same_v<O, MoveOrder>) {
                    f.i64(o.destination.x);
                    f.i64(o.destination.y);
                }
            },
            u.order);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
    return buf;
}

}  // namespace ava
