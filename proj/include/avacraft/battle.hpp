#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "avacraft/action.hpp"
#include "avacraft/fixed.hpp"
#include "avacraft/units.hpp"

namespace ava {

enum class Team : std::uint8_t { P1, P2 };

constexpr Team opponent(Team t) { return t == Team::P1 ? Team::P2 : Team::P1; }
std::string_view to_string(Team t);
std::optional<Team> team_from_name(std::string_view s);

inline constexpr int kTicksPerDecision = 8;
inline constexpr int kMaxDecisionSteps = 600;
inline constexpr Milli kDecisionMs = 500;

/// Length of engine sub-tick `tick` in ms. Alternates 62/63 so that every
/// decision step spans exactly kDecisionMs.
constexpr Milli subtick_ms(std::int64_t tick) {
    return ((tick + 1) * kDecisionMs) / kTicksPerDecision - (tick * kDecisionMs) / kTicksPerDecision;
}

struct Effects {
    Milli stim_ms = 0;
    Milli blink_cooldown_ms = 0;
    bool sieged = false;
    /// Remaining siege/unsiege transform time; the unit is frozen meanwhile.
    Milli transform_ms = 0;
    friend bool operator==(const Effects&, const Effects&) = default;
};

struct IdleOrder {
    friend bool operator==(const IdleOrder&, const IdleOrder&) = default;
};
struct AttackOrder {
    Uid target = 0;
    friend bool operator==(const AttackOrder&, const AttackOrder&) = default;
};
struct MoveOrder {
    Vec2 destination;
    friend bool operator==(const MoveOrder&, const MoveOrder&) = default;
};
struct HealOrder {
    Uid target = 0;
    friend bool operator==(const HealOrder&, const HealOrder&) = default;
};
using Order = std::variant<IdleOrder, AttackOrder, MoveOrder, HealOrder>;

struct UnitState {
    Uid uid = 0;
    std::shared_ptr<const UnitSpec> spec;
    Team team = Team::P1;
    Vec2 position;
    Milli health = 0;
    Milli shields = 0;
    Milli energy = 0;
    Milli cooldown_ms = 0;
    Effects effects;
    bool alive = true;
    Order order;

    const Weapon& weapon() const;
    bool mobile() const;
    bool weapon_ready() const { return cooldown_ms == 0; }
};

struct Arena {
    Milli width = to_milli(32);
    Milli height = to_milli(32);
    friend bool operator==(const Arena&, const Arena&) = default;
};

struct BattleState {
    std::int64_t tick = 0;
    int decision_step = 0;
    std::vector<UnitState> units;  // sorted by uid
    Arena arena;
    std::uint64_t rng_state = 0;
    std::string scenario_id;
    bool abilities_enabled = true;
    AbilityConfig ability_config;

    const UnitState* find(Uid uid) const;
    UnitState* find(Uid uid);
    int alive_count(Team t) const;
};

enum class Result : std::uint8_t { Ongoing, Victory, Defeat, Draw };
std::string_view to_string(Result r);

/// Outcome from P1's point of view.
struct EpisodeOutcome {
    Result result = Result::Ongoing;
    int reward = 0;
    int at_step = 0;
    bool done() const { return result != Result::Ongoing; }
};

enum class RejectReason : std::uint8_t {
    UnknownActor,
    DeadActor,
    WrongTeam,
    DuplicateActor,
    BadTarget,
    UnknownAbility,
    AbilitiesDisabled,
    NotReady,
    Immobile,
    OutOfGrid,
};
std::string_view to_string(RejectReason r);

struct Rejection {
    Team team = Team::P1;
    Action action;
    RejectReason reason = RejectReason::BadTarget;
};

struct DamageEvent {
    Uid source = 0;
    Uid target = 0;
    Milli shield_damage = 0;
    Milli health_damage = 0;
};

struct HealEvent {
    Uid source = 0;
    Uid target = 0;
    Milli amount = 0;
};

struct StepResult {
    EpisodeOutcome outcome;
    int reward = 0;
    bool done = false;
    std::vector<Rejection> rejections;
    std::vector<DamageEvent> damage;
    std::vector<HealEvent> heals;
};

/// Per-hit damage before application. Armor is bypassed while the target
/// still has shields. Throws CannotTarget when the weapon cannot reach the
/// target's layer.
Milli compute_damage(const Weapon& weapon, const UnitState& target);
Milli compute_damage(const UnitState& attacker, const UnitState& target);

/// Installs both action sets (P1 first) and advances one decision step.
/// Invalid actions are dropped and reported; they never abort the step.
StepResult apply_step(BattleState& state, const ActionSet& p1, const ActionSet& p2);

EpisodeOutcome check_termination(const BattleState& state);

/// Attack the nearest targetable enemy in range, else head for the nearest
/// enemy along the dominant axis. Deterministic; ties go to the lowest uid.
ActionSet builtin_opponent(const BattleState& state, Team team);

/// Checks that the actor may receive this action now.
std::optional<RejectReason> validate_action(const BattleState& state, Team team, const Action& a);

/// Stable 64-bit digest of the full state, as 16 hex digits.
std::string state_digest(const BattleState& state);

}  // namespace ava
