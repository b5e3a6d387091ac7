#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avacraft/battle.hpp"

namespace ava {

struct Skill {
    std::string name;
    std::string description;
    std::vector<std::string> steps;
    friend bool operator==(const Skill&, const Skill&) = default;
};

struct SkillPlan {
    Skill primary_skill;
    std::vector<Skill> secondary_skills;
    friend bool operator==(const SkillPlan&, const SkillPlan&) = default;
};

/// Plan used when the planner output cannot be parsed.
SkillPlan default_plan();

struct PriorityEntry {
    std::string class_label;  // as written by the backend, e.g. "Marine_1"
    Uid tag = 0;
    std::string reason;
    std::string class_name;  // resolved from the state by filter_priorities
    friend bool operator==(const PriorityEntry&, const PriorityEntry&) = default;
};

/// Ordered by rank, highest priority first.
using PriorityAssessment = std::vector<PriorityEntry>;

enum class Role : std::uint8_t { Assault, Skirmisher, Protector, Support };
std::string_view to_string(Role r);
std::optional<Role> role_from_name(std::string_view s);

using RoleAssignment = std::map<Uid, Role>;

/// Extracts the first JSON-like object from prose and reads a skill plan
/// from it. Tolerates LaTeX-style and typographic quotes, "[...]"
/// placeholders, escaped underscores and trailing commas. Returns nullopt
/// when no valid plan (non-empty name and steps) is found.
std::optional<SkillPlan> parse_skill_plan(std::string_view text);

/// Reads "Unit: <label> (Tag: <n>)" lines, each optionally followed by a
/// "Reason: ..." line. Response order is the rank. No validity filtering.
PriorityAssessment parse_priorities(std::string_view text);

/// Keeps entries whose tag is a living enemy of `team`, first occurrence
/// only, and fills in class_name.
PriorityAssessment filter_priorities(const PriorityAssessment& raw, const BattleState& state, Team team);

/// Reads "Role: <uid> -> <role>" lines; later lines for the same uid are ignored.
RoleAssignment parse_roles(std::string_view text);

/// Restricts to living units of `team`; unassigned ones become Assault.
RoleAssignment complete_roles(const RoleAssignment& parsed, const BattleState& state, Team team);

struct LineReport {
    std::string line;
    std::string reason;
};

struct ParsedActions {
    ActionSet actions;
    std::vector<LineReport> dropped;
};

/// One action per non-empty line; list bullets and numbering are stripped.
/// Lines that fail the grammar, name a uid outside `friendly` or repeat an
/// actor are dropped with a report. Empty `friendly` disables that check.
ParsedActions parse_action_block(std::string_view text, const std::vector<Uid>& friendly = {});

}  // namespace ava
