#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ava {

using Uid = std::uint32_t;

inline constexpr int kGridSize = 10;

enum class Direction : std::uint8_t { Up, Right, Down, Left };

struct GridCell {
    int x = 1;
    int y = 1;
    friend bool operator==(const GridCell&, const GridCell&) = default;
};

constexpr bool in_grid(GridCell c) { return c.x >= 1 && c.x <= kGridSize && c.y >= 1 && c.y <= kGridSize; }

struct AttackAction {
    Uid actor = 0;
    Uid target = 0;
    friend bool operator==(const AttackAction&, const AttackAction&) = default;
};

struct MoveGridAction {
    Uid actor = 0;
    GridCell cell;
    friend bool operator==(const MoveGridAction&, const MoveGridAction&) = default;
};

struct MoveDirAction {
    Uid actor = 0;
    Direction dir = Direction::Up;
    friend bool operator==(const MoveDirAction&, const MoveDirAction&) = default;
};

using AbilityTarget = std::variant<std::monostate, Uid, GridCell>;

struct AbilityAction {
    Uid actor = 0;
    std::string ability;
    AbilityTarget target;
    friend bool operator==(const AbilityAction&, const AbilityAction&) = default;
};

using Action = std::variant<AttackAction, MoveGridAction, MoveDirAction, AbilityAction>;
using ActionSet = std::vector<Action>;

Uid actor_of(const Action& a);

/// Why a textual action line was not understood.
enum class ParseError : std::uint8_t { BadVerb, BadArity, BadNumber, OutOfGrid, BadDirection };

std::string_view to_string(ParseError e);
std::string_view to_string(Direction d);
std::optional<Direction> direction_from_name(std::string_view s);

struct ParsedLine {
    std::optional<Action> action;
    std::optional<ParseError> error;
    bool ok() const { return action.has_value(); }
};

/// Total over arbitrary input. Grammar (whitespace-tolerant, verbs and
/// directions case-insensitive):
///   Attack <uid> <uid>
///   Move <uid> <x> <y>          x, y in 1..10
///   Move <uid> <UP|RIGHT|DOWN|LEFT>
///   Ability <uid> <name> [<uid> | <x> <y>]
ParsedLine parse_action_line(std::string_view line);

/// Canonical surface form; parse_action_line(format_action(a)) == a.
std::string format_action(const Action& a);

std::vector<std::string> format_actions(const ActionSet& set);

}  // namespace ava
