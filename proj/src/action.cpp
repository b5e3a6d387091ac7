#include "avacraft/action.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace ava {

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::optional<std::uint32_t> parse_uint(std::string_view tok) {
    if (tok.empty() || tok.size() > 10) return std::nullopt;
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || v > 0xFFFFFFFFull) return std::nullopt;
    return static_cast<std::uint32_t>(v);
}

bool is_identifier(std::string_view tok) {
    if (tok.empty() || !(std::isalpha(static_cast<unsigned char>(tok[0])) || tok[0] == '_')) return false;
    return std::all_of(tok.begin(), tok.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

ParsedLine fail(ParseError e) { return ParsedLine{std::nullopt, e}; }
ParsedLine done(Action a) { return ParsedLine{std::move(a), std::nullopt}; }

std::optional<ParseError> parse_cell(std::string_view xs, std::string_view ys, GridCell& out) {
    auto x = parse_uint(xs);
    auto y = parse_uint(ys);
    if (!x || !y) return ParseError::BadNumber;
    if (*x > 1000 || *y > 1000) return ParseError::OutOfGrid;
    out = GridCell{static_cast<int>(*x), static_cast<int>(*y)};
    if (!in_grid(out)) return ParseError::OutOfGrid;
    return std::nullopt;
}

}  // namespace

Uid actor_of(const Action& a) {
    return std::visit([](const auto& v) { return v.actor; }, a);
}

std::string_view to_string(ParseError e) {
    switch (e) {
        case ParseError::BadVerb: return "BadVerb";
        case ParseError::BadArity: return "BadArity";
        case ParseError::BadNumber: return "BadNumber";
        case ParseError::OutOfGrid: return "OutOfGrid";
        case ParseError::BadDirection: return "BadDirection";
    }
    return "?";
}

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::Up: return "UP";
        case Direction::Right: return "RIGHT";
        case Direction::Down: return "DOWN";
        case Direction::Left: return "LEFT";
    }
    return "?";
}

std::optional<Direction> direction_from_name(std::string_view s) {
    for (auto d : {Direction::Up, Direction::Right, Direction::Down, Direction::Left})
        if (iequals(s, to_string(d))) return d;
    return std::nullopt;
}

ParsedLine parse_action_line(std::string_view line) {
    const auto tok = split_ws(line);
    if (tok.empty()) return fail(ParseError::BadVerb);
    const auto verb = tok[0];

    if (iequals(verb, "Attack")) {
        if (tok.size() != 3) return fail(ParseError::BadArity);
        auto actor = parse_uint(tok[1]);
        auto target = parse_uint(tok[2]);
        if (!actor || !target) return fail(ParseError::BadNumber);
        return done(AttackAction{*actor, *target});
    }

    if (iequals(verb, "Move")) {
        if (tok.size() != 3 && tok.size() != 4) return fail(ParseError::BadArity);
        auto actor = parse_uint(tok[1]);
        if (!actor) return fail(ParseError::BadNumber);
        if (tok.size() == 3) {
            if (auto d = direction_from_name(tok[2])) return done(MoveDirAction{*actor, *d});
            return fail(parse_uint(tok[2]) ? ParseError::BadArity : ParseError::BadDirection);
        }
        GridCell cell;
        if (auto e = parse_cell(tok[2], tok[3], cell)) return fail(*e);
        return done(MoveGridAction{*actor, cell});
    }

    if (iequals(verb, "Ability")) {
        if (tok.size() < 3 || tok.size() > 5) return fail(ParseError::BadArity);
        auto actor = parse_uint(tok[1]);
        if (!actor) return fail(ParseError::BadNumber);
        if (!is_identifier(tok[2])) return fail(ParseError::BadVerb);
        AbilityAction a{*actor, std::string(tok[2]), std::monostate{}};
        if (tok.size() == 4) {
            auto target = parse_uint(tok[3]);
            if (!target) return fail(ParseError::BadNumber);
            a.target = *target;
        } else if (tok.size() == 5) {
            GridCell cell;
            if (auto e = parse_cell(tok[3], tok[4], cell)) return fail(*e);
            a.target = cell;
        }
        return done(std::move(a));
    }

    return fail(ParseError::BadVerb);
}

std::string format_action(const Action& a) {
    struct Formatter {
        std::string operator()(const AttackAction& v) const {
            return "Attack " + std::to_string(v.actor) + " " + std::to_string(v.target);
        }
        std::string operator()(const MoveGridAction& v) const {
            return "Move " + std::to_string(v.actor) + " " + std::to_string(v.cell.x) + " " + std::to_string(v.cell.y);
        }
        std::string operator()(const MoveDirAction& v) const {
            return "Move " + std::to_string(v.actor) + " " + std::string(to_string(v.dir));
        }
        std::string operator()(const AbilityAction& v) const {
            std::string s = "Ability " + std::to_string(v.actor) + " " + v.ability;
            if (const auto* uid = std::get_if<Uid>(&v.target)) s += " " + std::to_string(*uid);
            if (const auto* cell = std::get_if<GridCell>(&v.target))
                s += " " + std::to_string(cell->x) + " " + std::to_string(cell->y);
            return s;
        }
    };
    return std::visit(Formatter{}, a);
}

std::vector<std::string> format_actions(const ActionSet& set) {
    std::vector<std::string> out;
    out.reserve(set.size());
    for (const auto& a : set) out.push_back(format_action(a));
    return out;
}

}  // namespace ava
