#include "avacraft/plans.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>
#include <set>

#include <json.hpp>

namespace ava {

using nlohmann::json;

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

std::string unescape_latex(std::string s) {
    replace_all(s, "\\textunderscore ", "_");
    replace_all(s, "\\textunderscore", "_");
    replace_all(s, "\\_", "_");
    return s;
}

std::string normalise_plan_text(std::string_view text) {
    std::string s = unescape_latex(std::string(text));
    replace_all(s, "``", "\"");
    replace_all(s, "''", "\"");
    replace_all(s, "\xE2\x80\x9C", "\"");  // left double quote
    replace_all(s, "\xE2\x80\x9D", "\"");  // right double quote
    replace_all(s, "\xE2\x80\x98", "'");
    replace_all(s, "\xE2\x80\x99", "'");
    replace_all(s, "\\{", "{");
    replace_all(s, "\\}", "}");
    return s;
}

// Balanced {...} spans starting at each top-level '{', string-aware.
std::vector<std::string> object_candidates(const std::string& s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while ((i = s.find('{', i)) != std::string::npos) {
        int depth = 0;
        bool in_str = false;
        std::size_t j = i;
        for (; j < s.size(); ++j) {
            const char c = s[j];
            if (in_str) {
                if (c == '\\') ++j;
                else if (c == '"') in_str = false;
            } else if (c == '"') {
                in_str = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}' && --depth == 0) {
                break;
            }
        }
        if (j >= s.size()) break;
        out.push_back(s.substr(i, j - i + 1));
        i = j + 1;
    }
    return out;
}

std::string relax_json(std::string s) {
    static const std::regex ellipsis_list(R"(\[\s*(\.\.\.|…)\s*\])");
    static const std::regex trailing_comma(R"(,(\s*[}\]]))");
    s = std::regex_replace(s, ellipsis_list, "[]");
    return std::regex_replace(s, trailing_comma, "$1");
}

std::optional<Skill> read_skill(const json& j) {
    if (!j.is_object()) return std::nullopt;
    Skill sk;
    const auto name = j.find("name");
    if (name == j.end() || !name->is_string()) return std::nullopt;
    sk.name = name->get<std::string>();
    if (auto d = j.find("description"); d != j.end() && d->is_string()) sk.description = d->get<std::string>();
    if (auto st = j.find("steps"); st != j.end() && st->is_array())
        for (const auto& step : *st)
            if (step.is_string()) sk.steps.push_back(step.get<std::string>());
    if (sk.name.empty() || sk.steps.empty()) return std::nullopt;
    return sk;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const auto end = nl == std::string_view::npos ? text.size() : nl;
        out.push_back(text.substr(start, end - start));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

// Drops markdown emphasis, list bullets and LaTeX line breaks.
std::string clean_line(std::string_view raw) {
    std::string s = unescape_latex(std::string(trim(raw)));
    std::erase(s, '*');
    std::erase(s, '`');
    auto v = trim(s);
    if (v.size() >= 2 && v.substr(v.size() - 2) == "\\\\") v = trim(v.substr(0, v.size() - 2));
    if (!v.empty() && (v.front() == '-' || v.front() == '#')) v = trim(v.substr(v.find_first_not_of("-# ")));
    std::size_t digits = 0;
    while (digits < v.size() && v[digits] >= '0' && v[digits] <= '9') ++digits;
    if (digits > 0 && digits + 1 < v.size() && (v[digits] == '.' || v[digits] == ')') && v[digits + 1] == ' ')
        v = trim(v.substr(digits + 1));
    return std::string(v);
}

std::optional<Uid> to_uid(const std::string& digits) {
    Uid v = 0;
    const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
    return v;
}

}  // namespace

SkillPlan default_plan() {
    SkillPlan p;
    p.primary_skill = {"Focus Fire", "Concentrating damage on specific targets",
                       {"Select highest priority target", "Command all units to attack the same target"}};
    return p;
}

std::string_view to_string(Role r) {
    switch (r) {
        case Role::Assault: return "Assault";
        case Role::Skirmisher: return "Skirmisher";
        case Role::Protector: return "Protector";
        case Role::Support: return "Support";
    }
    return "?";
}

std::optional<Role> role_from_name(std::string_view s) {
    for (Role r : {Role::Assault, Role::Skirmisher, Role::Protector, Role::Support}) {
        const auto name = to_string(r);
        if (name.size() == s.size() &&
            std::equal(name.begin(), name.end(), s.begin(), [](char a, char b) { return std::tolower(a) == std::tolower(b); }))
            return r;
    }
    return std::nullopt;
}

std::optional<SkillPlan> parse_skill_plan(std::string_view text) {
    const std::string norm = normalise_plan_text(text);
    for (const auto& cand : object_candidates(norm)) {
        const json doc = json::parse(relax_json(cand), nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) continue;
        const auto primary = doc.find("primary_skill");
        if (primary == doc.end()) continue;
        auto sk = read_skill(*primary);
        if (!sk) continue;
        SkillPlan plan;
        plan.primary_skill = std::move(*sk);
        if (auto sec = doc.find("secondary_skills"); sec != doc.end() && sec->is_array())
            for (const auto& s : *sec)
                if (auto parsed = read_skill(s)) plan.secondary_skills.push_back(std::move(*parsed));
        return plan;
    }
    return std::nullopt;
}

PriorityAssessment parse_priorities(std::string_view text) {
    static const std::regex unit_re(R"(^Unit\s*:\s*(.+?)\s*\(\s*Tag\s*:\s*(\d+)\s*\))", std::regex::icase);
    static const std::regex reason_re(R"(^Reason\s*:\s*(.*)$)", std::regex::icase);
    PriorityAssessment out;
    bool awaiting_reason = false;
    for (const auto raw : lines_of(text)) {
        const std::string line = clean_line(raw);
        std::smatch m;
        if (std::regex_search(line, m, unit_re)) {
            const auto tag = to_uid(m[2].str());
            if (!tag) {
                awaiting_reason = false;
                continue;
            }
            out.push_back({m[1].str(), *tag, "", ""});
            awaiting_reason = true;
        } else if (awaiting_reason && std::regex_search(line, m, reason_re)) {
            out.back().reason = std::string(trim(m[1].str()));
            awaiting_reason = false;
        }
    }
    return out;
}

PriorityAssessment filter_priorities(const PriorityAssessment& raw, const BattleState& state, Team team) {
    PriorityAssessment out;
    std::set<Uid> seen;
    for (const auto& p : raw) {
        const auto* u = state.find(p.tag);
        if (u == nullptr || !u->alive || u->team == team || !seen.insert(p.tag).second) continue;
        auto e = p;
        e.class_name = u->spec->class_name;
        out.push_back(std::move(e));
    }
    return out;
}

RoleAssignment parse_roles(std::string_view text) {
    static const std::regex role_re(R"(^Role\s*:\s*(\d+)\s*(?:->|=>|\xE2\x86\x92|:|=)\s*([A-Za-z]+))", std::regex::icase);
    RoleAssignment out;
    for (const auto raw : lines_of(text)) {
        const std::string line = clean_line(raw);
        std::smatch m;
        if (!std::regex_search(line, m, role_re)) continue;
        const auto uid = to_uid(m[1].str());
        const auto role = role_from_name(m[2].str());
        if (uid && role) out.emplace(*uid, *role);
    }
    return out;
}

RoleAssignment complete_roles(const RoleAssignment& parsed, const BattleState& state, Team team) {
    RoleAssignment out;
    for (const auto& u : state.units) {
        if (!u.alive || u.team != team) continue;
        const auto it = parsed.find(u.uid);
        out[u.uid] = it == parsed.end() ? Role::Assault : it->second;
    }
    return out;
}

ParsedActions parse_action_block(std::string_view text, const std::vector<Uid>& friendly) {
    ParsedActions out;
    std::set<Uid> used;
    for (const auto raw : lines_of(text)) {
        const std::string line = clean_line(raw);
        if (line.empty()) continue;
        const auto parsed = parse_action_line(line);
        if (!parsed.action) {
            out.dropped.push_back({line, std::string(to_string(*parsed.error))});
            continue;
        }
        const Uid actor = actor_of(*parsed.action);
        if (!friendly.empty() && std::find(friendly.begin(), friendly.end(), actor) == friendly.end()) {
            out.dropped.push_back({line, "UnknownActor"});
            continue;
        }
        if (!used.insert(actor).second) {
            out.dropped.push_back({line, "DuplicateActor"});
            continue;
        }
        out.actions.push_back(*parsed.action);
    }
    return out;
}

}  // namespace ava
