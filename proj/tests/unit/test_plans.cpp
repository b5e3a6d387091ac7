#include <doctest.h>

#include "fixtures.hpp"

using namespace ava;

namespace {
const char* kLatexPlan = R"(\{
    ``primary\_skill'': \{
        ``name'': ``Focus Fire'',
        ``description'': ``Concentrating damage on specific targets'',
        ``steps'': [
            ``Select highest priority target'',
            ``Command all units to attack the same target''
        ]
    \},
    ``secondary\_skills'': [...]
\})";

const char* kLatexPriorities = R"(Unit: Marine\_1 (Tag: 7) \\
Reason: Aligning with our Focus Fire strategy, this unit's low health (45/45) makes it an ideal concentrated target.

Unit: Ghost\_1 (Tag: 9) \\
Reason: Can severely impact our units with EMP or Snipe abilities.)";
}  // namespace

TEST_CASE("LaTeX-format plan block parses") {
    auto plan = parse_skill_plan(kLatexPlan);
    REQUIRE(plan);
    CHECK(plan->primary_skill.name == "Focus Fire");
    CHECK(plan->primary_skill.steps.size() == 2);
    CHECK(plan->secondary_skills.empty());
}

TEST_CASE("plan parsing tolerates prose, fences and curly quotes") {
    auto plan = parse_skill_plan(
        "Here is my plan:\n```json\n{\xE2\x80\x9Cprimary_skill\xE2\x80\x9D: {\"name\": \"Kite\", \"steps\": [\"back off\",],},"
        " \"secondary_skills\": [{\"name\": \"Focus Fire\", \"steps\": [\"shoot\"]}]}\n```\nGood luck.");
    REQUIRE(plan);
    CHECK(plan->primary_skill.name == "Kite");
    REQUIRE(plan->secondary_skills.size() == 1);
    CHECK(plan->secondary_skills[0].name == "Focus Fire");
}

TEST_CASE("plan parsing rejects incomplete plans") {
    CHECK_FALSE(parse_skill_plan("no json here"));
    CHECK_FALSE(parse_skill_plan(R"({"primary_skill": {"name": "", "steps": ["a"]}})"));
    CHECK_FALSE(parse_skill_plan(R"({"primary_skill": {"name": "X", "steps": []}})"));
    CHECK_FALSE(parse_skill_plan("{ unbalanced"));
    CHECK(default_plan().primary_skill.name == "Focus Fire");
}

TEST_CASE("LaTeX-format priorities parse in rank order") {
    auto p = parse_priorities(kLatexPriorities);
    REQUIRE(p.size() == 2);
    CHECK(p[0].class_label == "Marine_1");
    CHECK(p[0].tag == 7);
    CHECK(p[0].reason.find("Focus Fire") != std::string::npos);
    CHECK(p[1].class_label == "Ghost_1");
    CHECK(p[1].tag == 9);
}

TEST_CASE("priority filtering keeps living enemies only") {
    auto s = fixtures::start("mixed_units", 1);
    auto raw = parse_priorities("Unit: Ghost_1 (Tag: 9)\nUnit: Marine_1 (Tag: 7)\nUnit: Ghost_1 (Tag: 9)\n"
                                "Unit: Zealot_1 (Tag: 1)\nUnit: Nothing (Tag: 999)\n**Unit:** Tank (Tag: 99999999999)");
    auto p = filter_priorities(raw, s, Team::P1);
    REQUIRE(p.size() == 2);
    CHECK(p[0].tag == 9);
    CHECK(p[0].class_name == "Ghost");
    CHECK(p[1].tag == 7);
    s.find(7)->alive = false;
    CHECK(filter_priorities(raw, s, Team::P1).size() == 1);
}

TEST_CASE("role lines") {
    auto r = parse_roles("Role: 3 -> Protector\nrole: 4 -> skirmisher\nRole: 3 -> Support\nRole: 5 -> Wizard");
    CHECK(r.size() == 2);
    CHECK(r.at(3) == Role::Protector);
    CHECK(r.at(4) == Role::Skirmisher);

    auto s = fixtures::start("3m", 1);
    auto all = complete_roles(parse_roles(""), s, Team::P1);
    CHECK(all.size() == 3);
    for (const auto& [uid, role] : all) CHECK(role == Role::Assault);
    CHECK(complete_roles(r, s, Team::P1).at(3) == Role::Protector);
}

TEST_CASE("action blocks keep the first action per actor") {
    auto parsed = parse_action_block("Actions:\n- Attack 3 7\n1. Move 2 4 5\n`Move 2 UP`\nMove 2 11 5\n\nAttack 9 1", {1, 2, 3});
    REQUIRE(parsed.actions.size() == 2);
    CHECK(format_action(parsed.actions[0]) == "Attack 3 7");
    CHECK(format_action(parsed.actions[1]) == "Move 2 4 5");
    REQUIRE(parsed.dropped.size() == 4);
    CHECK(parsed.dropped[0].reason == "BadVerb");
    CHECK(parsed.dropped[1].reason == "DuplicateActor");
    CHECK(parsed.dropped[2].reason == "OutOfGrid");
    CHECK(parsed.dropped[3].reason == "UnknownActor");
}
