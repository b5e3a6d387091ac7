#include <doctest.h>

#include <fstream>
#include <set>

#include "avacraft/error.hpp"
#include "fixtures.hpp"

using namespace ava;

namespace {
int count_of(const std::vector<UnitGroup>& groups, const std::string& cls) {
    int n = 0;
    for (const auto& g : groups)
        if (g.class_name == cls) n += g.count;
    return n;
}
}  // namespace

TEST_CASE("scenario compositions") {
    const auto& cat = fixtures::scenarios();
    const auto& m3 = cat.get("3m");
    CHECK(m3.mode == Mode::PvE);
    CHECK(count_of(m3.p1_units, "Marine") == 3);
    CHECK(count_of(m3.p2_units, "Marine") == 3);

    const auto& zg = cat.get("2c_vs_64zg");
    CHECK(count_of(zg.p1_units, "Colossus") == 2);
    CHECK(count_of(zg.p2_units, "Zergling") == 64);

    const auto& mixed = cat.get("mixed_units");
    for (const char* c : {"Zealot", "Immortal", "Archon", "Stalker", "Phoenix"}) CHECK(count_of(mixed.p1_units, c) >= 1);
    CHECK(mixed.unit_count(Team::P2) == 8);
    CHECK_THROWS_AS(cat.get("pvz_ht"), UnknownScenario);
}

TEST_CASE("scenario listing is sorted and complete") {
    const auto list = fixtures::scenarios().list();
    std::vector<std::string> ids;
    for (const auto& s : list) ids.push_back(s.id);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    for (const auto& id : required_scenarios()) CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
    CHECK(std::find(ids.begin(), ids.end(), "2c_vs_64zg") < std::find(ids.begin(), ids.end(), "3m"));
}

TEST_CASE("instantiation is deterministic and numbers uids from 1") {
    auto a = fixtures::start("3m", 7);
    auto b = fixtures::start("3m", 7);
    REQUIRE(a.units.size() == 6);
    for (std::size_t i = 0; i < a.units.size(); ++i) {
        CHECK(a.units[i].uid == i + 1);
        CHECK(a.units[i].position == b.units[i].position);
    }
    CHECK(state_digest(a) == state_digest(b));
    CHECK(a.tick == 0);
}

TEST_CASE("every scenario instantiates for 100 seeds inside the arena with spacing") {
    for (const auto& id : fixtures::scenarios().ids()) {
        const auto& spec = fixtures::scenarios().get(id);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto s = instantiate(spec, fixtures::units(), seed);
            CAPTURE(id);
            CHECK(static_cast<int>(s.units.size()) == spec.unit_count(Team::P1) + spec.unit_count(Team::P2));
            for (const auto& u : s.units) {
                CHECK(u.position.x >= 0);
                CHECK(u.position.x <= s.arena.width);
                CHECK(u.position.y >= 0);
                CHECK(u.position.y <= s.arena.height);
            }
            if (seed == 0) {
                for (std::size_t i = 0; i < s.units.size(); ++i)
                    for (std::size_t j = i + 1; j < s.units.size(); ++j)
                        CHECK(distance(s.units[i].position, s.units[j].position) >= 1'000);
            }
        }
    }
}

TEST_CASE("overfull regions raise SpawnOverflow") {
    auto spec = fixtures::scenarios().get("3m");
    spec.p1_units[0].count = 500;
    CHECK_THROWS_AS(instantiate(spec, fixtures::units(), 1), SpawnOverflow);
}

TEST_CASE("scenario referencing an absent class raises MissingClass") {
    const auto p = std::filesystem::temp_directory_path() / "ava_bad_scenario.json";
    std::ofstream(p) << R"({"schema": "avacraft.scenario", "version": 1, "id": "x", "mode": "PvE",
        "arena": {"width": 32, "height": 32}, "abilities_enabled": false,
        "p1_units": [{"class": "Dragoon", "count": 1, "region": [1, 1, 5, 5]}],
        "p2_units": [{"class": "Marine", "count": 1, "region": [20, 20, 25, 25]}]})";
    CHECK_THROWS_AS(parse_scenario_file(p, fixtures::units()), MissingClass);
}
