#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "avacraft/error.hpp"
#include "fixtures.hpp"

using namespace ava;

TEST_CASE("catalog carries the cited unit stats") {
    const auto& cat = fixtures::units();
    CHECK(cat["Marine"].max_health == 45'000);
    CHECK(cat["Marine"].movement_speed == 3'150);
    CHECK(cat["Zergling"].max_health == 35'000);
    for (const auto& name : required_unit_classes()) CHECK(cat.contains(name));
}

TEST_CASE("catalog cross-field invariants hold for every class") {
    const auto& cat = fixtures::units();
    for (const auto& name : cat.class_names()) {
        const auto& s = cat[name];
        CAPTURE(name);
        CHECK(s.max_health > 0);
        CHECK(s.armor >= 0);
        CHECK(s.weapon.range >= 0);
        CHECK(s.movement_speed >= 0);
        if (s.weapon.damage > 0) CHECK(s.weapon.cooldown_ms > 0);
        for (auto a : s.abilities) CHECK(ability_from_name(ability_name(a)) == a);
    }
}

TEST_CASE("missing class lookup throws") { CHECK_THROWS_AS(fixtures::units().get("Dragoon"), MissingClass); }

namespace {
std::filesystem::path write_temp(const nlohmann::json& doc, const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << doc.dump();
    return p;
}
nlohmann::json bundled() {
    std::ifstream in(data_dir() / "units.json");
    return nlohmann::json::parse(in);
}
}  // namespace

TEST_CASE("loader rejects broken invariants with the offending field") {
    auto doc = bundled();
    for (auto& u : doc["units"])
        if (u["class"] == "Marine") u["health"] = 0;
    try {
        load_unit_specs(write_temp(doc, "ava_units_bad_hp.json"));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("health") != std::string::npos);
    }
}

TEST_CASE("loader rejects an unknown ability identifier") {
    auto doc = bundled();
    for (auto& u : doc["units"])
        if (u["class"] == "Marine") u["abilities"] = {"PsiStorm"};
    CHECK_THROWS_AS(load_unit_specs(write_temp(doc, "ava_units_bad_ability.json")), SchemaError);
}

TEST_CASE("loader requires every catalog class") {
    auto doc = bundled();
    auto& arr = doc["units"];
    for (auto it = arr.begin(); it != arr.end(); ++it)
        if ((*it)["class"] == "Warp Prism") {
            arr.erase(it);
            break;
        }
    CHECK_THROWS_AS(load_unit_specs(write_temp(doc, "ava_units_missing.json")), SchemaError);
}
