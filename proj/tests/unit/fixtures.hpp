#pragma once

#include "avacraft/paths.hpp"
#include "avacraft/scenario.hpp"
#include "avacraft/units.hpp"

namespace fixtures {

inline const ava::UnitCatalog& units() {
    static const ava::UnitCatalog catalog = ava::load_unit_specs(ava::data_dir() / "units.json");
    return catalog;
}

inline const ava::ScenarioCatalog& scenarios() {
    static const ava::ScenarioCatalog catalog = ava::ScenarioCatalog::load(ava::data_dir() / "scenarios", units());
    return catalog;
}

inline ava::BattleState start(const std::string& id, std::uint64_t seed = 1) {
    return ava::instantiate(scenarios().get(id), units(), seed);
}

/// Single-unit-per-side state with explicit positions, for hand-built engine cases.
inline ava::UnitState make_unit(ava::Uid uid, const std::string& cls, ava::Team team, ava::Vec2 pos) {
    const auto spec = units().get(cls);
    ava::UnitState u;
    u.uid = uid;
    u.spec = spec;
    u.team = team;
    u.position = pos;
    u.health = spec->max_health;
    u.shields = spec->max_shields;
    u.energy = spec->max_energy;
    return u;
}

inline ava::BattleState empty_state() {
    ava::BattleState s;
    s.ability_config = units().abilities();
    s.abilities_enabled = true;
    s.scenario_id = "custom";
    return s;
}

inline ava::Vec2 at(double x, double y) {
    return {static_cast<ava::Milli>(x * 1000.0 + (x >= 0 ? 0.5 : -0.5)),
            static_cast<ava::Milli>(y * 1000.0 + (y >= 0 ? 0.5 : -0.5))};
}

}  // namespace fixtures

#include "avacraft/knowledge.hpp"

namespace fixtures {
inline const ava::KnowledgeStore& knowledge() {
    static const ava::KnowledgeStore store = ava::KnowledgeStore::load(ava::data_dir() / "knowledge", units());
    return store;
}
}  // namespace fixtures
