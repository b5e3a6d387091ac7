#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "avacraft/battle.hpp"
#include "avacraft/units.hpp"

namespace ava {

enum class Mode : std::uint8_t { PvE, PvP };
std::string_view to_string(Mode m);

struct SpawnRegion {
    Vec2 min;
    Vec2 max;
    friend bool operator==(const SpawnRegion&, const SpawnRegion&) = default;
};

struct UnitGroup {
    std::string class_name;
    int count = 0;
    SpawnRegion region;
};

struct ScenarioSpec {
    std::string id;
    Mode mode = Mode::PvE;
    std::vector<UnitGroup> p1_units;
    std::vector<UnitGroup> p2_units;
    Arena arena;
    bool abilities_enabled = false;
    std::string description;

    int unit_count(Team t) const;
    /// Both sides field the same classes in the same numbers.
    bool is_mirror() const;
};

struct ScenarioSummary {
    std::string id;
    Mode mode;
    std::string description;
};

/// Parses one scenario file and checks it against the unit catalog.
/// Throws SchemaError or MissingClass.
ScenarioSpec parse_scenario_file(const std::filesystem::path& path, const UnitCatalog& units);

/// The bundled scenario set: an index file plus one file per scenario.
class ScenarioCatalog {
public:
    /// Loads `<dir>/index.json` and every scenario it lists.
    static ScenarioCatalog load(const std::filesystem::path& dir, const UnitCatalog& units);

    /// Throws UnknownScenario.
    const ScenarioSpec& get(std::string_view id) const;
    bool contains(std::string_view id) const;

    /// Sorted by id.
    std::vector<ScenarioSummary> list() const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, ScenarioSpec, std::less<>> specs_;
};

/// Scenarios the bundled catalog is required to provide.
const std::vector<std::string>& required_scenarios();

/// Deterministic jittered-lattice placement; uids follow spawn order from 1.
/// Throws SpawnOverflow when a region cannot hold its units.
BattleState instantiate(const ScenarioSpec& spec, const UnitCatalog& units, std::uint64_t seed);

inline constexpr Milli kSpawnPitch = 1200;
inline constexpr Milli kSpawnJitter = 100;

}  // namespace ava
