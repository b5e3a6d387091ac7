#include "avacraft/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "avacraft/error.hpp"

namespace ava {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

Milli milli_of(const json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where, "expected a number");
    return static_cast<Milli>(std::llround(v.get<double>() * 1000.0));
}

SpawnRegion read_region(const json& r, const std::string& where) {
    if (!r.is_array() || r.size() != 4) throw SchemaError(where, "expected [x0, y0, x1, y1]");
    SpawnRegion out{{milli_of(r[0], where), milli_of(r[1], where)}, {milli_of(r[2], where), milli_of(r[3], where)}};
    if (out.min.x >= out.max.x || out.min.y >= out.max.y) throw SchemaError(where, "empty region");
    return out;
}

std::vector<UnitGroup> read_side(const json& doc, const std::string& key, const Arena& arena, const UnitCatalog& units) {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_array() || it->empty()) throw SchemaError(key, "expected a non-empty array");
    std::vector<UnitGroup> out;
    for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& g = (*it)[i];
        const std::string where = key + "[" + std::to_string(i) + "]";
        UnitGroup group;
        group.class_name = g.at("class").get<std::string>();
        if (!units.contains(group.class_name)) throw MissingClass(group.class_name);
        group.count = g.at("count").get<int>();
        if (group.count < 1) throw SchemaError(where + ".count", "must be >= 1");
        group.region = read_region(g.at("region"), where + ".region");
        if (group.region.min.x < 0 || group.region.min.y < 0 || group.region.max.x > arena.width ||
            group.region.max.y > arena.height)
            throw SchemaError(where + ".region", "outside the arena");
        out.push_back(std::move(group));
    }
    return out;
}

void place(const std::vector<UnitGroup>& groups, Team team, const UnitCatalog& units, std::uint64_t& rng, BattleState& out) {
    // Groups sharing a region share one lattice, filled in spawn order.
    std::vector<SpawnRegion> regions;
    for (const auto& g : groups)
        if (std::find(regions.begin(), regions.end(), g.region) == regions.end()) regions.push_back(g.region);

    std::vector<std::pair<std::size_t, std::vector<Vec2>>> slots_per_region;
    for (const auto& region : regions) {
        int n = 0;
        for (const auto& g : groups)
            if (g.region == region) n += g.count;
        const Milli w = region.max.x - region.min.x;
        const Milli h = region.max.y - region.min.y;
        const int cols_max = static_cast<int>(w / kSpawnPitch);
        const int rows_max = static_cast<int>(h / kSpawnPitch);
        if (static_cast<std::int64_t>(cols_max) * rows_max < n)
            throw SpawnOverflow("region holds " + std::to_string(cols_max * rows_max) + " units, " +
                                std::to_string(n) + " requested");
        int side = static_cast<int>(isqrt(n));
        if (side * side < n) ++side;
        int cols = std::min(cols_max, side);
        int rows = (n + cols - 1) / cols;
        if (rows > rows_max) {
            rows = rows_max;
            cols = (n + rows - 1) / rows;
        }
        const Milli x0 = region.min.x + (w - cols * kSpawnPitch) / 2 + kSpawnPitch / 2;
        const Milli y0 = region.min.y + (h - rows * kSpawnPitch) / 2 + kSpawnPitch / 2;
        std::vector<Vec2> slots;
        for (int k = 0; k < n; ++k) slots.push_back({x0 + (k % cols) * kSpawnPitch, y0 + (k / cols) * kSpawnPitch});
        slots_per_region.emplace_back(0, std::move(slots));
    }

    for (const auto& g : groups) {
        const auto r = static_cast<std::size_t>(std::find(regions.begin(), regions.end(), g.region) - regions.begin());
        auto& [next, slots] = slots_per_region[r];
        const auto spec = units.get(g.class_name);
        for (int i = 0; i < g.count; ++i) {
            Vec2 p = slots[next++];
            p.x += static_cast<Milli>(splitmix64(rng) % (2 * kSpawnJitter + 1)) - kSpawnJitter;
            p.y += static_cast<Milli>(splitmix64(rng) % (2 * kSpawnJitter + 1)) - kSpawnJitter;
            UnitState u;
            u.uid = static_cast<Uid>(out.units.size() + 1);
            u.spec = spec;
            u.team = team;
            u.position = p;
            u.health = spec->max_health;
            u.shields = spec->max_shields;
            u.energy = spec->max_energy;
            out.units.push_back(std::move(u));
        }
    }
}

}  // namespace

std::string_view to_string(Mode m) { return m == Mode::PvE ? "PvE" : "PvP"; }

int ScenarioSpec::unit_count(Team t) const {
    int n = 0;
    for (const auto& g : t == Team::P1 ? p1_units : p2_units) n += g.count;
    return n;
}

bool ScenarioSpec::is_mirror() const {
    auto tally = [](const std::vector<UnitGroup>& groups) {
        std::map<std::string, int> m;
        for (const auto& g : groups) m[g.class_name] += g.count;
        return m;
    };
    return tally(p1_units) == tally(p2_units);
}

ScenarioSpec parse_scenario_file(const std::filesystem::path& path, const UnitCatalog& units) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string(), "cannot open file");
    try {
        const json doc = json::parse(in);
        if (doc.value("schema", "") != "avacraft.scenario") throw SchemaError("schema", "expected 'avacraft.scenario'");
        if (doc.value("version", 0) != 1) throw SchemaError("version", "unsupported version");
        ScenarioSpec s;
        s.id = doc.at("id").get<std::string>();
        const auto mode = doc.at("mode").get<std::string>();
        if (mode == "PvE") s.mode = Mode::PvE;
        else if (mode == "PvP") s.mode = Mode::PvP;
        else throw SchemaError("mode", "expected PvE or PvP");
        const auto& arena = doc.at("arena");
        s.arena = Arena{milli_of(arena.at("width"), "arena.width"), milli_of(arena.at("height"), "arena.height")};
        if (s.arena.width <= 0 || s.arena.height <= 0) throw SchemaError("arena", "must be positive");
        s.abilities_enabled = doc.at("abilities_enabled").get<bool>();
        s.description = doc.value("description", "");
        s.p1_units = read_side(doc, "p1_units", s.arena, units);
        s.p2_units = read_side(doc, "p2_units", s.arena, units);
        return s;
    } catch (const json::exception& e) {
        throw SchemaError(path.string(), e.what());
    }
}

ScenarioCatalog ScenarioCatalog::load(const std::filesystem::path& dir, const UnitCatalog& units) {
    std::ifstream in(dir / "index.json");
    if (!in) throw SchemaError((dir / "index.json").string(), "cannot open file");
    json index;
    try {
        index = json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError("index.json", e.what());
    }
    if (index.value("schema", "") != "avacraft.scenario_index") throw SchemaError("index.schema", "unexpected");
    ScenarioCatalog out;
    for (const auto& id : index.at("scenarios")) {
        auto spec = parse_scenario_file(dir / (id.get<std::string>() + ".json"), units);
        if (spec.id != id.get<std::string>()) throw SchemaError(spec.id, "file id does not match index entry");
        out.specs_.emplace(spec.id, std::move(spec));
    }
    return out;
}

const ScenarioSpec& ScenarioCatalog::get(std::string_view id) const {
    auto it = specs_.find(id);
    if (it == specs_.end()) throw UnknownScenario(std::string(id));
    return it->second;
}

bool ScenarioCatalog::contains(std::string_view id) const { return specs_.find(id) != specs_.end(); }

std::vector<ScenarioSummary> ScenarioCatalog::list() const {
    std::vector<ScenarioSummary> out;
    for (const auto& [id, s] : specs_) out.push_back({id, s.mode, s.description});
    return out;
}

std::vector<std::string> ScenarioCatalog::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : specs_) out.push_back(id);
    return out;
}

const std::vector<std::string>& required_scenarios() {
    static const std::vector<std::string> ids = {
        "3m", "2m_vs_1z", "2s_vs_1sc", "3s_vs_3z", "2s3z", "2c_vs_64zg", "6r_vs_8z", "8m_vs_2pc1wp",
        "8m1mv_vs_2st", "8m2st_vs_35zg4b", "mixed_units", "mixed_units_pvp", "8m3mr1mv1st_mirror_pvp"};
    return ids;
}

BattleState instantiate(const ScenarioSpec& spec, const UnitCatalog& units, std::uint64_t seed) {
    BattleState s;
    s.arena = spec.arena;
    s.scenario_id = spec.id;
    s.abilities_enabled = spec.abilities_enabled;
    s.ability_config = units.abilities();
    std::uint64_t rng = seed;
    place(spec.p1_units, Team::P1, units, rng, s);
    place(spec.p2_units, Team::P2, units, rng, s);
    s.rng_state = rng;
    return s;
}

}  // namespace ava
