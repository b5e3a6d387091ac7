#include "avacraft/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "avacraft/error.hpp"

namespace ava {

using nlohmann::json;

namespace {

constexpr std::string_view kAbilityNames[] = {"Stimpack", "Blink", "Heal", "SiegeMode", "Unsiege"};
constexpr std::string_view kAttributeNames[] = {"Light", "Armored", "Biological", "Mechanical", "Massive", "Psionic"};

const json& require(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + "." + key, "missing");
    return *it;
}

Milli read_milli(const json& obj, const std::string& key, const std::string& where, bool optional = false) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (optional) return 0;
        throw SchemaError(where + "." + key, "missing");
    }
    if (!it->is_number()) throw SchemaError(where + "." + key, "expected a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw SchemaError(where + "." + key, "not finite");
    return static_cast<Milli>(std::llround(v * 1000.0));
}

Milli read_seconds_ms(const json& obj, const std::string& key, const std::string& where, bool optional = false) {
    return read_milli(obj, key, where, optional);
}

TargetLayers read_targets(const json& weapon, const std::string& where) {
    TargetLayers t;
    auto it = weapon.find("targets");
    if (it == weapon.end()) return t;
    if (!it->is_array()) throw SchemaError(where + ".targets", "expected an array");
    for (const auto& v : *it) {
        const auto s = v.get<std::string>();
        if (s == "Ground") t.ground = true;
        else if (s == "Air") t.air = true;
        else throw SchemaError(where + ".targets", "unknown layer '" + s + "'");
    }
    return t;
}

Splash read_splash(const json& weapon, const std::string& where) {
    auto it = weapon.find("splash");
    if (it == weapon.end() || it->is_null()) return std::monostate{};
    const std::string at = where + ".splash";
    const auto kind = require(*it, "kind", at).get<std::string>();
    if (kind == "circle") {
        CircleSplash c;
        c.on_death = it->value("on_death", false);
        const auto& rings = require(*it, "rings", at);
        if (!rings.is_array() || rings.empty()) throw SchemaError(at + ".rings", "expected a non-empty array");
        Milli last = 0;
        for (std::size_t i = 0; i < rings.size(); ++i) {
            const std::string rat = at + ".rings[" + std::to_string(i) + "]";
            SplashRing r{read_milli(rings[i], "radius", rat), require(rings[i], "percent", rat).get<int>()};
            if (r.radius <= last) throw SchemaError(rat + ".radius", "rings must have increasing radii");
            if (r.percent <= 0 || r.percent > 100) throw SchemaError(rat + ".percent", "must be in (0, 100]");
            last = r.radius;
            c.rings.push_back(r);
        }
        return c;
    }
    if (kind == "line") {
        LineSplash l{read_milli(*it, "length", at), read_milli(*it, "width", at)};
        if (l.length <= 0 || l.width <= 0) throw SchemaError(at, "line dimensions must be positive");
        return l;
    }
    throw SchemaError(at + ".kind", "unknown splash kind '" + kind + "'");
}

Weapon read_weapon(const json& w, const std::string& where) {
    Weapon out;
    out.damage = read_milli(w, "damage", where);
    out.bonus_damage = read_milli(w, "bonus", where, true);
    if (auto it = w.find("bonus_vs"); it != w.end() && !it->is_null()) {
        auto a = attribute_from_name(it->get<std::string>());
        if (!a) throw SchemaError(where + ".bonus_vs", "unknown attribute");
        out.bonus_vs = *a;
    }
    out.cooldown_ms = read_seconds_ms(w, "cooldown", where, true);
    out.range = read_milli(w, "range", where, true);
    out.targets = read_targets(w, where);
    out.splash = read_splash(w, where);
    if (out.damage < 0 || out.bonus_damage < 0) throw SchemaError(where + ".damage", "must be >= 0");
    if (out.range < 0) throw SchemaError(where + ".range", "must be >= 0");
    if (out.damage > 0 && out.cooldown_ms <= 0) throw SchemaError(where + ".cooldown", "must be > 0 for an armed weapon");
    if (out.damage > 0 && !out.targets.any()) throw SchemaError(where + ".targets", "armed weapon needs a target layer");
    return out;
}

UnitSpec read_unit(const json& u, const std::string& where) {
    UnitSpec s;
    s.class_name = require(u, "class", where).get<std::string>();
    if (s.class_name.empty()) throw SchemaError(where + ".class", "empty");
    const auto glyph = require(u, "glyph", where).get<std::string>();
    if (glyph.size() != 1 || glyph[0] < 'A' || glyph[0] > 'Z') throw SchemaError(where + ".glyph", "expected one capital letter");
    s.glyph = glyph[0];
    const auto race = require(u, "race", where).get<std::string>();
    if (race == "Terran") s.race = Race::Terran;
    else if (race == "Protoss") s.race = Race::Protoss;
    else if (race == "Zerg") s.race = Race::Zerg;
    else throw SchemaError(where + ".race", "unknown race '" + race + "'");
    s.max_health = read_milli(u, "health", where);
    s.max_shields = read_milli(u, "shields", where, true);
    s.max_energy = read_milli(u, "energy", where, true);
    s.armor = read_milli(u, "armor", where, true);
    if (auto it = u.find("weapon"); it != u.end() && !it->is_null()) s.weapon = read_weapon(*it, where + ".weapon");
    if (auto it = u.find("sieged_weapon"); it != u.end() && !it->is_null())
        s.sieged_weapon = read_weapon(*it, where + ".sieged_weapon");
    s.movement_speed = read_milli(u, "speed", where);
    for (const auto& a : u.value("attributes", json::array())) {
        auto attr = attribute_from_name(a.get<std::string>());
        if (!attr) throw SchemaError(where + ".attributes", "unknown attribute '" + a.get<std::string>() + "'");
        s.attributes.add(*attr);
    }
    s.is_flying = u.value("flying", false);
    for (const auto& a : u.value("abilities", json::array())) {
        auto id = ability_from_name(a.get<std::string>());
        if (!id) throw SchemaError(where + ".abilities", "not in the ability registry: '" + a.get<std::string>() + "'");
        s.abilities.push_back(*id);
    }
    s.heal_rate = read_milli(u, "heal_rate", where, true);

    if (s.max_health <= 0) throw SchemaError(where + ".health", "must be > 0");
    if (s.max_shields < 0 || s.max_energy < 0) throw SchemaError(where, "pools must be >= 0");
    if (s.armor < 0) throw SchemaError(where + ".armor", "must be >= 0");
    if (s.movement_speed < 0) throw SchemaError(where + ".speed", "must be >= 0");
    const bool heals = s.has_ability(AbilityId::Heal);
    if (heals && (s.heal_rate <= 0 || s.max_energy <= 0))
        throw SchemaError(where + ".heal_rate", "healers need heal_rate and energy");
    const bool sieges = s.has_ability(AbilityId::SiegeMode);
    if (sieges != s.sieged_weapon.has_value())
        throw SchemaError(where + ".sieged_weapon", "required exactly when SiegeMode is listed");
    return s;
}

AbilityConfig read_abilities(const json& a) {
    AbilityConfig c;
    const auto& stim = require(a, "Stimpack", "abilities");
    c.stim_health_cost = read_milli(stim, "health_cost", "abilities.Stimpack");
    c.stim_duration_ms = read_seconds_ms(stim, "duration", "abilities.Stimpack");
    c.stim_attack_speed_permille = read_milli(stim, "attack_speed_multiplier", "abilities.Stimpack");
    c.stim_move_speed_permille = read_milli(stim, "move_speed_multiplier", "abilities.Stimpack");
    const auto& blink = require(a, "Blink", "abilities");
    c.blink_max_distance = read_milli(blink, "max_distance", "abilities.Blink");
    c.blink_cooldown_ms = read_seconds_ms(blink, "cooldown", "abilities.Blink");
    const auto& heal = require(a, "Heal", "abilities");
    c.heal_range = read_milli(heal, "range", "abilities.Heal");
    c.heal_health_per_energy = require(heal, "health_per_energy", "abilities.Heal").get<std::int64_t>();
    const auto& siege = require(a, "SiegeMode", "abilities");
    c.siege_transform_ms = read_seconds_ms(siege, "transform_time", "abilities.SiegeMode");
    if (c.stim_attack_speed_permille <= 0 || c.stim_move_speed_permille <= 0)
        throw SchemaError("abilities.Stimpack", "multipliers must be positive");
    if (c.heal_health_per_energy <= 0) throw SchemaError("abilities.Heal.health_per_energy", "must be positive");
    return c;
}

}  // namespace

std::optional<AbilityId> ability_from_name(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kAbilityNames); ++i)
        if (kAbilityNames[i] == name) return static_cast<AbilityId>(i);
    return std::nullopt;
}

std::string_view ability_name(AbilityId id) { return kAbilityNames[static_cast<std::size_t>(id)]; }

std::optional<Attribute> attribute_from_name(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kAttributeNames); ++i)
        if (kAttributeNames[i] == name) return static_cast<Attribute>(i);
    return std::nullopt;
}

std::string_view to_string(Attribute a) { return kAttributeNames[static_cast<std::size_t>(a)]; }

std::string_view to_string(Race r) {
    switch (r) {
        case Race::Terran: return "Terran";
        case Race::Protoss: return "Protoss";
        case Race::Zerg: return "Zerg";
    }
    return "?";
}

bool UnitSpec::has_ability(AbilityId id) const {
    return std::find(abilities.begin(), abilities.end(), id) != abilities.end();
}

UnitCatalog::UnitCatalog(int version, AbilityConfig abilities, std::vector<UnitSpec> specs)
    : version_(version), abilities_(abilities) {
    for (auto& s : specs) {
        auto name = s.class_name;
        if (!specs_.emplace(name, std::make_shared<const UnitSpec>(std::move(s))).second)
            throw SchemaError("units", "duplicate class '" + name + "'");
    }
}

bool UnitCatalog::contains(std::string_view name) const { return specs_.find(name) != specs_.end(); }

std::shared_ptr<const UnitSpec> UnitCatalog::get(std::string_view name) const {
    auto it = specs_.find(name);
    if (it == specs_.end()) throw MissingClass(std::string(name));
    return it->second;
}

std::vector<std::string> UnitCatalog::class_names() const {
    std::vector<std::string> out;
    out.reserve(specs_.size());
    for (const auto& [k, _] : specs_) out.push_back(k);
    return out;
}

const std::vector<std::string>& required_unit_classes() {
    static const std::vector<std::string> names = {
        "Marine", "Marauder", "Medivac", "Siege Tank", "Reaper", "Ghost", "Hellbat",
        "Viking", "Banshee", "Zealot", "Stalker", "Immortal", "Archon", "Phoenix",
        "Colossus", "Sentry", "Zergling", "Baneling", "Spine Crawler", "Photon Cannon", "Warp Prism"};
    return names;
}

UnitCatalog load_unit_specs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string(), "cannot open file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string(), e.what());
    }
    try {
        if (doc.value("schema", "") != "avacraft.units") throw SchemaError("schema", "expected 'avacraft.units'");
        const int version = require(doc, "version", "$").get<int>();
        if (version != 1) throw SchemaError("version", "unsupported version " + std::to_string(version));
        const AbilityConfig abilities = read_abilities(require(doc, "abilities", "$"));
        const auto& units = require(doc, "units", "$");
        if (!units.is_array()) throw SchemaError("units", "expected an array");
        std::vector<UnitSpec> specs;
        std::set<char> glyphs;
        for (std::size_t i = 0; i < units.size(); ++i) {
            specs.push_back(read_unit(units[i], "units[" + std::to_string(i) + "]"));
            if (!glyphs.insert(specs.back().glyph).second)
                throw SchemaError("units[" + std::to_string(i) + "].glyph", "glyph letter reused");
        }
        UnitCatalog catalog(version, abilities, std::move(specs));
        for (const auto& name : required_unit_classes())
            if (!catalog.contains(name)) throw SchemaError("units", "required class '" + name + "' missing");
        return catalog;
    } catch (const json::exception& e) {
        throw SchemaError(path.string(), e.what());
    }
}

std::string format_milli(Milli v) {
    const bool neg = v < 0;
    const std::uint64_t a = neg ? std::uint64_t(-v) : std::uint64_t(v);
    std::string s = std::to_string(a / 1000);
    std::uint64_t frac = a % 1000;
    if (frac != 0) {
        std::string f = std::to_string(frac);
        f.insert(0, 3 - f.size(), '0');
        while (!f.empty() && f.back() == '0') f.pop_back();
        s += "." + f;
    }
    return neg ? "-" + s : s;
}

}  // namespace ava
