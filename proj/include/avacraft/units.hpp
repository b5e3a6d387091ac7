#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "avacraft/fixed.hpp"

namespace ava {

enum class Race : std::uint8_t { Terran, Protoss, Zerg };

enum class Attribute : std::uint8_t { Light, Armored, Biological, Mechanical, Massive, Psionic };

inline constexpr int kAttributeCount = 6;

class AttributeSet {
public:
    constexpr AttributeSet() = default;
    constexpr void add(Attribute a) { bits_ |= bit(a); }
    constexpr bool has(Attribute a) const { return (bits_ & bit(a)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    friend constexpr bool operator==(AttributeSet, AttributeSet) = default;

private:
    static constexpr std::uint8_t bit(Attribute a) { return std::uint8_t(1u << static_cast<unsigned>(a)); }
    std::uint8_t bits_ = 0;
};

enum class Layer : std::uint8_t { Ground, Air };

struct TargetLayers {
    bool ground = false;
    bool air = false;
    constexpr bool allows(Layer l) const { return l == Layer::Ground ? ground : air; }
    constexpr bool any() const { return ground || air; }
};

struct SplashRing {
    Milli radius = 0;
    int percent = 100;
};

/// Rings are ordered by increasing radius; the first containing ring applies.
struct CircleSplash {
    std::vector<SplashRing> rings;
    /// Detonates around the attacker, which dies on use.
    bool on_death = false;
};

/// A line perpendicular to the attack direction, centred on the target.
struct LineSplash {
    Milli length = 0;
    Milli width = 0;
};

using Splash = std::variant<std::monostate, CircleSplash, LineSplash>;

struct Weapon {
    Milli damage = 0;
    Milli bonus_damage = 0;
    std::optional<Attribute> bonus_vs;
    Milli cooldown_ms = 0;
    Milli range = 0;
    TargetLayers targets;
    Splash splash;

    bool armed() const { return damage > 0; }
};

enum class AbilityId : std::uint8_t { Stimpack, Blink, Heal, SiegeMode, Unsiege };

std::optional<AbilityId> ability_from_name(std::string_view name);
std::string_view ability_name(AbilityId id);

struct UnitSpec {
    std::string class_name;
    char glyph = '?';
    Race race = Race::Terran;
    Milli max_health = 0;
    Milli max_shields = 0;
    Milli max_energy = 0;
    Milli armor = 0;
    Weapon weapon;
    /// Replacement weapon while in siege mode (Siege Tank only).
    std::optional<Weapon> sieged_weapon;
    Milli movement_speed = 0;
    AttributeSet attributes;
    bool is_flying = false;
    std::vector<AbilityId> abilities;
    Milli heal_rate = 0;

    Layer layer() const { return is_flying ? Layer::Air : Layer::Ground; }
    bool has_ability(AbilityId id) const;
};

/// Tunables of the ability registry, read from the same catalog file.
struct AbilityConfig {
    Milli stim_health_cost = to_milli(10);
    Milli stim_duration_ms = to_milli(11);
    Milli stim_attack_speed_permille = 1500;
    Milli stim_move_speed_permille = 1500;
    Milli blink_max_distance = to_milli(8);
    Milli blink_cooldown_ms = to_milli(10);
    Milli heal_range = to_milli(4);
    Milli heal_health_per_energy = 3;
    Milli siege_transform_ms = to_milli(3);
};

class UnitCatalog {
public:
    UnitCatalog() = default;
    UnitCatalog(int version, AbilityConfig abilities, std::vector<UnitSpec> specs);

    int version() const { return version_; }
    const AbilityConfig& abilities() const { return abilities_; }

    bool contains(std::string_view name) const;
    /// Throws MissingClass.
    std::shared_ptr<const UnitSpec> get(std::string_view name) const;
    const UnitSpec& operator[](std::string_view name) const { return *get(name); }

    std::vector<std::string> class_names() const;
    std::size_t size() const { return specs_.size(); }

private:
    int version_ = 0;
    AbilityConfig abilities_;
    std::map<std::string, std::shared_ptr<const UnitSpec>, std::less<>> specs_;
};

/// Parses and validates a catalog file. Throws SchemaError.
UnitCatalog load_unit_specs(const std::filesystem::path& path);

/// Names the catalog must define.
const std::vector<std::string>& required_unit_classes();

std::string_view to_string(Race r);
std::string_view to_string(Attribute a);
std::optional<Attribute> attribute_from_name(std::string_view name);

}  // namespace ava
