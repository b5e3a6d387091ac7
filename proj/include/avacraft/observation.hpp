#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "avacraft/battle.hpp"
#include "avacraft/grid.hpp"

namespace ava {

struct RenderConfig {
    int height = 512;
    int width = 512;
    bool show_grid = true;
    bool show_tags = true;
};

inline constexpr int kMinFrameSize = 128;

/// Row-major RGB raster, 3 bytes per pixel.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    const std::uint8_t* pixel(int x, int y) const { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
    friend bool operator==(const Image&, const Image&) = default;
};

struct PixelPoint {
    int x = 0;
    int y = 0;
    friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct PixelBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;  // inclusive
    int y1 = 0;  // inclusive
    bool contains(PixelPoint p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

/// Detection-style record: pixel centre, class, bounding box, unit tag.
struct Annotation {
    PixelPoint center;
    std::string class_name;
    PixelBox box;
    Uid tag = 0;
};

struct UnitAttributes {
    Milli attack_damage = 0;
    Milli armor = 0;
    Milli range = 0;
    Milli speed = 0;
    std::vector<std::string> attributes;
    bool flying = false;
};

struct UnitStatus {
    Milli health = 0;
    Milli max_health = 0;
    Milli shields = 0;
    Milli max_shields = 0;
    Milli energy = 0;
    Milli max_energy = 0;
    bool weapon_ready = false;
    std::vector<std::string> effects;
};

struct UnitRecord {
    Uid id = 0;
    std::string type;
    std::string label;
    Team team = Team::P1;
    Vec2 pos;
    GridCell grid;
    UnitAttributes attr;
    UnitStatus status;
};

struct Observation {
    Team team = Team::P1;
    int decision_step = 0;
    std::optional<Image> image;
    std::string text;
    std::vector<UnitRecord> units;
    std::vector<Annotation> annotations;
};

/// Throws ConfigError when the frame is smaller than kMinFrameSize.
void validate(const RenderConfig& config);

/// Composes frame, description, unit records and annotations. Both armies
/// are fully visible. The frame is skipped when `with_image` is false.
Observation observe(const BattleState& state, Team team, const RenderConfig& config = {}, bool with_image = true);

Image render_frame(const BattleState& state, const RenderConfig& config = {});

std::string describe_state(const BattleState& state, Team team);

std::vector<Annotation> annotate_units(const BattleState& state, const RenderConfig& config = {});

std::vector<UnitRecord> unit_records(const BattleState& state);

/// "Marine_1": class name without spaces plus a per-team, per-class index
/// that stays stable as units die.
std::string unit_label(const BattleState& state, const UnitState& unit);

PixelPoint world_to_pixel(Vec2 pos, const Arena& arena, const RenderConfig& config);

int glyph_radius(const RenderConfig& config);

}  // namespace ava
