#include "avacraft/observation.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "avacraft/error.hpp"

namespace ava {

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr Rgb kBackground{28, 44, 28};
constexpr Rgb kGridLine{64, 84, 64};
constexpr Rgb kP1{50, 110, 235};
constexpr Rgb kP2{220, 50, 45};
constexpr Rgb kGlyphText{255, 255, 255};
constexpr Rgb kTagText{230, 230, 200};
constexpr Rgb kBarEmpty{70, 20, 20};
constexpr Rgb kHealth{60, 220, 80};
constexpr Rgb kShieldEmpty{25, 25, 60};
constexpr Rgb kShield{100, 180, 255};
constexpr Rgb kAirRing{240, 240, 240};

// 5x7 bitmap font, one byte per row, bit 4 is the leftmost column.
using Glyph5x7 = std::array<std::uint8_t, 7>;

const Glyph5x7* font_glyph(char c) {
    static const std::array<Glyph5x7, 10> digits = {{
        {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110},
        {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110},
        {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111},
        {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110},
        {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010},
        {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110},
        {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110},
        {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000},
        {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110},
        {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100},
    }};
    static const std::array<Glyph5x7, 26> letters = {{
        {0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001},  // A
        {0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110},
        {0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110},
        {0b11100, 0b10010, 0b10001, 0b10001, 0b10001, 0b10010, 0b11100},
        {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111},
        {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000},
        {0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111},
        {0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001},
        {0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110},
        {0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100},
        {0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001},
        {0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111},
        {0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001},
        {0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001},
        {0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110},
        {0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000},
        {0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101},
        {0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001},
        {0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110},
        {0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100},
        {0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110},
        {0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100},
        {0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010},
        {0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001},
        {0b10001, 0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100},
        {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111},  // Z
    }};
    if (c >= '0' && c <= '9') return &digits[static_cast<std::size_t>(c - '0')];
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (c >= 'A' && c <= 'Z') return &letters[static_cast<std::size_t>(c - 'A')];
    return nullptr;
}

class Canvas {
public:
    Canvas(int w, int h, Rgb fill) : img_{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)} {
        for (std::size_t i = 0; i < img_.rgb.size(); i += 3) {
            img_.rgb[i] = fill.r;
            img_.rgb[i + 1] = fill.g;
            img_.rgb[i + 2] = fill.b;
        }
    }

    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= img_.width || y >= img_.height) return;
        auto* p = &img_.rgb[(static_cast<std::size_t>(y) * img_.width + x) * 3];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    void rect(int x0, int y0, int x1, int y1, Rgb c) {
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) set(x, y, c);
    }

    void text(int x, int y, std::string_view s, Rgb c) {
        for (char ch : s) {
            if (const auto* g = font_glyph(ch)) {
                for (int row = 0; row < 7; ++row)
                    for (int col = 0; col < 5; ++col)
                        if (((*g)[static_cast<std::size_t>(row)] >> (4 - col)) & 1) set(x + col, y + row, c);
            }
            x += 6;
        }
    }

    Image take() { return std::move(img_); }

private:
    Image img_;
};

int text_width(std::string_view s) { return s.empty() ? 0 : static_cast<int>(s.size()) * 6 - 1; }

void draw_body(Canvas& cv, const UnitSpec& spec, PixelPoint c, int r, Rgb color) {
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            bool inside = false;
            switch (spec.race) {
                case Race::Terran: inside = true; break;
                case Race::Protoss: inside = dx * dx + dy * dy <= r * r; break;
                case Race::Zerg: inside = 2 * std::abs(dx) <= dy + r; break;  // apex up
            }
            if (inside) cv.set(c.x + dx, c.y + dy, color);
        }
    }
    if (spec.is_flying) {
        // Thin ring just outside the body marks air units.
        const int outer = (r + 2) * (r + 2);
        const int inner = (r + 1) * (r + 1);
        for (int dy = -r - 2; dy <= r + 2; ++dy)
            for (int dx = -r - 2; dx <= r + 2; ++dx) {
                const int d = dx * dx + dy * dy;
                if (d <= outer && d > inner) cv.set(c.x + dx, c.y + dy, kAirRing);
            }
    }
}

void draw_bar(Canvas& cv, PixelPoint c, int r, int top, Milli value, Milli max, Rgb empty, Rgb full) {
    const int x0 = c.x - r;
    const int width = 2 * r + 1;
    const int filled = max > 0 ? static_cast<int>(static_cast<Milli>(width) * std::clamp<Milli>(value, 0, max) / max) : 0;
    cv.rect(x0, top, x0 + width - 1, top + 2, empty);
    if (filled > 0) cv.rect(x0, top, x0 + filled - 1, top + 2, full);
}

std::string effects_text(const UnitState& u) {
    std::string out;
    if (u.effects.stim_ms > 0) out += ", stimmed";
    if (u.effects.sieged) out += ", sieged";
    if (u.effects.transform_ms > 0) out += ", transforming";
    return out;
}

std::vector<std::string> effect_names(const UnitState& u) {
    std::vector<std::string> out;
    if (u.effects.stim_ms > 0) out.emplace_back("stimmed");
    if (u.effects.sieged) out.emplace_back("sieged");
    if (u.effects.transform_ms > 0) out.emplace_back("transforming");
    if (u.effects.blink_cooldown_ms > 0) out.emplace_back("blink_cooldown");
    return out;
}

void describe_unit(std::ostringstream& os, const BattleState& s, const UnitState& u) {
    const GridCell g = grid_of(u.position, s.arena);
    const auto& spec = *u.spec;
    os << "- " << unit_label(s, u) << " (Tag: " << u.uid << ") at grid (" << g.x << ',' << g.y << "), HP "
       << format_milli(u.health) << '/' << format_milli(spec.max_health);
    if (spec.max_shields > 0) os << ", Shields " << format_milli(u.shields) << '/' << format_milli(spec.max_shields);
    if (spec.max_energy > 0) os << ", Energy " << format_milli(u.energy) << '/' << format_milli(spec.max_energy);
    if (!u.weapon().armed()) os << ", no weapon";
    else os << (u.weapon_ready() ? ", weapon ready" : ", weapon cooling");
    os << effects_text(u) << '\n';
}

}  // namespace

void validate(const RenderConfig& config) {
    if (config.width < kMinFrameSize || config.height < kMinFrameSize)
        throw ConfigError("frame must be at least " + std::to_string(kMinFrameSize) + "x" +
                          std::to_string(kMinFrameSize));
}

int glyph_radius(const RenderConfig& config) { return std::max(4, std::min(config.height, config.width) / 48); }

PixelPoint world_to_pixel(Vec2 pos, const Arena& arena, const RenderConfig& config) {
    const Milli px = pos.x * config.width / arena.width;
    const Milli py = (arena.height - pos.y) * config.height / arena.height;
    return {static_cast<int>(std::clamp<Milli>(px, 0, config.width - 1)),
            static_cast<int>(std::clamp<Milli>(py, 0, config.height - 1))};
}

std::string unit_label(const BattleState& state, const UnitState& unit) {
    int index = 0;
    for (const auto& u : state.units) {
        if (u.team == unit.team && u.spec->class_name == unit.spec->class_name) ++index;
        if (u.uid == unit.uid) break;
    }
    std::string name = unit.spec->class_name;
    std::erase(name, ' ');
    return name + "_" + std::to_string(index);
}

std::vector<Annotation> annotate_units(const BattleState& state, const RenderConfig& config) {
    validate(config);
    const int r = glyph_radius(config);
    std::vector<Annotation> out;
    for (const auto& u : state.units) {
        if (!u.alive) continue;
        const PixelPoint c = world_to_pixel(u.position, state.arena, config);
        PixelBox box{std::max(0, c.x - r - 2), std::max(0, c.y - r - 2), std::min(config.width - 1, c.x + r + 2),
                     std::min(config.height - 1, c.y + r + 2)};
        out.push_back({c, u.spec->class_name, box, u.uid});
    }
    return out;
}

Image render_frame(const BattleState& state, const RenderConfig& config) {
    validate(config);
    Canvas cv(config.width, config.height, kBackground);
    if (config.show_grid) {
        for (int i = 1; i < kGridSize; ++i) {
            const int x = i * config.width / kGridSize;
            const int y = i * config.height / kGridSize;
            cv.rect(x, 0, x, config.height - 1, kGridLine);
            cv.rect(0, y, config.width - 1, y, kGridLine);
        }
    }
    const int r = glyph_radius(config);
    for (const auto& u : state.units) {
        if (!u.alive) continue;
        const auto& spec = *u.spec;
        const PixelPoint c = world_to_pixel(u.position, state.arena, config);
        draw_body(cv, spec, c, r, u.team == Team::P1 ? kP1 : kP2);
        cv.text(c.x - 2, c.y - 3, std::string(1, spec.glyph), kGlyphText);
        draw_bar(cv, c, r, c.y - r - 5, u.health, spec.max_health, kBarEmpty, kHealth);
        if (spec.max_shields > 0) draw_bar(cv, c, r, c.y - r - 9, u.shields, spec.max_shields, kShieldEmpty, kShield);
        if (config.show_tags) {
            const std::string tag = std::to_string(u.uid);
            cv.text(c.x - text_width(tag) / 2, c.y + r + 3, tag, kTagText);
        }
    }
    return cv.take();
}

std::string describe_state(const BattleState& state, Team team) {
    std::ostringstream os;
    os << "Decision step: " << state.decision_step << '/' << kMaxDecisionSteps << '\n';
    os << "You command: " << to_string(team) << '\n';
    os << "Friendly units alive: " << state.alive_count(team)
       << " | Enemy units alive: " << state.alive_count(opponent(team)) << "\n\n";
    for (const Team side : {team, opponent(team)}) {
        os << (side == team ? "Friendly units (" : "Enemy units (") << to_string(side) << "):\n";
        bool any = false;
        for (const auto& u : state.units) {
            if (!u.alive || u.team != side) continue;
            describe_unit(os, state, u);
            any = true;
        }
        if (!any) os << "- none\n";
    }
    return os.str();
}

std::vector<UnitRecord> unit_records(const BattleState& state) {
    std::vector<UnitRecord> out;
    for (const auto& u : state.units) {
        if (!u.alive) continue;
        const auto& spec = *u.spec;
        UnitRecord r;
        r.id = u.uid;
        r.type = spec.class_name;
        r.label = unit_label(state, u);
        r.team = u.team;
        r.pos = u.position;
        r.grid = grid_of(u.position, state.arena);
        r.attr.attack_damage = u.weapon().damage;
        r.attr.armor = spec.armor;
        r.attr.range = u.weapon().range;
        r.attr.speed = spec.movement_speed;
        for (int a = 0; a < kAttributeCount; ++a)
            if (spec.attributes.has(static_cast<Attribute>(a)))
                r.attr.attributes.emplace_back(to_string(static_cast<Attribute>(a)));
        r.attr.flying = spec.is_flying;
        r.status = {u.health, spec.max_health, u.shields, spec.max_shields, u.energy, spec.max_energy,
                    u.weapon().armed() && u.weapon_ready(), effect_names(u)};
        out.push_back(std::move(r));
    }
    return out;
}

Observation observe(const BattleState& state, Team team, const RenderConfig& config, bool with_image) {
    Observation o;
    o.team = team;
    o.decision_step = state.decision_step;
    if (with_image) o.image = render_frame(state, config);
    o.text = describe_state(state, team);
    o.units = unit_records(state);
    o.annotations = annotate_units(state, config);
    return o;
}

}  // namespace ava
