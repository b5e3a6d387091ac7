#pragma once

#include <cstdint>
#include <string>

namespace ava {

/// Fixed-point quantity in thousandths (milli-units, milli-hit-points,
/// milliseconds). The engine never touches floating point.
using Milli = std::int64_t;

inline constexpr Milli kMilli = 1000;

constexpr Milli to_milli(std::int64_t whole) { return whole * kMilli; }

struct Vec2 {
    Milli x = 0;
    Milli y = 0;

    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
};

constexpr std::int64_t dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr std::int64_t length_sq(const Vec2& v) { return dot(v, v); }

/// floor(sqrt(v)) for v >= 0.
constexpr std::int64_t isqrt(std::int64_t v) {
    if (v <= 0) return 0;
    std::uint64_t x = static_cast<std::uint64_t>(v);
    std::uint64_t r = 0;
    std::uint64_t bit = std::uint64_t{1} << 62;
    while (bit > x) bit >>= 2;
    while (bit != 0) {
        if (x >= r + bit) {
            x -= r + bit;
            r = (r >> 1) + bit;
        } else {
            r >>= 1;
        }
        bit >>= 2;
    }
    return static_cast<std::int64_t>(r);
}

constexpr Milli distance(const Vec2& a, const Vec2& b) { return isqrt(length_sq(b - a)); }

/// Moves `from` toward `to` by at most `step`; lands exactly on `to` when in reach.
constexpr Vec2 step_toward(const Vec2& from, const Vec2& to, Milli step) {
    const Vec2 d = to - from;
    const Milli dist = isqrt(length_sq(d));
    if (dist <= step || dist == 0) return to;
    return {from.x + d.x * step / dist, from.y + d.y * step / dist};
}

/// "45", "44.5", "3.15": shortest decimal rendering of a milli value.
std::string format_milli(Milli v);

}  // namespace ava
