#include "avacraft/grid.hpp"

#include <algorithm>

#include "avacraft/battle.hpp"
#include "avacraft/error.hpp"

namespace ava {

GridCell grid_of(Vec2 pos, const Arena& arena) {
    if (pos.x < 0 || pos.y < 0 || pos.x > arena.width || pos.y > arena.height)
        throw OutOfArena("position (" + format_milli(pos.x) + ", " + format_milli(pos.y) + ") outside arena");
    const auto axis = [](Milli v, Milli extent) {
        return static_cast<int>(std::min<Milli>(kGridSize, v * kGridSize / extent + 1));
    };
    return {axis(pos.x, arena.width), axis(pos.y, arena.height)};
}

Vec2 cell_center(GridCell cell, const Arena& arena) {
    if (!in_grid(cell)) throw OutOfArena("grid cell outside 1..10");
    return {(2 * cell.x - 1) * arena.width / (2 * kGridSize), (2 * cell.y - 1) * arena.height / (2 * kGridSize)};
}

Vec2 clamp_to_arena(Vec2 pos, const Arena& arena) {
    return {std::clamp<Milli>(pos.x, 0, arena.width), std::clamp<Milli>(pos.y, 0, arena.height)};
}

}  // namespace ava
