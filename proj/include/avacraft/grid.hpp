#pragma once

#include "avacraft/action.hpp"
#include "avacraft/fixed.hpp"

namespace ava {

struct Arena;

/// Uniform 10x10 partition of the arena; cell (1,1) touches the origin.
/// Positions on the far edge map into the last cell. Throws OutOfArena.
GridCell grid_of(Vec2 pos, const Arena& arena);

/// Exact centre of a cell; grid_of(cell_center(c)) == c for every cell.
Vec2 cell_center(GridCell cell, const Arena& arena);

Vec2 clamp_to_arena(Vec2 pos, const Arena& arena);

}  // namespace ava
