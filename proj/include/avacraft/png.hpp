#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "avacraft/observation.hpp"

namespace ava {

std::vector<std::uint8_t> encode_png(const Image& image);

/// Accepts 8-bit RGB or RGBA; alpha is dropped. Throws Error on bad input.
Image decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace ava
