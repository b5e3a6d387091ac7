#pragma once

#include <json.hpp>

#include "avacraft/observation.hpp"

namespace ava {

inline constexpr const char* kProtocolName = "avacraft.env";
inline constexpr int kProtocolVersion = 1;

/// Observation as sent on the wire. Quantities are world units (fixed-point
/// values divided by 1000); the frame, when present, is a base64 PNG.
nlohmann::json encode_observation(const Observation& obs, bool include_image = true);

/// Inverse of encode_observation. Throws Error on malformed input.
Observation decode_observation(const nlohmann::json& j);

nlohmann::json encode_unit(const UnitRecord& u);

}  // namespace ava
