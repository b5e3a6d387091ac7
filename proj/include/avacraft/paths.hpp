#pragma once

#include <filesystem>

namespace ava {

/// Bundled data root: $AVACRAFT_DATA_DIR if set, else the build-time location.
std::filesystem::path data_dir();

}  // namespace ava
