#include "avacraft/paths.hpp"

#include <cstdlib>

#ifndef AVACRAFT_DEFAULT_DATA_DIR
#define AVACRAFT_DEFAULT_DATA_DIR "data"
#endif

namespace ava {

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("AVACRAFT_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return AVACRAFT_DEFAULT_DATA_DIR;
}

}  // namespace ava
