#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "avacraft/backend.hpp"

namespace ava {

using Slots = std::map<std::string, std::string, std::less<>>;

/// Versioned prompt templates with {{slot}} placeholders, one file per stage
/// plus the repair instruction. Lines starting with "#!" are metadata.
class PromptLibrary {
public:
    static PromptLibrary load(const std::filesystem::path& dir);

    /// Substitutes every slot. Throws ConfigError when the template names a
    /// slot that is not supplied.
    std::string render(Stage stage, const Slots& slots) const;
    std::string render_repair(const Slots& slots) const;
    const std::string& version() const { return version_; }

    static std::string substitute(const std::string& tmpl, const Slots& slots);

private:
    std::map<Stage, std::string> templates_;
    std::string repair_;
    std::string version_;
};

}  // namespace ava
