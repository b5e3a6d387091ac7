#include "avacraft/prompts.hpp"

#include <fstream>
#include <sstream>

#include "avacraft/error.hpp"

namespace ava {

namespace {

std::string read_template(const std::filesystem::path& path, std::string& version) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open prompt template " + path.string());
    std::string line, body;
    while (std::getline(in, line)) {
        if (line.rfind("#!", 0) == 0) {
            if (version.empty()) {
                std::istringstream meta(line.substr(2));
                std::string tag;
                meta >> tag >> version;
            }
            continue;
        }
        body += line;
        body += '\n';
    }
    return body;
}

}  // namespace

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    const std::pair<Stage, const char*> files[] = {{Stage::Plan, "plan.txt"},
                                                   {Stage::Analyze, "analyze.txt"},
                                                   {Stage::Role, "role.txt"},
                                                   {Stage::Act, "act.txt"},
                                                   {Stage::Synthesize, "synthesize.txt"}};
    for (const auto& [stage, file] : files) lib.templates_[stage] = read_template(dir / file, lib.version_);
    lib.repair_ = read_template(dir / "repair.txt", lib.version_);
    return lib;
}

std::string PromptLibrary::substitute(const std::string& tmpl, const Slots& slots) {
    std::string out;
    out.reserve(tmpl.size() * 2);
    std::size_t pos = 0;
    while (true) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string::npos) break;
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string::npos) break;
        out.append(tmpl, pos, open - pos);
        const std::string_view name(tmpl.data() + open + 2, close - open - 2);
        const auto it = slots.find(name);
        if (it == slots.end()) throw ConfigError("prompt slot not supplied: " + std::string(name));
        out += it->second;
        pos = close + 2;
    }
    out.append(tmpl, pos, std::string::npos);
    return out;
}

std::string PromptLibrary::render(Stage stage, const Slots& slots) const {
    return substitute(templates_.at(stage), slots);
}

std::string PromptLibrary::render_repair(const Slots& slots) const { return substitute(repair_, slots); }

}  // namespace ava
