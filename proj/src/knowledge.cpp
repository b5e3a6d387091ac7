#include "avacraft/knowledge.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "avacraft/error.hpp"

namespace ava {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& doc, const char* key, const std::string& where) {
    const auto it = doc.find(key);
    if (it == doc.end()) return {};
    if (!it->is_array()) throw SchemaError(where + "." + key, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) throw SchemaError(where + "." + key, "expected an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

double number(const json& specs, const char* key, const std::string& where) {
    const auto it = specs.find(key);
    if (it == specs.end() || !it->is_number()) throw SchemaError(where + ".specifications." + key, "expected a number");
    return it->get<double>();
}

KnowledgeEntry parse_entry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string(), "cannot open file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError(path.string(), e.what());
    }
    const std::string where = path.filename().string();
    if (doc.value("schema", "") != "avacraft.knowledge") throw SchemaError(where + ".schema", "expected 'avacraft.knowledge'");
    if (doc.value("version", 0) != 1) throw SchemaError(where + ".version", "unsupported version");
    KnowledgeEntry e;
    if (!doc.contains("class_key") || !doc["class_key"].is_string()) throw SchemaError(where + ".class_key", "missing");
    e.class_key = doc["class_key"].get<std::string>();
    const auto specs = doc.find("specifications");
    if (specs == doc.end() || !specs->is_object()) throw SchemaError(where + ".specifications", "missing");
    e.specifications.summary = specs->value("summary", "");
    e.specifications.dps = number(*specs, "dps", where);
    e.specifications.range = number(*specs, "range", where);
    e.specifications.speed = number(*specs, "speed", where);
    e.specifications.health = number(*specs, "health", where);
    const auto matchups = doc.find("matchups");
    if (matchups == doc.end() || !matchups->is_object()) throw SchemaError(where + ".matchups", "missing");
    e.strong_against = string_list(*matchups, "strong_against", where + ".matchups");
    e.weak_against = string_list(*matchups, "weak_against", where + ".matchups");
    e.insights = string_list(doc, "insights", where);
    return e;
}

std::string joined(const std::vector<std::string>& items) {
    if (items.empty()) return "none";
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

std::string squeezed(std::string s) {
    std::erase(s, ' ');
    return s;
}

// "SiegeTank_1" -> the store key "Siege Tank".
std::string class_from_label(const std::string& label, const KnowledgeStore& store) {
    std::string stem = label;
    const auto us = stem.rfind('_');
    if (us != std::string::npos && us + 1 < stem.size() &&
        std::all_of(stem.begin() + static_cast<std::ptrdiff_t>(us) + 1, stem.end(), [](char c) { return c >= '0' && c <= '9'; }))
        stem.resize(us);
    if (store.contains(stem)) return stem;
    for (const auto& key : store.keys())
        if (squeezed(key) == squeezed(stem)) return key;
    throw UnknownClass(stem);
}

std::string resolve_class(const PriorityEntry& p, const KnowledgeStore& store) {
    return p.class_name.empty() ? class_from_label(p.class_label, store) : p.class_name;
}

}  // namespace

KnowledgeStore KnowledgeStore::load(const std::filesystem::path& dir, const UnitCatalog& units) {
    if (!std::filesystem::is_directory(dir)) throw SchemaError(dir.string(), "knowledge directory not found");
    std::vector<std::filesystem::path> files;
    for (const auto& f : std::filesystem::directory_iterator(dir))
        if (f.path().extension() == ".json") files.push_back(f.path());
    std::sort(files.begin(), files.end());

    KnowledgeStore store;
    for (const auto& f : files) {
        auto e = parse_entry(f);
        if (!units.contains(e.class_key)) throw DanglingClass(e.class_key);
        for (const auto* list : {&e.strong_against, &e.weak_against})
            for (const auto& c : *list)
                if (!units.contains(c)) throw DanglingClass(c);
        const std::string key = e.class_key;
        if (!store.entries_.emplace(key, std::move(e)).second) throw SchemaError(key, "duplicate class_key");
    }
    for (const auto& name : units.class_names())
        if (!store.contains(name)) throw SchemaError("knowledge", "no entry for catalog class '" + name + "'");
    return store;
}

const KnowledgeEntry& KnowledgeStore::retrieve(std::string_view class_key) const {
    const auto it = entries_.find(class_key);
    if (it == entries_.end()) throw UnknownClass(std::string(class_key));
    return it->second;
}

bool KnowledgeStore::contains(std::string_view class_key) const { return entries_.find(class_key) != entries_.end(); }

std::vector<std::string> KnowledgeStore::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : entries_) out.push_back(k);
    return out;
}

std::string format_knowledge_block(const KnowledgeEntry& entry, const std::vector<const PriorityEntry*>& targets) {
    std::string out = "### " + entry.class_key;
    if (!targets.empty()) {
        out += " (targets:";
        for (const auto* t : targets) out += " " + t->class_label + " [Tag " + std::to_string(t->tag) + "]";
        out += ")";
    }
    out += "\nSpecifications: " + entry.specifications.summary + "\n";
    out += "Strong against: [" + joined(entry.strong_against) + "]\n";
    out += "Weak against: [" + joined(entry.weak_against) + "]\n";
    if (!entry.insights.empty()) {
        out += "Insights:\n";
        for (const auto& s : entry.insights) out += "- " + s + "\n";
    }
    return out;
}

std::vector<std::string> priority_classes(const PriorityAssessment& priorities, const KnowledgeStore& store) {
    std::vector<std::string> out;
    for (const auto& p : priorities) {
        auto c = resolve_class(p, store);
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
    }
    return out;
}

std::string build_knowledge_context(const PriorityAssessment& priorities, const KnowledgeStore& store,
                                    std::size_t max_chars) {
    std::string out;
    for (const auto& cls : priority_classes(priorities, store)) {
        std::vector<const PriorityEntry*> targets;
        for (const auto& p : priorities)
            if (resolve_class(p, store) == cls) targets.push_back(&p);
        std::string block = format_knowledge_block(store.retrieve(cls), targets);
        if (!out.empty()) block.insert(0, "\n");
        if (out.size() + block.size() > max_chars) break;
        out += block;
    }
    return out;
}

}  // namespace ava
