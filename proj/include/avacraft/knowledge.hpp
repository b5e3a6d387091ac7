#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "avacraft/plans.hpp"
#include "avacraft/units.hpp"

namespace ava {

struct KnowledgeSpecs {
    std::string summary;
    double dps = 0;
    double range = 0;
    double speed = 0;
    double health = 0;
};

struct KnowledgeEntry {
    std::string class_key;
    KnowledgeSpecs specifications;
    std::vector<std::string> strong_against;
    std::vector<std::string> weak_against;
    std::vector<std::string> insights;
};

inline constexpr std::size_t kDefaultMaxContextChars = 4000;

/// Keyed store, one entry per catalog class. Immutable after load.
class KnowledgeStore {
public:
    /// Reads every *.json file in `dir`. Throws SchemaError on malformed or
    /// missing entries and DanglingClass for matchups outside the catalog.
    static KnowledgeStore load(const std::filesystem::path& dir, const UnitCatalog& units);

    /// Exact lookup. Throws UnknownClass.
    const KnowledgeEntry& retrieve(std::string_view class_key) const;
    bool contains(std::string_view class_key) const;
    std::size_t size() const { return entries_.size(); }
    std::vector<std::string> keys() const;

private:
    std::map<std::string, KnowledgeEntry, std::less<>> entries_;
};

/// Text block for one class, listing the priority targets it covers.
std::string format_knowledge_block(const KnowledgeEntry& entry, const std::vector<const PriorityEntry*>& targets);

/// Classes in order of their best priority rank, one block each. Whole
/// blocks are dropped from the tail to stay within `max_chars`.
std::string build_knowledge_context(const PriorityAssessment& priorities, const KnowledgeStore& store,
                                    std::size_t max_chars = kDefaultMaxContextChars);

/// Distinct class keys of a priority list, in rank order.
std::vector<std::string> priority_classes(const PriorityAssessment& priorities, const KnowledgeStore& store);

}  // namespace ava
