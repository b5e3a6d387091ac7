#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "avacraft/backend.hpp"

namespace ava {

enum class RecordKind : std::uint8_t { Call, Retrieve, Parse };

/// One transcript line. Call records carry a backend exchange, Retrieve
/// records one knowledge lookup, Parse records a reported parse outcome
/// (ParseFallback, EmptyAssessment, AllLinesInvalid, DroppedLines).
struct TranscriptRecord {
    RecordKind kind = RecordKind::Call;
    Team team = Team::P1;
    int step = 0;
    Stage stage = Stage::Plan;
    int attempt = 0;
    std::string prompt;
    std::optional<std::string> image_digest;
    std::string context;
    std::string response;
    double latency_ms = 0;
    std::string class_key;  // Retrieve
    std::string outcome;    // Parse
    std::string detail;     // Parse
};

struct Transcript {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<TranscriptRecord> records;

    std::size_t count(RecordKind kind, std::optional<Stage> stage = std::nullopt) const;
    /// JSONL, header line first.
    std::string to_jsonl() const;
    void write(const std::filesystem::path& path) const;
    /// FNV-1a over the JSONL with latencies zeroed, as 16 hex digits.
    std::string digest() const;
};

struct ReplayRejection {
    Team team = Team::P1;
    std::string action;
    std::string reason;
};

struct ReplayStep {
    int step = 0;  // decision step after applying the actions
    std::string digest;
    std::vector<std::string> p1;
    std::vector<std::string> p2;
    std::vector<ReplayRejection> rejections;
    int reward = 0;
    bool done = false;
};

/// Append-only per-step log sufficient to re-simulate an episode.
struct Replay {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string p1_backend;
    std::string p2_backend;
    std::string initial_digest;
    std::vector<ReplayStep> steps;

    std::string to_jsonl() const;
    void write(const std::filesystem::path& path) const;
    std::string digest() const;
};

/// Throws CorruptReplay carrying the last step that parsed cleanly.
Replay read_replay(const std::filesystem::path& path);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace ava
