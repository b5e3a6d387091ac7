#include "avacraft/transcript.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "avacraft/error.hpp"

namespace ava {

using nlohmann::json;

namespace {

std::string_view kind_name(RecordKind k) {
    switch (k) {
        case RecordKind::Call: return "call";
        case RecordKind::Retrieve: return "retrieve";
        case RecordKind::Parse: return "parse";
    }
    return "?";
}

json record_json(const TranscriptRecord& r, bool with_latency) {
    json j = {{"type", kind_name(r.kind)}, {"team", to_string(r.team)}, {"step", r.step}};
    switch (r.kind) {
        case RecordKind::Call:
            j["stage"] = to_string(r.stage);
            j["attempt"] = r.attempt;
            j["prompt"] = r.prompt;
            j["image_digest"] = r.image_digest ? json(*r.image_digest) : json(nullptr);
            j["context"] = r.context;
            j["response"] = r.response;
            j["latency_ms"] = with_latency ? r.latency_ms : 0.0;
            break;
        case RecordKind::Retrieve: j["class_key"] = r.class_key; break;
        case RecordKind::Parse:
            j["stage"] = to_string(r.stage);
            j["outcome"] = r.outcome;
            j["detail"] = r.detail;
            break;
    }
    return j;
}

std::string transcript_jsonl(const Transcript& t, bool with_latency) {
    std::string out = json{{"type", "header"}, {"format", "avacraft.transcript"}, {"version", 1}, {"scenario", t.scenario},
                           {"seed", t.seed}}
                          .dump();
    out += '\n';
    for (const auto& r : t.records) {
        out += record_json(r, with_latency).dump();
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::size_t Transcript::count(RecordKind kind, std::optional<Stage> stage) const {
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.kind == kind && (!stage || r.stage == *stage)) ++n;
    return n;
}

std::string Transcript::to_jsonl() const { return transcript_jsonl(*this, true); }
void Transcript::write(const std::filesystem::path& path) const { write_text(path, to_jsonl()); }
std::string Transcript::digest() const { return fnv1a_hex(transcript_jsonl(*this, false)); }

std::string Replay::to_jsonl() const {
    std::string out = json{{"type", "header"},   {"format", "avacraft.replay"}, {"version", 1},
                           {"scenario", scenario}, {"seed", seed},             {"p1", p1_backend},
                           {"p2", p2_backend},     {"digest", initial_digest}}
                          .dump();
    out += '\n';
    for (const auto& s : steps) {
        json rej = json::array();
        for (const auto& r : s.rejections) rej.push_back({{"team", to_string(r.team)}, {"action", r.action}, {"reason", r.reason}});
        out += json{{"type", "step"}, {"step", s.step}, {"digest", s.digest}, {"p1", s.p1}, {"p2", s.p2},
                    {"rejections", rej}, {"reward", s.reward}, {"done", s.done}}
                   .dump();
        out += '\n';
    }
    out += json{{"type", "end"}, {"steps", steps.size()}}.dump();
    out += '\n';
    return out;
}

void Replay::write(const std::filesystem::path& path) const { write_text(path, to_jsonl()); }
std::string Replay::digest() const { return fnv1a_hex(to_jsonl()); }

Replay read_replay(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptReplay(-1, "cannot open " + path.string());
    Replay r;
    std::string line;
    int last_good = -1;
    bool header = false;
    bool done = false;
    bool ended = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (ended) throw CorruptReplay(last_good, "records after the end marker");
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw CorruptReplay(last_good, "unparseable record");
        try {
            if (!header) {
                if (j.at("type") != "header" || j.at("format") != "avacraft.replay") throw CorruptReplay(-1, "missing header");
                r.scenario = j.at("scenario").get<std::string>();
                r.seed = j.at("seed").get<std::uint64_t>();
                r.p1_backend = j.value("p1", "");
                r.p2_backend = j.value("p2", "");
                r.initial_digest = j.at("digest").get<std::string>();
                header = true;
                last_good = 0;
                continue;
            }
            if (j.at("type") == "end") {
                if (j.at("steps").get<std::size_t>() != r.steps.size()) throw CorruptReplay(last_good, "step count mismatch");
                ended = true;
                continue;
            }
            ReplayStep s;
            if (j.at("type") != "step") throw CorruptReplay(last_good, "unexpected record type");
            if (done) throw CorruptReplay(last_good, "step after the final step");
            s.step = j.at("step").get<int>();
            if (s.step != last_good + 1) throw CorruptReplay(last_good, "step index out of sequence");
            s.digest = j.at("digest").get<std::string>();
            s.p1 = j.at("p1").get<std::vector<std::string>>();
            s.p2 = j.at("p2").get<std::vector<std::string>>();
            for (const auto& x : j.at("rejections")) {
                const auto team = team_from_name(x.at("team").get<std::string>());
                if (!team) throw CorruptReplay(last_good, "bad team in rejection");
                s.rejections.push_back({*team, x.at("action").get<std::string>(), x.at("reason").get<std::string>()});
            }
            s.reward = j.at("reward").get<int>();
            s.done = j.at("done").get<bool>();
            done = s.done;
            r.steps.push_back(std::move(s));
            last_good = r.steps.back().step;
        } catch (const json::exception& e) {
            throw CorruptReplay(last_good, e.what());
        }
    }
    if (!header) throw CorruptReplay(-1, "empty replay");
    if (!ended) throw CorruptReplay(last_good, "missing end marker (truncated file)");
    if (!in.eof()) throw CorruptReplay(last_good, "read error");
    return r;
}

}  // namespace ava
