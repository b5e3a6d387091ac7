#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "avacraft/error.hpp"
#include "fixtures.hpp"

using namespace ava;

TEST_CASE("bundled knowledge covers the catalog") {
    const auto& k = fixtures::knowledge();
    CHECK(k.size() >= 21);
    CHECK(k.size() == fixtures::units().size());
    for (const auto& id : fixtures::scenarios().ids()) {
        const auto& s = fixtures::scenarios().get(id);
        for (const auto* side : {&s.p1_units, &s.p2_units})
            for (const auto& g : *side) CHECK_NOTHROW(k.retrieve(g.class_name));
    }
}

TEST_CASE("marine entry carries the cited numbers") {
    const auto& m = fixtures::knowledge().retrieve("Marine");
    CHECK(m.class_key == "Marine");
    CHECK(m.specifications.dps == 9.8);
    CHECK(m.specifications.summary.find("DPS: 9.8 (+1.6)") != std::string::npos);
    for (const char* c : {"Hydralisk", "Immortal", "Marauder"})
        CHECK(std::find(m.strong_against.begin(), m.strong_against.end(), c) != m.strong_against.end());
}

TEST_CASE("retrieve is exact and total") {
    const auto& k = fixtures::knowledge();
    CHECK(k.retrieve("Zergling").class_key == "Zergling");
    CHECK_THROWS_AS(k.retrieve("Dragoon"), UnknownClass);
    CHECK_THROWS_AS(k.retrieve("marine"), UnknownClass);
    const auto* first = &k.retrieve("Stalker");
    for (int i = 0; i < 1000; ++i) CHECK(&k.retrieve("Stalker") == first);
}

TEST_CASE("dangling matchup is rejected") {
    const auto dir = std::filesystem::temp_directory_path() / "ava_knowledge_dangling";
    std::filesystem::remove_all(dir);
    std::filesystem::copy(data_dir() / "knowledge", dir);
    std::ifstream in(dir / "Marine.json");
    auto doc = nlohmann::json::parse(in);
    in.close();
    doc["matchups"]["strong_against"].push_back("Dragoon");
    std::ofstream(dir / "Marine.json") << doc.dump();
    CHECK_THROWS_AS(KnowledgeStore::load(dir, fixtures::units()), DanglingClass);
}

TEST_CASE("missing entry is rejected") {
    const auto dir = std::filesystem::temp_directory_path() / "ava_knowledge_missing";
    std::filesystem::remove_all(dir);
    std::filesystem::copy(data_dir() / "knowledge", dir);
    std::filesystem::remove(dir / "Zergling.json");
    CHECK_THROWS_AS(KnowledgeStore::load(dir, fixtures::units()), SchemaError);
}

TEST_CASE("knowledge context ordering and content") {
    const auto& k = fixtures::knowledge();
    CHECK(build_knowledge_context({}, k).empty());
    PriorityAssessment one{{"Marine_1", 7, "low health", "Marine"}};
    CHECK(build_knowledge_context(one, k).find("9.8") != std::string::npos);

    PriorityAssessment two{{"Ghost_1", 9, "", "Ghost"}, {"Marine_1", 7, "", "Marine"}};
    const auto ctx = build_knowledge_context(two, k);
    CHECK(ctx.find("### Ghost") < ctx.find("### Marine"));

    // Labels alone resolve the class, including squeezed names.
    PriorityAssessment labels{{"SiegeTank_2", 3, "", ""}};
    CHECK(build_knowledge_context(labels, k).find("### Siege Tank") != std::string::npos);
    CHECK_THROWS_AS(build_knowledge_context({{"Dragoon_1", 3, "", ""}}, k), UnknownClass);
}

TEST_CASE("knowledge context respects the cap with whole blocks") {
    const auto& k = fixtures::knowledge();
    const auto keys = k.keys();
    std::mt19937 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        PriorityAssessment p;
        const int n = static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) {
            const auto& c = keys[rng() % keys.size()];
            p.push_back({c + "_1", static_cast<Uid>(i + 1), "", c});
        }
        const std::size_t cap = rng() % 3000;
        const auto ctx = build_knowledge_context(p, k, cap);
        CHECK(ctx.size() <= cap);
        if (!ctx.empty()) CHECK(ctx.back() == '\n');
        const auto full = build_knowledge_context(p, k, 1'000'000);
        CHECK(full.compare(0, ctx.size(), ctx) == 0);
    }
}
