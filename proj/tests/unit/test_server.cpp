#include <doctest.h>

#include <boost/asio.hpp>
#include <chrono>
#include <thread>

#include "avacraft/error.hpp"
#include "avacraft/png.hpp"
#include "avacraft/server.hpp"
#include "avacraft/wire.hpp"
#include "fixtures.hpp"

using namespace ava;
using nlohmann::json;

namespace {

ServerConfig fast_config() {
    ServerConfig c;
    c.step_deadline = std::chrono::milliseconds(300);
    return c;
}

std::string create(SessionManager& m, const std::string& scenario, std::uint64_t seed, const std::string& mode = "PvE") {
    const auto r = m.handle({{"op", "create"}, {"scenario", scenario}, {"seed", seed}, {"mode", mode}});
    REQUIRE(r["ok"] == true);
    return r["session_id"];
}

json step(SessionManager& m, const std::string& id, const std::vector<std::string>& lines, const std::string& team = "P1",
          bool image = false) {
    return m.handle({{"op", "step"}, {"session_id", id}, {"team", team}, {"actions", lines}, {"include_image", image}});
}

class LineClient {
public:
    explicit LineClient(std::uint16_t port) : socket_(io_) {
        socket_.connect({boost::asio::ip::make_address("127.0.0.1"), port});
    }
    json raw(const std::string& raw) {
        boost::asio::write(socket_, boost::asio::buffer(raw + "\n"));
        const std::size_t n = boost::asio::read_until(socket_, buf_, '\n');
        std::string line(boost::asio::buffers_begin(buf_.data()), boost::asio::buffers_begin(buf_.data()) + n);
        buf_.consume(n);
        return json::parse(line);
    }
    json call(const json& j) { return raw(j.dump()); }

private:
    boost::asio::io_context io_;
    boost::asio::ip::tcp::socket socket_;
    boost::asio::streambuf buf_;
};

}  // namespace

TEST_CASE("wire observation round-trips") {
    const auto s = fixtures::start("mixed_units", 3);
    const auto obs = observe(s, Team::P2);
    const auto j = encode_observation(obs);
    const auto back = decode_observation(j);
    CHECK(back.text == obs.text);
    REQUIRE(back.image);
    CHECK(*back.image == *obs.image);
    CHECK(encode_observation(back, false) == encode_observation(obs, false));
    CHECK(!encode_observation(obs, false).contains("image"));
    CHECK_THROWS_AS(decode_observation(json::object()), Error);
}

TEST_CASE("create, reset and observe") {
    SessionManager m(fixtures::units(), fixtures::scenarios(), fast_config());
    const auto id = create(m, "3m", 7);
    CHECK(id != create(m, "3m", 7));

    const auto r1 = m.handle({{"op", "reset"}, {"session_id", id}});
    const auto r2 = m.handle({{"op", "reset"}, {"session_id", id}});
    REQUIRE(r1["ok"] == true);
    CHECK(r1.dump() == r2.dump());
    CHECK(r1["observation"]["units"].size() == 6);
    const auto obs = decode_observation(r1["observation"]);
    REQUIRE(obs.image);
    CHECK(obs.image->width == 512);
    CHECK(obs.image->height == 512);

    const auto o = m.handle({{"op", "observe"}, {"session_id", id}, {"team", "P2"}, {"include_image", false}});
    CHECK(o["observation"]["team"] == "P2");
    CHECK(!o["observation"].contains("image"));
}

TEST_CASE("protocol errors carry codes") {
    SessionManager m(fixtures::units(), fixtures::scenarios(), fast_config());
    auto code = [&](const json& req) { return m.handle(req).value("code", std::string()); };
    CHECK(code({{"op", "create"}, {"scenario", "nope"}}) == "UNKNOWN_SCENARIO");
    CHECK(code({{"op", "reset"}, {"session_id", "s999"}}) == "UNKNOWN_SESSION");
    CHECK(code({{"op", "fly"}}) == "BAD_REQUEST");
    CHECK(code(json::array()) == "BAD_REQUEST");
    CHECK(code({{"op", "create"}, {"scenario", "3m"}, {"mode", "coop"}}) == "BAD_REQUEST");
    CHECK(json::parse(m.handle_line("{not json"))["code"] == "BAD_REQUEST");
    CHECK(m.handle({{"op", "info"}, {"id", 12}})["id"] == 12);

    const auto id = create(m, "3m", 1);
    CHECK(code({{"op", "step"}, {"session_id", id}, {"actions", "Attack 1 4"}}) == "BAD_REQUEST");
    CHECK(code({{"op", "step"}, {"session_id", id}, {"team", "P2"}, {"actions", json::array()}}) == "BAD_REQUEST");
    CHECK(m.handle({{"op", "close"}, {"session_id", id}})["ok"] == true);
    CHECK(code({{"op", "observe"}, {"session_id", id}}) == "UNKNOWN_SESSION");
}

TEST_CASE("PvE step semantics") {
    SessionManager m(fixtures::units(), fixtures::scenarios(), fast_config());
    const auto id = create(m, "3m", 1);
    auto r = step(m, id, {});
    REQUIRE(r["ok"] == true);
    CHECK(r["done"] == false);
    CHECK(r["reward"] == 0);
    CHECK(r["decision_step"] == 1);

    r = step(m, id, {"Move 1 4 4", "Jump 2", "Attack 5 1"});
    CHECK(r["applied"] == json::array({"Move 1 4 4"}));
    REQUIRE(r["rejections"].size() == 2);
    CHECK(r["rejections"][0]["reason"] == "BadVerb");
    CHECK(r["rejections"][1]["reason"] == "WrongTeam");

    // Idle until the builtin opponent wins.
    int guard = 0;
    while (r["done"] == false && guard++ < 600) r = step(m, id, {});
    CHECK(r["done"] == true);
    CHECK(r["reward"] == -1);
    CHECK(r["outcome"] == "Defeat");
    CHECK(step(m, id, {})["code"] == "SESSION_DONE");
    CHECK(m.handle({{"op", "reset"}, {"session_id", id}})["ok"] == true);
    CHECK(step(m, id, {})["ok"] == true);
}

TEST_CASE("server observations match in-process ones") {
    SessionManager m(fixtures::units(), fixtures::scenarios(), fast_config());
    const auto id = create(m, "3m", 11);
    auto local = fixtures::start("3m", 11);
    auto r = m.handle({{"op", "reset"}, {"session_id", id}});
    for (int i = 0; i < 20; ++i) {
        const auto expect = observe(local, Team::P1);
        const auto got = decode_observation(r["observation"]);
        CHECK(got.text == expect.text);
        CHECK(*got.image == *expect.image);
        CHECK(encode_observation(got, false) == encode_observation(expect, false));
        const std::vector<std::string> lines = {"Attack 1 4", "Move 2 " + std::to_string(1 + i % 10) + " 5"};
        ActionSet mine;
        for (const auto& l : lines) mine.push_back(*parse_action_line(l).action);
        apply_step(local, mine, builtin_opponent(local, Team::P2));
        r = step(m, id, lines, "P1", true);
        REQUIRE(r["ok"] == true);
    }
}

TEST_CASE("PvP barrier waits for both teams or the deadline") {
    SessionManager m(fixtures::units(), fixtures::scenarios(), fast_config());
    const auto id = create(m, "mixed_units_pvp", 2, "PvP");

    // Both sides submit: the step applies once.
    json a;
    std::thread t([&] { a = step(m, id, {}, "P1"); });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    CHECK(step(m, id, {}, "P1")["code"] == "DUPLICATE_SUBMIT");
    const auto b = step(m, id, {}, "P2");
    t.join();
    CHECK(a["ok"] == true);
    CHECK(b["ok"] == true);
    CHECK(a["decision_step"] == 1);
    CHECK(b["decision_step"] == 1);

    // One side silent: the deadline applies the step with an empty set.
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = step(m, id, {"Move 1 3 3"}, "P2");
    const auto waited = std::chrono::steady_clock::now() - t0;
    CHECK(c["ok"] == true);
    CHECK(c["decision_step"] == 2);
    CHECK(waited >= std::chrono::milliseconds(250));
    CHECK(waited < std::chrono::milliseconds(2000));
}

TEST_CASE("concurrent sessions stay isolated") {
    SessionManager m(fixtures::units(), fixtures::scenarios(), fast_config());
    auto run = [&](std::uint64_t seed) {
        const auto id = create(m, "2s3z", seed);
        std::string trace;
        for (int i = 0; i < 25; ++i) {
            const auto r = step(m, id, {"Attack 1 6", "Attack 3 " + std::to_string(6 + i % 5)});
            trace += r["observation"]["text"].get<std::string>();
            if (r["done"] == true) break;
        }
        return trace;
    };
    const std::string solo[2] = {run(1), run(2)};
    std::vector<std::thread> threads;
    std::vector<std::string> out(8);
    for (int i = 0; i < 8; ++i) threads.emplace_back([&, i] { out[i] = run(1 + i % 2); });
    for (auto& th : threads) th.join();
    for (int i = 0; i < 8; ++i) CHECK(out[i] == solo[i % 2]);
}

TEST_CASE("TCP transport serves newline-delimited JSON") {
    SessionManager m(fixtures::units(), fixtures::scenarios(), fast_config());
    Server server(m, 0);
    std::thread runner([&] { server.run(); });
    {
        LineClient c(server.port());
        const auto created = c.call(json{{"op", "create"}, {"scenario", "3m"}, {"seed", 7}});
        REQUIRE(created["ok"] == true);
        CHECK(c.raw("garbage")["code"] == "BAD_REQUEST");
        const auto r = c.call(json{{"op", "reset"}, {"session_id", created["session_id"]}});
        CHECK(r["observation"]["units"].size() == 6);
        const auto png = decode_observation(r["observation"]);
        CHECK(png.image->width == 512);
        LineClient other(server.port());
        CHECK(other.call(json{{"op", "observe"}, {"session_id", created["session_id"]}, {"include_image", false}})["ok"] == true);
    }
    LineClient idle(server.port());
    CHECK_THROWS_AS(Server(m, server.port()), BindError);
    server.stop();
    runner.join();
    CHECK_THROWS_AS(Server(m, 0, "256.0.0.1"), BindError);
}
