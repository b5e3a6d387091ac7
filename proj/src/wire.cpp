#include "avacraft/wire.hpp"

#include <cmath>

#include "avacraft/base64.hpp"
#include "avacraft/error.hpp"
#include "avacraft/png.hpp"

namespace ava {

using nlohmann::json;

namespace {

double w(Milli m) { return static_cast<double>(m) / 1000.0; }
Milli m(const json& v) { return static_cast<Milli>(std::llround(v.get<double>() * 1000.0)); }

Team team_of(const json& v) {
    const auto t = team_from_name(v.get<std::string>());
    if (!t) throw Error("bad team " + v.dump());
    return *t;
}

}  // namespace

json encode_unit(const UnitRecord& u) {
    return {{"id", u.id},
            {"type", u.type},
            {"label", u.label},
            {"team", to_string(u.team)},
            {"pos", {w(u.pos.x), w(u.pos.y)}},
            {"grid", {u.grid.x, u.grid.y}},
            {"attributes",
             {{"attack_damage", w(u.attr.attack_damage)},
              {"armor", w(u.attr.armor)},
              {"range", w(u.attr.range)},
              {"speed", w(u.attr.speed)},
              {"tags", u.attr.attributes},
              {"flying", u.attr.flying}}},
            {"status",
             {{"health", w(u.status.health)},
              {"max_health", w(u.status.max_health)},
              {"shields", w(u.status.shields)},
              {"max_shields", w(u.status.max_shields)},
              {"energy", w(u.status.energy)},
              {"max_energy", w(u.status.max_energy)},
              {"weapon_ready", u.status.weapon_ready},
              {"effects", u.status.effects}}}};
}

json encode_observation(const Observation& obs, bool include_image) {
    json units = json::array();
    for (const auto& u : obs.units) units.push_back(encode_unit(u));
    json anns = json::array();
    for (const auto& a : obs.annotations)
        anns.push_back({{"tag", a.tag},
                        {"class", a.class_name},
                        {"center", {a.center.x, a.center.y}},
                        {"box", {a.box.x0, a.box.y0, a.box.x1, a.box.y1}}});
    json j{{"team", to_string(obs.team)},
           {"decision_step", obs.decision_step},
           {"text", obs.text},
           {"units", std::move(units)},
           {"annotations", std::move(anns)}};
    if (include_image && obs.image) {
        const auto png = encode_png(*obs.image);
        j["image"] = {{"width", obs.image->width},
                      {"height", obs.image->height},
                      {"encoding", "png"},
                      {"data", base64_encode(png)}};
    }
    return j;
}

Observation decode_observation(const json& j) {
    try {
        Observation o;
        o.team = team_of(j.at("team"));
        o.decision_step = j.at("decision_step").get<int>();
        o.text = j.at("text").get<std::string>();
        for (const auto& u : j.at("units")) {
            UnitRecord r;
            r.id = u.at("id").get<Uid>();
            r.type = u.at("type").get<std::string>();
            r.label = u.at("label").get<std::string>();
            r.team = team_of(u.at("team"));
            r.pos = {m(u.at("pos").at(0)), m(u.at("pos").at(1))};
            r.grid = {u.at("grid").at(0).get<int>(), u.at("grid").at(1).get<int>()};
            const auto& a = u.at("attributes");
            r.attr = {m(a.at("attack_damage")), m(a.at("armor")), m(a.at("range")), m(a.at("speed")),
                      a.at("tags").get<std::vector<std::string>>(), a.at("flying").get<bool>()};
            const auto& s = u.at("status");
            r.status = {m(s.at("health")),  m(s.at("max_health")), m(s.at("shields")),
                        m(s.at("max_shields")), m(s.at("energy")), m(s.at("max_energy")),
                        s.at("weapon_ready").get<bool>(), s.at("effects").get<std::vector<std::string>>()};
            o.units.push_back(std::move(r));
        }
        for (const auto& a : j.at("annotations")) {
            Annotation x;
            x.tag = a.at("tag").get<Uid>();
            x.class_name = a.at("class").get<std::string>();
            x.center = {a.at("center").at(0).get<int>(), a.at("center").at(1).get<int>()};
            const auto& b = a.at("box");
            x.box = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
            o.annotations.push_back(std::move(x));
        }
        if (j.contains("image")) {
            const auto& im = j.at("image");
            if (im.value("encoding", "png") != "png") throw Error("unsupported image encoding");
            const auto bytes = base64_decode(im.at("data").get<std::string>());
            o.image = decode_png(bytes);
            if (o.image->width != im.at("width").get<int>() || o.image->height != im.at("height").get<int>())
                throw Error("image size does not match header");
        }
        return o;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed observation: ") + e.what());
    }
}

}  // namespace ava
