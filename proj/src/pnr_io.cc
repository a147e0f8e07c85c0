#include "cascade/pnr.hh"

#include "json.hpp"

namespace cascade {

using json = nlohmann::ordered_json;

std::string serialize_pnr(const RoutedApp &r)
{
    json doc;
    doc["placement"] = json::object();
    for (auto &[id, c] : r.placement.loc) doc["placement"][id] = to_string(c);
    doc["routes"] = json::object();
    for (auto &[id, segs] : r.routes) {
        json arr = json::array();
        for (auto &s : segs)
            arr.push_back(json::array({to_string(s.tile), to_string(s.entry), to_string(s.exit), s.track, s.width,
                                       s.register_enabled}));
        doc["routes"][id] = arr;
    }
    return doc.dump(1) + "\n";
}

RoutedApp parse_pnr(const std::string &text, AppGraph graph)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw Error(ErrorKind::Parse,
                    "line " + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
    }
    RoutedApp r;
    r.graph = std::move(graph);
    try {
        for (auto &[id, c] : doc.at("placement").items()) r.placement.loc[id] = parse_coord(c.get<std::string>());
        for (auto &[id, arr] : doc.at("routes").items()) {
            auto &segs = r.routes[id];
            for (auto &js : arr) {
                auto entry = parse_side(js.at(1).get<std::string>());
                auto exit = parse_side(js.at(2).get<std::string>());
                if (!entry || !exit) throw Error(ErrorKind::Parse, "bad side in route of " + id);
                segs.push_back({parse_coord(js.at(0).get<std::string>()), *entry, *exit, js.at(3).get<int>(),
                                js.at(4).get<int>(), js.at(5).get<bool>()});
            }
        }
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Parse, std::string("pnr result: ") + e.what());
    }
    for (auto &[id, _] : r.graph.nets) r.routes[id];
    return r;
}

} // namespace cascade
