#include "cascade/config.hh"

#include <algorithm>
#include <set>
#include <tuple>

namespace cascade {

using json = nlohmann::ordered_json;

namespace {

std::string cell_key(Coord c, const std::string &slot) { return to_string(c) + "/" + slot; }

std::pair<Coord, std::string> split_key(const std::string &key)
{
    auto slash = key.find('/');
    if (slash == std::string::npos) throw Error(ErrorKind::Parse, "bad cell reference '" + key + "'");
    return {parse_coord(key.substr(0, slash)), key.substr(slash + 1)};
}

/// Cell slot of every node: "core", "reg<i>" (REG/FIFO, by id) or "shift".
std::map<std::string, std::string> assign_slots(const RoutedApp &r)
{
    std::map<std::string, std::string> slot;
    std::map<Coord, int> regs;
    for (auto &[id, n] : r.graph.nodes) {
        Coord c = r.placement.at(id);
        if (is_core(n.kind))
            slot[id] = "core";
        else if (n.kind == NodeKind::Shift)
            slot[id] = "shift";
        else
            slot[id] = "reg" + std::to_string(regs[c]++);
    }
    return slot;
}

json cell_json(const AppGraph &g, const Node &n)
{
    json j;
    j["type"] = to_string(n.kind);
    switch (n.kind) {
    case NodeKind::Pe:
        j["op"] = to_string(n.op);
        if (n.constant) j["const"] = *n.constant;
        {
            std::vector<bool> regs(static_cast<std::size_t>(input_count(n)), false);
            for (std::size_t p = 0; p < regs.size() && p < n.input_regs.size(); ++p) regs[p] = n.input_regs[p];
            j["input_regs"] = regs;
        }
        break;
    case NodeKind::Mem: {
        auto it = g.schedules.find(n.id);
        j["schedule"] = it == g.schedules.end() ? std::vector<int>{} : it->second;
        j["extent"] = n.extent;
        j["depth"] = n.depth;
        break;
    }
    case NodeKind::Shift:
    case NodeKind::Fifo: j["depth"] = n.depth; break;
    default: break;
    }
    return j;
}

Node parse_cell(const std::string &id, const json &j, AppGraph &g)
{
    Node n;
    n.id = id;
    auto kind = parse_node_kind(j.at("type").get<std::string>());
    if (!kind) throw Error(ErrorKind::Parse, "cell " + id + " has unknown type");
    n.kind = *kind;
    if (n.kind == NodeKind::Pe) {
        auto op = parse_op(j.at("op").get<std::string>());
        if (!op) throw Error(ErrorKind::Parse, "cell " + id + " has unknown op");
        n.op = *op;
        if (j.contains("const")) n.constant = j["const"].get<std::uint16_t>();
        n.input_regs = j.value("input_regs", std::vector<bool>{});
    }
    if (n.kind == NodeKind::Mem) {
        n.extent = j.value("extent", 0);
        n.depth = j.value("depth", 0);
        g.schedules[id] = j.value("schedule", std::vector<int>{});
    }
    if (n.kind == NodeKind::Shift || n.kind == NodeKind::Fifo) n.depth = j.value("depth", 0);
    return n;
}

json empty_tile(TileKind kind)
{
    json t;
    t["kind"] = to_string(kind);
    t["cells"] = json::object();
    t["sb"] = json::array();
    t["cb"] = json::array();
    return t;
}

void sort_array(json &arr)
{
    std::vector<json> items(arr.begin(), arr.end());
    std::sort(items.begin(), items.end());
    arr = json(items);
}

} // namespace

Config emit_config(const RoutedApp &r, const ArchSpec &spec)
{
    Config cfg;
    cfg.rows = spec.rows;
    cfg.cols = spec.cols;
    cfg.mode = r.graph.mode;
    for (int row = 0; row < spec.rows; ++row)
        for (int col = 0; col < spec.cols; ++col)
            if (auto k = spec.kind_at({row, col})) cfg.tiles[{row, col}] = empty_tile(*k);

    auto slot = assign_slots(r);
    std::map<Coord, std::map<std::string, json>> cells;
    for (auto &[id, n] : r.graph.nodes) {
        Coord c = r.placement.at(id);
        if (!cfg.tiles.count(c)) throw Error(ErrorKind::Invalid, "node " + id + " sits on a missing tile");
        cells[c][slot.at(id)] = cell_json(r.graph, n);
        cfg.names[cell_key(c, slot.at(id))] = id;
    }
    for (auto &[c, m] : cells)
        for (auto &[s, j] : m) cfg.tiles[c]["cells"][s] = j;

    for (auto &[id, net] : r.graph.nets) {
        Coord dc = r.placement.at(net.driver.node);
        const std::string &dslot = slot.at(net.driver.node);
        cfg.net_names[cell_key(dc, dslot)] = id;
        if (net.hardened) {
            for (auto &s : net.sinks) {
                Coord sc = r.placement.at(s.node);
                cfg.tiles[sc]["cb"].push_back(json::array(
                    {slot.at(s.node), s.port, json::array({"hardened", dc.row - sc.row, dc.col - sc.col, dslot, net.width})}));
            }
            continue;
        }
        const auto &segs = r.routes.at(id);
        RouteTree tree = build_route_tree(net, segs, r.placement);
        for (auto &s : segs) {
            if (s.is_sink()) continue;
            std::string src = s.is_source() ? dslot : to_string(s.entry);
            cfg.tiles[s.tile]["sb"].push_back(json::array({to_string(s.exit), s.track, s.width, src, s.register_enabled}));
        }
        for (auto &s : net.sinks) {
            Coord sc = r.placement.at(s.node);
            int idx = tree.sink_segment.at(s);
            json src = idx < 0 ? json::array({"local", dslot, net.width})
                               : json::array({"side", to_string(segs[idx].entry), segs[idx].track, segs[idx].width});
            cfg.tiles[sc]["cb"].push_back(json::array({slot.at(s.node), s.port, src}));
        }
    }
    for (auto &[c, t] : cfg.tiles) {
        sort_array(t["sb"]);
        sort_array(t["cb"]);
    }
    return cfg;
}

RoutedApp decode_config(const Config &cfg, const ArchSpec &spec)
{
    if (cfg.rows != spec.rows || cfg.cols != spec.cols)
        throw Error(ErrorKind::Invalid, "configuration is for a " + std::to_string(cfg.rows) + "x" +
                                            std::to_string(cfg.cols) + " array");
    RoutedApp r;
    r.graph.mode = cfg.mode;
    std::map<std::string, std::string> id_of; // cell key -> node id
    using Port = std::tuple<Coord, Side, int, int>;
    std::map<Port, std::vector<json>> sb_from_side;
    std::map<Port, std::vector<Endpoint>> cb_from_side;
    std::map<std::string, std::vector<std::pair<Endpoint, int>>> cb_local; // driver key -> sinks, width
    std::map<std::string, std::vector<std::pair<Endpoint, int>>> cb_hard;
    std::map<std::string, std::vector<json>> sb_from_cell;

    try {
        for (auto &[c, t] : cfg.tiles)
            for (auto &[s, cell] : t.at("cells").items()) {
                std::string key = cell_key(c, s);
                auto nm = cfg.names.find(key);
                std::string id = nm != cfg.names.end() ? nm->second
                                                        : "n_" + std::to_string(c.row) + "_" + std::to_string(c.col) + "_" + s;
                id_of[key] = id;
                r.graph.nodes.emplace(id, parse_cell(id, cell, r.graph));
                r.placement.loc[id] = c;
            }
        auto node_at = [&](Coord c, const std::string &s) {
            auto it = id_of.find(cell_key(c, s));
            if (it == id_of.end()) throw Error(ErrorKind::Invalid, "no cell " + cell_key(c, s));
            return it->second;
        };
        for (auto &[c, t] : cfg.tiles) {
            for (auto &e : t.at("sb")) {
                std::string src = e.at(3).get<std::string>();
                if (auto side = parse_side(src); side && *side != Side::Core)
                    sb_from_side[{c, *side, e.at(1).get<int>(), e.at(2).get<int>()}].push_back(e);
                else
                    sb_from_cell[cell_key(c, src)].push_back(e);
            }
            for (auto &e : t.at("cb")) {
                Endpoint sink{node_at(c, e.at(0).get<std::string>()), e.at(1).get<int>()};
                const json &src = e.at(2);
                std::string how = src.at(0).get<std::string>();
                if (how == "side") {
                    auto side = parse_side(src.at(1).get<std::string>());
                    if (!side) throw Error(ErrorKind::Parse, "bad side in cb of " + to_string(c));
                    cb_from_side[{c, *side, src.at(2).get<int>(), src.at(3).get<int>()}].push_back(sink);
                } else if (how == "local") {
                    cb_local[cell_key(c, src.at(1).get<std::string>())].push_back({sink, src.at(2).get<int>()});
                } else if (how == "hardened") {
                    Coord d{c.row + src.at(1).get<int>(), c.col + src.at(2).get<int>()};
                    cb_hard[cell_key(d, src.at(3).get<std::string>())].push_back({sink, src.at(4).get<int>()});
                } else {
                    throw Error(ErrorKind::Parse, "unknown cb source '" + how + "'");
                }
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::Parse, std::string("configuration: ") + e.what());
    }

    for (auto &[key, id] : id_of) {
        auto [c, s] = split_key(key);
        Net net;
        auto nn = cfg.net_names.find(key);
        net.id = nn != cfg.net_names.end() ? nn->second : "net_" + id;
        net.driver = {id, 0};
        std::vector<Segment> segs;
        std::set<Port> sink_segs;
        std::vector<Segment> work;
        for (auto &e : sb_from_cell[key]) {
            auto exit = parse_side(e.at(0).get<std::string>());
            if (!exit) throw Error(ErrorKind::Parse, "bad sb exit at " + to_string(c));
            work.push_back({c, Side::Core, *exit, e.at(1).get<int>(), e.at(2).get<int>(), e.at(4).get<bool>()});
        }
        while (!work.empty()) {
            Segment seg = work.back();
            work.pop_back();
            net.width = seg.width;
            segs.push_back(seg);
            Coord land = neighbor(seg.tile, seg.exit);
            Port in{land, opposite(seg.exit), seg.track, seg.width};
            for (auto &e : sb_from_side[in]) {
                auto exit = parse_side(e.at(0).get<std::string>());
                if (!exit) throw Error(ErrorKind::Parse, "bad sb exit at " + to_string(land));
                work.push_back({land, std::get<1>(in), *exit, seg.track, seg.width, e.at(4).get<bool>()});
            }
            auto hit = cb_from_side.find(in);
            if (hit != cb_from_side.end() && sink_segs.insert(in).second) {
                segs.push_back({land, std::get<1>(in), Side::Core, seg.track, seg.width, false});
                for (auto &sink : hit->second) net.sinks.push_back(sink);
            }
        }
        for (auto &[sink, w] : cb_local[key]) {
            net.sinks.push_back(sink);
            net.width = w;
        }
        for (auto &[sink, w] : cb_hard[key]) {
            net.sinks.push_back(sink);
            net.width = w;
            net.hardened = true;
        }
        if (net.sinks.empty()) continue;
        std::sort(net.sinks.begin(), net.sinks.end());
        std::sort(segs.begin(), segs.end());
        r.routes[net.id] = net.hardened ? std::vector<Segment>{} : segs;
        r.graph.nets.emplace(net.id, net);
    }
    return r;
}

std::vector<std::string> validate_config(const Config &cfg, const ArchSpec &spec)
{
    std::vector<std::string> out;
    if (cfg.rows != spec.rows || cfg.cols != spec.cols) {
        out.push_back("array size does not match the architecture");
        return out;
    }
    for (auto &[c, t] : cfg.tiles) {
        std::string where = "tile " + to_string(c);
        auto kind = spec.kind_at(c);
        if (!kind) {
            out.push_back(where + " does not exist");
            continue;
        }
        if (t.value("kind", std::string{}) != to_string(*kind)) out.push_back(where + " has the wrong kind");
        for (auto &[slot, cell] : t["cells"].items()) {
            auto nk = parse_node_kind(cell.value("type", std::string{}));
            if (!nk) {
                out.push_back(where + " cell " + slot + " has an unknown type");
                continue;
            }
            bool ok = false;
            if (slot == "core") ok = is_core(*nk) && home_tile(*nk) == *kind;
            else if (slot == "shift") ok = *nk == NodeKind::Shift && *kind == TileKind::PE;
            else if (slot.rfind("reg", 0) == 0) {
                int idx = -1;
                try {
                    idx = std::stoi(slot.substr(3));
                } catch (const std::exception &) {
                }
                ok = (*nk == NodeKind::Reg || *nk == NodeKind::Fifo) && *kind != TileKind::IO && idx >= 0 &&
                     idx < spec.tile_registers;
            }
            if (!ok) out.push_back(where + " cannot hold " + std::string(to_string(*nk)) + " in slot " + slot);
        }
        std::set<std::tuple<std::string, int, int>> driven;
        for (auto &e : t["sb"]) {
            auto exit = parse_side(e.at(0).get<std::string>());
            int track = e.at(1).get<int>(), width = e.at(2).get<int>();
            if (!exit || *exit == Side::Core || !spec.in_range(neighbor(c, *exit)))
                out.push_back(where + " drives a wire off the array");
            if (width != 16 && width != 1) out.push_back(where + " uses width " + std::to_string(width));
            else if (track < 0 || track >= spec.track_count(width)) out.push_back(where + " uses a missing track");
            if (e.at(4).get<bool>() && !spec.sb_register_sites) out.push_back(where + " enables a missing register");
            if (!driven.insert({e.at(0).get<std::string>(), track, width}).second)
                out.push_back(where + " drives one switch-box output twice");
        }
    }
    return out;
}

Config duplicate_config(const Config &cfg, const ArchSpec &spec, int factor)
{
    if (factor < 1) throw Error(ErrorKind::Invalid, "duplication factor must be >= 1");
    if (factor == 1) return cfg;
    std::vector<Coord> used;
    for (auto &[c, t] : cfg.tiles)
        if (!t["cells"].empty() || !t["sb"].empty() || !t["cb"].empty()) used.push_back(c);
    if (used.empty()) throw Error(ErrorKind::Invalid, "nothing to duplicate");
    int r0 = spec.rows, r1 = -1, c0 = spec.cols, c1 = -1;
    for (Coord c : used) {
        r0 = std::min(r0, c.row);
        r1 = std::max(r1, c.row);
        c0 = std::min(c0, c.col);
        c1 = std::max(c1, c.col);
    }
    int h = r1 - r0 + 1, w = c1 - c0 + 1;
    // Offsets nearest first, so a block tiles the array in a fixed order.
    auto steps = [](int lo, int hi, int limit) {
        std::vector<int> v{0};
        for (int k = 1; k < limit; ++k) {
            if (hi + k < limit) v.push_back(k);
            if (lo - k >= 0) v.push_back(-k);
        }
        return v;
    };
    auto overlaps = [&](Coord a, Coord b) { return std::abs(a.row - b.row) < h && std::abs(a.col - b.col) < w; };

    std::vector<Coord> offsets;
    bool io_short = false;
    for (int dc : steps(c0, c1, spec.cols))
        for (int dr : steps(r0, r1, spec.rows)) {
            if (static_cast<int>(offsets.size()) == factor - 1) break;
            Coord off{dr, dc};
            if (overlaps(off, {0, 0}) ||
                std::any_of(offsets.begin(), offsets.end(), [&](Coord o) { return overlaps(off, o); }))
                continue;
            bool fits = true, io_only = true;
            for (int r = r0; r <= r1; ++r)
                for (int c = c0; c <= c1; ++c) {
                    auto from = spec.kind_at({r, c});
                    auto to = spec.kind_at({r + dr, c + dc});
                    if (from == to) continue;
                    fits = false;
                    if (from != TileKind::IO && to != TileKind::IO) io_only = false;
                }
            if (fits) offsets.push_back(off);
            else if (io_only) io_short = true;
        }
    if (static_cast<int>(offsets.size()) < factor - 1)
        throw Error(ErrorKind::Capacity, "only " + std::to_string(offsets.size() + 1) + " of " + std::to_string(factor) +
                                             " copies fit" + (io_short ? "; IO tiles exhausted" : ""));

    Config out = cfg;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        Coord off = offsets[k];
        std::string tag = "@" + std::to_string(k + 1);
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c)
                if (cfg.tiles.count({r, c})) out.tiles[{r + off.row, c + off.col}] = cfg.tiles.at({r, c});
        auto move = [&](const std::map<std::string, std::string> &src, std::map<std::string, std::string> &dst) {
            for (auto &[key, id] : src) {
                auto [c, slot] = split_key(key);
                dst[cell_key({c.row + off.row, c.col + off.col}, slot)] = id + tag;
            }
        };
        move(cfg.names, out.names);
        move(cfg.net_names, out.net_names);
    }
    return out;
}

std::string serialize_config(const Config &cfg)
{
    json doc;
    doc["rows"] = cfg.rows;
    doc["cols"] = cfg.cols;
    doc["mode"] = cfg.mode == Mode::Sparse ? "sparse" : "dense";
    doc["tiles"] = json::object();
    for (auto &[c, t] : cfg.tiles) doc["tiles"][to_string(c)] = t;
    doc["names"] = cfg.names;
    doc["nets"] = cfg.net_names;
    return doc.dump(1) + "\n";
}

Config parse_config(const std::string &text)
{
    Config cfg;
    try {
        json doc = json::parse(text);
        cfg.rows = doc.at("rows").get<int>();
        cfg.cols = doc.at("cols").get<int>();
        std::string mode = doc.value("mode", std::string("dense"));
        if (mode != "dense" && mode != "sparse") throw Error(ErrorKind::Parse, "unknown mode '" + mode + "'");
        cfg.mode = mode == "sparse" ? Mode::Sparse : Mode::Dense;
        for (auto &[k, t] : doc.at("tiles").items()) cfg.tiles[parse_coord(k)] = t;
        cfg.names = doc.value("names", std::map<std::string, std::string>{});
        cfg.net_names = doc.value("nets", std::map<std::string, std::string>{});
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Parse, std::string("configuration: ") + e.what());
    }
    return cfg;
}

std::vector<std::string> design_differences(const RoutedApp &a, const RoutedApp &b)
{
    std::vector<std::string> out;
    if (a.graph.mode != b.graph.mode) out.push_back("modes differ");
    for (auto &[id, n] : a.graph.nodes) {
        auto it = b.graph.nodes.find(id);
        if (it == b.graph.nodes.end()) {
            out.push_back("node " + id + " missing");
            continue;
        }
        if (cell_json(a.graph, n) != cell_json(b.graph, it->second)) out.push_back("node " + id + " differs");
        if (a.placement.loc.at(id) != b.placement.loc.at(id)) out.push_back("node " + id + " moved");
    }
    for (auto &[id, n] : b.graph.nodes)
        if (!a.graph.nodes.count(id)) out.push_back("extra node " + id);

    auto by_driver = [](const RoutedApp &r) {
        std::map<Endpoint, std::tuple<std::vector<Endpoint>, int, bool, std::vector<Segment>>> m;
        for (auto &[id, net] : r.graph.nets) {
            auto sinks = net.sinks;
            std::sort(sinks.begin(), sinks.end());
            auto it = r.routes.find(id);
            std::vector<Segment> segs = it == r.routes.end() ? std::vector<Segment>{} : it->second;
            std::sort(segs.begin(), segs.end());
            m[net.driver] = {sinks, net.width, net.hardened, segs};
        }
        return m;
    };
    auto na = by_driver(a), nb = by_driver(b);
    for (auto &[d, v] : na) {
        auto it = nb.find(d);
        if (it == nb.end()) out.push_back("net from " + to_string(d) + " missing");
        else if (it->second != v) out.push_back("net from " + to_string(d) + " differs");
    }
    for (auto &[d, v] : nb)
        if (!na.count(d)) out.push_back("extra net from " + to_string(d));
    return out;
}

} // namespace cascade
