#include "cascade/arch.hh"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cascade {

using json = nlohmann::json;

std::optional<TileKind> ArchSpec::kind_at(Coord c) const
{
    if (!in_range(c) || tiles.size() != static_cast<std::size_t>(rows * cols))
        return std::nullopt;
    return tiles[c.row * cols + c.col];
}

void ArchSpec::set_kind(Coord c, TileKind kind)
{
    tiles.resize(static_cast<std::size_t>(rows * cols));
    tiles[c.row * cols + c.col] = kind;
}

std::vector<TileKind> ArchSpec::kinds_present() const
{
    std::set<TileKind> seen;
    for (auto &t : tiles)
        if (t) seen.insert(*t);
    return {seen.begin(), seen.end()};
}

ArchSpec make_arch(const std::vector<std::string> &layout, int tracks16, int tracks1)
{
    ArchSpec spec;
    spec.rows = static_cast<int>(layout.size());
    spec.cols = layout.empty() ? 0 : static_cast<int>(layout[0].size());
    spec.tracks16 = tracks16;
    spec.tracks1 = tracks1;
    spec.tiles.assign(static_cast<std::size_t>(spec.rows * spec.cols), std::nullopt);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols && c < static_cast<int>(layout[r].size()); ++c) {
            switch (layout[r][c]) {
            case 'P': spec.set_kind({r, c}, TileKind::PE); break;
            case 'M': spec.set_kind({r, c}, TileKind::MEM); break;
            case 'I':
                spec.set_kind({r, c}, TileKind::IO);
                spec.io_rows.insert(r);
                break;
            default: break;
            }
        }
    }
    return spec;
}

std::vector<std::string> validate_arch(const ArchSpec &spec)
{
    std::vector<std::string> out;
    if (spec.rows < 1) out.push_back("rows must be ≥ 1");
    if (spec.cols < 1) out.push_back("cols must be ≥ 1");
    if (spec.tracks16 < 1) out.push_back("tracks16 must be ≥ 1");
    if (spec.tracks1 < 1) out.push_back("tracks1 must be ≥ 1");
    if (spec.pe_input_registers < 0) out.push_back("pe_input_registers must be ≥ 0");
    if (spec.regfile_depth < 1) out.push_back("regfile_depth must be ≥ 1");
    if (spec.tile_registers < 0) out.push_back("tile_registers must be ≥ 0");
    if (spec.rows < 1 || spec.cols < 1) return out;
    if (spec.tiles.size() != static_cast<std::size_t>(spec.rows * spec.cols)) {
        out.push_back("tile table has " + std::to_string(spec.tiles.size()) + " entries, expected " +
                      std::to_string(spec.rows * spec.cols));
        return out;
    }
    for (int r : spec.io_rows)
        if (r < 0 || r >= spec.rows) out.push_back("io row " + std::to_string(r) + " out of range");
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            auto kind = spec.tiles[r * spec.cols + c];
            if (!kind)
                out.push_back("tile (" + to_string(Coord{r, c}) + ") has no kind");
            else if (*kind == TileKind::IO && !spec.io_rows.count(r))
                out.push_back("IO tile (" + to_string(Coord{r, c}) + ") outside io_rows");
        }
    }
    return out;
}

RoutingGraph::RoutingGraph(const ArchSpec &spec)
    : rows_(spec.rows), cols_(spec.cols), tracks16_(spec.tracks16), tracks1_(spec.tracks1),
      block_(6 + 8 * (spec.tracks16 + spec.tracks1))
{
    nodes_.reserve(static_cast<std::size_t>(rows_ * cols_ * block_));
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            Coord t{r, c};
            for (int w : kWidths) {
                nodes_.push_back({RRKind::PortOut, t, Side::Core, 0, w, false});
                nodes_.push_back({RRKind::PortIn, t, Side::Core, 0, w, false});
                nodes_.push_back({RRKind::Cb, t, Side::Core, 0, w, false});
                for (Side s : kSides) {
                    for (int k = 0; k < spec.track_count(w); ++k) {
                        nodes_.push_back({RRKind::SbIn, t, s, k, w, false});
                        nodes_.push_back({RRKind::SbOut, t, s, k, w, spec.sb_register_sites});
                    }
                }
            }
        }
    }
    edges_.resize(nodes_.size());
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            Coord t{r, c};
            for (int w : kWidths) {
                int tracks = spec.track_count(w);
                int po = port_out(t, w);
                int cbn = cb(t, w);
                for (Side s : kSides)
                    for (int k = 0; k < tracks; ++k) edges_[po].push_back(sb_out(t, s, k, w));
                edges_[po].push_back(cbn);
                edges_[cbn].push_back(port_in(t, w));
                for (Side s : kSides) {
                    for (int k = 0; k < tracks; ++k) {
                        int in = sb_in(t, s, k, w);
                        for (Side x : kSides)
                            if (x != s) edges_[in].push_back(sb_out(t, x, k, w));
                        edges_[in].push_back(cbn);
                        Coord n = neighbor(t, s);
                        if (spec.in_range(n))
                            edges_[sb_out(t, s, k, w)].push_back(sb_in(n, opposite(s), k, w));
                    }
                }
            }
        }
    }
}

std::size_t RoutingGraph::edge_count() const
{
    std::size_t n = 0;
    for (auto &e : edges_) n += e.size();
    return n;
}

int RoutingGraph::port_out(Coord t, int width) const { return tile_base(t) + width_base(width); }
int RoutingGraph::port_in(Coord t, int width) const { return tile_base(t) + width_base(width) + 1; }
int RoutingGraph::cb(Coord t, int width) const { return tile_base(t) + width_base(width) + 2; }

int RoutingGraph::sb_in(Coord t, Side s, int track, int width) const
{
    int tracks = width == 16 ? tracks16_ : tracks1_;
    return tile_base(t) + width_base(width) + 3 + (static_cast<int>(s) * tracks + track) * 2;
}

int RoutingGraph::sb_out(Coord t, Side s, int track, int width) const { return sb_in(t, s, track, width) + 1; }

RoutingGraph build_routing_graph(const ArchSpec &spec)
{
    auto problems = validate_arch(spec);
    if (!problems.empty())
        throw Error(ErrorKind::Invalid, "invalid architecture: " + problems.front());
    return RoutingGraph(spec);
}

std::string PathClass::key() const
{
    switch (kind) {
    case PathClassKind::Hop:
        return std::string(to_string(tile)) + ":" + to_string(entry) + ":" + to_string(exit) + ":" +
               std::to_string(width);
    case PathClassKind::Core: return std::string("core:") + to_string(tile);
    case PathClassKind::ConnectionBox: return "cb_in";
    case PathClassKind::ClockToQ: return "reg_clk_to_q";
    case PathClassKind::Setup: return "setup";
    case PathClassKind::ClockSkew: return "clock_skew";
    }
    return "?";
}

std::vector<PathClass> enumerate_tile_paths(const ArchSpec &spec)
{
    std::vector<PathClass> out;
    for (TileKind kind : spec.kinds_present()) {
        for (int w : kWidths) {
            if (spec.track_count(w) < 1) continue;
            for (Side a : kSides)
                for (Side b : kSides) out.push_back({PathClassKind::Hop, kind, a, b, w});
        }
        out.push_back({PathClassKind::Core, kind, Side::Core, Side::Core, 0});
    }
    out.push_back({PathClassKind::ConnectionBox});
    out.push_back({PathClassKind::ClockToQ});
    out.push_back({PathClassKind::Setup});
    out.push_back({PathClassKind::ClockSkew});
    return out;
}

double DelayLibrary::core(TileKind kind) const
{
    switch (kind) {
    case TileKind::PE: return pe_core_ns;
    case TileKind::MEM: return mem_core_ns;
    case TileKind::IO: return 0.0;
    }
    return 0.0;
}

double DelayLibrary::hop(TileKind kind, Side entry, Side exit, int width) const
{
    auto it = sb_hop_ns.find({kind, entry, exit, width});
    if (it == sb_hop_ns.end())
        throw Error(ErrorKind::Coverage, std::string("no delay for hop class ") +
                                             PathClass{PathClassKind::Hop, kind, entry, exit, width}.key());
    return it->second;
}

DelayLibrary DelayLibrary::uniform(double core, double hop, double cb, double clk_q, double setup, double skew)
{
    DelayLibrary lib;
    lib.pe_core_ns = core;
    lib.mem_core_ns = core;
    lib.cb_in_ns = cb;
    lib.reg_clk_to_q_ns = clk_q;
    lib.setup_ns = setup;
    lib.clock_skew_ns = skew;
    for (TileKind k : {TileKind::PE, TileKind::MEM, TileKind::IO})
        for (int w : kWidths)
            for (Side a : kSides)
                for (Side b : kSides) lib.sb_hop_ns[{k, a, b, w}] = hop;
    return lib;
}

namespace {

json parse_json_text(const std::string &text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw Error(ErrorKind::Parse,
                    "line " + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
    }
}

double nonneg(const json &v, const std::string &key)
{
    if (!v.is_number()) throw Error(ErrorKind::Parse, "delay '" + key + "' is not a number");
    double d = v.get<double>();
    if (d < 0) throw Error(ErrorKind::Invalid, "delay '" + key + "' is negative");
    return d;
}

struct HopPattern {
    std::optional<TileKind> kind;
    std::optional<Side> entry, exit;
    std::optional<int> width;
    double value;
    int specificity() const { return !!kind + !!entry + !!exit + !!width; }
};

HopPattern parse_hop_key(const std::string &key, double value)
{
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    auto bad = [&] { return Error(ErrorKind::Parse, "bad hop key '" + key + "', expected KIND:ENTRY:EXIT:WIDTH"); };
    if (parts.size() != 4) throw bad();
    HopPattern h{{}, {}, {}, {}, value};
    if (parts[0] != "*" && !(h.kind = parse_tile_kind(parts[0]))) throw bad();
    for (int i : {1, 2}) {
        if (parts[i] == "*") continue;
        auto s = parse_side(parts[i]);
        if (!s || *s == Side::Core) throw bad();
        (i == 1 ? h.entry : h.exit) = s;
    }
    if (parts[3] == "16") h.width = 16;
    else if (parts[3] == "1") h.width = 1;
    else if (parts[3] != "*") throw bad();
    return h;
}

} // namespace

DelayLibrary load_delay_library(const std::string &text, const ArchSpec &spec)
{
    json doc = parse_json_text(text);
    const json &d = doc.contains("delays") ? doc["delays"] : doc;
    if (!d.is_object()) throw Error(ErrorKind::Parse, "'delays' must be an object");

    DelayLibrary lib;
    std::set<std::string> present;
    auto scalar = [&](const char *key, double &dst) {
        if (d.contains(key)) {
            dst = nonneg(d[key], key);
            present.insert(key);
        }
    };
    scalar("pe_core", lib.pe_core_ns);
    scalar("mem_core", lib.mem_core_ns);
    scalar("cb_in", lib.cb_in_ns);
    scalar("reg_clk_to_q", lib.reg_clk_to_q_ns);
    scalar("setup", lib.setup_ns);
    scalar("clock_skew", lib.clock_skew_ns);

    std::vector<HopPattern> patterns;
    if (d.contains("sb_hop")) {
        if (!d["sb_hop"].is_object()) throw Error(ErrorKind::Parse, "'sb_hop' must be an object");
        for (auto &[key, value] : d["sb_hop"].items())
            patterns.push_back(parse_hop_key(key, nonneg(value, "sb_hop " + key)));
    }

    std::vector<std::string> missing;
    for (const PathClass &pc : enumerate_tile_paths(spec)) {
        switch (pc.kind) {
        case PathClassKind::Hop: {
            const HopPattern *best = nullptr;
            for (auto &p : patterns) {
                if ((p.kind && *p.kind != pc.tile) || (p.entry && *p.entry != pc.entry) ||
                    (p.exit && *p.exit != pc.exit) || (p.width && *p.width != pc.width))
                    continue;
                if (best && best->specificity() == p.specificity() && best->value != p.value)
                    throw Error(ErrorKind::Parse, "conflicting hop entries for " + pc.key());
                if (!best || p.specificity() > best->specificity()) best = &p;
            }
            if (best) lib.sb_hop_ns[{pc.tile, pc.entry, pc.exit, pc.width}] = best->value;
            else missing.push_back(pc.key());
            break;
        }
        case PathClassKind::Core:
            if (pc.tile == TileKind::PE && !present.count("pe_core")) missing.push_back(pc.key());
            if (pc.tile == TileKind::MEM && !present.count("mem_core")) missing.push_back(pc.key());
            break;
        default:
            if (!present.count(pc.key())) missing.push_back(pc.key());
            break;
        }
    }
    if (!missing.empty()) {
        std::string msg = "delay library misses " + std::to_string(missing.size()) + " class(es):";
        for (auto &m : missing) msg += " " + m;
        throw Error(ErrorKind::Coverage, msg);
    }
    return lib;
}

ArchSpec parse_arch(const std::string &text)
{
    json doc = parse_json_text(text);
    const json &a = doc.contains("arch") ? doc["arch"] : doc;
    if (!a.is_object() || !a.contains("layout"))
        throw Error(ErrorKind::Parse, "architecture needs an 'arch' object with a 'layout'");
    try {
        std::vector<std::string> layout = a["layout"].get<std::vector<std::string>>();
        ArchSpec spec = make_arch(layout, a.value("tracks16", 1), a.value("tracks1", 1));
        for (std::size_t r = 0; r < layout.size(); ++r)
            if (static_cast<int>(layout[r].size()) != spec.cols)
                throw Error(ErrorKind::Parse, "layout row " + std::to_string(r) + " has the wrong length");
        spec.sb_register_sites = a.value("sb_register_sites", true);
        spec.pe_input_registers = a.value("pe_input_registers", 1);
        spec.regfile_depth = a.value("regfile_depth", 32);
        spec.tile_registers = a.value("tile_registers", 4);
        if (a.contains("hardened_nets"))
            for (auto &n : a["hardened_nets"]) spec.hardened_nets.insert(n.get<std::string>());
        if (a.contains("io_rows")) {
            spec.io_rows.clear();
            for (auto &r : a["io_rows"]) spec.io_rows.insert(r.get<int>());
        }
        return spec;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Parse, std::string("architecture: ") + e.what());
    }
}

std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace cascade
