#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cascade/common.hh"

namespace cascade {

/// Parameterized CGRA description. Tiles are stored row-major; a missing
/// entry is representable so validation can report it.
struct ArchSpec {
    int rows = 0;
    int cols = 0;
    std::vector<std::optional<TileKind>> tiles;
    int tracks16 = 1;
    int tracks1 = 1;
    bool sb_register_sites = true;
    int pe_input_registers = 1;
    int regfile_depth = 32;
    /// REG/FIFO cells a PE or MEM tile can host next to its core.
    int tile_registers = 4;
    std::set<std::string> hardened_nets;
    std::set<int> io_rows;

    bool in_range(Coord c) const { return c.row >= 0 && c.col >= 0 && c.row < rows && c.col < cols; }
    std::optional<TileKind> kind_at(Coord c) const;
    void set_kind(Coord c, TileKind kind);
    int track_count(int width) const { return width == 16 ? tracks16 : tracks1; }
    /// Distinct tile kinds present, in enum order.
    std::vector<TileKind> kinds_present() const;
};

/// Builds a spec from a layout of 'P', 'M', 'I' rows ('.' leaves a hole).
ArchSpec make_arch(const std::vector<std::string> &layout, int tracks16, int tracks1);

std::vector<std::string> validate_arch(const ArchSpec &spec);

inline constexpr int kWidths[2] = {16, 1};

enum class RRKind : std::uint8_t { PortOut, PortIn, Cb, SbIn, SbOut };

struct RRNode {
    RRKind kind;
    Coord tile;
    Side side = Side::Core;
    int track = 0;
    int width = 16;
    bool register_site = false;
};

/// Routing-resource graph. A SbOut node is the switch-box output driving the
/// wire that leaves its tile on `side`; the matching SbIn node is where that
/// wire lands in the neighbour. Track i only ever connects to track i.
class RoutingGraph {
public:
    explicit RoutingGraph(const ArchSpec &spec);

    int size() const { return static_cast<int>(nodes_.size()); }
    const RRNode &node(int id) const { return nodes_[id]; }
    const std::vector<int> &fanout(int id) const { return edges_[id]; }
    std::size_t edge_count() const;

    int port_out(Coord t, int width) const;
    int port_in(Coord t, int width) const;
    int cb(Coord t, int width) const;
    int sb_in(Coord t, Side s, int track, int width) const;
    int sb_out(Coord t, Side s, int track, int width) const;

    int rows() const { return rows_; }
    int cols() const { return cols_; }

private:
    int tile_base(Coord t) const { return (t.row * cols_ + t.col) * block_; }
    int width_base(int width) const { return width == 16 ? 0 : 3 + 8 * tracks16_; }

    int rows_, cols_, tracks16_, tracks1_, block_;
    std::vector<RRNode> nodes_;
    std::vector<std::vector<int>> edges_;
};

RoutingGraph build_routing_graph(const ArchSpec &spec);

enum class PathClassKind : std::uint8_t { Hop, Core, ConnectionBox, ClockToQ, Setup, ClockSkew };

struct PathClass {
    PathClassKind kind;
    TileKind tile = TileKind::PE;
    Side entry = Side::Core;
    Side exit = Side::Core;
    int width = 0;

    /// "PE:N:S:16" for hops, "core:PE", "cb_in", "reg_clk_to_q", ...
    std::string key() const;
    auto operator<=>(const PathClass &) const = default;
};

std::vector<PathClass> enumerate_tile_paths(const ArchSpec &spec);

struct DelayLibrary {
    double pe_core_ns = 0;
    double mem_core_ns = 0;
    double cb_in_ns = 0;
    double reg_clk_to_q_ns = 0;
    double setup_ns = 0;
    double clock_skew_ns = 0;
    std::map<std::tuple<TileKind, Side, Side, int>, double> sb_hop_ns;

    double core(TileKind kind) const;
    double hop(TileKind kind, Side entry, Side exit, int width) const;
    /// Same value for every hop class of the given kinds; handy in tests.
    static DelayLibrary uniform(double core, double hop, double cb = 0, double clk_q = 0,
                                double setup = 0, double skew = 0);
};

/// Reads the "delays" object of an architecture file and checks it covers
/// every class enumerate_tile_paths(spec) produces.
DelayLibrary load_delay_library(const std::string &text, const ArchSpec &spec);

/// Reads the "arch" object of an architecture file. Does not validate.
ArchSpec parse_arch(const std::string &text);

std::string read_file(const std::string &path);

} // namespace cascade
