#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascade/arch.hh"

namespace cascade {

enum class NodeKind : std::uint8_t { IoIn, IoOut, Pe, Mem, Reg, Shift, Fifo };

const char *to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);

/// Tile kind a node of this kind is placed on (REG/SHIFT/FIFO live next to a
/// core, so they report PE).
TileKind home_tile(NodeKind kind);
/// True for nodes that occupy a tile's core slot.
bool is_core(NodeKind kind);

enum class Op : std::uint8_t { Add, Sub, Mul, And, Or, Xor, Shl, Shr, Gt, Lt, Eq, Mux, Abs, Min, Max };

const char *to_string(Op op);
std::optional<Op> parse_op(std::string_view text);
int arity(Op op);
/// 16-bit semantics. Comparisons, min/max and abs read operands as signed.
/// Mux operands are (a, b, sel) and yield sel ? b : a.
std::uint16_t eval_op(Op op, const std::vector<std::uint16_t> &in);

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Pe;
    Op op = Op::Add;
    /// Immediate operand replacing the last input of a PE.
    std::optional<std::uint16_t> constant;
    std::vector<bool> input_regs;
    /// SHIFT/FIFO depth. MEM: how many writes back each read looks (a line
    /// buffer of that many words); the cycle latency comes from the schedule.
    int depth = 0;
    /// MEM: number of values written and read per schedule, 0 = unbounded.
    int extent = 0;
};

struct Endpoint {
    std::string node;
    int port = 0;
    auto operator<=>(const Endpoint &) const = default;
};

std::string to_string(const Endpoint &e);

struct Net {
    std::string id;
    Endpoint driver;
    std::vector<Endpoint> sinks;
    int width = 16;
    bool hardened = false;
};

enum class Mode : std::uint8_t { Dense, Sparse };

/// MEM ports: 0 = data, 1 = flush (control, ignored by data analyses).
inline constexpr int kMemFlushPort = 1;

struct AppGraph {
    Mode mode = Mode::Dense;
    std::map<std::string, Node> nodes;
    std::map<std::string, Net> nets;
    /// MEM id -> {write_offset, read_offset}.
    std::map<std::string, std::vector<int>> schedules;

    const Node &node(const std::string &id) const;
    Node &node(const std::string &id);
    /// Net driven by `node`, or nullptr.
    const Net *output_net(const std::string &node) const;
    /// Net feeding `sink`, or nullptr.
    const Net *input_net(const Endpoint &sink) const;
    /// Returns an id starting with `base` that is not yet used by a node.
    std::string fresh_node_id(const std::string &base) const;
    std::string fresh_net_id(const std::string &base) const;
};

int input_count(const Node &n);
/// True for ports whose arrival matters for cycle balancing.
bool is_data_port(const Node &n, int port);
/// Cycle latency from data input to output (PE: 1 if any input register
/// is enabled, MEM: read_offset - write_offset).
int latency_cycles(const AppGraph &g, const Node &n);
bool is_broadcast(const Net &net, int threshold);

/// Builds a graph from an application file; validates structure.
AppGraph parse_app(const std::string &text);
/// Canonical form: sorted keys, nodes and nets ordered by id.
std::string serialize_app(const AppGraph &g);

/// Throws on multi-driver ports, width mismatches, dangling references and cycles.
void check_structure(const AppGraph &g);

/// Deterministic topological order (ties by id). Throws ErrorKind::Cycle.
std::vector<std::string> topo_order(const AppGraph &g);

std::vector<std::string> validate_semantics(const AppGraph &g, const ArchSpec &spec);

/// Marks nets named in spec.hardened_nets.
void apply_hardening(AppGraph &g, const ArchSpec &spec);

/// Adds `count` REG nodes in series in front of `sink`; returns new node ids.
std::vector<std::string> insert_registers(AppGraph &g, const Endpoint &sink, int count);

} // namespace cascade
