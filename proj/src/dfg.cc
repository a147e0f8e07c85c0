#include "cascade/dfg.hh"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "json.hpp"

namespace cascade {

using json = nlohmann::json;

namespace {

constexpr const char *kKindNames[] = {"IO_IN", "IO_OUT", "PE", "MEM", "REG", "SHIFT", "FIFO"};
constexpr const char *kOpNames[] = {"add", "sub", "mul", "and", "or",  "xor", "shl", "shr",
                                    "gt",  "lt",  "eq",  "mux", "abs", "min", "max"};

} // namespace

const char *to_string(NodeKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<NodeKind> parse_node_kind(std::string_view text)
{
    for (int i = 0; i < 7; ++i)
        if (text == kKindNames[i]) return static_cast<NodeKind>(i);
    return std::nullopt;
}

TileKind home_tile(NodeKind kind)
{
    switch (kind) {
    case NodeKind::IoIn:
    case NodeKind::IoOut: return TileKind::IO;
    case NodeKind::Mem: return TileKind::MEM;
    default: return TileKind::PE;
    }
}

bool is_core(NodeKind kind)
{
    return kind == NodeKind::IoIn || kind == NodeKind::IoOut || kind == NodeKind::Pe || kind == NodeKind::Mem;
}

const char *to_string(Op op) { return kOpNames[static_cast<int>(op)]; }

std::optional<Op> parse_op(std::string_view text)
{
    for (int i = 0; i < 15; ++i)
        if (text == kOpNames[i]) return static_cast<Op>(i);
    return std::nullopt;
}

int arity(Op op)
{
    switch (op) {
    case Op::Abs: return 1;
    case Op::Mux: return 3;
    default: return 2;
    }
}

std::uint16_t eval_op(Op op, const std::vector<std::uint16_t> &in)
{
    auto s = [&](int i) { return static_cast<std::int16_t>(in[i]); };
    switch (op) {
    case Op::Add: return static_cast<std::uint16_t>(in[0] + in[1]);
    case Op::Sub: return static_cast<std::uint16_t>(in[0] - in[1]);
    case Op::Mul: return static_cast<std::uint16_t>(static_cast<std::uint32_t>(in[0]) * in[1]);
    case Op::And: return in[0] & in[1];
    case Op::Or: return in[0] | in[1];
    case Op::Xor: return in[0] ^ in[1];
    case Op::Shl: return static_cast<std::uint16_t>(in[0] << (in[1] & 15));
    case Op::Shr: return static_cast<std::uint16_t>(in[0] >> (in[1] & 15));
    case Op::Gt: return s(0) > s(1);
    case Op::Lt: return s(0) < s(1);
    case Op::Eq: return in[0] == in[1];
    case Op::Mux: return in[2] ? in[1] : in[0];
    case Op::Abs: return static_cast<std::uint16_t>(s(0) < 0 ? -s(0) : s(0));
    case Op::Min: return static_cast<std::uint16_t>(std::min(s(0), s(1)));
    case Op::Max: return static_cast<std::uint16_t>(std::max(s(0), s(1)));
    }
    return 0;
}

std::string to_string(const Endpoint &e) { return e.node + "." + std::to_string(e.port); }

const Node &AppGraph::node(const std::string &id) const
{
    auto it = nodes.find(id);
    if (it == nodes.end()) throw Error(ErrorKind::Invalid, "unknown node '" + id + "'");
    return it->second;
}

Node &AppGraph::node(const std::string &id)
{
    auto it = nodes.find(id);
    if (it == nodes.end()) throw Error(ErrorKind::Invalid, "unknown node '" + id + "'");
    return it->second;
}

const Net *AppGraph::output_net(const std::string &id) const
{
    for (auto &[_, net] : nets)
        if (net.driver.node == id) return &net;
    return nullptr;
}

const Net *AppGraph::input_net(const Endpoint &sink) const
{
    for (auto &[_, net] : nets)
        for (auto &s : net.sinks)
            if (s == sink) return &net;
    return nullptr;
}

std::string AppGraph::fresh_node_id(const std::string &base) const
{
    for (int i = static_cast<int>(nodes.size());; ++i) {
        std::string id = base + "$" + std::to_string(i);
        if (!nodes.count(id)) return id;
    }
}

std::string AppGraph::fresh_net_id(const std::string &base) const
{
    for (int i = static_cast<int>(nets.size());; ++i) {
        std::string id = base + "$" + std::to_string(i);
        if (!nets.count(id)) return id;
    }
}

int input_count(const Node &n)
{
    switch (n.kind) {
    case NodeKind::IoIn: return 0;
    case NodeKind::Pe: return arity(n.op) - (n.constant ? 1 : 0);
    case NodeKind::Mem: return 2;
    default: return 1;
    }
}

bool is_data_port(const Node &n, int port) { return !(n.kind == NodeKind::Mem && port == kMemFlushPort); }

int latency_cycles(const AppGraph &g, const Node &n)
{
    switch (n.kind) {
    case NodeKind::Reg: return 1;
    case NodeKind::Shift:
    case NodeKind::Fifo: return n.depth;
    case NodeKind::Pe:
        return std::any_of(n.input_regs.begin(), n.input_regs.end(), [](bool b) { return b; }) ? 1 : 0;
    case NodeKind::Mem: {
        auto it = g.schedules.find(n.id);
        if (it == g.schedules.end() || it->second.size() < 2) return 0;
        return it->second[1] - it->second[0];
    }
    default: return 0;
    }
}

bool is_broadcast(const Net &net, int threshold) { return static_cast<int>(net.sinks.size()) >= threshold; }

namespace {

int expected_width(const Node &n, int port)
{
    if (n.kind == NodeKind::Pe) return 16;
    if (n.kind == NodeKind::Mem) return port == kMemFlushPort ? 1 : 16;
    return 0; // any
}

Endpoint parse_endpoint(const json &j)
{
    if (j.is_string()) return {j.get<std::string>(), 0};
    if (j.is_array() && j.size() == 2 && j[0].is_string() && j[1].is_number_integer())
        return {j[0].get<std::string>(), j[1].get<int>()};
    throw Error(ErrorKind::Parse, "bad endpoint " + j.dump());
}

} // namespace

void check_structure(const AppGraph &g)
{
    std::map<Endpoint, std::string> sink_owner;
    std::map<std::string, std::string> driver_owner;
    for (auto &[id, net] : g.nets) {
        if (net.width != 1 && net.width != 16)
            throw Error(ErrorKind::Invalid, "net " + id + ": width must be 1 or 16");
        if (net.hardened && net.width != 1)
            throw Error(ErrorKind::Invalid, "net " + id + ": hardened nets must be 1-bit");
        if (net.sinks.empty()) throw Error(ErrorKind::Invalid, "net " + id + " has no sinks");
        auto dn = g.nodes.find(net.driver.node);
        if (dn == g.nodes.end()) throw Error(ErrorKind::Invalid, "net " + id + ": unknown driver " + net.driver.node);
        if (dn->second.kind == NodeKind::IoOut || net.driver.port != 0)
            throw Error(ErrorKind::Invalid, "net " + id + ": " + to_string(net.driver) + " is not an output");
        if (auto [it, fresh] = driver_owner.emplace(net.driver.node, id); !fresh)
            throw Error(ErrorKind::Invalid,
                        "multi-driver: node " + net.driver.node + " drives nets " + it->second + " and " + id);
        int dw = expected_width(dn->second, 0);
        if (dw && dw != net.width) throw Error(ErrorKind::Invalid, "width mismatch on net " + id + " at driver");
        for (auto &s : net.sinks) {
            auto sn = g.nodes.find(s.node);
            if (sn == g.nodes.end()) throw Error(ErrorKind::Invalid, "net " + id + ": unknown sink " + s.node);
            if (s.port < 0 || s.port >= input_count(sn->second))
                throw Error(ErrorKind::Invalid, "net " + id + ": " + to_string(s) + " is not an input");
            if (auto [it, fresh] = sink_owner.emplace(s, id); !fresh)
                throw Error(ErrorKind::Invalid,
                            "multi-driver: " + to_string(s) + " driven by nets " + it->second + " and " + id);
            int sw = expected_width(sn->second, s.port);
            if (sw && sw != net.width)
                throw Error(ErrorKind::Invalid, "width mismatch on net " + id + " at " + to_string(s));
        }
    }
    // Pass-through cells keep their width.
    for (auto &[id, n] : g.nodes) {
        if (n.kind != NodeKind::Reg && n.kind != NodeKind::Shift && n.kind != NodeKind::Fifo) continue;
        const Net *in = g.input_net({id, 0});
        const Net *out = g.output_net(id);
        if (in && out && in->width != out->width)
            throw Error(ErrorKind::Invalid, "width mismatch across " + id);
    }
    topo_order(g);
}

std::vector<std::string> topo_order(const AppGraph &g)
{
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> succ;
    for (auto &[id, _] : g.nodes) indegree[id] = 0;
    for (auto &[_, net] : g.nets) {
        for (auto &s : net.sinks) {
            succ[net.driver.node].push_back(s.node);
            ++indegree[s.node];
        }
    }
    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (auto &[id, d] : indegree)
        if (d == 0) ready.push(id);
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string id = ready.top();
        ready.pop();
        order.push_back(id);
        for (auto &s : succ[id])
            if (--indegree[s] == 0) ready.push(s);
    }
    if (order.size() == g.nodes.size()) return order;

    // Name one cycle among the leftover nodes.
    std::map<std::string, int> color;
    std::vector<std::string> stack;
    std::vector<std::string> cycle;
    std::function<bool(const std::string &)> dfs = [&](const std::string &u) {
        color[u] = 1;
        stack.push_back(u);
        for (auto &v : succ[u]) {
            if (indegree[v] == 0) continue;
            if (color[v] == 1) {
                auto it = std::find(stack.begin(), stack.end(), v);
                cycle.assign(it, stack.end());
                cycle.push_back(v);
                return true;
            }
            if (color[v] == 0 && dfs(v)) return true;
        }
        stack.pop_back();
        color[u] = 2;
        return false;
    };
    for (auto &[id, d] : indegree)
        if (d > 0 && color[id] == 0 && dfs(id)) break;
    std::string msg = "cycle:";
    for (std::size_t i = 0; i < cycle.size(); ++i) msg += (i ? " -> " : " ") + cycle[i];
    throw Error(ErrorKind::Cycle, msg);
}

AppGraph parse_app(const std::string &text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw Error(ErrorKind::Parse,
                    "line " + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
    }
    AppGraph g;
    try {
        std::string mode = doc.value("mode", "dense");
        if (mode == "dense") g.mode = Mode::Dense;
        else if (mode == "sparse") g.mode = Mode::Sparse;
        else throw Error(ErrorKind::Parse, "unknown mode '" + mode + "'");

        for (auto &jn : doc.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<std::string>();
            auto kind = parse_node_kind(jn.at("kind").get<std::string>());
            if (!kind) throw Error(ErrorKind::Parse, "node " + n.id + ": unknown kind");
            n.kind = *kind;
            if (n.kind == NodeKind::Pe) {
                auto op = parse_op(jn.at("op").get<std::string>());
                if (!op) throw Error(ErrorKind::Parse, "node " + n.id + ": unknown op " + jn.at("op").dump());
                n.op = *op;
                if (jn.contains("const") && !jn["const"].is_null())
                    n.constant = static_cast<std::uint16_t>(jn["const"].get<int>());
                n.input_regs.assign(static_cast<std::size_t>(std::max(0, input_count(n))), false);
                if (jn.contains("input_regs")) {
                    auto regs = jn["input_regs"].get<std::vector<bool>>();
                    if (regs.size() != n.input_regs.size())
                        throw Error(ErrorKind::Parse, "node " + n.id + ": input_regs has the wrong length");
                    n.input_regs = regs;
                }
            }
            n.depth = jn.value("depth", 0);
            n.extent = jn.value("extent", 0);
            if (!g.nodes.emplace(n.id, n).second) throw Error(ErrorKind::Parse, "duplicate node " + n.id);
        }
        for (auto &jn : doc.at("nets")) {
            Net net;
            net.id = jn.at("id").get<std::string>();
            const json &drv = jn.at("driver");
            if (drv.is_array() && !drv.empty() && drv[0].is_array()) {
                if (drv.size() != 1) throw Error(ErrorKind::Invalid, "multi-driver: net " + net.id + " has " +
                                                                         std::to_string(drv.size()) + " drivers");
                net.driver = parse_endpoint(drv[0]);
            } else {
                net.driver = parse_endpoint(drv);
            }
            for (auto &s : jn.at("sinks")) net.sinks.push_back(parse_endpoint(s));
            net.width = jn.value("width", 16);
            net.hardened = jn.value("hardened", false);
            if (!g.nets.emplace(net.id, net).second) throw Error(ErrorKind::Parse, "duplicate net " + net.id);
        }
        if (doc.contains("schedules"))
            for (auto &[id, offs] : doc["schedules"].items()) g.schedules[id] = offs.get<std::vector<int>>();
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Parse, std::string("application: ") + e.what());
    }
    check_structure(g);
    return g;
}

std::string serialize_app(const AppGraph &g)
{
    json doc;
    doc["mode"] = g.mode == Mode::Dense ? "dense" : "sparse";
    doc["nodes"] = json::array();
    for (auto &[id, n] : g.nodes) {
        json jn;
        jn["id"] = id;
        jn["kind"] = to_string(n.kind);
        if (n.kind == NodeKind::Pe) {
            jn["op"] = to_string(n.op);
            if (n.constant) jn["const"] = *n.constant;
            jn["input_regs"] = n.input_regs;
        }
        if (n.kind == NodeKind::Shift || n.kind == NodeKind::Fifo || n.kind == NodeKind::Mem) jn["depth"] = n.depth;
        if (n.kind == NodeKind::Mem && n.extent) jn["extent"] = n.extent;
        doc["nodes"].push_back(jn);
    }
    doc["nets"] = json::array();
    for (auto &[id, net] : g.nets) {
        json jn;
        jn["id"] = id;
        jn["driver"] = json::array({net.driver.node, net.driver.port});
        jn["sinks"] = json::array();
        for (auto &s : net.sinks) jn["sinks"].push_back(json::array({s.node, s.port}));
        jn["width"] = net.width;
        jn["hardened"] = net.hardened;
        doc["nets"].push_back(jn);
    }
    doc["schedules"] = json::object();
    for (auto &[id, offs] : g.schedules) doc["schedules"][id] = offs;
    return doc.dump(1) + "\n";
}

std::vector<std::string> validate_semantics(const AppGraph &g, const ArchSpec &spec)
{
    std::vector<std::string> out;
    for (auto &[id, n] : g.nodes) {
        switch (n.kind) {
        case NodeKind::Shift:
            if (n.depth < 1 || n.depth > spec.regfile_depth)
                out.push_back("SHIFT " + id + " depth " + std::to_string(n.depth) + " outside [1, " +
                              std::to_string(spec.regfile_depth) + "]");
            if (g.mode == Mode::Sparse) out.push_back("SHIFT " + id + " in a ready-valid graph");
            break;
        case NodeKind::Fifo:
            if (g.mode == Mode::Dense) out.push_back("FIFO " + id + " in a dense graph");
            if (n.depth < 2) out.push_back("FIFO " + id + " depth must be ≥ 2");
            break;
        case NodeKind::Reg:
            if (g.mode == Mode::Sparse) out.push_back("REG " + id + " in a ready-valid graph");
            break;
        case NodeKind::Mem: {
            if (g.mode == Mode::Sparse) {
                out.push_back("MEM " + id + " in a ready-valid graph");
                break;
            }
            auto it = g.schedules.find(id);
            if (it == g.schedules.end() || it->second.size() != 2)
                out.push_back("MEM " + id + " needs a {write, read} schedule");
            else if (it->second[0] < 0 || it->second[1] <= it->second[0])
                out.push_back("MEM " + id + " schedule must satisfy 0 ≤ write < read");
            if (n.depth < 0) out.push_back("MEM " + id + " depth must be ≥ 0");
            if (!g.input_net({id, 0})) out.push_back("MEM " + id + " has no data input");
            break;
        }
        case NodeKind::Pe:
            if (input_count(n) < 1) out.push_back("PE " + id + " has no inputs");
            for (int p = 0; p < input_count(n); ++p)
                if (!g.input_net({id, p})) out.push_back("PE " + id + " input " + std::to_string(p) + " unconnected");
            if (std::count(n.input_regs.begin(), n.input_regs.end(), true) > 0 && spec.pe_input_registers < 1)
                out.push_back("PE " + id + " enables input registers the architecture lacks");
            break;
        case NodeKind::IoOut:
            if (!g.input_net({id, 0})) out.push_back("IO_OUT " + id + " unconnected");
            break;
        default: break;
        }
        if (n.kind != NodeKind::Pe && !n.input_regs.empty()) out.push_back(std::string(to_string(n.kind)) + " " + id + " carries PE input registers");
    }
    for (auto &[id, s] : g.schedules)
        if (!g.nodes.count(id) || g.node(id).kind != NodeKind::Mem) out.push_back("schedule for non-MEM " + id);
    for (auto &[id, net] : g.nets)
        if (net.hardened && !spec.hardened_nets.count(id))
            out.push_back("net " + id + " is hardened but the architecture does not harden it");
    return out;
}

void apply_hardening(AppGraph &g, const ArchSpec &spec)
{
    for (auto &[id, net] : g.nets) net.hardened = spec.hardened_nets.count(id) > 0 && net.width == 1;
}

std::vector<std::string> insert_registers(AppGraph &g, const Endpoint &sink, int count)
{
    std::vector<std::string> ids;
    if (count <= 0) return ids;
    const Net *feed = g.input_net(sink);
    if (!feed) throw Error(ErrorKind::Invalid, "no net feeds " + to_string(sink));
    Net &net = g.nets.at(feed->id);
    int width = net.width;
    for (int i = 0; i < count; ++i) {
        Node reg;
        reg.id = g.fresh_node_id("reg");
        reg.kind = NodeKind::Reg;
        g.nodes.emplace(reg.id, reg);
        ids.push_back(reg.id);
        if (i == 0) {
            std::replace(net.sinks.begin(), net.sinks.end(), sink, Endpoint{reg.id, 0});
        } else {
            Net link{g.fresh_net_id("n"), {ids[i - 1], 0}, {{reg.id, 0}}, width, false};
            g.nets.emplace(link.id, link);
        }
    }
    Net last{g.fresh_net_id("n"), {ids.back(), 0}, {sink}, width, false};
    g.nets.emplace(last.id, last);
    return ids;
}

} // namespace cascade
