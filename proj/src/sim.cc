#include "cascade/sim.hh"

#include <algorithm>
#include <deque>
#include <random>

#include "cascade/sta.hh"
#include "json.hpp"

namespace cascade {

namespace {

/// Driver node of each input port, "" when unconnected.
std::map<std::string, std::vector<std::string>> port_drivers(const AppGraph &g)
{
    std::map<std::string, std::vector<std::string>> out;
    for (auto &[id, n] : g.nodes) out[id].assign(static_cast<std::size_t>(input_count(n)), "");
    for (auto &[id, net] : g.nets)
        for (auto &s : net.sinks) {
            auto &v = out.at(s.node);
            if (s.port >= 0 && s.port < static_cast<int>(v.size())) v[s.port] = net.driver.node;
        }
    return out;
}

std::uint16_t pe_eval(const Node &n, std::vector<std::uint16_t> in)
{
    if (n.constant) in.push_back(*n.constant);
    return eval_op(n.op, in);
}

bool in_window(int t, int start, int extent) { return t >= start && (extent == 0 || t < start + extent); }

struct DenseNode {
    Value q;
    std::deque<Value> buf;
    std::vector<Value> preg;
    std::vector<Value> written;
    int reads = 0;
    bool read = false;
    std::vector<Value> in;
};

bool defined_any(const std::deque<Value> &d)
{
    return std::any_of(d.begin(), d.end(), [](const Value &v) { return v.has_value(); });
}

} // namespace

DenseTrace simulate_dense(const AppGraph &g, const Stimulus &stim, int max_cycles)
{
    if (g.mode != Mode::Dense) throw Error(ErrorKind::Simulation, "dense simulation of a sparse application");
    auto order = topo_order(g);
    auto drivers = port_drivers(g);
    std::map<std::string, DenseNode> st;
    int stim_len = 0;
    for (auto &[id, v] : stim.inputs) stim_len = std::max(stim_len, static_cast<int>(v.size()));
    for (auto &[id, n] : g.nodes) {
        DenseNode &s = st[id];
        if (n.kind == NodeKind::Shift || n.kind == NodeKind::Fifo) s.buf.assign(static_cast<std::size_t>(n.depth), {});
        if (n.kind == NodeKind::Pe) s.preg.assign(static_cast<std::size_t>(input_count(n)), {});
        if (n.kind == NodeKind::Mem) {
            auto it = g.schedules.find(id);
            if (it == g.schedules.end() || it->second.size() < 2)
                throw Error(ErrorKind::Simulation, "MEM " + id + " has no schedule");
        }
    }

    DenseTrace trace;
    for (auto &[id, n] : g.nodes)
        if (n.kind == NodeKind::IoOut) trace.outputs[id];
    std::map<std::string, Value> cur;
    for (int t = 0;; ++t) {
        if (t >= max_cycles)
            throw Error(ErrorKind::Simulation, "no quiescence within " + std::to_string(max_cycles) + " cycles");
        for (auto &id : order) {
            const Node &n = g.node(id);
            DenseNode &s = st[id];
            s.in.clear();
            for (auto &d : drivers[id]) s.in.push_back(d.empty() ? Value{} : cur[d]);
            Value out;
            switch (n.kind) {
            case NodeKind::IoIn: {
                auto it = stim.inputs.find(id);
                if (it != stim.inputs.end() && t < static_cast<int>(it->second.size())) out = it->second[t];
                break;
            }
            case NodeKind::IoOut: trace.outputs[id].push_back(s.in[0]); break;
            case NodeKind::Reg: out = s.q; break;
            case NodeKind::Shift:
            case NodeKind::Fifo: out = s.buf.empty() ? s.in[0] : s.buf.front(); break;
            case NodeKind::Mem: {
                const auto &sch = g.schedules.at(id);
                s.read = in_window(t, sch[1], n.extent);
                long idx = static_cast<long>(s.reads) - n.depth;
                if (s.read && idx >= 0 && idx < static_cast<long>(s.written.size())) out = s.written[idx];
                break;
            }
            case NodeKind::Pe: {
                std::vector<std::uint16_t> ops;
                for (std::size_t p = 0; p < s.in.size(); ++p) {
                    bool reg = p < n.input_regs.size() && n.input_regs[p];
                    const Value &v = reg ? s.preg[p] : s.in[p];
                    if (!v) break;
                    ops.push_back(*v);
                }
                if (ops.size() == s.in.size()) out = pe_eval(n, ops);
                break;
            }
            }
            cur[id] = out;
        }
        bool busy = false;
        for (auto &[id, n] : g.nodes) {
            DenseNode &s = st[id];
            switch (n.kind) {
            case NodeKind::Reg: s.q = s.in[0]; busy |= s.q.has_value(); break;
            case NodeKind::Shift:
            case NodeKind::Fifo:
                if (!s.buf.empty()) {
                    s.buf.pop_front();
                    s.buf.push_back(s.in[0]);
                }
                busy |= defined_any(s.buf);
                break;
            case NodeKind::Pe:
                for (std::size_t p = 0; p < s.preg.size(); ++p) {
                    s.preg[p] = s.in[p];
                    busy |= s.preg[p].has_value();
                }
                break;
            case NodeKind::Mem: {
                const auto &sch = g.schedules.at(id);
                if (s.read) ++s.reads;
                if (in_window(t, sch[0], n.extent)) s.written.push_back(s.in[0]);
                if (n.extent == 0 || s.reads < n.extent)
                    for (long i = std::max(0L, static_cast<long>(s.reads) - n.depth);
                         i < static_cast<long>(s.written.size()); ++i)
                        busy |= s.written[i].has_value();
                break;
            }
            default: break;
            }
        }
        if (t + 1 >= stim_len && !busy) {
            trace.cycles = t + 1;
            return trace;
        }
    }
}

AppGraph materialize_route_registers(const RoutedApp &r)
{
    AppGraph g = r.graph;
    for (auto &[id, net] : r.graph.nets)
        for (auto &s : net.sinks)
            if (int k = route_registers(r, net, s); k > 0) insert_registers(g, s, k);
    return g;
}

DenseTrace simulate_dense(const RoutedApp &r, const Stimulus &stim, int max_cycles)
{
    return simulate_dense(materialize_route_registers(r), stim, max_cycles);
}

Equivalence equivalent_modulo_latency(const DenseTrace &a, const DenseTrace &b)
{
    Equivalence eq;
    auto first = [](const std::vector<Value> &v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i]) return static_cast<int>(i);
        return -1;
    };
    bool have = false;
    for (auto &[id, va] : a.outputs) {
        auto it = b.outputs.find(id);
        if (it == b.outputs.end()) {
            eq.reason = "output " + id + " missing";
            return eq;
        }
        int fa = first(va), fb = first(it->second);
        if ((fa < 0) != (fb < 0)) {
            eq.reason = "output " + id + " is never defined on one side";
            return eq;
        }
        if (fa < 0) continue;
        if (!have) {
            eq.offset = fb - fa;
            have = true;
        } else if (fb - fa != eq.offset) {
            eq.reason = "outputs disagree on latency";
            return eq;
        }
    }
    if (a.outputs.size() != b.outputs.size()) {
        eq.reason = "output sets differ";
        return eq;
    }
    for (auto &[id, va] : a.outputs) {
        const auto &vb = b.outputs.at(id);
        auto at = [](const std::vector<Value> &v, long i) { return i >= 0 && i < static_cast<long>(v.size()) ? v[i] : Value{}; };
        long lo = std::min(0L, -static_cast<long>(eq.offset));
        long hi = std::max(static_cast<long>(va.size()), static_cast<long>(vb.size()) - eq.offset);
        for (long i = lo; i < hi; ++i) {
            if (at(va, i) != at(vb, i + eq.offset)) {
                eq.reason = "output " + id + " differs at cycle " + std::to_string(i);
                return eq;
            }
        }
    }
    eq.equal = true;
    return eq;
}

} // namespace cascade
