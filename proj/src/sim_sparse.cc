#include <algorithm>
#include <deque>
#include <random>

#include "cascade/sim.hh"
#include "json.hpp"

namespace cascade {

namespace {

struct Token {
    bool eos = false;
    std::uint16_t value = 0;
};

struct SparseNode {
    std::size_t next = 0;          // IO_IN: tokens already sent
    std::deque<Token> fifo;        // FIFO contents
    std::optional<Token> held;     // REG contents
    std::vector<const Net *> in;   // net feeding each port
    const Net *out = nullptr;
    std::optional<Token> offer;
    bool mixed = false;
};

} // namespace

SparseTrace simulate_sparse(const AppGraph &g, const Stimulus &stim, int max_cycles)
{
    auto order = topo_order(g);
    std::map<std::string, SparseNode> st;
    for (auto &[id, n] : g.nodes) {
        if (n.kind == NodeKind::Mem || n.kind == NodeKind::Shift)
            throw Error(ErrorKind::Simulation, std::string(to_string(n.kind)) + " " + id + " has no sparse semantics");
        st[id].in.assign(static_cast<std::size_t>(input_count(n)), nullptr);
        st[id].out = g.output_net(id);
    }
    for (auto &[id, net] : g.nets)
        for (auto &s : net.sinks) st[s.node].in.at(s.port) = &net;

    SparseTrace trace;
    for (auto &[id, n] : g.nodes)
        if (n.kind == NodeKind::IoOut) {
            trace.outputs[id];
            trace.eos[id] = false;
        }
    std::map<Endpoint, bool> accept;
    for (auto &[id, net] : g.nets)
        for (auto &e : net.sinks) accept[e] = true;
    const int window = 64 + static_cast<int>(g.nodes.size());
    int last_progress = 0;

    for (int t = 0;; ++t) {
        bool done = std::all_of(trace.eos.begin(), trace.eos.end(), [](auto &kv) { return kv.second; });
        if (done) {
            trace.cycles = t;
            return trace;
        }
        if (t - last_progress > window) {
            trace.deadlock = true;
            trace.cycles = t;
            return trace;
        }
        if (t >= max_cycles)
            throw Error(ErrorKind::Simulation, "stream did not finish within " + std::to_string(max_cycles) + " cycles");

        for (auto &id : order) {
            const Node &n = g.node(id);
            SparseNode &s = st[id];
            s.offer.reset();
            s.mixed = false;
            switch (n.kind) {
            case NodeKind::IoIn: {
                auto it = stim.inputs.find(id);
                std::size_t len = it == stim.inputs.end() ? 0 : it->second.size();
                if (s.next < len) s.offer = Token{false, it->second[s.next].value_or(0)};
                else if (s.next == len) s.offer = Token{true, 0};
                break;
            }
            case NodeKind::Fifo:
                if (!s.fifo.empty()) s.offer = s.fifo.front();
                break;
            case NodeKind::Reg: s.offer = s.held; break;
            case NodeKind::Pe: {
                std::vector<Token> toks;
                for (const Net *net : s.in)
                    if (net && st[net->driver.node].offer) toks.push_back(*st[net->driver.node].offer);
                if (toks.size() != s.in.size()) break;
                auto eos = std::count_if(toks.begin(), toks.end(), [](const Token &k) { return k.eos; });
                if (eos == static_cast<long>(toks.size())) s.offer = Token{true, 0};
                else if (eos > 0) s.mixed = true;
                else {
                    std::vector<std::uint16_t> ops;
                    for (auto &k : toks) ops.push_back(k.value);
                    if (n.constant) ops.push_back(*n.constant);
                    s.offer = Token{false, eval_op(n.op, ops)};
                }
                break;
            }
            default: break;
            }
        }

        auto net_ready = [&](const Net *net) {
            if (!net) return true;
            for (auto &e : net->sinks)
                if (!accept.at(e)) return false;
            return true;
        };
        auto all_valid = [&](const SparseNode &s) {
            for (const Net *net : s.in)
                if (!net || !st[net->driver.node].offer) return false;
            return true;
        };
        auto fires = [&](const SparseNode &s) {
            if (!all_valid(s) || s.mixed || !net_ready(s.out)) return false;
            for (const Net *net : s.in)
                if (!net_ready(net)) return false;
            return true;
        };
        for (auto &[e, v] : accept) v = true;
        for (bool changed = true; changed;) {
            changed = false;
            for (auto &[id, n] : g.nodes) {
                const SparseNode &s = st[id];
                for (int p = 0; p < static_cast<int>(s.in.size()); ++p) {
                    bool ok = true;
                    switch (n.kind) {
                    case NodeKind::Fifo: ok = static_cast<int>(s.fifo.size()) < n.depth; break;
                    case NodeKind::Pe:
                        if (!all_valid(s)) ok = false;
                        else if (s.mixed) ok = !st[s.in[p]->driver.node].offer->eos;
                        else ok = fires(s);
                        break;
                    default: break;
                    }
                    auto it = accept.find({id, p});
                    if (it != accept.end() && it->second && !ok) {
                        it->second = false;
                        changed = true;
                    }
                }
            }
        }

        std::map<std::string, std::optional<Token>> moved; // net driver -> token sent
        for (auto &[id, net] : g.nets) {
            const SparseNode &d = st[net.driver.node];
            bool go = g.node(net.driver.node).kind == NodeKind::Pe ? fires(d) : d.offer && net_ready(&net);
            if (go) moved[net.driver.node] = d.offer;
        }
        std::map<std::string, std::optional<Token>> reg_next;
        for (auto &[id, n] : g.nodes)
            if (n.kind == NodeKind::Reg) reg_next[id];
        for (auto &[driver, tok] : moved) {
            SparseNode &d = st[driver];
            switch (g.node(driver).kind) {
            case NodeKind::IoIn: ++d.next; break;
            case NodeKind::Fifo: d.fifo.pop_front(); break;
            default: break;
            }
            for (auto &e : d.out->sinks) {
                const Node &n = g.node(e.node);
                if (n.kind == NodeKind::Fifo) st[e.node].fifo.push_back(*tok);
                else if (n.kind == NodeKind::Reg) reg_next[e.node] = tok;
                else if (n.kind == NodeKind::IoOut && !trace.eos[e.node]) {
                    if (tok->eos) trace.eos[e.node] = true;
                    else trace.outputs[e.node].push_back(tok->value);
                }
            }
        }
        for (auto &[id, tok] : reg_next) st[id].held = tok;
        if (!moved.empty()) last_progress = t;
    }
}

Stimulus parse_stimulus(const std::string &text)
{
    Stimulus s;
    try {
        auto doc = nlohmann::json::parse(text);
        for (auto &[id, arr] : doc.at("inputs").items())
            for (auto &v : arr) s.inputs[id].push_back(v.is_null() ? Value{} : Value{v.get<std::uint16_t>()});
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::Parse, std::string("stimulus: ") + e.what());
    }
    return s;
}

namespace {

nlohmann::ordered_json values_json(const std::vector<Value> &v)
{
    auto arr = nlohmann::ordered_json::array();
    for (auto &x : v) arr.push_back(x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr));
    return arr;
}

} // namespace

std::string trace_json(const DenseTrace &t)
{
    nlohmann::ordered_json doc;
    doc["cycles"] = t.cycles;
    doc["outputs"] = nlohmann::ordered_json::object();
    for (auto &[id, v] : t.outputs) doc["outputs"][id] = values_json(v);
    return doc.dump(1) + "\n";
}

std::string trace_json(const SparseTrace &t)
{
    nlohmann::ordered_json doc;
    doc["cycles"] = t.cycles;
    doc["deadlock"] = t.deadlock;
    doc["outputs"] = t.outputs;
    doc["eos"] = t.eos;
    return doc.dump(1) + "\n";
}

Stimulus random_stimulus(const AppGraph &g, int length, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Stimulus s;
    for (auto &[id, n] : g.nodes) {
        if (n.kind != NodeKind::IoIn) continue;
        auto &v = s.inputs[id];
        for (int i = 0; i < length; ++i) v.push_back(static_cast<std::uint16_t>(rng() % 256));
    }
    return s;
}

} // namespace cascade
