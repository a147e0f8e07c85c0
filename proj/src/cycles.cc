#include <algorithm>
#include <functional>
#include <set>

#include "cascade/sta.hh"

namespace cascade {

namespace {

using RegCount = std::function<int(const Net &, const Endpoint &)>;

CycleArrivals compute(const AppGraph &g, const RegCount &regs)
{
    CycleArrivals a;
    for (const auto &id : topo_order(g)) {
        const Node &n = g.node(id);
        int base = 0;
        for (int p = 0; p < input_count(n); ++p)
            if (is_data_port(n, p)) base = std::max(base, effective_arrival(g, a, {id, p}));
        int out = base;
        switch (n.kind) {
        case NodeKind::IoIn: out = 0; break;
        case NodeKind::Reg:
        case NodeKind::Shift:
        case NodeKind::Fifo:
        case NodeKind::Mem: out = base + latency_cycles(g, n); break;
        default: break;
        }
        a.output[id] = out;
        if (const Net *net = g.output_net(id))
            for (auto &s : net->sinks)
                if (is_data_port(g.node(s.node), s.port)) a.arrival[s] = out + regs(*net, s);
    }
    return a;
}

} // namespace

int route_registers(const RoutedApp &r, const Net &net, const Endpoint &sink)
{
    const auto &segs = r.routes.at(net.id);
    RouteTree tree = build_route_tree(net, segs, r.placement);
    auto it = tree.sink_segment.find(sink);
    if (it == tree.sink_segment.end() || it->second < 0) return 0;
    int count = 0;
    for (int s : path_to(tree, it->second)) count += segs[s].register_enabled ? 1 : 0;
    return count;
}

CycleArrivals cycle_arrivals(const AppGraph &g)
{
    return compute(g, [](const Net &, const Endpoint &) { return 0; });
}

CycleArrivals cycle_arrivals(const RoutedApp &r)
{
    return compute(r.graph, [&](const Net &net, const Endpoint &s) { return route_registers(r, net, s); });
}

int effective_arrival(const AppGraph &g, const CycleArrivals &a, const Endpoint &port)
{
    auto it = a.arrival.find(port);
    int t = it == a.arrival.end() ? 0 : it->second;
    const Node &n = g.node(port.node);
    if (n.kind == NodeKind::Pe && port.port < static_cast<int>(n.input_regs.size()) && n.input_regs[port.port]) ++t;
    return t;
}

std::vector<std::string> arrival_conflicts(const AppGraph &g, const CycleArrivals &a)
{
    std::vector<std::string> out;
    std::set<int> outputs;
    for (auto &[id, n] : g.nodes) {
        std::set<int> seen;
        for (int p = 0; p < input_count(n); ++p)
            if (is_data_port(n, p) && a.arrival.count({id, p})) seen.insert(effective_arrival(g, a, {id, p}));
        if (seen.size() > 1) out.push_back(id);
        if (n.kind == NodeKind::IoOut && !seen.empty()) outputs.insert(*seen.begin());
    }
    if (outputs.size() > 1) out.push_back("<outputs>");
    return out;
}

std::pair<AppGraph, int> balance_branches(const AppGraph &g)
{
    AppGraph out = g;
    CycleArrivals a = cycle_arrivals(g);
    int inserted = 0;
    auto pad = [&](const Endpoint &port, int target) {
        int diff = target - effective_arrival(g, a, port);
        if (diff > 0) {
            insert_registers(out, port, diff);
            inserted += diff;
        }
    };
    int latest_output = 0;
    for (auto &[id, n] : g.nodes) {
        std::vector<Endpoint> ports;
        for (int p = 0; p < input_count(n); ++p)
            if (is_data_port(n, p) && a.arrival.count({id, p})) ports.push_back({id, p});
        if (n.kind == NodeKind::IoOut && !ports.empty())
            latest_output = std::max(latest_output, effective_arrival(g, a, ports.front()));
        if (ports.size() < 2) continue;
        int target = 0;
        for (auto &p : ports) target = std::max(target, effective_arrival(g, a, p));
        for (auto &p : ports) pad(p, target);
    }
    for (auto &[id, n] : g.nodes)
        if (n.kind == NodeKind::IoOut && a.arrival.count({id, 0})) pad({id, 0}, latest_output);
    return {std::move(out), inserted};
}

} // namespace cascade
