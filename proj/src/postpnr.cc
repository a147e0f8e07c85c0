#include "cascade/postpnr.hh"

#include <algorithm>
#include <cmath>
#include <set>

#include "cascade/passes.hh"
#include "cascade/sta.hh"

namespace cascade {

namespace {

constexpr double kMinGain = 0.01;

int nodes_at(const RoutedApp &r, Coord tile, bool shift)
{
    int count = 0;
    for (auto &[id, c] : r.placement.loc) {
        if (c != tile) continue;
        NodeKind k = r.graph.node(id).kind;
        if (shift ? k == NodeKind::Shift : (k == NodeKind::Reg || k == NodeKind::Fifo)) ++count;
    }
    return count;
}

bool reg_slot_free(const RoutedApp &r, const ArchSpec &spec, Coord tile, int need)
{
    auto kind = spec.kind_at(tile);
    return kind && *kind != TileKind::IO && nodes_at(r, tile, false) + need <= spec.tile_registers;
}

/// Critical-path segments ordered by how close their arrival is to the
/// middle of the path.
std::vector<std::pair<std::string, int>> cut_candidates(const TimingReport &rep, const RoutedApp &r, bool source_ok)
{
    std::vector<std::tuple<double, int, std::string, int>> ranked;
    double acc = 0;
    std::set<std::pair<std::string, int>> seen;
    for (std::size_t i = 0; i < rep.critical_path.size(); ++i) {
        const PathElement &e = rep.critical_path[i];
        acc += e.delay_ns;
        if (e.net.empty() || e.segment < 0) continue;
        const Segment &s = r.routes.at(e.net)[e.segment];
        if (s.is_sink() || s.register_enabled || (s.is_source() && !source_ok)) continue;
        if (!seen.insert({e.net, e.segment}).second) continue;
        ranked.emplace_back(std::abs(acc - rep.total_ns / 2), static_cast<int>(i), e.net, e.segment);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::pair<std::string, int>> out;
    for (auto &[d, i, net, seg] : ranked) out.emplace_back(net, seg);
    return out;
}

/// Segments feeding only `sink`, deepest first.
std::vector<int> exclusive_segments(const RoutedApp &r, const Net &net, const Endpoint &sink)
{
    const auto &segs = r.routes.at(net.id);
    RouteTree tree = build_route_tree(net, segs, r.placement);
    auto it = tree.sink_segment.find(sink);
    if (it == tree.sink_segment.end() || it->second < 0) return {};
    std::map<int, int> reach; // segment -> sinks below it
    for (auto &[ep, seg] : tree.sink_segment)
        if (seg >= 0)
            for (int s : path_to(tree, seg)) ++reach[s];
    std::vector<int> out;
    for (int s : path_to(tree, it->second)) {
        const Segment &sg = segs[s];
        if (reach[s] == 1 && !sg.is_sink() && !sg.register_enabled) out.push_back(s);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

/// Nets created next to a sink live inside its tile.
void add_local_routes(RoutedApp &r)
{
    for (auto &[id, net] : r.graph.nets) r.routes.try_emplace(id);
}

/// Adds `cycles` of delay in front of `sink`. Returns false when neither
/// switch-box sites nor tile slots can absorb it.
bool delay_sink(RoutedApp &r, const ArchSpec &spec, const Endpoint &sink, int cycles, PostPnrResult &res)
{
    const Net &net = *r.graph.input_net(sink);
    if (spec.sb_register_sites) {
        for (int s : exclusive_segments(r, net, sink)) {
            if (cycles == 0) break;
            r.routes.at(net.id)[s].register_enabled = true;
            ++res.sb_registers;
            --cycles;
        }
    }
    if (cycles == 0) return true;
    Coord tile = r.placement.at(sink.node);
    if (reg_slot_free(r, spec, tile, cycles)) {
        for (auto &id : insert_registers(r.graph, sink, cycles)) r.placement.loc[id] = tile;
        res.nodes_added += cycles;
        add_local_routes(r);
        return true;
    }
    if (spec.kind_at(tile) == TileKind::PE && nodes_at(r, tile, true) == 0) {
        auto ids = insert_registers(r.graph, sink, 1);
        Node &sh = r.graph.node(ids[0]);
        sh.kind = NodeKind::Shift;
        sh.depth = cycles;
        r.placement.loc[ids[0]] = tile;
        ++res.nodes_added;
        add_local_routes(r);
        return true;
    }
    return false;
}

/// A shorter critical path, or an equally long one shared by fewer endpoints.
bool improves(const TimingReport &next, const TimingReport &cur)
{
    return next.total_ns <= cur.total_ns - kMinGain ||
           (std::abs(next.total_ns - cur.total_ns) < 1e-9 && next.near_critical < cur.near_critical);
}

bool rebalance(RoutedApp &r, const ArchSpec &spec, PostPnrResult &res)
{
    CycleArrivals a = cycle_arrivals(r);
    const AppGraph g = r.graph;
    int latest_output = 0;
    for (auto &[id, n] : g.nodes)
        if (n.kind == NodeKind::IoOut && a.arrival.count({id, 0}))
            latest_output = std::max(latest_output, a.arrival.at({id, 0}));
    for (auto &[id, n] : g.nodes) {
        std::vector<Endpoint> ports;
        for (int p = 0; p < input_count(n); ++p)
            if (is_data_port(n, p) && a.arrival.count({id, p})) ports.push_back({id, p});
        int target = n.kind == NodeKind::IoOut ? latest_output : 0;
        for (auto &p : ports) target = std::max(target, effective_arrival(g, a, p));
        for (auto &p : ports) {
            int diff = target - effective_arrival(g, a, p);
            if (diff > 0 && !delay_sink(r, spec, p, diff, res)) return false;
        }
    }
    return true;
}

} // namespace

void sync_schedules(RoutedApp &r) { update_schedule(r.graph, schedule_deltas(r.graph, cycle_arrivals(r))); }

PostPnrResult post_pnr_pipeline(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib, int max_iters)
{
    PostPnrResult res{r, 0, 0, 0, 0, 0, "iteration limit"};
    TimingReport rep = critical_path(res.app, spec, lib);
    res.initial_ns = res.final_ns = rep.total_ns;
    if (!spec.sb_register_sites) res.stop_reason = "no register sites";
    for (int iter = 0; iter < max_iters && spec.sb_register_sites; ++iter) {
        bool accepted = false;
        for (auto &[net, seg] : cut_candidates(rep, res.app, true)) {
            PostPnrResult trial = res;
            trial.app.routes.at(net)[seg].register_enabled = true;
            ++trial.sb_registers;
            if (!rebalance(trial.app, spec, trial)) continue;
            TimingReport next = critical_path(trial.app, spec, lib);
            if (!improves(next, rep)) continue;
            res = std::move(trial);
            rep = next;
            accepted = true;
            break;
        }
        if (!accepted) {
            res.stop_reason = "no improving cut";
            break;
        }
        ++res.iterations;
        res.final_ns = rep.total_ns;
    }
    sync_schedules(res.app);
    return res;
}

namespace {

/// Splits `net` at segment `seg` with a FIFO on that segment's tile.
bool split_with_fifo(RoutedApp &r, const ArchSpec &spec, const std::string &net_id, int seg)
{
    Net net = r.graph.nets.at(net_id);
    std::vector<Segment> segs = r.routes.at(net_id);
    RouteTree tree = build_route_tree(net, segs, r.placement);
    Segment cut = segs[seg];
    if (!reg_slot_free(r, spec, cut.tile, 1)) return false;

    std::vector<bool> below(segs.size(), false);
    std::vector<int> stack{seg};
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        below[s] = true;
        for (int c : tree.children[s]) stack.push_back(c);
    }

    Node fifo;
    fifo.id = r.graph.fresh_node_id("fifo");
    fifo.kind = NodeKind::Fifo;
    fifo.depth = 2;
    r.graph.nodes.emplace(fifo.id, fifo);
    r.placement.loc[fifo.id] = cut.tile;

    Net upper = net, lower{r.graph.fresh_net_id(net_id + "_f"), {fifo.id, 0}, {}, net.width, false};
    upper.sinks.clear();
    for (auto &s : net.sinks) {
        int ss = tree.sink_segment.at(s);
        (ss >= 0 && below[ss] ? lower.sinks : upper.sinks).push_back(s);
    }
    upper.sinks.push_back({fifo.id, 0});

    std::vector<Segment> up, low;
    for (std::size_t i = 0; i < segs.size(); ++i) (below[i] ? low : up).push_back(segs[i]);
    if (!cut.is_source()) {
        Segment drop = cut;
        drop.exit = Side::Core;
        drop.register_enabled = false;
        for (auto &s : up)
            if (s.is_sink() && s.tile == cut.tile && s != drop) return false;
        if (std::find(up.begin(), up.end(), drop) == up.end()) up.push_back(drop);
    }
    for (auto &s : low)
        if (s == cut) {
            s.entry = Side::Core;
            s.register_enabled = false;
        }
    r.graph.nets[net_id] = upper;
    r.graph.nets.emplace(lower.id, lower);
    r.routes[net_id] = up;
    r.routes[lower.id] = low;
    return check_routes(r, spec).empty();
}

} // namespace

namespace {

/// FIFO cuts worth trying on the current critical path.
std::vector<std::pair<std::string, int>> fifo_cuts(const TimingReport &rep, const RoutedApp &r)
{
    std::vector<std::pair<std::string, int>> out;
    for (auto &[net, seg] : cut_candidates(rep, r, true)) {
        const Segment &s = r.routes.at(net)[seg];
        if (s.is_source()) {
            const Node &d = r.graph.node(r.graph.nets.at(net).driver.node);
            bool comb = d.kind == NodeKind::Pe &&
                        std::none_of(d.input_regs.begin(), d.input_regs.end(), [](bool b) { return b; });
            if (!comb) continue;
        }
        out.emplace_back(net, seg);
    }
    return out;
}

} // namespace

PostPnrResult insert_sparse_fifos(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib, int max_iters)
{
    // A join fed by two equally late inputs needs both cut before the path
    // shrinks, so a second cut is tried when no single one helps.
    constexpr std::size_t kLookahead = 6;
    PostPnrResult res{r, 0, 0, 0, 0, 0, "iteration limit"};
    TimingReport rep = critical_path(res.app, spec, lib);
    res.initial_ns = res.final_ns = rep.total_ns;
    for (int iter = 0; iter < max_iters; ++iter) {
        std::vector<std::pair<PostPnrResult, TimingReport>> partial;
        bool accepted = false;
        for (auto &[net, seg] : fifo_cuts(rep, res.app)) {
            PostPnrResult trial = res;
            if (!split_with_fifo(trial.app, spec, net, seg)) continue;
            ++trial.nodes_added;
            TimingReport next = critical_path(trial.app, spec, lib);
            if (!improves(next, rep)) {
                if (partial.size() < kLookahead) partial.emplace_back(std::move(trial), std::move(next));
                continue;
            }
            res = std::move(trial);
            rep = next;
            accepted = true;
            break;
        }
        for (std::size_t k = 0; !accepted && k < partial.size(); ++k) {
            auto &[first, first_rep] = partial[k];
            auto cuts = fifo_cuts(first_rep, first.app);
            if (cuts.size() > kLookahead) cuts.resize(kLookahead);
            for (auto &[net, seg] : cuts) {
                PostPnrResult trial = first;
                if (!split_with_fifo(trial.app, spec, net, seg)) continue;
                ++trial.nodes_added;
                TimingReport next = critical_path(trial.app, spec, lib);
                if (!improves(next, rep)) continue;
                res = std::move(trial);
                rep = next;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.stop_reason = "no improving cut";
            break;
        }
        ++res.iterations;
        res.final_ns = rep.total_ns;
    }
    return res;
}

} // namespace cascade
