#include "cascade/pnr.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <tuple>

namespace cascade {

namespace {

struct NetJob {
    const Net *net;
    Coord driver;
    std::vector<Coord> sink_tiles; // remote tiles only, routing order
};

struct NetTree {
    std::map<int, int> pred; // rr node -> predecessor (-1 for the root)
    std::vector<int> order;  // insertion order, root first
    std::vector<int> targets;
};

std::vector<Segment> tree_segments(const NetTree &t, const RoutingGraph &rr)
{
    std::vector<Segment> segs;
    for (int n : t.order) {
        const RRNode &node = rr.node(n);
        int p = t.pred.at(n);
        if (p < 0) continue;
        const RRNode &pn = rr.node(p);
        if (node.kind == RRKind::SbOut) {
            Side entry = pn.kind == RRKind::PortOut ? Side::Core : pn.side;
            segs.push_back({node.tile, entry, node.side, node.track, node.width, false});
        } else if (node.kind == RRKind::Cb && pn.kind == RRKind::SbIn) {
            segs.push_back({node.tile, pn.side, Side::Core, pn.track, node.width, false});
        }
    }
    return segs;
}

} // namespace

RoutedApp route(const AppGraph &g, const Placement &placement, const ArchSpec &spec, const PnrParams &params)
{
    if (auto bad = validate_params(params); !bad.empty()) throw Error(ErrorKind::Invalid, bad.front());
    check_placement(g, placement, spec);
    RoutingGraph rr = build_routing_graph(spec);

    std::vector<NetJob> jobs;
    for (auto &[id, net] : g.nets) {
        if (net.hardened) continue;
        NetJob job{&net, placement.at(net.driver.node), {}};
        std::set<Coord> tiles;
        for (auto &s : net.sinks) {
            Coord c = placement.at(s.node);
            if (c != job.driver) tiles.insert(c);
        }
        job.sink_tiles.assign(tiles.begin(), tiles.end());
        std::stable_sort(job.sink_tiles.begin(), job.sink_tiles.end(), [&](Coord a, Coord b) {
            auto d = [&](Coord c) { return std::abs(c.row - job.driver.row) + std::abs(c.col - job.driver.col); };
            return d(a) < d(b);
        });
        jobs.push_back(std::move(job));
    }

    std::vector<double> hist(static_cast<std::size_t>(rr.size()), 1.0);
    std::vector<int> occ(static_cast<std::size_t>(rr.size()), 0);
    std::vector<double> dist(static_cast<std::size_t>(rr.size()));
    std::vector<int> prev(static_cast<std::size_t>(rr.size()));
    std::vector<NetTree> trees(jobs.size());
    constexpr double inf = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < params.route_iter_limit; ++iter) {
        double present = iter == 0 ? 0.0 : 0.5 * std::pow(params.congestion_growth, iter);
        std::fill(occ.begin(), occ.end(), 0);
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const NetJob &job = jobs[j];
            int w = job.net->width;
            NetTree &tree = trees[j];
            tree = NetTree{};
            int root = rr.port_out(job.driver, w);
            tree.pred[root] = -1;
            tree.order.push_back(root);
            for (Coord sink : job.sink_tiles) {
                int target = rr.cb(sink, w);
                if (tree.pred.count(target)) continue;
                std::fill(dist.begin(), dist.end(), inf);
                using Item = std::pair<double, int>;
                std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
                for (int n : tree.order) {
                    dist[n] = 0;
                    prev[n] = -1;
                    pq.push({0.0, n});
                }
                while (!pq.empty()) {
                    auto [d, u] = pq.top();
                    pq.pop();
                    if (d > dist[u]) continue;
                    if (u == target) break;
                    for (int v : rr.fanout(u)) {
                        const RRNode &vn = rr.node(v);
                        if (vn.kind == RRKind::Cb && v != target) continue;
                        if (vn.kind == RRKind::PortIn) continue;
                        if (!spec.kind_at(vn.tile)) continue;
                        double step = 0;
                        if (vn.kind == RRKind::SbOut) step = hist[v] * (1.0 + present * occ[v]);
                        if (d + step < dist[v]) {
                            dist[v] = d + step;
                            prev[v] = u;
                            pq.push({dist[v], v});
                        }
                    }
                }
                if (dist[target] == inf)
                    throw Error(ErrorKind::Unroutable,
                                "net " + job.net->id + " cannot reach tile " + to_string(sink));
                std::vector<int> path;
                for (int n = target; !tree.pred.count(n); n = prev[n]) path.push_back(n);
                int attach = prev[path.back()];
                for (auto it = path.rbegin(); it != path.rend(); ++it) {
                    tree.pred[*it] = attach;
                    attach = *it;
                    tree.order.push_back(*it);
                    if (rr.node(*it).kind == RRKind::SbOut) ++occ[*it];
                }
            }
        }
        std::vector<int> overused;
        for (int n = 0; n < rr.size(); ++n)
            if (occ[n] > 1) overused.push_back(n);
        if (overused.empty()) {
            RoutedApp out{g, placement, {}};
            for (auto &[id, net] : g.nets) out.routes[id] = {};
            for (std::size_t j = 0; j < jobs.size(); ++j) out.routes[jobs[j].net->id] = tree_segments(trees[j], rr);
            return out;
        }
        for (int n : overused) hist[n] *= params.congestion_growth;
        if (iter + 1 == params.route_iter_limit) {
            std::set<std::string> culprits;
            for (std::size_t j = 0; j < jobs.size(); ++j)
                for (int n : overused)
                    if (trees[j].pred.count(n)) culprits.insert(jobs[j].net->id);
            std::string msg = "routing failed after " + std::to_string(params.route_iter_limit) +
                              " iterations; congested nets:";
            for (auto &c : culprits) msg += " " + c;
            throw Error(ErrorKind::Unroutable, msg);
        }
    }
    throw Error(ErrorKind::Unroutable, "routing failed");
}

RouteTree build_route_tree(const Net &net, const std::vector<Segment> &segs, const Placement &placement)
{
    RouteTree t;
    t.parent.assign(segs.size(), -2);
    t.children.assign(segs.size(), {});
    std::map<std::tuple<Coord, Side, int, int>, int> owner;
    for (std::size_t i = 0; i < segs.size(); ++i)
        if (!segs[i].is_sink()) owner.emplace(std::make_tuple(segs[i].tile, segs[i].exit, segs[i].track, segs[i].width), i);
    Coord driver = placement.at(net.driver.node);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Segment &s = segs[i];
        if (s.is_source()) {
            t.parent[i] = s.tile == driver ? -1 : -2;
            continue;
        }
        auto it = owner.find({neighbor(s.tile, s.entry), opposite(s.entry), s.track, s.width});
        if (it != owner.end()) {
            t.parent[i] = it->second;
            t.children[it->second].push_back(static_cast<int>(i));
        }
    }
    for (auto &sink : net.sinks) {
        Coord c = placement.at(sink.node);
        if (c == driver) {
            t.sink_segment[sink] = -1;
            continue;
        }
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (segs[i].is_sink() && segs[i].tile == c) {
                t.sink_segment[sink] = static_cast<int>(i);
                break;
            }
        }
    }
    return t;
}

std::vector<int> path_to(const RouteTree &tree, int seg)
{
    std::vector<int> path;
    for (int s = seg; s >= 0; s = tree.parent[s]) path.push_back(s);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<std::string> check_routes(const RoutedApp &r, const ArchSpec &spec)
{
    std::vector<std::string> out;
    std::map<std::tuple<Coord, Side, int, int>, std::string> used;
    for (auto &[id, net] : r.graph.nets) {
        auto it = r.routes.find(id);
        const std::vector<Segment> empty;
        const auto &segs = it == r.routes.end() ? empty : it->second;
        if (net.hardened) {
            if (!segs.empty()) out.push_back("hardened net " + id + " uses the interconnect");
            continue;
        }
        for (auto &s : segs) {
            std::string where = "net " + id + " segment at " + to_string(s.tile);
            if (!spec.in_range(s.tile)) out.push_back(where + " out of range");
            if (s.width != net.width) out.push_back(where + " has the wrong width");
            if (s.track < 0 || s.track >= spec.track_count(s.width)) out.push_back(where + " uses a missing track");
            if (s.is_source() && s.is_sink()) out.push_back(where + " goes nowhere");
            if (s.register_enabled && (s.is_sink() || !spec.sb_register_sites))
                out.push_back(where + " enables a register without a site");
            if (!s.is_sink()) {
                if (!spec.in_range(neighbor(s.tile, s.exit))) out.push_back(where + " leaves the array");
                auto [u, fresh] = used.emplace(std::make_tuple(s.tile, s.exit, s.track, s.width), id);
                if (!fresh)
                    out.push_back("resource " + to_string(s.tile) + ":" + to_string(s.exit) + ":" +
                                  std::to_string(s.track) + ":" + std::to_string(s.width) + " shared by " +
                                  u->second + " and " + id);
            }
        }
        RouteTree tree = build_route_tree(net, segs, r.placement);
        for (std::size_t i = 0; i < segs.size(); ++i)
            if (tree.parent[i] == -2) out.push_back("net " + id + " segment at " + to_string(segs[i].tile) + " is disconnected");
        for (auto &sink : net.sinks)
            if (!tree.sink_segment.count(sink)) out.push_back("net " + id + " does not reach " + to_string(sink));
    }
    return out;
}

} // namespace cascade
