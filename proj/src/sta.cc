#include "cascade/sta.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace cascade {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct TArc {
    int from, to;
    double delay;
    std::string element;
    std::string net;
    int segment;
};

struct TNode {
    std::string name;
    bool launches = false;
    double launch_at = 0;
    std::string launch_element;
    bool captures = false;
    std::vector<int> in, out;
};

class TimingGraph {
public:
    int at(const std::string &name)
    {
        auto [it, fresh] = index_.emplace(name, static_cast<int>(nodes_.size()));
        if (fresh) {
            nodes_.emplace_back();
            nodes_.back().name = name;
        }
        return it->second;
    }
    void launch(const std::string &name, double t, std::string element)
    {
        TNode &n = nodes_[at(name)];
        n.launches = true;
        n.launch_at = t;
        n.launch_element = std::move(element);
    }
    void capture(const std::string &name) { nodes_[at(name)].captures = true; }
    void arc(const std::string &from, const std::string &to, double delay, std::string element,
             std::string net = {}, int segment = -1)
    {
        int f = at(from), t = at(to);
        arcs_.push_back({f, t, delay, std::move(element), std::move(net), segment});
        nodes_[f].out.push_back(static_cast<int>(arcs_.size()) - 1);
        nodes_[t].in.push_back(static_cast<int>(arcs_.size()) - 1);
    }

    const std::vector<TNode> &nodes() const { return nodes_; }
    const std::vector<TArc> &arcs() const { return arcs_; }

private:
    std::map<std::string, int> index_;
    std::vector<TNode> nodes_;
    std::vector<TArc> arcs_;
};

std::string port_name(const std::string &node, int port) { return node + ".in" + std::to_string(port); }

std::string seg_label(const std::string &net, const Segment &s)
{
    return net + " " + to_string(s.tile) + ":" + to_string(s.entry) + ">" + to_string(s.exit) + ":t" +
           std::to_string(s.track);
}

class Builder {
public:
    Builder(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib) : r_(r), spec_(spec), lib_(lib) {}

    TimingGraph build()
    {
        for (auto &[id, n] : r_.graph.nodes) add_node(n, "");
        for (auto &[id, net] : r_.graph.nets)
            if (!net.hardened) add_net(net, "", net.width);
        if (r_.graph.mode == Mode::Sparse) {
            for (auto &[id, n] : r_.graph.nodes) add_valid_node(n);
            for (auto &[id, net] : r_.graph.nets) {
                if (net.hardened) continue;
                add_net(net, "v:", 1);
                add_ready_net(net);
            }
        }
        return std::move(tg_);
    }

private:
    TileKind kind_of(Coord c) const
    {
        auto k = spec_.kind_at(c);
        if (!k) throw Error(ErrorKind::Invalid, "route crosses missing tile " + to_string(c));
        return *k;
    }

    void add_node(const Node &n, const std::string &plane)
    {
        const std::string out = plane + n.id + ".out";
        switch (n.kind) {
        case NodeKind::IoIn: tg_.launch(out, 0, "launch " + n.id); break;
        case NodeKind::IoOut: tg_.capture(plane + port_name(n.id, 0)); break;
        case NodeKind::Reg:
        case NodeKind::Shift:
        case NodeKind::Fifo:
            tg_.capture(plane + port_name(n.id, 0));
            tg_.launch(out, lib_.reg_clk_to_q_ns, "clk_q " + n.id);
            break;
        case NodeKind::Mem:
            for (int p = 0; p < input_count(n); ++p) tg_.capture(plane + port_name(n.id, p));
            tg_.launch(plane + n.id + ".q", lib_.reg_clk_to_q_ns, "clk_q " + n.id);
            tg_.arc(plane + n.id + ".q", out, lib_.core(TileKind::MEM), "core " + n.id);
            break;
        case NodeKind::Pe:
            for (int p = 0; p < input_count(n); ++p) {
                std::string in = plane + port_name(n.id, p);
                bool reg = p < static_cast<int>(n.input_regs.size()) && n.input_regs[p];
                if (reg) {
                    std::string q = plane + n.id + ".reg" + std::to_string(p);
                    tg_.capture(in);
                    tg_.launch(q, lib_.reg_clk_to_q_ns, "clk_q " + port_name(n.id, p));
                    tg_.arc(q, out, lib_.core(TileKind::PE), "core " + n.id);
                } else {
                    tg_.arc(in, out, lib_.core(TileKind::PE), "core " + n.id);
                }
            }
            break;
        }
    }

    /// Valid plane: a PE joins its inputs' valid bits without a core delay.
    void add_valid_node(const Node &n)
    {
        if (n.kind != NodeKind::Pe) {
            if (n.kind != NodeKind::Mem) add_node(n, "v:");
            return;
        }
        for (int p = 0; p < input_count(n); ++p)
            tg_.arc("v:" + port_name(n.id, p), "v:" + n.id + ".out", 0, "join " + n.id);
    }

    /// Timing point after segment i (its register output when enabled).
    std::string seg_out(const std::string &plane, const std::string &net, int i, const Segment &s) const
    {
        return plane + net + "#" + std::to_string(i) + (s.register_enabled ? ".q" : "");
    }

    void add_net(const Net &net, const std::string &plane, int width)
    {
        const auto &segs = r_.routes.at(net.id);
        RouteTree tree = build_route_tree(net, segs, r_.placement);
        const std::string driver = plane + net.driver.node + ".out";
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const Segment &s = segs[i];
            if (s.is_sink()) continue;
            int p = tree.parent[i];
            if (p == -2) continue;
            std::string from = p < 0 ? driver : seg_out(plane, net.id, p, segs[p]);
            std::string node = plane + net.id + "#" + std::to_string(i);
            double d = s.is_source() ? 0.0 : lib_.hop(kind_of(s.tile), s.entry, s.exit, width);
            tg_.arc(from, node, d, (s.is_source() ? "out " : "sb ") + seg_label(net.id, s), net.id,
                    static_cast<int>(i));
            if (s.register_enabled) {
                tg_.capture(node);
                tg_.launch(node + ".q", lib_.reg_clk_to_q_ns, "clk_q " + seg_label(net.id, s));
            }
        }
        for (auto &sink : net.sinks) {
            auto it = tree.sink_segment.find(sink);
            if (it == tree.sink_segment.end()) continue;
            std::string from = driver;
            if (it->second >= 0) {
                int p = tree.parent[it->second];
                if (p < 0) continue;
                from = seg_out(plane, net.id, p, segs[p]);
            }
            tg_.arc(from, plane + port_name(sink.node, sink.port), lib_.cb_in_ns, "cb " + to_string(sink), net.id,
                    it->second);
        }
    }

    /// Where a sink's ready bit originates.
    std::string ready_source(const Endpoint &sink)
    {
        const Node &n = r_.graph.node(sink.node);
        std::string name = "r:" + port_name(n.id, sink.port);
        if (n.kind == NodeKind::Pe) {
            tg_.arc("r:" + n.id + ".out", name, 0, "join " + n.id);
            for (int q = 0; q < input_count(n); ++q)
                if (q != sink.port) tg_.arc("v:" + port_name(n.id, q), name, 0, "join " + n.id);
        } else if (n.kind != NodeKind::IoOut) {
            tg_.launch(name, lib_.reg_clk_to_q_ns, "clk_q ready " + n.id);
        }
        return name;
    }

    /// Ready travels from each sink back to the driver over the same tracks.
    void add_ready_net(const Net &net)
    {
        const auto &segs = r_.routes.at(net.id);
        RouteTree tree = build_route_tree(net, segs, r_.placement);
        const std::string driver = "r:" + net.driver.node + ".out";
        const Node &dn = r_.graph.node(net.driver.node);
        if (dn.kind != NodeKind::Pe) tg_.capture(driver);
        auto rseg = [&](int i) { return "r:" + net.id + "#" + std::to_string(i); };
        for (auto &sink : net.sinks) {
            auto it = tree.sink_segment.find(sink);
            if (it == tree.sink_segment.end()) continue;
            std::string src = ready_source(sink);
            if (it->second < 0)
                tg_.arc(src, driver, lib_.cb_in_ns, "cb ready " + to_string(sink), net.id, -1);
            else
                tg_.arc(src, rseg(it->second), 0, "ready " + to_string(sink), net.id, it->second);
        }
        for (std::size_t i = 0; i < segs.size(); ++i) {
            int p = tree.parent[i];
            if (p == -2) continue;
            const Segment &s = segs[i];
            if (p < 0) {
                tg_.arc(rseg(static_cast<int>(i)), driver, lib_.cb_in_ns, "cb ready " + seg_label(net.id, s), net.id,
                        static_cast<int>(i));
                continue;
            }
            const Segment &ps = segs[p];
            double d = ps.is_source() ? 0.0 : lib_.hop(kind_of(ps.tile), ps.exit, ps.entry, 1);
            tg_.arc(rseg(static_cast<int>(i)), rseg(p), d, "rsb " + seg_label(net.id, ps), net.id, p);
        }
    }

    const RoutedApp &r_;
    const ArchSpec &spec_;
    const DelayLibrary &lib_;
    TimingGraph tg_;
};

struct Analysis {
    TimingGraph tg;
    std::vector<double> arrival;
    std::vector<int> pred_arc;
    std::vector<int> order;
};

Analysis analyse(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib)
{
    Analysis a{Builder(r, spec, lib).build(), {}, {}, {}};
    const auto &nodes = a.tg.nodes();
    const auto &arcs = a.tg.arcs();
    std::size_t n = nodes.size();
    a.arrival.assign(n, kNegInf);
    a.pred_arc.assign(n, -1);
    std::vector<int> indeg(n);
    std::priority_queue<std::pair<std::string, int>, std::vector<std::pair<std::string, int>>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        indeg[i] = static_cast<int>(nodes[i].in.size());
        if (nodes[i].launches) a.arrival[i] = nodes[i].launch_at;
        if (indeg[i] == 0) ready.push({nodes[i].name, static_cast<int>(i)});
    }
    while (!ready.empty()) {
        int u = ready.top().second;
        ready.pop();
        a.order.push_back(u);
        for (int ai : nodes[u].out) {
            const TArc &arc = arcs[ai];
            if (a.arrival[u] != kNegInf) {
                double cand = a.arrival[u] + arc.delay;
                int v = arc.to;
                int cur = a.pred_arc[v];
                if (cand > a.arrival[v] ||
                    (cand == a.arrival[v] && cur >= 0 && nodes[arc.from].name < nodes[arcs[cur].from].name)) {
                    a.arrival[v] = cand;
                    a.pred_arc[v] = ai;
                }
            }
            if (--indeg[arc.to] == 0) ready.push({nodes[arc.to].name, arc.to});
        }
    }
    if (a.order.size() != n) {
        for (std::size_t i = 0; i < n; ++i)
            if (indeg[i] > 0) throw Error(ErrorKind::Cycle, "combinational loop through " + nodes[i].name);
    }
    return a;
}

} // namespace

std::map<std::string, double> arrival_times_ns(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib)
{
    Analysis a = analyse(r, spec, lib);
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < a.arrival.size(); ++i)
        if (a.arrival[i] != kNegInf) out[a.tg.nodes()[i].name] = a.arrival[i];
    return out;
}

TimingReport critical_path(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib, double period_ns)
{
    Analysis a = analyse(r, spec, lib);
    const auto &nodes = a.tg.nodes();
    const auto &arcs = a.tg.arcs();
    TimingReport rep;
    int end = -1;
    double best = kNegInf;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].captures || a.arrival[i] == kNegInf) continue;
        double t = a.arrival[i] + lib.setup_ns + lib.clock_skew_ns;
        if (t > best || (t == best && nodes[i].name < nodes[end].name)) {
            best = t;
            end = static_cast<int>(i);
        }
    }
    if (end < 0) return rep;

    std::vector<PathElement> rev;
    int v = end;
    while (a.pred_arc[v] >= 0) {
        const TArc &arc = arcs[a.pred_arc[v]];
        rev.push_back({arc.element, arc.delay, arc.net, arc.segment});
        v = arc.from;
    }
    rep.critical_path.push_back({nodes[v].launch_element, nodes[v].launch_at, {}, -1});
    rep.critical_path.insert(rep.critical_path.end(), rev.rbegin(), rev.rend());
    rep.critical_path.push_back({"setup", lib.setup_ns, {}, -1});
    rep.critical_path.push_back({"clock_skew", lib.clock_skew_ns, {}, -1});
    rep.total_ns = best;
    rep.fmax_mhz = best > 0 ? 1000.0 / best : 0.0;
    rep.endpoint = nodes[end].name;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].captures && a.arrival[i] != kNegInf &&
            a.arrival[i] + lib.setup_ns + lib.clock_skew_ns >= best - 0.01)
            ++rep.near_critical;

    rep.period_ns = period_ns > 0 ? period_ns : best;
    std::vector<double> required(nodes.size(), kInf);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].captures) required[i] = rep.period_ns - lib.setup_ns - lib.clock_skew_ns;
    for (auto it = a.order.rbegin(); it != a.order.rend(); ++it)
        for (int ai : nodes[*it].out)
            required[*it] = std::min(required[*it], required[arcs[ai].to] - arcs[ai].delay);
    for (const TArc &arc : arcs) {
        if (arc.net.empty() || a.arrival[arc.from] == kNegInf || required[arc.to] == kInf) continue;
        double slack = required[arc.to] - (a.arrival[arc.from] + arc.delay);
        auto [it, fresh] = rep.per_net_slack.emplace(arc.net, slack);
        if (!fresh) it->second = std::min(it->second, slack);
    }
    return rep;
}

std::string format_report(const TimingReport &rep)
{
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << "critical path (" << rep.endpoint << ")\n";
    double acc = 0;
    for (auto &e : rep.critical_path) {
        acc += e.delay_ns;
        os << "  " << e.delay_ns << "  " << acc << "  " << e.element << "\n";
    }
    os << "total " << rep.total_ns << " ns, fmax " << rep.fmax_mhz << " MHz\n";
    return os.str();
}

std::string report_json(const TimingReport &rep)
{
    nlohmann::ordered_json doc;
    doc["critical_path"] = nlohmann::ordered_json::array();
    for (auto &e : rep.critical_path) doc["critical_path"].push_back({{"element", e.element}, {"delay_ns", e.delay_ns}});
    doc["total_ns"] = rep.total_ns;
    doc["fmax_mhz"] = rep.fmax_mhz;
    doc["endpoint"] = rep.endpoint;
    doc["per_net_slack"] = rep.per_net_slack;
    return doc.dump(1) + "\n";
}

} // namespace cascade
