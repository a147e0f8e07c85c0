#include "support.hh"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "cascade/passes.hh"
#include "cascade/sta.hh"

namespace cascade::test {

std::string GraphBuilder::add(Node n, const std::vector<std::string> &srcs)
{
    const std::string id = n.id;
    g.nodes.emplace(id, std::move(n));
    for (std::size_t p = 0; p < srcs.size(); ++p) {
        auto [it, fresh] = g.nets.emplace(srcs[p], Net{srcs[p], {srcs[p], 0}, {}, 16, false});
        it->second.sinks.push_back({id, static_cast<int>(p)});
    }
    return id;
}

std::string GraphBuilder::in(const std::string &id)
{
    Node n;
    n.id = id;
    n.kind = NodeKind::IoIn;
    return add(n, {});
}

void GraphBuilder::out(const std::string &id, const std::string &src)
{
    Node n;
    n.id = id;
    n.kind = NodeKind::IoOut;
    add(n, {src});
}

std::string GraphBuilder::pe(const std::string &id, Op op, const std::vector<std::string> &srcs,
                             std::optional<std::uint16_t> constant, bool regs)
{
    Node n;
    n.id = id;
    n.kind = NodeKind::Pe;
    n.op = op;
    n.constant = constant;
    n.input_regs.assign(srcs.size(), regs);
    return add(n, srcs);
}

std::string GraphBuilder::reg(const std::string &id, const std::string &src)
{
    Node n;
    n.id = id;
    n.kind = NodeKind::Reg;
    return add(n, {src});
}

std::string GraphBuilder::fifo(const std::string &id, const std::string &src, int depth)
{
    Node n;
    n.id = id;
    n.kind = NodeKind::Fifo;
    n.depth = depth;
    return add(n, {src});
}

std::string GraphBuilder::shift(const std::string &id, const std::string &src, int depth)
{
    Node n;
    n.id = id;
    n.kind = NodeKind::Shift;
    n.depth = depth;
    return add(n, {src});
}

std::string GraphBuilder::mem(const std::string &id, const std::string &src, int depth, int write, int read)
{
    Node n;
    n.id = id;
    n.kind = NodeKind::Mem;
    n.depth = depth;
    g.schedules[id] = {write, read};
    return add(n, {src});
}

AppGraph GraphBuilder::settled() const
{
    AppGraph out = balance_branches(g).first;
    update_schedule(out, schedule_deltas(out, cycle_arrivals(out)));
    return out;
}

namespace {

int pick(std::mt19937_64 &rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

const std::vector<Op> kOps = {Op::Add, Op::Sub, Op::Mul, Op::And, Op::Or,  Op::Xor, Op::Shl, Op::Shr,
                              Op::Gt,  Op::Lt,  Op::Eq,  Op::Mux, Op::Abs, Op::Min, Op::Max};

/// Adds a PE on random producers; a binary op gets a constant a third of the time.
std::string random_pe(GraphBuilder &b, std::mt19937_64 &rng, const std::string &id,
                      const std::vector<std::string> &pool)
{
    Op op = kOps[pick(rng, static_cast<int>(kOps.size()))];
    int k = arity(op);
    std::optional<std::uint16_t> c;
    if (k > 1 && pick(rng, 3) == 0) {
        c = static_cast<std::uint16_t>(pick(rng, op == Op::Shl || op == Op::Shr ? 4 : 16));
        --k;
    }
    std::vector<std::string> srcs;
    for (int i = 0; i < k; ++i) srcs.push_back(pool[pick(rng, static_cast<int>(pool.size()))]);
    return b.pe(id, op, srcs, c);
}

/// Producers nobody reads yet.
std::vector<std::string> unread(const AppGraph &g)
{
    std::vector<std::string> out;
    for (auto &[id, n] : g.nodes)
        if (n.kind != NodeKind::IoOut && !g.nets.count(id)) out.push_back(id);
    return out;
}

/// Joins unread producers pairwise until at most `limit` remain, then
/// attaches an output to each.
void close_outputs(GraphBuilder &b, std::mt19937_64 &rng, int limit, int &next)
{
    auto open = unread(b.g);
    while (static_cast<int>(open.size()) > limit) {
        std::shuffle(open.begin(), open.end(), rng);
        std::string a = open.back();
        open.pop_back();
        std::string c = open.back();
        open.pop_back();
        open.push_back(b.pe("j" + std::to_string(next++), Op::Add, {a, c}));
    }
    for (auto &id : open) b.out("o_" + id, id);
}

} // namespace

AppGraph random_dense_app(std::mt19937_64 &rng, int max_nodes, bool with_mem)
{
    for (;;) {
        GraphBuilder b;
        std::vector<std::string> pool;
        int inputs = 1 + pick(rng, 3);
        for (int i = 0; i < inputs; ++i) pool.push_back(b.in("i" + std::to_string(i)));
        int body = std::max(1, pick(rng, std::max(1, max_nodes / 2)));
        int next = 0;
        for (int k = 0; k < body; ++k) {
            std::string id = "n" + std::to_string(next++);
            int roll = pick(rng, 20);
            const std::string &src = pool[pick(rng, static_cast<int>(pool.size()))];
            if (roll < 2) pool.push_back(b.reg(id, src));
            else if (roll < 3) pool.push_back(b.shift(id, src, 2 + pick(rng, 3)));
            else if (roll < 6 && with_mem) pool.push_back(b.mem(id, src, pick(rng, 4), 0, 1));
            else pool.push_back(random_pe(b, rng, id, pool));
        }
        close_outputs(b, rng, 3, next);
        AppGraph g = b.settled();
        if (static_cast<int>(g.nodes.size()) <= max_nodes) return g;
    }
}

AppGraph random_sparse_app(std::mt19937_64 &rng, int max_nodes)
{
    for (;;) {
        GraphBuilder b(Mode::Sparse);
        std::vector<std::string> pool;
        int inputs = 1 + pick(rng, 3);
        for (int i = 0; i < inputs; ++i) pool.push_back(b.in("i" + std::to_string(i)));
        int body = std::max(1, pick(rng, std::max(1, max_nodes / 4)));
        int next = 0;
        for (int k = 0; k < body; ++k) {
            std::string id = "n" + std::to_string(next++);
            if (pick(rng, 5) == 0) {
                pool.push_back(b.fifo(id, pool[pick(rng, static_cast<int>(pool.size()))], 2 + pick(rng, 2)));
                continue;
            }
            GraphBuilder scratch(Mode::Sparse);
            Op op = kOps[pick(rng, static_cast<int>(kOps.size()))];
            int k2 = arity(op);
            std::optional<std::uint16_t> c;
            if (k2 > 1 && pick(rng, 3) == 0) {
                c = static_cast<std::uint16_t>(pick(rng, 8));
                --k2;
            }
            std::vector<std::string> srcs;
            for (int p = 0; p < k2; ++p) {
                std::string f = id + "_f" + std::to_string(p);
                b.fifo(f, pool[pick(rng, static_cast<int>(pool.size()))]);
                srcs.push_back(f);
            }
            pool.push_back(b.pe(id, op, srcs, c));
        }
        auto open = unread(b.g);
        // Sparse joins also need FIFOs in front of them.
        while (open.size() > 3) {
            std::string a = open.back();
            open.pop_back();
            std::string c = open.back();
            open.pop_back();
            std::string id = "j" + std::to_string(next++);
            open.push_back(b.pe(id, Op::Add, {b.fifo(id + "_f0", a), b.fifo(id + "_f1", c)}));
        }
        for (auto &id : open) b.out("o_" + id, id);
        check_structure(b.g);
        if (static_cast<int>(b.g.nodes.size()) <= max_nodes) return b.g;
    }
}

RoutedApp random_routed(const AppGraph &g0, const ArchSpec &spec, std::mt19937_64 &rng, double reg_prob)
{
    std::bernoulli_distribution coin(reg_prob);
    AppGraph g = g0;
    for (auto &[id, n] : g.nodes)
        if (n.kind == NodeKind::Pe)
            for (std::size_t p = 0; p < n.input_regs.size(); ++p) n.input_regs[p] = coin(rng);
    Placement pl = random_placement(g, spec, rng());
    PnrParams params;
    params.seed = rng();
    RoutedApp r = route(g, pl, spec, params);
    if (spec.sb_register_sites)
        for (auto &[id, segs] : r.routes)
            for (auto &s : segs)
                if (!s.is_sink()) s.register_enabled = coin(rng);
    return r;
}

DelayLibrary random_delays(const ArchSpec &spec, std::mt19937_64 &rng)
{
    std::uniform_int_distribution<int> milli(1, 400);
    auto v = [&] { return milli(rng) / 1000.0 + 0.0001 * milli(rng); };
    DelayLibrary lib;
    lib.pe_core_ns = v();
    lib.mem_core_ns = v();
    lib.cb_in_ns = v();
    lib.reg_clk_to_q_ns = v();
    lib.setup_ns = v();
    lib.clock_skew_ns = v();
    for (auto &c : enumerate_tile_paths(spec))
        if (c.kind == PathClassKind::Hop) lib.sb_hop_ns[{c.tile, c.entry, c.exit, c.width}] = v();
    return lib;
}

namespace {

/// Explicit path enumeration. Every call carries the running sum of the
/// path so far; a capture closes the path.
class PathWalker {
public:
    PathWalker(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib) : r_(r), spec_(spec), lib_(lib)
    {
        for (auto &[id, net] : r.graph.nets) {
            driven_[net.driver.node] = &net;
            for (auto &s : net.sinks) feeding_[s] = &net;
        }
    }

    double run()
    {
        const bool sparse = r_.graph.mode == Mode::Sparse;
        for (auto &[id, n] : r_.graph.nodes) {
            const double q = lib_.reg_clk_to_q_ns;
            switch (n.kind) {
            case NodeKind::IoIn:
                node_out(id, 0.0, Plane::Data);
                if (sparse) node_out(id, 0.0, Plane::Valid);
                break;
            case NodeKind::Reg:
            case NodeKind::Shift:
            case NodeKind::Fifo:
                node_out(id, q, Plane::Data);
                if (sparse) {
                    node_out(id, q, Plane::Valid);
                    // Ready launched by this cell toward its own driver.
                    ready_into_net({id, 0}, q);
                }
                break;
            case NodeKind::Mem: node_out(id, q + lib_.mem_core_ns, Plane::Data); break;
            case NodeKind::Pe:
                for (int p = 0; p < input_count(n); ++p)
                    if (p < static_cast<int>(n.input_regs.size()) && n.input_regs[p])
                        node_out(id, q + lib_.pe_core_ns, Plane::Data);
                break;
            default: break;
            }
        }
        for (auto &[id, segs] : r_.routes) {
            const Net &net = r_.graph.nets.at(id);
            if (net.hardened) continue;
            for (std::size_t i = 0; i < segs.size(); ++i)
                if (segs[i].register_enabled && reachable(net, static_cast<int>(i))) {
                    below(net, static_cast<int>(i), lib_.reg_clk_to_q_ns, Plane::Data);
                    if (sparse) below(net, static_cast<int>(i), lib_.reg_clk_to_q_ns, Plane::Valid);
                }
        }
        return best_;
    }

private:
    enum class Plane { Data, Valid };

    void close(double t)
    {
        double total = t + lib_.setup_ns + lib_.clock_skew_ns;
        best_ = std::max(best_, total);
    }

    TileKind kind(Coord c) const { return *spec_.kind_at(c); }

    /// Segment feeding segment i, -1 for the driver, -2 when none fits.
    int parent(const std::vector<Segment> &segs, int i) const
    {
        const Segment &s = segs[i];
        if (s.entry == Side::Core) return -1;
        Coord from = neighbor(s.tile, s.entry);
        for (std::size_t j = 0; j < segs.size(); ++j) {
            const Segment &p = segs[j];
            if (p.tile == from && p.exit == opposite(s.entry) && p.track == s.track && p.width == s.width)
                return static_cast<int>(j);
        }
        return -2;
    }

    bool reachable(const Net &net, int i) const
    {
        const auto &segs = r_.routes.at(net.id);
        for (int k = 0; k <= static_cast<int>(segs.size()); ++k) {
            int p = parent(segs, i);
            if (p == -1) return segs[i].entry == Side::Core && segs[i].tile == r_.placement.at(net.driver.node);
            if (p == -2) return false;
            i = p;
        }
        return false;
    }

    /// Signal present at the output of `node` at time t.
    void node_out(const std::string &node, double t, Plane plane)
    {
        auto it = driven_.find(node);
        if (it == driven_.end() || it->second->hardened) return;
        const Net &net = *it->second;
        const auto &segs = r_.routes.at(net.id);
        Coord home = r_.placement.at(node);
        for (auto &s : net.sinks)
            if (r_.placement.at(s.node) == home) arrive(s, t + lib_.cb_in_ns, plane);
        for (std::size_t i = 0; i < segs.size(); ++i)
            if (segs[i].entry == Side::Core && segs[i].tile == home && !segs[i].is_sink())
                enter(net, static_cast<int>(i), t + 0.0, plane);
    }

    /// Signal has just crossed segment i (delay included).
    void enter(const Net &net, int i, double t, Plane plane)
    {
        const Segment &s = r_.routes.at(net.id)[i];
        if (s.register_enabled) {
            close(t);
            return;
        }
        below(net, i, t, plane);
    }

    /// Continue from the output side of segment i.
    void below(const Net &net, int i, double t, Plane plane)
    {
        const auto &segs = r_.routes.at(net.id);
        const int width = plane == Plane::Data ? net.width : 1;
        for (std::size_t j = 0; j < segs.size(); ++j) {
            if (parent(segs, static_cast<int>(j)) != i) continue;
            const Segment &c = segs[j];
            if (c.is_sink()) {
                for (auto &s : net.sinks)
                    if (r_.placement.at(s.node) == c.tile) arrive(s, t + lib_.cb_in_ns, plane);
                continue;
            }
            enter(net, static_cast<int>(j), t + lib_.hop(kind(c.tile), c.entry, c.exit, width), plane);
        }
    }

    void arrive(const Endpoint &e, double t, Plane plane)
    {
        const Node &n = r_.graph.node(e.node);
        if (plane == Plane::Valid) {
            if (n.kind == NodeKind::Pe) {
                node_out(n.id, t + 0.0, plane);
                // A PE's ready toward its other inputs depends on this valid.
                for (int q = 0; q < input_count(n); ++q)
                    if (q != e.port) ready_into_net({n.id, q}, t + 0.0);
            } else {
                close(t);
            }
            return;
        }
        if (n.kind == NodeKind::Pe && !(e.port < static_cast<int>(n.input_regs.size()) && n.input_regs[e.port])) {
            node_out(n.id, t + lib_.pe_core_ns, plane);
            return;
        }
        close(t);
    }

    /// Ready bit present at sink `e` at time t, travelling back to its driver.
    void ready_into_net(const Endpoint &e, double t)
    {
        auto it = feeding_.find(e);
        if (it == feeding_.end() || it->second->hardened) return;
        const Net &net = *it->second;
        const auto &segs = r_.routes.at(net.id);
        Coord tile = r_.placement.at(e.node);
        if (tile == r_.placement.at(net.driver.node)) {
            ready_at_driver(net, t + lib_.cb_in_ns);
            return;
        }
        for (std::size_t i = 0; i < segs.size(); ++i)
            if (segs[i].is_sink() && segs[i].tile == tile) ready_up(net, static_cast<int>(i), t + 0.0);
    }

    /// Ready at the input side of segment i.
    void ready_up(const Net &net, int i, double t)
    {
        const auto &segs = r_.routes.at(net.id);
        int p = parent(segs, i);
        if (p == -2) return;
        if (p == -1) {
            ready_at_driver(net, t + lib_.cb_in_ns);
            return;
        }
        const Segment &ps = segs[p];
        ready_up(net, p, t + (ps.is_source() ? 0.0 : lib_.hop(kind(ps.tile), ps.exit, ps.entry, 1)));
    }

    void ready_at_driver(const Net &net, double t)
    {
        const Node &d = r_.graph.node(net.driver.node);
        if (d.kind != NodeKind::Pe) {
            close(t);
            return;
        }
        for (int q = 0; q < input_count(d); ++q) ready_into_net({d.id, q}, t + 0.0);
    }

    const RoutedApp &r_;
    const ArchSpec &spec_;
    const DelayLibrary &lib_;
    std::map<Endpoint, const Net *> feeding_;
    std::map<std::string, const Net *> driven_;
    double best_ = 0;
};

} // namespace

double oracle_critical_ns(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib)
{
    return PathWalker(r, spec, lib).run();
}

std::vector<std::tuple<Coord, Side, int, int>> resources(const std::vector<Segment> &segs)
{
    std::vector<std::tuple<Coord, Side, int, int>> out;
    for (auto &s : segs)
        if (!s.is_sink()) out.emplace_back(s.tile, s.exit, s.track, s.width);
    return out;
}

void follow_schedules(AppGraph &g, const AppGraph &before)
{
    auto base = schedule_deltas(before, cycle_arrivals(before));
    auto now = schedule_deltas(g, cycle_arrivals(g));
    for (auto &[id, d] : now)
        if (auto it = base.find(id); it != base.end()) d -= it->second;
    update_schedule(g, now);
}

Equivalence sim_equivalent(const AppGraph &a, const AppGraph &b, std::uint64_t seed, int length)
{
    Stimulus stim = random_stimulus(a, length, seed);
    return equivalent_modulo_latency(simulate_dense(a, stim), simulate_dense(b, stim));
}

} // namespace cascade::test
