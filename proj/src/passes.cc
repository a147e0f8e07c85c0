#include "cascade/passes.hh"

#include <algorithm>

namespace cascade {

PassResult compute_pipeline(const AppGraph &g, const ArchSpec &spec)
{
    AppGraph work = g;
    if (spec.pe_input_registers > 0)
        for (auto &[id, n] : work.nodes)
            if (n.kind == NodeKind::Pe) n.input_regs.assign(static_cast<std::size_t>(input_count(n)), true);
    auto [balanced, added] = balance_branches(work);
    return {std::move(balanced), added, 0, 0};
}

namespace {

/// The REG fed by `net` when that is its only sink.
const Node *sole_reg_sink(const AppGraph &g, const Net *net)
{
    if (!net || net->sinks.size() != 1) return nullptr;
    const Node &n = g.node(net->sinks[0].node);
    return n.kind == NodeKind::Reg ? &n : nullptr;
}

} // namespace

PassResult collapse_register_chains(const AppGraph &g, const ArchSpec &spec, int n)
{
    if (n < 1) throw Error(ErrorKind::Invalid, "chain length threshold must be >= 1");
    if (spec.regfile_depth < 1) throw Error(ErrorKind::Invalid, "regfile_depth must be >= 1");
    PassResult res{g, 0, 0, 0};
    AppGraph &out = res.graph;
    for (auto &[id, node] : g.nodes) {
        if (node.kind != NodeKind::Reg) continue;
        const Net *in = g.input_net({id, 0});
        if (!in) continue;
        if (g.node(in->driver.node).kind == NodeKind::Reg && in->sinks.size() == 1) continue; // not a chain head
        std::vector<std::string> chain{id};
        while (const Node *next = sole_reg_sink(g, g.output_net(chain.back()))) chain.push_back(next->id);
        int k = static_cast<int>(chain.size());
        if (k < n) continue;

        const Net *tail = g.output_net(chain.back());
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) out.nets.erase(g.output_net(chain[i])->id);
        for (auto &r : chain) out.nodes.erase(r);

        Net &feed = out.nets.at(in->id);
        std::string prev;
        for (int left = k; left > 0;) {
            int depth = std::min(left, spec.regfile_depth);
            left -= depth;
            Node sh;
            sh.id = out.fresh_node_id("shift");
            sh.kind = NodeKind::Shift;
            sh.depth = depth;
            out.nodes.emplace(sh.id, sh);
            ++res.shifts_added;
            if (prev.empty())
                std::replace(feed.sinks.begin(), feed.sinks.end(), Endpoint{id, 0}, Endpoint{sh.id, 0});
            else {
                std::string nid = out.fresh_net_id("n");
                out.nets.emplace(nid, Net{nid, {prev, 0}, {{sh.id, 0}}, feed.width, false});
            }
            prev = sh.id;
        }
        if (tail) out.nets.at(tail->id).driver = {prev, 0};
        res.registers_removed += k;
    }
    return res;
}

namespace {

struct TreeBuilder {
    AppGraph &g;
    int fanout;
    int width;
    std::string base;
    int added = 0;

    /// Drives `sinks` from `net` through `level` register stages.
    void build(const std::string &net, const std::vector<Endpoint> &sinks, int level, long span)
    {
        if (level == 0) {
            auto &dst = g.nets.at(net).sinks;
            dst.insert(dst.end(), sinks.begin(), sinks.end());
            return;
        }
        std::size_t groups = (sinks.size() + span - 1) / span;
        std::size_t per = (sinks.size() + groups - 1) / groups;
        for (std::size_t gi = 0; gi * per < sinks.size(); ++gi) {
            std::vector<Endpoint> part(sinks.begin() + gi * per, sinks.begin() + std::min(sinks.size(), (gi + 1) * per));
            Node reg;
            reg.id = g.fresh_node_id(base);
            reg.kind = NodeKind::Reg;
            g.nodes.emplace(reg.id, reg);
            ++added;
            g.nets.at(net).sinks.push_back({reg.id, 0});
            std::string id = g.fresh_net_id(base);
            g.nets.emplace(id, Net{id, {reg.id, 0}, {}, width, false});
            build(id, part, level - 1, span / fanout);
        }
    }
};

/// Registers TreeBuilder::build would add.
int tree_registers(std::size_t sinks, int level, long span, int fanout)
{
    if (level == 0) return 0;
    std::size_t groups = (sinks + span - 1) / span;
    std::size_t per = (sinks + groups - 1) / groups;
    int total = 0;
    for (std::size_t done = 0; done < sinks; done += per)
        total += 1 + tree_registers(std::min(per, sinks - done), level - 1, span / fanout, fanout);
    return total;
}

} // namespace

PassResult pipeline_broadcasts(const AppGraph &g, const PassParams &params)
{
    if (params.bcast_fanout < 2) throw Error(ErrorKind::Invalid, "broadcast fanout must be >= 2");
    if (params.bcast_threshold < 1 || params.bcast_budget < 0)
        throw Error(ErrorKind::Invalid, "broadcast threshold and budget must be positive");
    AppGraph work = g;
    std::vector<const Net *> nets;
    for (auto &[id, net] : g.nets)
        if (!net.hardened && is_broadcast(net, params.bcast_threshold)) nets.push_back(&net);
    std::stable_sort(nets.begin(), nets.end(),
                     [](const Net *a, const Net *b) { return a->sinks.size() > b->sinks.size(); });
    int budget = params.bcast_budget;
    int added = 0;
    for (const Net *net : nets) {
        int levels = 0;
        long span = 1;
        while (span * params.bcast_fanout < static_cast<long>(net->sinks.size())) {
            span *= params.bcast_fanout;
            ++levels;
        }
        if (levels == 0 || tree_registers(net->sinks.size(), levels, span, params.bcast_fanout) > budget) continue;
        work.nets.at(net->id).sinks.clear();
        TreeBuilder tb{work, params.bcast_fanout, net->width, net->id + "_b"};
        tb.build(net->id, net->sinks, levels, span);
        budget -= tb.added;
        added += tb.added;
    }
    auto [balanced, extra] = balance_branches(work);
    return {std::move(balanced), added + extra, 0, 0};
}

std::map<std::string, int> schedule_deltas(const AppGraph &g, const CycleArrivals &a)
{
    std::map<std::string, int> out;
    for (auto &[id, sched] : g.schedules) {
        auto it = a.arrival.find({id, 0});
        if (it == a.arrival.end() || sched.empty()) continue;
        out[id] = it->second - sched[0];
    }
    return out;
}

void update_schedule(AppGraph &g, const std::map<std::string, int> &deltas)
{
    for (auto &[id, d] : deltas) {
        auto it = g.schedules.find(id);
        if (it == g.schedules.end()) throw Error(ErrorKind::Schedule, "no schedule for " + id);
        for (int &offset : it->second) {
            offset += d;
            if (offset < 0)
                throw Error(ErrorKind::Schedule, "schedule of " + id + " would start before cycle 0");
        }
    }
}

} // namespace cascade
