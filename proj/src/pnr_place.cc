#include "cascade/pnr.hh"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace cascade {

Coord Placement::at(const std::string &node) const
{
    auto it = loc.find(node);
    if (it == loc.end()) throw Error(ErrorKind::Invalid, "node '" + node + "' is not placed");
    return it->second;
}

std::vector<std::string> validate_params(const PnrParams &p)
{
    std::vector<std::string> out;
    if (!(p.alpha >= 1)) out.push_back("alpha must be ≥ 1");
    if (!(p.gamma >= 0)) out.push_back("gamma must be ≥ 0");
    if (!(p.cooling_rate > 0 && p.cooling_rate < 1)) out.push_back("cooling_rate must be in (0, 1)");
    if (p.route_iter_limit < 1) out.push_back("route_iter_limit must be ≥ 1");
    if (!(p.congestion_growth > 1)) out.push_back("congestion_growth must be > 1");
    return out;
}

int hpwl(const Net &net, const Placement &placement)
{
    Coord d = placement.at(net.driver.node);
    int r0 = d.row, r1 = d.row, c0 = d.col, c1 = d.col;
    for (auto &s : net.sinks) {
        Coord c = placement.at(s.node);
        r0 = std::min(r0, c.row);
        r1 = std::max(r1, c.row);
        c0 = std::min(c0, c.col);
        c1 = std::max(c1, c.col);
    }
    return (r1 - r0) + (c1 - c0);
}

double net_cost(int hpwl, int pass_through, const PnrParams &params)
{
    return std::pow(hpwl + params.gamma * pass_through, params.alpha);
}

int pass_through_estimate(const Net &net, const Placement &placement, const AppGraph &g, const ArchSpec &spec)
{
    std::set<Coord> cores, pins;
    for (auto &[id, c] : placement.loc)
        if (is_core(g.node(id).kind)) cores.insert(c);
    pins.insert(placement.at(net.driver.node));
    for (auto &s : net.sinks) pins.insert(placement.at(s.node));
    int r0 = spec.rows, r1 = -1, c0 = spec.cols, c1 = -1;
    for (Coord p : pins) {
        r0 = std::min(r0, p.row);
        r1 = std::max(r1, p.row);
        c0 = std::min(c0, p.col);
        c1 = std::max(c1, p.col);
    }
    int count = 0;
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c)
            if (!cores.count({r, c}) && !pins.count({r, c})) ++count;
    return count;
}

double net_cost(const Net &net, const Placement &placement, const AppGraph &g, const ArchSpec &spec,
                const PnrParams &params)
{
    return net_cost(hpwl(net, placement), pass_through_estimate(net, placement, g, spec), params);
}

double placement_cost(const AppGraph &g, const Placement &placement, const ArchSpec &spec, const PnrParams &params)
{
    double total = 0;
    for (auto &[_, net] : g.nets)
        if (!net.hardened) total += net_cost(net, placement, g, spec, params);
    return total;
}

namespace {

enum class SlotClass { Pe, Mem, Io, Reg, Shift };

SlotClass slot_class(NodeKind k)
{
    switch (k) {
    case NodeKind::Pe: return SlotClass::Pe;
    case NodeKind::Mem: return SlotClass::Mem;
    case NodeKind::IoIn:
    case NodeKind::IoOut: return SlotClass::Io;
    case NodeKind::Shift: return SlotClass::Shift;
    default: return SlotClass::Reg;
    }
}

const char *class_name(SlotClass c)
{
    switch (c) {
    case SlotClass::Pe: return "PE";
    case SlotClass::Mem: return "MEM";
    case SlotClass::Io: return "IO";
    case SlotClass::Reg: return "REG/FIFO";
    case SlotClass::Shift: return "SHIFT";
    }
    return "?";
}

bool tile_accepts(SlotClass c, TileKind t)
{
    switch (c) {
    case SlotClass::Pe:
    case SlotClass::Shift: return t == TileKind::PE;
    case SlotClass::Mem: return t == TileKind::MEM;
    case SlotClass::Io: return t == TileKind::IO;
    case SlotClass::Reg: return t != TileKind::IO;
    }
    return false;
}

int capacity(SlotClass c, const ArchSpec &spec)
{
    return c == SlotClass::Reg ? spec.tile_registers : 1;
}

/// Deterministic random source; avoids distribution objects whose output
/// is implementation-defined.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen() % n); }
    double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
};

std::vector<Coord> tiles_for(SlotClass c, const ArchSpec &spec)
{
    std::vector<Coord> out;
    for (int r = 0; r < spec.rows; ++r)
        for (int col = 0; col < spec.cols; ++col)
            if (auto k = spec.kind_at({r, col}); k && tile_accepts(c, *k)) out.push_back({r, col});
    return out;
}

void check_capacity(const AppGraph &g, const ArchSpec &spec)
{
    std::map<SlotClass, int> need;
    for (auto &[_, n] : g.nodes) ++need[slot_class(n.kind)];
    std::string msg;
    for (auto &[c, count] : need) {
        int have = static_cast<int>(tiles_for(c, spec).size()) * capacity(c, spec);
        if (count > have)
            msg += std::string(msg.empty() ? "" : "; ") + class_name(c) + ": need " + std::to_string(count) +
                   ", have " + std::to_string(have) + " (deficit " + std::to_string(count - have) + ")";
    }
    if (!msg.empty()) throw Error(ErrorKind::Capacity, "placement capacity exceeded: " + msg);
}

/// Index-based annealing state.
struct Annealer {
    const AppGraph &g;
    const ArchSpec &spec;
    const PnrParams &params;
    std::vector<std::string> ids;
    std::vector<SlotClass> cls;
    std::vector<bool> core;
    std::vector<std::vector<int>> nets; // pin node indices, driver first
    std::vector<Coord> pos;
    std::vector<std::vector<std::vector<int>>> occupants; // [class group][tile] -> nodes
    std::map<SlotClass, std::vector<Coord>> tiles;
    std::vector<int> core_prefix;

    Annealer(const AppGraph &g, const ArchSpec &spec, const PnrParams &params)
        : g(g), spec(spec), params(params)
    {
        std::map<std::string, int> index;
        for (auto &[id, n] : g.nodes) {
            index[id] = static_cast<int>(ids.size());
            ids.push_back(id);
            cls.push_back(slot_class(n.kind));
            core.push_back(is_core(n.kind));
        }
        for (auto &[_, net] : g.nets) {
            if (net.hardened) continue;
            std::vector<int> pins{index.at(net.driver.node)};
            for (auto &s : net.sinks) pins.push_back(index.at(s.node));
            nets.push_back(std::move(pins));
        }
        for (SlotClass c : {SlotClass::Pe, SlotClass::Mem, SlotClass::Io, SlotClass::Reg, SlotClass::Shift})
            tiles[c] = tiles_for(c, spec);
        pos.resize(ids.size());
    }

    int tile_index(Coord c) const { return c.row * spec.cols + c.col; }
    int group(SlotClass c) const
    {
        return c == SlotClass::Reg ? 1 : c == SlotClass::Shift ? 2 : 0;
    }

    void load(const Placement &p)
    {
        occupants.assign(3, std::vector<std::vector<int>>(static_cast<std::size_t>(spec.rows * spec.cols)));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            pos[i] = p.at(ids[i]);
            occupants[group(cls[i])][tile_index(pos[i])].push_back(static_cast<int>(i));
        }
        rebuild_prefix();
    }

    Placement dump() const
    {
        Placement p;
        for (std::size_t i = 0; i < ids.size(); ++i) p.loc[ids[i]] = pos[i];
        return p;
    }

    void rebuild_prefix()
    {
        int C = spec.cols + 1;
        core_prefix.assign(static_cast<std::size_t>((spec.rows + 1) * C), 0);
        for (int r = 0; r < spec.rows; ++r)
            for (int c = 0; c < spec.cols; ++c)
                core_prefix[(r + 1) * C + c + 1] = core_prefix[r * C + c + 1] + core_prefix[(r + 1) * C + c] -
                                                   core_prefix[r * C + c] +
                                                   (occupants[0][tile_index({r, c})].empty() ? 0 : 1);
    }

    int cores_in(int r0, int r1, int c0, int c1) const
    {
        int C = spec.cols + 1;
        return core_prefix[(r1 + 1) * C + c1 + 1] - core_prefix[r0 * C + c1 + 1] - core_prefix[(r1 + 1) * C + c0] +
               core_prefix[r0 * C + c0];
    }

    double cost_of(const std::vector<int> &pins) const
    {
        int r0 = spec.rows, r1 = -1, c0 = spec.cols, c1 = -1;
        for (int p : pins) {
            r0 = std::min(r0, pos[p].row);
            r1 = std::max(r1, pos[p].row);
            c0 = std::min(c0, pos[p].col);
            c1 = std::max(c1, pos[p].col);
        }
        int area = (r1 - r0 + 1) * (c1 - c0 + 1);
        int free_tiles = area - cores_in(r0, r1, c0, c1);
        // Pin tiles without a core are not pass-through.
        std::vector<Coord> seen;
        for (int p : pins) {
            if (std::find(seen.begin(), seen.end(), pos[p]) != seen.end()) continue;
            seen.push_back(pos[p]);
            if (occupants[0][tile_index(pos[p])].empty()) --free_tiles;
        }
        return net_cost((r1 - r0) + (c1 - c0), free_tiles, params);
    }

    double total() const
    {
        double t = 0;
        for (auto &n : nets) t += cost_of(n);
        return t;
    }

    void move_node(int i, Coord to)
    {
        auto &from_list = occupants[group(cls[i])][tile_index(pos[i])];
        from_list.erase(std::find(from_list.begin(), from_list.end(), i));
        pos[i] = to;
        occupants[group(cls[i])][tile_index(to)].push_back(i);
    }

    struct Move {
        int a = -1, b = -1;
        Coord a_from, b_from;
    };

    bool propose(Rng &rng, int rlim, Move &m)
    {
        int i = static_cast<int>(rng.below(ids.size()));
        const auto &cand = tiles.at(cls[i]);
        if (cand.size() < 2 && cls[i] != SlotClass::Reg) return false;
        for (int attempt = 0; attempt < 16; ++attempt) {
            Coord t = cand[rng.below(cand.size())];
            if (t == pos[i] || std::abs(t.row - pos[i].row) > rlim || std::abs(t.col - pos[i].col) > rlim)
                continue;
            auto &occ = occupants[group(cls[i])][tile_index(t)];
            m = Move{i, -1, pos[i], t};
            if (static_cast<int>(occ.size()) >= capacity(cls[i], spec)) {
                if (occ.empty()) continue;
                m.b = occ[rng.below(occ.size())];
                m.b_from = t;
                move_node(m.b, m.a_from);
            }
            move_node(i, t);
            if (core[i]) rebuild_prefix();
            return true;
        }
        return false;
    }

    void undo(const Move &m)
    {
        move_node(m.a, m.a_from);
        if (m.b >= 0) move_node(m.b, m.b_from);
        if (core[m.a]) rebuild_prefix();
    }
};

} // namespace

Placement random_placement(const AppGraph &g, const ArchSpec &spec, std::uint64_t seed)
{
    check_capacity(g, spec);
    Rng rng(seed);
    Placement p;
    std::map<SlotClass, std::vector<Coord>> slots;
    for (SlotClass c : {SlotClass::Pe, SlotClass::Mem, SlotClass::Io, SlotClass::Reg, SlotClass::Shift}) {
        auto &v = slots[c];
        for (Coord t : tiles_for(c, spec))
            for (int k = 0; k < capacity(c, spec); ++k) v.push_back(t);
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
    }
    for (auto &[id, n] : g.nodes) {
        auto &v = slots[slot_class(n.kind)];
        p.loc[id] = v.back();
        v.pop_back();
    }
    return p;
}

void check_placement(const AppGraph &g, const Placement &placement, const ArchSpec &spec)
{
    std::map<std::pair<int, Coord>, int> used;
    for (auto &[id, n] : g.nodes) {
        Coord c = placement.at(id);
        auto kind = spec.kind_at(c);
        SlotClass sc = slot_class(n.kind);
        if (!kind || !tile_accepts(sc, *kind))
            throw Error(ErrorKind::Invalid, "node " + id + " cannot sit on tile " + to_string(c));
        int grp = sc == SlotClass::Reg ? 1 : sc == SlotClass::Shift ? 2 : 0;
        if (++used[{grp, c}] > capacity(sc, spec))
            throw Error(ErrorKind::Invalid, "tile " + to_string(c) + " over capacity at node " + id);
    }
}

PlaceResult place(const AppGraph &g, const ArchSpec &spec, const PnrParams &params)
{
    if (auto bad = validate_params(params); !bad.empty()) throw Error(ErrorKind::Invalid, bad.front());
    Placement start = random_placement(g, spec, params.seed);
    Annealer an(g, spec, params);
    an.load(start);
    Rng rng(params.seed ^ 0x9e3779b97f4a7c15ULL);

    PlaceResult result;
    double cost = an.total();
    result.initial_cost = cost;
    result.best_cost = cost;
    result.placement = start;
    if (an.nets.empty() || an.ids.size() < 2) return result;

    int rlim = std::max(spec.rows, spec.cols);
    double temp = params.initial_temp;
    if (temp <= 0) {
        std::vector<double> deltas;
        for (int k = 0; k < 100; ++k) {
            Annealer::Move m;
            if (!an.propose(rng, rlim, m)) continue;
            deltas.push_back(an.total() - cost);
            an.undo(m);
        }
        double mean = deltas.empty() ? 0 : std::accumulate(deltas.begin(), deltas.end(), 0.0) / deltas.size();
        double var = 0;
        for (double d : deltas) var += (d - mean) * (d - mean);
        temp = deltas.empty() ? 0 : std::sqrt(var / deltas.size());
    }
    if (temp <= 0) temp = 1e-3;
    int moves = params.moves_per_temp > 0 ? params.moves_per_temp : 20 * static_cast<int>(an.ids.size());

    for (int round = 0; round < 1000; ++round) {
        int accepted = 0;
        for (int k = 0; k < moves; ++k) {
            Annealer::Move m;
            if (!an.propose(rng, rlim, m)) continue;
            double next = an.total();
            double delta = next - cost;
            if (delta <= 0 || rng.unit() < std::exp(-delta / temp)) {
                cost = next;
                ++accepted;
                if (cost < result.best_cost) {
                    result.best_cost = cost;
                    result.placement = an.dump();
                }
            } else {
                an.undo(m);
            }
        }
        double rate = static_cast<double>(accepted) / moves;
        rlim = std::clamp(static_cast<int>(std::lround(rlim * (1.0 - 0.44 + rate))), 1,
                          std::max(spec.rows, spec.cols));
        temp *= params.cooling_rate;
        if (result.best_cost <= 0 || temp < 0.005 * cost / static_cast<double>(an.nets.size()) ||
            (accepted == 0 && rlim == 1))
            break;
    }
    return result;
}

} // namespace cascade
