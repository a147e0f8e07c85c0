#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cascade/arch.hh"
#include "cascade/dfg.hh"
#include "cascade/pnr.hh"
#include "cascade/sim.hh"

namespace cascade::test {

/// Hand-written graphs. Each node drives one net named after it.
class GraphBuilder {
public:
    explicit GraphBuilder(Mode mode = Mode::Dense) { g.mode = mode; }

    std::string in(const std::string &id);
    void out(const std::string &id, const std::string &src);
    std::string pe(const std::string &id, Op op, const std::vector<std::string> &srcs,
                   std::optional<std::uint16_t> constant = std::nullopt, bool regs = false);
    std::string reg(const std::string &id, const std::string &src);
    std::string fifo(const std::string &id, const std::string &src, int depth = 2);
    std::string mem(const std::string &id, const std::string &src, int depth, int write, int read);
    std::string shift(const std::string &id, const std::string &src, int depth);

    /// Balances branches and aligns MEM write offsets with data arrival.
    AppGraph settled() const;

    AppGraph g;

private:
    std::string add(Node n, const std::vector<std::string> &srcs);
};

/// Random dense DAG of at most `max_nodes` nodes, delay-matched.
AppGraph random_dense_app(std::mt19937_64 &rng, int max_nodes, bool with_mem = true);
/// Random ready-valid DAG with a FIFO in front of every PE input.
AppGraph random_sparse_app(std::mt19937_64 &rng, int max_nodes);

/// Random placement, routed, with random PE input and switch-box registers.
RoutedApp random_routed(const AppGraph &g, const ArchSpec &spec, std::mt19937_64 &rng, double reg_prob = 0.3);

/// Delay library with a distinct irregular value per class.
DelayLibrary random_delays(const ArchSpec &spec, std::mt19937_64 &rng);

/// Critical path by enumerating every register-bounded path, with the
/// delays summed from launch to capture.
double oracle_critical_ns(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib);

/// Moves MEM schedules of `g` by how far its arrivals drifted from `before`.
void follow_schedules(AppGraph &g, const AppGraph &before);

/// Dense simulation of both graphs on the same random stimulus.
Equivalence sim_equivalent(const AppGraph &a, const AppGraph &b, std::uint64_t seed, int length = 40);

/// Routing resources used by a net: (tile, exit side, track, width) per segment.
std::vector<std::tuple<Coord, Side, int, int>> resources(const std::vector<Segment> &segs);

} // namespace cascade::test
