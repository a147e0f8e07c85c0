#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cascade/arch.hh"
#include "cascade/dfg.hh"

namespace cascade {

struct Placement {
    std::map<std::string, Coord> loc;

    Coord at(const std::string &node) const;
};

/// One tile's share of a route: the wire arrives on `entry` (Core for the
/// driver's own output) and leaves on `exit` (Core when it drops into the
/// tile's connection box). Every segment with a side exit owns the
/// switch-box output (tile, exit, track, width).
struct Segment {
    Coord tile;
    Side entry = Side::Core;
    Side exit = Side::Core;
    int track = 0;
    int width = 16;
    bool register_enabled = false;

    bool is_sink() const { return exit == Side::Core; }
    bool is_source() const { return entry == Side::Core; }
    auto operator<=>(const Segment &) const = default;
};

struct RoutedApp {
    AppGraph graph;
    Placement placement;
    std::map<std::string, std::vector<Segment>> routes;
};

struct PnrParams {
    double alpha = 1.5;
    double gamma = 1.0;
    std::uint64_t seed = 1;
    /// <= 0 derives the start temperature from random-move deltas.
    double initial_temp = 0;
    double cooling_rate = 0.95;
    /// <= 0 means 20 x node count.
    int moves_per_temp = 0;
    int route_iter_limit = 40;
    double congestion_growth = 1.5;
};

std::vector<std::string> validate_params(const PnrParams &p);

int hpwl(const Net &net, const Placement &placement);
/// Core-free tiles inside the net's bounding box that hold none of its pins.
int pass_through_estimate(const Net &net, const Placement &placement, const AppGraph &g, const ArchSpec &spec);
double net_cost(int hpwl, int pass_through, const PnrParams &params);
double net_cost(const Net &net, const Placement &placement, const AppGraph &g, const ArchSpec &spec,
                const PnrParams &params);
double placement_cost(const AppGraph &g, const Placement &placement, const ArchSpec &spec, const PnrParams &params);

struct PlaceResult {
    Placement placement;
    double initial_cost = 0;
    double best_cost = 0;
};

/// Simulated-annealing placement minimising the sum of net_cost.
PlaceResult place(const AppGraph &g, const ArchSpec &spec, const PnrParams &params);
/// Deterministic uniformly random legal placement (the annealer's start point).
Placement random_placement(const AppGraph &g, const ArchSpec &spec, std::uint64_t seed);
/// Throws unless every node sits on a compatible tile within capacity.
void check_placement(const AppGraph &g, const Placement &placement, const ArchSpec &spec);

/// Negotiated-congestion router over the routing-resource graph.
RoutedApp route(const AppGraph &g, const Placement &placement, const ArchSpec &spec, const PnrParams &params);

/// Returns every legality violation: overlapping resources, broken trees,
/// unreached sinks, registers without a site, routed hardened nets.
std::vector<std::string> check_routes(const RoutedApp &r, const ArchSpec &spec);

/// Tree view of one net's route.
struct RouteTree {
    /// Parent segment index, -1 when fed by the driver's output.
    std::vector<int> parent;
    std::vector<std::vector<int>> children;
    /// Sink endpoint -> index of the sink segment reaching it, -1 when the
    /// sink shares the driver's tile.
    std::map<Endpoint, int> sink_segment;
};

RouteTree build_route_tree(const Net &net, const std::vector<Segment> &segs, const Placement &placement);
/// Indices of segments from the driver down to `seg`, inclusive.
std::vector<int> path_to(const RouteTree &tree, int seg);

std::string serialize_pnr(const RoutedApp &r);
/// Loads placement and routes onto `graph`.
RoutedApp parse_pnr(const std::string &text, AppGraph graph);

} // namespace cascade
