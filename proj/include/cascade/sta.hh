#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cascade/arch.hh"
#include "cascade/dfg.hh"
#include "cascade/pnr.hh"

namespace cascade {

struct PathElement {
    std::string element;
    double delay_ns = 0;
    /// Route segment the element ends in, when it is one.
    std::string net;
    int segment = -1;
};

struct TimingReport {
    /// Launch, combinational elements, then setup and clock skew.
    std::vector<PathElement> critical_path;
    double total_ns = 0;
    double fmax_mhz = 0;
    std::string endpoint;
    /// Endpoints whose path total lies within 0.01 ns of total_ns.
    int near_critical = 0;
    double period_ns = 0;
    std::map<std::string, double> per_net_slack;
};

/// Arrival time (ns) at every timing point of the application.
std::map<std::string, double> arrival_times_ns(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib);

/// Longest register-bounded path. Slack is reported against `period_ns`
/// (the critical path itself when <= 0).
TimingReport critical_path(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib,
                           double period_ns = 0);

std::string format_report(const TimingReport &rep);
std::string report_json(const TimingReport &rep);

struct CycleArrivals {
    /// Cycle at which data reaches each data input port.
    std::map<Endpoint, int> arrival;
    /// Cycle at which each node's output is valid.
    std::map<std::string, int> output;
};

CycleArrivals cycle_arrivals(const AppGraph &g);
/// Same, adding one cycle per enabled switch-box register on each route.
CycleArrivals cycle_arrivals(const RoutedApp &r);

/// Arrival a port sees once its own PE input register is counted.
int effective_arrival(const AppGraph &g, const CycleArrivals &a, const Endpoint &port);
/// Nodes whose data inputs disagree, plus "<outputs>" when IO_OUTs disagree.
std::vector<std::string> arrival_conflicts(const AppGraph &g, const CycleArrivals &a);

/// Pads early inputs (and early outputs) with REG nodes.
std::pair<AppGraph, int> balance_branches(const AppGraph &g);

/// Number of enabled switch-box registers between the driver and `sink`.
int route_registers(const RoutedApp &r, const Net &net, const Endpoint &sink);

} // namespace cascade
