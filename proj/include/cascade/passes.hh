#pragma once

#include <map>
#include <string>

#include "cascade/arch.hh"
#include "cascade/dfg.hh"
#include "cascade/sta.hh"

namespace cascade {

struct PassParams {
    /// Shortest REG chain worth turning into shift registers.
    int chain_n = 4;
    /// Fanout above which a net counts as a broadcast.
    int bcast_threshold = 8;
    int bcast_fanout = 4;
    /// Registers all broadcast trees may add together.
    int bcast_budget = 256;
};

struct PassResult {
    AppGraph graph;
    int registers_added = 0;
    int registers_removed = 0;
    int shifts_added = 0;
};

/// Enables every PE input register, then balances branches.
PassResult compute_pipeline(const AppGraph &g, const ArchSpec &spec);

/// Replaces single-fanout REG chains of length >= n with SHIFT nodes of at
/// most spec.regfile_depth stages each.
PassResult collapse_register_chains(const AppGraph &g, const ArchSpec &spec, int n);

/// Rebuilds high-fanout nets as register trees of uniform depth.
PassResult pipeline_broadcasts(const AppGraph &g, const PassParams &params);

/// Per MEM: cycle its data arrives minus its write offset.
std::map<std::string, int> schedule_deltas(const AppGraph &g, const CycleArrivals &a);
/// Shifts each MEM's write and read offsets by its delta.
void update_schedule(AppGraph &g, const std::map<std::string, int> &deltas);

} // namespace cascade
