#pragma once

#include <string>

#include "cascade/arch.hh"
#include "cascade/pnr.hh"

namespace cascade {

struct PostPnrResult {
    RoutedApp app;
    int iterations = 0;
    /// Switch-box registers turned on (path cuts and balancing).
    int sb_registers = 0;
    /// REG/SHIFT/FIFO nodes added to the netlist.
    int nodes_added = 0;
    double initial_ns = 0;
    double final_ns = 0;
    std::string stop_reason;
};

/// Repeatedly registers the critical path near its midpoint, rebalancing the
/// other branches, while each step shortens the critical path (or, at equal
/// length, the number of near-critical endpoints).
PostPnrResult post_pnr_pipeline(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib, int max_iters);

/// Sparse counterpart: splits the critical net with a depth-2 FIFO, or two
/// nets at once when no single split helps.
PostPnrResult insert_sparse_fifos(const RoutedApp &r, const ArchSpec &spec, const DelayLibrary &lib, int max_iters);

/// Brings every MEM schedule in line with the routed arrival cycles.
void sync_schedules(RoutedApp &r);

} // namespace cascade
