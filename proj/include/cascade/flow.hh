#pragma once

#include <string>
#include <vector>

#include "cascade/config.hh"
#include "cascade/passes.hh"
#include "cascade/pnr.hh"
#include "cascade/postpnr.hh"
#include "cascade/sta.hh"

namespace cascade {

/// Stage names accepted in FlowOptions::passes, in flow order.
inline const std::vector<std::string> kPassNames = {"compute", "broadcast", "chains", "placement", "postpnr"};

struct FlowOptions {
    /// Enabled stages. "placement" turns on the timing-aware cost (alpha and
    /// gamma from `pnr`); without it placement uses alpha 1 and gamma 0.
    std::vector<std::string> passes = kPassNames;
    PassParams pass;
    PnrParams pnr;
    int max_postpnr_iters = 50;
    int dup_factor = 1;
};

/// Parses "none", "all" or a comma list of stage names.
std::vector<std::string> parse_pass_list(const std::string &text);
bool has_pass(const FlowOptions &opt, const std::string &name);

struct FlowResult {
    RoutedApp app;
    Config config;
    TimingReport timing;
    /// Critical path right after routing.
    double routed_ns = 0;
    int registers_added = 0;
    int shifts_added = 0;
    PostPnrResult postpnr;
    std::vector<std::string> log;
};

/// Columns [0, cols) of every row of `spec`.
ArchSpec crop_arch(const ArchSpec &spec, int cols);

/// Passes, placement, routing, post-PnR pipelining, schedule update and
/// configuration emission. Errors carry the failing stage in their message.
FlowResult compile(const AppGraph &app, const ArchSpec &spec, const DelayLibrary &lib, const FlowOptions &opt);

/// Pass prefixes of the incremental study, labelled.
std::vector<std::pair<std::string, FlowOptions>> ablation_steps(const FlowOptions &base);

} // namespace cascade
