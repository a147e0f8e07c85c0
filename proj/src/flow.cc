#include "cascade/flow.hh"

#include <algorithm>
#include <sstream>

namespace cascade {

std::vector<std::string> parse_pass_list(const std::string &text)
{
    if (text == "none" || text.empty()) return {};
    if (text == "all") return kPassNames;
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        if (std::find(kPassNames.begin(), kPassNames.end(), item) == kPassNames.end())
            throw Error(ErrorKind::Parse, "unknown pass '" + item + "'");
        out.push_back(item);
    }
    return out;
}

bool has_pass(const FlowOptions &opt, const std::string &name)
{
    return std::find(opt.passes.begin(), opt.passes.end(), name) != opt.passes.end();
}

ArchSpec crop_arch(const ArchSpec &spec, int cols)
{
    if (cols <= 0 || cols > spec.cols) throw Error(ErrorKind::Invalid, "crop width out of range");
    ArchSpec out = spec;
    out.cols = cols;
    out.tiles.clear();
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < cols; ++c) out.tiles.push_back(spec.kind_at({r, c}));
    return out;
}

namespace {

template <class F>
auto stage(const std::string &name, F &&fn)
{
    try {
        return fn();
    } catch (const Error &e) {
        throw Error(e.kind(), name + ": " + e.what());
    }
}

void shift_schedules(AppGraph &g, const std::map<std::string, int> &before)
{
    auto after = schedule_deltas(g, cycle_arrivals(g));
    for (auto &[id, d] : after)
        if (auto it = before.find(id); it != before.end()) d -= it->second;
    update_schedule(g, after);
}

FlowResult compile_region(const AppGraph &app, const ArchSpec &spec, const DelayLibrary &lib, const FlowOptions &opt)
{
    FlowResult res;
    AppGraph g = app;
    apply_hardening(g, spec);
    stage("validate", [&] {
        auto errs = validate_semantics(g, spec);
        if (!errs.empty()) throw Error(ErrorKind::Invalid, errs.front());
        return 0;
    });
    const bool dense = g.mode == Mode::Dense;

    if (dense) {
        auto before = schedule_deltas(g, cycle_arrivals(g));
        auto apply = [&](const PassResult &p, const std::string &name) {
            g = p.graph;
            res.registers_added += p.registers_added - p.registers_removed;
            res.shifts_added += p.shifts_added;
            res.log.push_back(name + ": +" + std::to_string(p.registers_added) + " -" +
                              std::to_string(p.registers_removed) + " registers, +" + std::to_string(p.shifts_added) +
                              " shifts");
        };
        if (has_pass(opt, "compute")) apply(stage("compute", [&] { return compute_pipeline(g, spec); }), "compute");
        if (has_pass(opt, "broadcast"))
            apply(stage("broadcast", [&] { return pipeline_broadcasts(g, opt.pass); }), "broadcast");
        if (has_pass(opt, "chains"))
            apply(stage("chains", [&] { return collapse_register_chains(g, spec, opt.pass.chain_n); }), "chains");
        stage("schedule", [&] {
            shift_schedules(g, before);
            return 0;
        });
    } else if (has_pass(opt, "compute") || has_pass(opt, "broadcast") || has_pass(opt, "chains")) {
        res.log.push_back("sparse: graph-level passes skipped");
    }

    PnrParams pnr = opt.pnr;
    if (!has_pass(opt, "placement")) {
        pnr.alpha = 1.0;
        pnr.gamma = 0.0;
    }
    auto placed = stage("place", [&] { return place(g, spec, pnr); });
    res.app = stage("route", [&] { return route(g, placed.placement, spec, pnr); });
    res.routed_ns = stage("sta", [&] { return critical_path(res.app, spec, lib).total_ns; });
    res.log.push_back("routed: " + std::to_string(res.routed_ns) + " ns");

    if (has_pass(opt, "postpnr")) {
        res.postpnr = stage("postpnr", [&] {
            return dense ? post_pnr_pipeline(res.app, spec, lib, opt.max_postpnr_iters)
                         : insert_sparse_fifos(res.app, spec, lib, opt.max_postpnr_iters);
        });
        res.app = res.postpnr.app;
        res.log.push_back("postpnr: " + std::to_string(res.postpnr.iterations) + " iterations, " +
                          res.postpnr.stop_reason);
    } else if (dense) {
        stage("schedule", [&] {
            sync_schedules(res.app);
            return 0;
        });
    }

    stage("check", [&] {
        auto errs = check_routes(res.app, spec);
        if (!errs.empty()) throw Error(ErrorKind::Invalid, errs.front());
        return 0;
    });
    res.config = stage("emit", [&] { return emit_config(res.app, spec); });
    res.timing = stage("sta", [&] { return critical_path(res.app, spec, lib); });
    return res;
}

} // namespace

FlowResult compile(const AppGraph &app, const ArchSpec &spec, const DelayLibrary &lib, const FlowOptions &opt)
{
    if (opt.dup_factor <= 1) return compile_region(app, spec, lib, opt);
    if (spec.cols % opt.dup_factor != 0)
        throw Error(ErrorKind::Capacity, "dup: " + std::to_string(spec.cols) + " columns do not split into " +
                                             std::to_string(opt.dup_factor) + " regions");
    ArchSpec region = crop_arch(spec, spec.cols / opt.dup_factor);
    FlowResult res = compile_region(app, region, lib, opt);
    res.config = stage("dup", [&] { return duplicate_config(emit_config(res.app, spec), spec, opt.dup_factor); });
    res.app = stage("dup", [&] { return decode_config(res.config, spec); });
    res.timing = stage("sta", [&] { return critical_path(res.app, spec, lib); });
    res.log.push_back("dup: " + std::to_string(opt.dup_factor) + " copies");
    return res;
}

std::vector<std::pair<std::string, FlowOptions>> ablation_steps(const FlowOptions &base)
{
    const std::vector<std::pair<std::string, std::vector<std::string>>> steps = {
        {"none", {}},
        {"+compute", {"compute"}},
        {"+broadcast", {"compute", "broadcast", "chains"}},
        {"+placement", {"compute", "broadcast", "chains", "placement"}},
        {"+postpnr", kPassNames},
    };
    std::vector<std::pair<std::string, FlowOptions>> out;
    for (auto &[label, passes] : steps) {
        FlowOptions o = base;
        o.passes = passes;
        out.emplace_back(label, o);
    }
    return out;
}

} // namespace cascade
