// cascade: command-line driver for the compile, timing and simulation flow.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cascade/flow.hh"
#include "cascade/sim.hh"

using namespace cascade;

namespace {

enum Exit { kOk = 0, kInput = 1, kStage = 2, kMismatch = 3 };

/// Failure while reading or validating user inputs.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string arch;
    std::uint64_t seed = 1;
    bool verbose = false;
};

struct Target {
    ArchSpec spec;
    DelayLibrary lib;
};

template <class F>
auto input(F &&fn)
{
    try {
        return fn();
    } catch (const Error &e) {
        throw InputError(e.what());
    }
}

Target load_arch(const std::string &path)
{
    return input([&] {
        std::string text = read_file(path);
        Target t{parse_arch(text), {}};
        auto errs = validate_arch(t.spec);
        if (!errs.empty()) throw Error(ErrorKind::Invalid, "validate_arch: " + errs.front());
        t.lib = load_delay_library(text, t.spec);
        return t;
    });
}

void write_file(const std::string &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

RoutedApp load_config(const std::string &path, const ArchSpec &spec)
{
    return input([&] { return decode_config(parse_config(read_file(path)), spec); });
}

std::string fmt(double v, int prec = 3)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

struct Row {
    std::string label;
    double ns = 0;
    double mhz = 0;
};

std::string table(const std::vector<Row> &rows)
{
    std::ostringstream os;
    os << std::left << std::setw(16) << "config" << std::right << std::setw(12) << "crit (ns)" << std::setw(14)
       << "fmax (MHz)" << "\n";
    for (auto &r : rows)
        os << std::left << std::setw(16) << r.label << std::right << std::setw(12) << fmt(r.ns) << std::setw(14)
           << fmt(r.mhz, 1) << "\n";
    return os.str();
}

std::string chart(const std::vector<Row> &rows)
{
    std::string out = "label,critical_ns,fmax_mhz\n";
    for (auto &r : rows) out += r.label + "," + fmt(r.ns) + "," + fmt(r.mhz, 1) + "\n";
    return out;
}

struct CompileArgs {
    std::string app, out, report, pnr_out, passes = "all";
    bool sparse = false;
    bool verify = false;
    FlowOptions opt;
};

int cmd_compile(const Globals &gl, CompileArgs &a)
{
    Target t = load_arch(gl.arch);
    AppGraph g = input([&] { return parse_app(read_file(a.app)); });
    if (a.sparse && g.mode != Mode::Sparse) throw InputError("--sparse given for a dense application");
    a.opt.passes = input([&] { return parse_pass_list(a.passes); });
    a.opt.pnr.seed = gl.seed;
    if (auto errs = validate_params(a.opt.pnr); !errs.empty()) throw InputError(errs.front());

    FlowResult res = compile(g, t.spec, t.lib, a.opt);
    if (gl.verbose)
        for (auto &line : res.log) std::cerr << line << "\n";
    write_file(a.out, serialize_config(res.config));
    if (!a.report.empty()) write_file(a.report, report_json(res.timing));
    if (!a.pnr_out.empty()) write_file(a.pnr_out, serialize_pnr(res.app));
    std::cout << "critical path " << fmt(res.timing.total_ns) << " ns, fmax " << fmt(res.timing.fmax_mhz, 1)
              << " MHz\n";

    if (a.verify && g.mode == Mode::Dense && a.opt.dup_factor <= 1) {
        Stimulus stim = random_stimulus(g, 64, gl.seed);
        auto eq = equivalent_modulo_latency(simulate_dense(g, stim), simulate_dense(res.app, stim));
        if (!eq.equal) {
            std::cerr << "verify: " << eq.reason << "\n";
            return kMismatch;
        }
        std::cout << "verified, latency " << eq.offset << " cycles\n";
    } else if (a.verify && g.mode == Mode::Sparse) {
        Stimulus stim = random_stimulus(g, 32, gl.seed);
        SparseTrace want = simulate_sparse(g, stim), got = simulate_sparse(res.app.graph, stim);
        if (got.deadlock || want.outputs != got.outputs) {
            std::cerr << "verify: token streams differ\n";
            return kMismatch;
        }
        std::cout << "verified\n";
    }
    return kOk;
}

int cmd_sta(const Globals &gl, const std::string &config, const std::string &out, double period)
{
    Target t = load_arch(gl.arch);
    RoutedApp r = load_config(config, t.spec);
    TimingReport rep = critical_path(r, t.spec, t.lib, period);
    std::cout << format_report(rep);
    if (!out.empty()) write_file(out, report_json(rep));
    return kOk;
}

int cmd_sim(const Globals &gl, const std::string &config, const std::string &app, const std::string &stim_path,
            const std::string &out, const std::string &expect)
{
    AppGraph g;
    RoutedApp r;
    bool placed = !config.empty();
    if (placed) {
        Target t = load_arch(gl.arch);
        r = load_config(config, t.spec);
        g = r.graph;
    } else {
        g = input([&] { return parse_app(read_file(app)); });
    }
    Stimulus stim = input([&] { return parse_stimulus(read_file(stim_path)); });

    if (g.mode == Mode::Sparse) {
        SparseTrace tr = simulate_sparse(g, stim);
        write_file(out, trace_json(tr));
        if (tr.deadlock) {
            std::cerr << "deadlock after " << tr.cycles << " cycles\n";
            return kMismatch;
        }
        if (!expect.empty()) {
            auto want = input([&] { return nlohmann::json::parse(read_file(expect)); });
            if (want.at("outputs") != nlohmann::json(tr.outputs)) {
                std::cerr << "token streams differ from " << expect << "\n";
                return kMismatch;
            }
            std::cout << "equal\n";
        }
        return kOk;
    }

    DenseTrace tr = placed ? simulate_dense(r, stim) : simulate_dense(g, stim);
    write_file(out, trace_json(tr));
    if (!expect.empty()) {
        DenseTrace want = input([&] {
            DenseTrace d;
            try {
                auto doc = nlohmann::json::parse(read_file(expect));
                for (auto &[id, arr] : doc.at("outputs").items())
                    for (auto &v : arr) d.outputs[id].push_back(v.is_null() ? Value{} : Value{v.get<std::uint16_t>()});
            } catch (const nlohmann::json::exception &e) {
                throw Error(ErrorKind::Parse, std::string("trace: ") + e.what());
            }
            return d;
        });
        auto eq = equivalent_modulo_latency(want, tr);
        if (!eq.equal) {
            std::cerr << eq.reason << "\n";
            return kMismatch;
        }
        std::cout << "equal, offset " << eq.offset << "\n";
    }
    return kOk;
}

struct ReportArgs {
    std::vector<std::string> configs, labels;
    std::string app, out, chart;
    CompileArgs flow;
};

int cmd_report(const Globals &gl, ReportArgs &a)
{
    Target t = load_arch(gl.arch);
    std::vector<Row> rows;
    if (!a.app.empty()) {
        AppGraph g = input([&] { return parse_app(read_file(a.app)); });
        a.flow.opt.pnr.seed = gl.seed;
        for (auto &[label, opt] : ablation_steps(a.flow.opt)) {
            FlowResult res = compile(g, t.spec, t.lib, opt);
            rows.push_back({label, res.timing.total_ns, res.timing.fmax_mhz});
        }
    }
    for (std::size_t i = 0; i < a.configs.size(); ++i) {
        TimingReport rep = critical_path(load_config(a.configs[i], t.spec), t.spec, t.lib);
        std::string label = i < a.labels.size() ? a.labels[i] : a.configs[i];
        rows.push_back({label, rep.total_ns, rep.fmax_mhz});
    }
    if (rows.empty()) throw InputError("report needs --app or at least one --config");
    std::cout << table(rows);
    if (!a.out.empty()) write_file(a.out, table(rows));
    if (!a.chart.empty()) write_file(a.chart, chart(rows));
    return kOk;
}

int cmd_arch_check(const Globals &gl)
{
    Target t = load_arch(gl.arch);
    std::map<TileKind, int> count;
    for (auto &k : t.spec.tiles)
        if (k) ++count[*k];
    std::cout << t.spec.rows << "x" << t.spec.cols << ":";
    for (auto &[k, n] : count) std::cout << " " << n << " " << to_string(k);
    std::cout << ", tracks " << t.spec.tracks16 << "x16 " << t.spec.tracks1 << "x1, "
              << enumerate_tile_paths(t.spec).size() << " delay classes\n";
    return kOk;
}

void add_flow_flags(CLI::App *cmd, CompileArgs &a)
{
    cmd->add_option("--passes", a.passes, "none, all, or a comma list of compute,broadcast,chains,placement,postpnr");
    cmd->add_option("--alpha", a.opt.pnr.alpha, "placement criticality exponent");
    cmd->add_option("--gamma", a.opt.pnr.gamma, "pass-through tile weight");
    cmd->add_option("--route-iters", a.opt.pnr.route_iter_limit, "router iteration limit");
    cmd->add_option("--chain-n", a.opt.pass.chain_n, "shortest REG chain turned into shift registers");
    cmd->add_option("--bcast-threshold", a.opt.pass.bcast_threshold, "fanout above which a net is a broadcast");
    cmd->add_option("--bcast-fanout", a.opt.pass.bcast_fanout, "fanout of each broadcast tree register");
    cmd->add_option("--bcast-budget", a.opt.pass.bcast_budget, "registers all broadcast trees may add");
    cmd->add_option("--max-postpnr-iters", a.opt.max_postpnr_iters, "post-PnR pipelining iterations");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"CGRA place, route, timing and pipelining flow"};
    app.require_subcommand(1);
    Globals gl;
    app.add_option("--arch", gl.arch, "architecture file")->check(CLI::ExistingFile);
    app.add_option("--seed", gl.seed, "placement seed");
    app.add_flag("-v,--verbose", gl.verbose, "print stage log");

    CompileArgs ca;
    auto *compile_cmd = app.add_subcommand("compile", "compile an application to a configuration");
    compile_cmd->add_option("--app", ca.app, "application file")->required()->check(CLI::ExistingFile);
    compile_cmd->add_option("--out", ca.out, "configuration output")->required();
    compile_cmd->add_option("--report", ca.report, "timing report output");
    compile_cmd->add_option("--pnr", ca.pnr_out, "placement and routes output");
    compile_cmd->add_flag("--sparse", ca.sparse, "require a ready-valid application");
    compile_cmd->add_option("--dup-factor", ca.opt.dup_factor, "copies of the compiled block");
    compile_cmd->add_flag("--verify", ca.verify, "simulate against the source application");
    add_flow_flags(compile_cmd, ca);

    std::string sta_config, sta_out;
    double period = 0;
    auto *sta_cmd = app.add_subcommand("sta", "timing report for a configuration");
    sta_cmd->add_option("--config", sta_config, "configuration file")->required()->check(CLI::ExistingFile);
    sta_cmd->add_option("--out", sta_out, "JSON report output");
    sta_cmd->add_option("--period", period, "clock period for slack (ns)");

    std::string sim_config, sim_app, sim_stim, sim_out, sim_expect;
    auto *sim_cmd = app.add_subcommand("sim", "simulate an application or configuration");
    auto *src = sim_cmd->add_option_group("source");
    src->add_option("--config", sim_config, "configuration file")->check(CLI::ExistingFile);
    src->add_option("--app", sim_app, "application file")->check(CLI::ExistingFile);
    src->require_option(1);
    sim_cmd->add_option("--stim", sim_stim, "stimulus file")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--out", sim_out, "trace output")->required();
    sim_cmd->add_option("--expect", sim_expect, "trace to compare against")->check(CLI::ExistingFile);

    ReportArgs ra;
    auto *report_cmd = app.add_subcommand("report", "tabulate critical path and fmax");
    report_cmd->add_option("--config", ra.configs, "configurations to tabulate")->check(CLI::ExistingFile);
    report_cmd->add_option("--label", ra.labels, "row labels, one per --config");
    report_cmd->add_option("--app", ra.app, "run the pass ablation on this application")->check(CLI::ExistingFile);
    report_cmd->add_option("--out", ra.out, "table output");
    report_cmd->add_option("--chart", ra.chart, "CSV bar-chart data output");
    add_flow_flags(report_cmd, ra.flow);

    app.add_subcommand("arch-check", "validate an architecture file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }

    try {
        if (gl.arch.empty() && !(sim_cmd->parsed() && sim_config.empty()))
            throw InputError("--arch is required");
        if (compile_cmd->parsed()) return cmd_compile(gl, ca);
        if (sta_cmd->parsed()) return cmd_sta(gl, sta_config, sta_out, period);
        if (sim_cmd->parsed()) return cmd_sim(gl, sim_config, sim_app, sim_stim, sim_out, sim_expect);
        if (report_cmd->parsed()) return cmd_report(gl, ra);
        return cmd_arch_check(gl);
    } catch (const InputError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const Error &e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return kStage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStage;
    }
}
