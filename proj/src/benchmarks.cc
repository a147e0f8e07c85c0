#include "cascade/benchmarks.hh"

#include "cascade/passes.hh"
#include "cascade/sta.hh"
#include "json.hpp"

namespace cascade {

namespace {

const std::vector<std::string> kLayout = {
    "IIIIIIII", "PPPMPPPM", "PPPMPPPM", "PPPMPPPM", "PPPMPPPM", "PPPMPPPM", "PPPMPPPM", "IIIIIIII",
};

/// Small helper for writing graphs by hand. Each node drives one net named
/// after it.
class Builder {
public:
    explicit Builder(Mode mode) { g_.mode = mode; }

    std::string input(const std::string &id) { return add(id, NodeKind::IoIn, {}); }
    void output(const std::string &id, const std::string &src) { add(id, NodeKind::IoOut, {src}); }

    std::string pe(const std::string &id, Op op, std::vector<std::string> srcs,
                   std::optional<std::uint16_t> constant = std::nullopt)
    {
        Node n;
        n.kind = NodeKind::Pe;
        n.op = op;
        n.constant = constant;
        n.input_regs.assign(srcs.size(), false);
        return add(id, n, srcs);
    }

    std::string mem(const std::string &id, const std::string &src, int depth, const std::string &flush)
    {
        Node n;
        n.kind = NodeKind::Mem;
        n.depth = depth;
        add(id, n, {src, flush});
        g_.schedules[id] = {0, 1};
        return id;
    }

    std::string fifo(const std::string &id, const std::string &src)
    {
        Node n;
        n.kind = NodeKind::Fifo;
        n.depth = 2;
        return add(id, n, {src});
    }

    /// Delay-matches the graph and aligns MEM schedules with their inputs.
    AppGraph finish()
    {
        check_structure(g_);
        if (g_.mode == Mode::Sparse) return g_;
        AppGraph out = balance_branches(g_).first;
        update_schedule(out, schedule_deltas(out, cycle_arrivals(out)));
        return out;
    }

private:
    std::string add(const std::string &id, NodeKind kind, const std::vector<std::string> &srcs)
    {
        Node n;
        n.kind = kind;
        return add(id, n, srcs);
    }

    std::string add(const std::string &id, Node n, const std::vector<std::string> &srcs)
    {
        n.id = id;
        g_.nodes.emplace(id, n);
        for (std::size_t p = 0; p < srcs.size(); ++p) {
            auto [it, fresh] = g_.nets.emplace(srcs[p], Net{srcs[p], {srcs[p], 0}, {}, 16, false});
            if (fresh && srcs[p] == "flush") it->second.width = 1;
            it->second.sinks.push_back({id, static_cast<int>(p)});
        }
        return id;
    }

    AppGraph g_;
};

} // namespace

ArchSpec default_arch()
{
    ArchSpec spec = make_arch(kLayout, 5, 5);
    spec.hardened_nets = {"flush"};
    return spec;
}

std::string default_arch_file()
{
    nlohmann::ordered_json doc;
    auto &a = doc["arch"];
    a["layout"] = kLayout;
    a["tracks16"] = 5;
    a["tracks1"] = 5;
    a["sb_register_sites"] = true;
    a["pe_input_registers"] = 1;
    a["regfile_depth"] = 32;
    a["tile_registers"] = 4;
    a["hardened_nets"] = {"flush"};
    a["io_rows"] = {0, 7};
    auto &d = doc["delays"];
    d["pe_core"] = 0.7;
    d["mem_core"] = 0.5;
    d["cb_in"] = 0.06;
    d["reg_clk_to_q"] = 0.05;
    d["setup"] = 0.04;
    d["clock_skew"] = 0.03;
    d["sb_hop"] = {{"PE:*:*:*", 0.14}, {"MEM:*:*:*", 0.2}, {"IO:*:*:*", 0.14}};
    return doc.dump(2) + "\n";
}

DelayLibrary default_delays(const ArchSpec &spec) { return load_delay_library(default_arch_file(), spec); }

AppGraph conv_app(int line)
{
    Builder b(Mode::Dense);
    b.input("x");
    b.input("flush");
    b.mem("row1", "x", line, "flush");
    b.mem("row2", "x", 2 * line, "flush");
    b.pe("v_shl", Op::Shl, {"row1"}, 1);
    b.pe("v_add0", Op::Add, {"x", "v_shl"});
    b.pe("v", Op::Add, {"v_add0", "row2"});
    b.mem("col1", "v", 1, "flush");
    b.mem("col2", "v", 2, "flush");
    b.pe("h_shl", Op::Shl, {"col1"}, 1);
    b.pe("h_add0", Op::Add, {"v", "h_shl"});
    b.pe("h", Op::Add, {"h_add0", "col2"});
    b.pe("round", Op::Add, {"h"}, 8);
    b.pe("norm", Op::Shr, {"round"}, 4);
    b.output("out", "norm");
    return b.finish();
}

AppGraph relu_app(int lanes)
{
    Builder b(Mode::Dense);
    b.input("bias");
    for (int i = 0; i < lanes; ++i) {
        std::string s = std::to_string(i);
        b.input("x" + s);
        b.pe("biased" + s, Op::Add, {"x" + s, "bias"});
        b.pe("relu" + s, Op::Max, {"biased" + s}, 0);
        b.pe("clamp" + s, Op::Min, {"relu" + s, "bias"});
        b.output("y" + s, "clamp" + s);
    }
    return b.finish();
}

AppGraph unsharp_app()
{
    Builder b(Mode::Dense);
    b.input("x");
    b.input("flush");
    b.mem("tap1", "x", 1, "flush");
    b.mem("tap2", "x", 2, "flush");
    b.pe("b_shl", Op::Shl, {"tap1"}, 1);
    b.pe("b_add0", Op::Add, {"x", "b_shl"});
    b.pe("b_add1", Op::Add, {"b_add0", "tap2"});
    b.pe("blur", Op::Shr, {"b_add1"}, 2);
    b.pe("detail", Op::Sub, {"tap1", "blur"});
    b.pe("boost", Op::Shl, {"detail"}, 1);
    b.pe("sharp", Op::Add, {"tap1", "boost"});
    b.output("out", "sharp");
    return b.finish();
}

namespace {

AppGraph elementwise(Op op, int lanes)
{
    Builder b(Mode::Sparse);
    for (int i = 0; i < lanes; ++i) {
        std::string s = std::to_string(i);
        b.fifo("fa" + s, b.input("a" + s));
        b.fifo("fb" + s, b.input("b" + s));
        b.pe("op" + s, op, {"fa" + s, "fb" + s});
        b.output("c" + s, "op" + s);
    }
    return b.finish();
}

} // namespace

AppGraph vec_add_app(int lanes) { return elementwise(Op::Add, lanes); }
AppGraph mat_mul_app(int lanes) { return elementwise(Op::Mul, lanes); }

AppGraph ttv_app()
{
    Builder b(Mode::Sparse);
    for (int k = 0; k < 3; ++k) b.input("v" + std::to_string(k));
    for (int u = 0; u < 2; ++u) {
        std::string s = std::to_string(u);
        for (int k = 0; k < 3; ++k) {
            std::string t = s + std::to_string(k);
            b.fifo("ft" + t, b.input("t" + t));
            b.fifo("fv" + t, "v" + std::to_string(k));
            b.pe("p" + t, Op::Mul, {"ft" + t, "fv" + t});
        }
        b.fifo("fs" + s + "a", "p" + s + "0");
        b.fifo("fs" + s + "b", "p" + s + "1");
        b.pe("s" + s, Op::Add, {"fs" + s + "a", "fs" + s + "b"});
        b.fifo("fy" + s + "a", "s" + s);
        b.fifo("fy" + s + "b", "p" + s + "2");
        b.pe("y" + s, Op::Add, {"fy" + s + "a", "fy" + s + "b"});
        b.output("out" + s, "y" + s);
    }
    return b.finish();
}

std::vector<std::pair<std::string, AppGraph>> dense_benchmarks()
{
    return {{"conv", conv_app()}, {"relu", relu_app()}, {"unsharp", unsharp_app()}};
}

std::vector<std::pair<std::string, AppGraph>> sparse_benchmarks()
{
    return {{"vec_add", vec_add_app()}, {"mat_mul", mat_mul_app()}, {"ttv", ttv_app()}};
}

} // namespace cascade
