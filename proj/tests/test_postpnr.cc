#include <random>

#include "cascade/benchmarks.hh"
#include "cascade/postpnr.hh"
#include "cascade/sim.hh"
#include "cascade/sta.hh"
#include "doctest.h"
#include "support.hh"

using namespace cascade;
using test::GraphBuilder;

namespace {

RoutedApp pinned(const AppGraph &g, const ArchSpec &s, std::map<std::string, Coord> loc)
{
    Placement p;
    p.loc = std::move(loc);
    return route(g, p, s, PnrParams{});
}

RoutedApp annealed(const AppGraph &g, const ArchSpec &s, std::uint64_t seed)
{
    PnrParams p;
    p.seed = seed;
    return route(g, place(g, s, p).placement, s, p);
}

const ArchSpec kRow = make_arch({"PPPPPPPPPPPP", "IIIIIIIIIIII"}, 1, 1);

/// PE a drives PE b ten tiles away.
RoutedApp ten_hops()
{
    GraphBuilder b;
    b.in("i");
    b.pe("a", Op::Abs, {"i"}, std::nullopt, true);
    b.pe("b", Op::Abs, {"a"}, std::nullopt, true);
    b.out("o", "b");
    return pinned(b.g, kRow, {{"i", {1, 0}}, {"a", {0, 0}}, {"b", {0, 11}}, {"o", {1, 11}}});
}

std::vector<int> enabled(const std::vector<Segment> &segs)
{
    std::vector<int> out;
    for (std::size_t i = 0; i < segs.size(); ++i)
        if (segs[i].register_enabled) out.push_back(static_cast<int>(i));
    return out;
}

Equivalence routed_equivalent(const RoutedApp &a, const RoutedApp &b, std::uint64_t seed)
{
    Stimulus stim = random_stimulus(a.graph, 60, seed);
    return equivalent_modulo_latency(simulate_dense(a, stim), simulate_dense(b, stim));
}

} // namespace

TEST_SUITE("postpnr")
{
    TEST_CASE("one step registers a ten-hop path near its delay midpoint")
    {
        RoutedApp r = ten_hops();
        DelayLibrary lib = DelayLibrary::uniform(0.7, 0.14);
        PostPnrResult res = post_pnr_pipeline(r, kRow, lib, 1);
        CHECK(res.iterations == 1);
        CHECK(res.final_ns < res.initial_ns);
        auto on = enabled(res.app.routes.at("a"));
        REQUIRE(on.size() == 1);
        // 0.7 ns of core plus ten 0.14 ns hops: the middle falls after two or three hops.
        int col = res.app.routes.at("a")[on[0]].tile.col;
        CHECK(col >= 2);
        CHECK(col <= 3);
        CHECK(res.final_ns == doctest::Approx(critical_path(res.app, kRow, lib).total_ns));
    }

    TEST_CASE("iterating shortens the path further and stays equivalent")
    {
        RoutedApp r = ten_hops();
        DelayLibrary lib = DelayLibrary::uniform(0.7, 0.14);
        PostPnrResult res = post_pnr_pipeline(r, kRow, lib, 50);
        CHECK(res.iterations < 50);
        CHECK(res.final_ns <= 0.7 + 0.14 * 3 + 1e-9);
        CHECK(routed_equivalent(r, res.app, 1).equal);
    }

    TEST_CASE("unbalanced join gets a balancing register")
    {
        // a is far from j, k is next to it; registering a's route must delay k too.
        GraphBuilder b;
        b.in("i");
        b.in("i2");
        b.pe("a", Op::Abs, {"i"}, std::nullopt, true);
        b.pe("k", Op::Abs, {"i2"}, std::nullopt, true);
        b.pe("j", Op::Add, {"a", "k"}, std::nullopt, true);
        b.out("o", "j");
        RoutedApp r = pinned(b.g, kRow,
                             {{"i", {1, 0}}, {"a", {0, 0}}, {"i2", {1, 9}}, {"k", {0, 9}}, {"j", {0, 10}}, {"o", {1, 10}}});
        DelayLibrary lib = DelayLibrary::uniform(0.7, 0.14, 0.06, 0.05, 0.04, 0.03);
        PostPnrResult res = post_pnr_pipeline(r, kRow, lib, 50);
        CHECK(res.final_ns < res.initial_ns);
        CycleArrivals a = cycle_arrivals(res.app);
        CHECK(effective_arrival(res.app.graph, a, {"j", 0}) == effective_arrival(res.app.graph, a, {"j", 1}));
        CHECK(routed_equivalent(r, res.app, 2).equal);
    }

    TEST_CASE("fully registered routes are a fixpoint")
    {
        RoutedApp r = ten_hops();
        for (auto &s : r.routes.at("a")) s.register_enabled = !s.is_sink();
        for (auto &s : r.routes.at("i")) s.register_enabled = !s.is_sink();
        for (auto &s : r.routes.at("b")) s.register_enabled = !s.is_sink();
        DelayLibrary lib = DelayLibrary::uniform(0.7, 0.14);
        PostPnrResult res = post_pnr_pipeline(r, kRow, lib, 50);
        CHECK(res.sb_registers == 0);
        CHECK(res.final_ns == res.initial_ns);
        CHECK(res.app.routes == r.routes);
    }

    TEST_CASE("shipped dense kernels never get slower")
    {
        ArchSpec s = default_arch();
        DelayLibrary lib = default_delays(s);
        for (auto &[name, g] : dense_benchmarks()) {
            CAPTURE(name);
            AppGraph h = g;
            apply_hardening(h, s);
            RoutedApp r = annealed(h, s, 3);
            PostPnrResult res = post_pnr_pipeline(r, s, lib, 50);
            CHECK(res.final_ns <= res.initial_ns);
            CHECK(check_routes(res.app, s).empty());
            CHECK(routed_equivalent(r, res.app, 3).equal);
        }
    }

    TEST_CASE("random dense apps never get slower")
    {
        std::mt19937_64 rng(17);
        ArchSpec s = default_arch();
        DelayLibrary lib = default_delays(s);
        for (int i = 0; i < 10; ++i) {
            AppGraph g = test::random_dense_app(rng, 25);
            RoutedApp r = annealed(g, s, i);
            PostPnrResult res = post_pnr_pipeline(r, s, lib, 20);
            CHECK(res.final_ns <= res.initial_ns);
            CHECK(routed_equivalent(r, res.app, i).equal);
        }
    }

    TEST_CASE("a long sparse net gets a FIFO")
    {
        GraphBuilder b(Mode::Sparse);
        b.in("x");
        b.in("y");
        b.fifo("fx", "x");
        b.fifo("fy", "y");
        b.pe("p", Op::Add, {"fx", "fy"});
        b.out("o", "p");
        ArchSpec s = make_arch({"PPPPPPPPPPPP", "IIIIIIIIIIII"}, 2, 2);
        RoutedApp r = pinned(b.g, s,
                             {{"x", {1, 0}}, {"y", {1, 1}}, {"fx", {0, 0}}, {"fy", {0, 1}}, {"p", {0, 11}}, {"o", {1, 11}}});
        DelayLibrary lib = DelayLibrary::uniform(0.7, 0.14, 0.06, 0.05, 0.04, 0.03);
        PostPnrResult res = insert_sparse_fifos(r, s, lib, 20);
        CHECK(res.nodes_added >= 1);
        CHECK(res.final_ns < res.initial_ns);

        Stimulus stim;
        for (int k = 0; k < 20; ++k) {
            stim.inputs["x"].push_back(k * 3);
            stim.inputs["y"].push_back(100 - k);
        }
        SparseTrace before = simulate_sparse(r.graph, stim), after = simulate_sparse(res.app.graph, stim);
        CHECK_FALSE(after.deadlock);
        CHECK(after.eos.at("o"));
        CHECK(after.outputs == before.outputs);
        CHECK(after.outputs.at("o").size() == 20);
    }

    TEST_CASE("a join with two equally late inputs gets both cut")
    {
        GraphBuilder b(Mode::Sparse);
        b.in("x");
        b.in("y");
        b.pe("p", Op::Mul, {b.fifo("fx", "x"), b.fifo("fy", "y")});
        b.out("o", b.fifo("fo", "p"));
        ArchSpec s = make_arch({"PPPPP", "IIIII"}, 2, 2);
        RoutedApp r = pinned(b.g, s,
                             {{"x", {1, 0}}, {"y", {1, 4}}, {"fx", {0, 0}}, {"fy", {0, 4}}, {"p", {0, 2}},
                              {"fo", {0, 2}}, {"o", {1, 2}}});
        DelayLibrary lib = DelayLibrary::uniform(0.7, 0.14, 0.06, 0.05, 0.04, 0.03);
        PostPnrResult res = insert_sparse_fifos(r, s, lib, 10);
        CHECK(res.initial_ns == doctest::Approx(1.08));
        CHECK(res.final_ns == doctest::Approx(0.94));
        CHECK(res.nodes_added == 2);
        Stimulus stim = random_stimulus(b.g, 16, 4);
        CHECK(simulate_sparse(res.app.graph, stim).outputs == simulate_sparse(b.g, stim).outputs);
    }

    TEST_CASE("shipped sparse kernels keep their streams")
    {
        ArchSpec s = default_arch();
        DelayLibrary lib = default_delays(s);
        for (auto &[name, g] : sparse_benchmarks()) {
            CAPTURE(name);
            RoutedApp r = annealed(g, s, 5);
            PostPnrResult res = insert_sparse_fifos(r, s, lib, 20);
            CHECK(res.final_ns <= res.initial_ns);
            Stimulus stim = random_stimulus(g, 30, 9);
            SparseTrace before = simulate_sparse(g, stim), after = simulate_sparse(res.app.graph, stim);
            CHECK_FALSE(after.deadlock);
            CHECK(after.outputs == before.outputs);
        }
    }
}
