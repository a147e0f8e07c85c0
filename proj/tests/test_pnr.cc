#include <random>
#include <set>

#include "cascade/benchmarks.hh"
#include "cascade/pnr.hh"
#include "doctest.h"
#include "support.hh"

using namespace cascade;
using test::GraphBuilder;

namespace {

Net net_between(std::vector<std::string> pins)
{
    Net n{"n", {pins[0], 0}, {}, 16, false};
    for (std::size_t i = 1; i < pins.size(); ++i) n.sinks.push_back({pins[i], 0});
    return n;
}

} // namespace

TEST_SUITE("pnr")
{
    TEST_CASE("hpwl")
    {
        Placement p;
        p.loc = {{"a", {0, 0}}, {"b", {2, 3}}, {"c", {1, 2}}, {"d", {3, 1}}};
        CHECK(hpwl(net_between({"a", "b"}), p) == 5);
        CHECK(hpwl(net_between({"a", "a"}), p) == 0);
        CHECK(hpwl(net_between({"a", "c", "d"}), p) == 5);
    }

    TEST_CASE("net cost")
    {
        PnrParams p;
        p.alpha = 1;
        p.gamma = 5;
        CHECK(net_cost(10, 0, p) == 10);
        p.gamma = 2;
        CHECK(net_cost(10, 3, p) == 16);
        p.alpha = 2;
        CHECK(net_cost(10, 3, p) == 256);
    }

    TEST_CASE("pass-through estimate counts free tiles inside the box")
    {
        ArchSpec s = make_arch({"PPP", "PPP", "PPP"}, 1, 1);
        GraphBuilder b;
        b.pe("a", Op::Abs, {"c"});
        b.pe("c", Op::Abs, {"a"});
        Placement p;
        p.loc = {{"a", {0, 0}}, {"c", {2, 2}}};
        // Nine tiles in the box, two hold the pins.
        CHECK(pass_through_estimate(b.g.nets.at("a"), p, b.g, s) == 7);
    }

    TEST_CASE("parameter validation")
    {
        PnrParams p;
        CHECK(validate_params(p).empty());
        p.alpha = 0.5;
        p.cooling_rate = 1.5;
        CHECK(validate_params(p).size() == 2);
    }

    TEST_CASE("single node without nets")
    {
        AppGraph g;
        Node n;
        n.id = "p";
        n.op = Op::Abs;
        g.nodes.emplace("p", n);
        auto r = place(g, make_arch({"PP", "PP"}, 1, 1), PnrParams{});
        CHECK(r.best_cost == 0);
        CHECK(r.placement.loc.size() == 1);
    }

    TEST_CASE("placement is deterministic for a seed")
    {
        AppGraph g = conv_app();
        ArchSpec s = default_arch();
        PnrParams p;
        p.seed = 42;
        CHECK(place(g, s, p).placement.loc == place(g, s, p).placement.loc);
        RoutedApp a = route(g, place(g, s, p).placement, s, p);
        RoutedApp b = route(g, place(g, s, p).placement, s, p);
        CHECK(a.routes == b.routes);
    }

    TEST_CASE("annealing beats its random start")
    {
        GraphBuilder b;
        std::string prev = b.in("i");
        for (int k = 0; k < 8; ++k) prev = b.pe("p" + std::to_string(k), Op::Abs, {prev});
        b.out("o", prev);
        ArchSpec s = default_arch();
        PnrParams p;
        p.alpha = 1;
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            p.seed = seed;
            auto r = place(b.g, s, p);
            CHECK(r.best_cost <= r.initial_cost);
            CHECK(r.best_cost <= placement_cost(b.g, random_placement(b.g, s, seed), s, p));
            check_placement(b.g, r.placement, s);
        }
    }

    TEST_CASE("adjacent tiles need one wire")
    {
        GraphBuilder b;
        b.in("i");
        b.pe("a", Op::Abs, {"i"});
        b.out("o", "a");
        ArchSpec s = make_arch({"IP", "IP"}, 1, 1);
        Placement p;
        p.loc = {{"i", {0, 0}}, {"a", {0, 1}}, {"o", {1, 0}}};
        RoutedApp r = route(b.g, p, s, PnrParams{});
        const auto &segs = r.routes.at("i");
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].is_source());
        CHECK(segs[0].exit == Side::E);
        CHECK(segs[1].is_sink());
        CHECK(segs[1].entry == Side::W);
        CHECK(check_routes(r, s).empty());
    }

    TEST_CASE("two nets contending for one track both route")
    {
        // Both nets want (1,1) east on the only track; one has to go around.
        GraphBuilder b;
        b.in("ia");
        b.in("ib");
        b.pe("a", Op::Abs, {"ia"});
        b.pe("c", Op::Abs, {"ib"});
        b.pe("t", Op::Add, {"a", "c"});
        b.out("o", "t");
        ArchSpec s = make_arch({"III", "PPP", "PPP", "III"}, 1, 1);
        Placement p;
        p.loc = {{"ia", {0, 0}}, {"ib", {0, 1}}, {"a", {1, 0}}, {"c", {1, 1}}, {"t", {1, 2}}, {"o", {0, 2}}};
        RoutedApp r = route(b.g, p, s, PnrParams{});
        CHECK(check_routes(r, s).empty());
        std::set<std::tuple<Coord, Side, int, int>> used;
        for (auto &[id, segs] : r.routes)
            for (auto &res : test::resources(segs)) CHECK(used.insert(res).second);
    }

    TEST_CASE("hardened nets are not routed")
    {
        AppGraph g = conv_app();
        ArchSpec s = default_arch();
        apply_hardening(g, s);
        auto pl = place(g, s, PnrParams{});
        RoutedApp r = route(g, pl.placement, s, PnrParams{});
        CHECK(r.routes.at("flush").empty());
        CHECK(check_routes(r, s).empty());
    }

    TEST_CASE("routing refuses an architecture with a hole")
    {
        GraphBuilder b;
        b.in("i");
        b.out("o", "i");
        Placement p;
        p.loc = {{"i", {0, 0}}, {"o", {0, 2}}};
        CHECK_THROWS_WITH_AS(route(b.g, p, make_arch({"I.I", "PPP"}, 1, 1), PnrParams{}),
                             doctest::Contains("(0,1) has no kind"), Error);
    }

    TEST_CASE("route file round trip")
    {
        std::mt19937_64 rng(3);
        ArchSpec s = default_arch();
        for (int i = 0; i < 10; ++i) {
            AppGraph g = test::random_dense_app(rng, 25);
            RoutedApp r = test::random_routed(g, s, rng);
            RoutedApp back = parse_pnr(serialize_pnr(r), r.graph);
            CHECK(back.placement.loc == r.placement.loc);
            CHECK(back.routes == r.routes);
        }
    }

    TEST_CASE("random routes are legal and resource-disjoint")
    {
        std::mt19937_64 rng(11);
        ArchSpec s = default_arch();
        for (int i = 0; i < 30; ++i) {
            AppGraph g = test::random_dense_app(rng, 30);
            RoutedApp r = test::random_routed(g, s, rng);
            CHECK(check_routes(r, s).empty());
            std::set<std::tuple<Coord, Side, int, int>> used;
            for (auto &[id, segs] : r.routes)
                for (auto &res : test::resources(segs)) CHECK(used.insert(res).second);
        }
    }
}
