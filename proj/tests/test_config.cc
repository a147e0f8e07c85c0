#include <random>

#include "cascade/benchmarks.hh"
#include "cascade/config.hh"
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

int sb_bits(const Config &cfg)
{
    int n = 0;
    for (auto &[c, t] : cfg.tiles)
        for (auto &e : t["sb"]) n += e[4].get<bool>();
    return n;
}

/// Two stacked 4x4 halves, each with an IO row on top.
ArchSpec stacked()
{
    ArchSpec s = make_arch({"IIII", "PPPP", "PPPP", "PPPP", "IIII", "PPPP", "PPPP", "PPPP"}, 2, 1);
    s.io_rows = {0, 4};
    return s;
}

RoutedApp small_block(const ArchSpec &s)
{
    GraphBuilder b;
    b.in("i");
    b.pe("a", Op::Add, {"i"}, 3, true);
    b.out("o", "a");
    return pinned(b.g, s, {{"i", {0, 0}}, {"a", {1, 0}}, {"o", {0, 1}}});
}

} // namespace

TEST_SUITE("config")
{
    TEST_CASE("an empty app configures nothing")
    {
        ArchSpec s = default_arch();
        RoutedApp r;
        Config cfg = emit_config(r, s);
        for (auto &[c, t] : cfg.tiles) {
            CHECK(t["cells"].empty());
            CHECK(t["sb"].empty());
            CHECK(t["cb"].empty());
        }
        CHECK(validate_config(cfg, s).empty());
    }

    TEST_CASE("one switch-box register is one bit")
    {
        ArchSpec s = stacked();
        RoutedApp r = small_block(s);
        CHECK(sb_bits(emit_config(r, s)) == 0);
        r.routes.at("i").front().register_enabled = true;
        Config cfg = emit_config(r, s);
        CHECK(sb_bits(cfg) == 1);
        CHECK(design_differences(decode_config(cfg, s), r).empty());
    }

    TEST_CASE("emit, serialize, parse and decode")
    {
        std::mt19937_64 rng(4);
        ArchSpec s = default_arch();
        for (int i = 0; i < 20; ++i) {
            AppGraph g = i % 4 == 3 ? test::random_sparse_app(rng, 30) : test::random_dense_app(rng, 30);
            RoutedApp r = test::random_routed(g, s, rng);
            Config cfg = emit_config(r, s);
            CHECK(validate_config(cfg, s).empty());
            std::string text = serialize_config(cfg);
            CHECK(serialize_config(parse_config(text)) == text);
            auto diff = design_differences(decode_config(parse_config(text), s), r);
            CHECK_MESSAGE(diff.empty(), (diff.empty() ? "" : diff.front()));
        }
    }

    TEST_CASE("decoding rejects a configuration for another grid")
    {
        Config cfg = emit_config(small_block(stacked()), stacked());
        CHECK_THROWS_AS(decode_config(cfg, default_arch()), Error);
    }

    TEST_CASE("a wrong tile kind is reported")
    {
        ArchSpec s = stacked();
        Config cfg = emit_config(small_block(s), s);
        cfg.tiles.at({1, 0})["kind"] = "MEM";
        CHECK_FALSE(validate_config(cfg, s).empty());
    }

    TEST_CASE("duplication copies the block four rows down")
    {
        ArchSpec s = stacked();
        Config cfg = emit_config(small_block(s), s);
        Config dup = duplicate_config(cfg, s, 2);
        CHECK(validate_config(dup, s).empty());
        RoutedApp r = decode_config(dup, s);
        CHECK(r.placement.loc.at("a") == Coord{1, 0});
        CHECK(r.placement.loc.at("a@1") == Coord{5, 0});
        CHECK(r.placement.loc.at("o@1") == Coord{4, 1});
        for (auto &[c, t] : cfg.tiles) {
            if (t["cells"].empty() && t["sb"].empty() && t["cb"].empty()) continue;
            CHECK(dup.tiles.at({c.row + 4, c.col}) == t);
        }
    }

    TEST_CASE("factor one is the identity")
    {
        ArchSpec s = stacked();
        Config cfg = emit_config(small_block(s), s);
        CHECK(serialize_config(duplicate_config(cfg, s, 1)) == serialize_config(cfg));
    }

    TEST_CASE("too many copies")
    {
        ArchSpec s = stacked();
        Config cfg = emit_config(small_block(s), s);
        try {
            duplicate_config(cfg, s, 9);
            FAIL("fit nine copies");
        } catch (const Error &e) {
            CHECK(e.kind() == ErrorKind::Capacity);
        }
    }
}
