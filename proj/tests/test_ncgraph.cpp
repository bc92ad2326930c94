#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <utility>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/group_catalog.hpp"
#include "treedim/ncgraph.hpp"
#include "treedim/tree_group.hpp"

using namespace treedim;

namespace {

Perm swap2() { return Perm(std::vector<point_t>{1, 0}); }
Perm s3_swap() { return Perm(std::vector<point_t>{1, 0, 2}); }
Perm s3_cycle() { return Perm(std::vector<point_t>{1, 2, 0}); }

// label levels: one vector per level, one perm per vertex
Portrait depth2_portrait(const Perm& root, const Perm& left, const Perm& right) {
    TreeShape shape(std::vector<int>{2, 2});
    std::vector<std::vector<Perm>> labels{{root}, {left, right}};
    return Portrait(shape, 2, std::move(labels));
}

// window of the rendered permutation sits inside [lo, hi)
void require_support_within(const Perm& p, std::size_t lo, std::size_t hi) {
    REQUIRE(!p.is_identity());
    REQUIRE(p.window_lo() >= lo);
    REQUIRE(p.window_hi() <= hi);
}

} // namespace

TEST_CASE("graphs of disjoint edges") {
    Graph g = Graph::vn(2);
    REQUIRE(g.vertex_count() == 4);
    REQUIRE(g.edges() ==
            std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {2, 3}});
    REQUIRE(g.adjacent(0, 1));
    REQUIRE(g.adjacent(1, 0));
    REQUIRE(g.adjacent(3, 2));
    REQUIRE(!g.adjacent(0, 2));
    REQUIRE(!g.adjacent(1, 3));
    REQUIRE(g.to_text() == "vertices: 4\nedge: 0 1\nedge: 2 3\n");

    Graph empty = Graph::vn(0);
    REQUIRE(empty.vertex_count() == 0);
    REQUIRE(empty.edges().empty());

    Graph reversed(3, {{2, 0}});
    REQUIRE(reversed.edges() ==
            std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}});

    REQUIRE_THROWS_AS(Graph(3, {{1, 1}}), precondition_error);
    REQUIRE_THROWS_AS(Graph(3, {{0, 3}}), precondition_error);
    REQUIRE_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), precondition_error);
}

TEST_CASE("verification of hand labellings") {
    SECTION("empty graph with identity labels") {
        TreeShape shape(std::vector<int>{2, 2});
        NCRep<Portrait> rep{Graph(2, {}),
                            {Portrait::identity(shape, 2), Portrait::identity(shape, 2)}};
        REQUIRE(verify(rep).ok);
        REQUIRE(verify(rep).to_text() == "ok\n");
    }

    SECTION("one edge realized by a transposition and a 3-cycle") {
        NCRep<Perm> rep{Graph::vn(1), {s3_swap(), s3_cycle()}};
        REQUIRE(verify(rep).ok);
    }

    SECTION("one edge with commuting labels fails on that edge") {
        NCRep<Perm> rep{Graph::vn(1), {s3_swap(), s3_swap()}};
        VerifyReport report = verify(rep);
        REQUIRE(!report.ok);
        REQUIRE(report.u == 0);
        REQUIRE(report.v == 1);
        REQUIRE(report.edge);
        REQUIRE(report.to_text() == "violation: 0 1 edge but labels commute\n");
    }

    SECTION("two edges drawn from a single pair fail across the blocks") {
        NCRep<Perm> rep{Graph::vn(2), {s3_swap(), s3_cycle(), s3_swap(), s3_cycle()}};
        VerifyReport report = verify(rep);
        REQUIRE(!report.ok);
        REQUIRE(report.u == 0);
        REQUIRE(report.v == 3);
        REQUIRE(!report.edge);
        REQUIRE(report.to_text() == "violation: 0 3 no edge but labels do not commute\n");
    }

    SECTION("label list must match the graph and live in one group") {
        REQUIRE_THROWS_AS(verify(NCRep<Perm>{Graph::vn(1), {s3_swap()}}),
                          precondition_error);
        NCRep<Perm> mixed{Graph::vn(1), {s3_swap(), Perm(std::vector<point_t>{1, 0})}};
        REQUIRE_THROWS_AS(verify(mixed), precondition_error);
    }
}

TEST_CASE("serialization of a small representation") {
    Perm id2 = Perm::identity(2);
    Portrait root_swap = depth2_portrait(swap2(), id2, id2);
    Portrait left_swap = depth2_portrait(id2, swap2(), id2);
    NCRep<Portrait> rep{Graph::vn(1), {root_swap, left_swap}};
    REQUIRE(verify(rep).ok);
    REQUIRE(to_text(rep) ==
            "vertices: 2\n"
            "edge: 0 1\n"
            "label 0:\n"
            "shape: 2,2\n"
            "ε -> 1 0\n"
            "0 -> 0 1\n"
            "1 -> 0 1\n"
            "\n"
            "label 1:\n"
            "shape: 2,2\n"
            "ε -> 0 1\n"
            "0 -> 1 0\n"
            "1 -> 0 1\n"
            "\n");
}

TEST_CASE("rigid stabilizer pairs over the full binary tree") {
    TreeGroup g = catalog("full").unfold(4);
    NCRep<Portrait> rep = construct_vn_weakly_branch(g, 2);
    REQUIRE(verify(rep).ok);
    REQUIRE(rep.graph.vertex_count() == 4);
    REQUIRE(rep.labels.size() == 4);

    // pairs come from the two level-1 subtrees, in vertex order
    VertexDomain dom(g.shape());
    auto [lo0, hi0] = dom.subtree_interval(Word{0});
    auto [lo1, hi1] = dom.subtree_interval(Word{1});
    require_support_within(dom.render(rep.labels[0]), lo0, hi0);
    require_support_within(dom.render(rep.labels[1]), lo0, hi0);
    require_support_within(dom.render(rep.labels[2]), lo1, hi1);
    require_support_within(dom.render(rep.labels[3]), lo1, hi1);

    SECTION("three edges move down to the first level with four subtrees") {
        NCRep<Portrait> wide = construct_vn_weakly_branch(g, 3);
        REQUIRE(verify(wide).ok);
        REQUIRE(wide.labels.size() == 6);
        auto [lo, hi] = dom.subtree_interval(Word{0, 0});
        require_support_within(dom.render(wide.labels[0]), lo, hi);
    }
}

TEST_CASE("rigid stabilizer pairs over the self-similar tower") {
    TreeGroup g = catalog("grigorchuk").unfold(8);
    NCRep<Portrait> rep = construct_vn_weakly_branch(g, 2);
    REQUIRE(verify(rep).ok);
    REQUIRE(rep.labels.size() == 4);
    for (const Portrait& p : rep.labels) REQUIRE(!p.is_identity());
}

TEST_CASE("abelian towers exhaust the rigid stabilizer search") {
    TreeGroup g = catalog("odometer").unfold(5);
    REQUIRE_THROWS_AS(construct_vn_weakly_branch(g, 1), search_exhausted_error);
    try {
        construct_vn_weakly_branch(g, 2);
        FAIL("expected search exhaustion");
    } catch (const search_exhausted_error& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("within depth 5") != std::string::npos);
        REQUIRE(msg.find("word bound 8") != std::string::npos);
    }
}

TEST_CASE("lifted pairs over the full binary tree") {
    TreeGroup g = catalog("full").unfold(5);
    NCRep<Portrait> rep = construct_vn_via_lifting(g, 2, 1);
    REQUIRE(verify(rep).ok);
    REQUIRE(rep.labels.size() == 4);

    // every label fixes the stabilized level and is supported below block 0
    VertexDomain dom(g.shape());
    auto [lo, hi] = dom.subtree_interval(Word{0});
    for (const Portrait& p : rep.labels) require_support_within(dom.render(p), lo + 1, hi);
}

TEST_CASE("lifted pairs over the self-similar tower") {
    TreeGroup g = catalog("grigorchuk").unfold(9);
    NCRep<Portrait> rep = construct_vn_via_lifting(g, 3, 1);
    REQUIRE(verify(rep).ok);
    REQUIRE(rep.labels.size() == 6);

    VertexDomain dom(g.shape());
    auto [lo, hi] = dom.subtree_interval(Word{0});
    for (const Portrait& p : rep.labels) require_support_within(dom.render(p), lo + 1, hi);
}

TEST_CASE("one level short, the derived pairs vanish in the truncation") {
    TreeGroup g = catalog("grigorchuk").unfold(8);
    try {
        construct_vn_via_lifting(g, 2, 1);
        FAIL("expected search exhaustion");
    } catch (const search_exhausted_error& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("word length 8") != std::string::npos);
    }
}

TEST_CASE("lifted pipeline preconditions") {
    SECTION("abelian block projection is rejected") {
        TreeGroup g = catalog("odometer").unfold(5);
        try {
            construct_vn_via_lifting(g, 1, 1);
            FAIL("expected a precondition failure");
        } catch (const precondition_error& e) {
            std::string msg = e.what();
            REQUIRE(msg.find("not weakly branch") != std::string::npos);
        }
    }

    SECTION("at least one edge") {
        TreeGroup g = catalog("full").unfold(4);
        REQUIRE_THROWS_AS(construct_vn_via_lifting(g, 0, 1), precondition_error);
        REQUIRE_THROWS_AS(construct_vn_weakly_branch(g, 0), precondition_error);
    }

    SECTION("depth margin below the stabilized level propagates") {
        TreeGroup g = catalog("full").unfold(3);
        REQUIRE_THROWS_AS(construct_vn_via_lifting(g, 1, 2), precondition_error);
    }
}
