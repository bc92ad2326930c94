#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "treedim/group_catalog.hpp"
#include "treedim/lifting.hpp"

using namespace treedim;

namespace {

// degree-3 and degree-4 building blocks
Perm s3_swap() { return Perm(std::vector<point_t>{1, 0, 2}); }
Perm s3_cycle() { return Perm(std::vector<point_t>{1, 2, 0}); }
Perm d4_r() { return Perm(std::vector<point_t>{1, 2, 3, 0}); }
Perm d4_s() { return Perm(std::vector<point_t>{0, 3, 2, 1}); }

// one permutation per block, glued on consecutive intervals
Perm tuple_perm(const std::vector<Perm>& parts) {
    std::size_t deg = 0;
    for (const Perm& p : parts) deg += p.degree();
    std::vector<point_t> img(deg);
    std::size_t off = 0;
    for (const Perm& p : parts) {
        for (std::size_t j = 0; j < p.degree(); ++j)
            img[off + j] = static_cast<point_t>(off + p[static_cast<point_t>(j)]);
        off += p.degree();
    }
    return Perm(img);
}

std::vector<point_t> interval(std::size_t lo, std::size_t hi) {
    std::vector<point_t> out;
    for (std::size_t p = lo; p < hi; ++p) out.push_back(static_cast<point_t>(p));
    return out;
}

// swaps block j with block 0 (blocks of size d), identity elsewhere
Perm swap_with_block0(std::size_t d, std::size_t nblocks, std::size_t j) {
    std::vector<point_t> img(d * nblocks);
    for (std::size_t p = 0; p < img.size(); ++p) img[p] = static_cast<point_t>(p);
    for (std::size_t t = 0; t < d; ++t) {
        img[t] = static_cast<point_t>(j * d + t);
        img[j * d + t] = static_cast<point_t>(t);
    }
    return Perm(img);
}

std::vector<std::vector<point_t>> even_blocks(std::size_t d, std::size_t nblocks) {
    std::vector<std::vector<point_t>> out;
    for (std::size_t b = 0; b < nblocks; ++b) out.push_back(interval(b * d, (b + 1) * d));
    return out;
}

std::vector<Perm> conjugators_for(std::size_t d, std::size_t nblocks) {
    std::vector<Perm> out;
    for (std::size_t j = 1; j < nblocks; ++j) out.push_back(swap_with_block0(d, nblocks, j));
    return out;
}

Perm restrict_interval(const Perm& g, std::size_t lo, std::size_t hi) {
    std::vector<point_t> img(g.degree());
    for (std::size_t p = 0; p < g.degree(); ++p) img[p] = static_cast<point_t>(p);
    for (std::size_t p = lo; p < hi; ++p) img[p] = g[static_cast<point_t>(p)];
    return Perm(img);
}

// Multiplication table of a group with at most 64 elements, for subgroup
// lattice enumeration over bitmasks.
struct SmallGroupTable {
    std::size_t degree;
    std::vector<Perm> elems; // sorted, identity among them
    std::vector<std::vector<std::uint8_t>> mult;
    std::size_t id_idx;
};

SmallGroupTable make_table(std::size_t degree, const std::vector<Perm>& gens) {
    PermGroup g(degree, gens);
    std::vector<Perm> elems = g.elements(64);
    REQUIRE(elems.size() <= 64);
    std::sort(elems.begin(), elems.end());
    std::unordered_map<Perm, std::size_t, PermHash> idx;
    for (std::size_t i = 0; i < elems.size(); ++i) idx[elems[i]] = i;
    SmallGroupTable t{degree, elems, {}, idx.at(Perm::identity(degree))};
    t.mult.assign(elems.size(), std::vector<std::uint8_t>(elems.size()));
    for (std::size_t i = 0; i < elems.size(); ++i)
        for (std::size_t j = 0; j < elems.size(); ++j)
            t.mult[i][j] = static_cast<std::uint8_t>(idx.at(elems[i].then(elems[j])));
    return t;
}

std::uint64_t close_mask(const SmallGroupTable& t, std::uint64_t mask) {
    for (;;) {
        std::uint64_t next = mask;
        for (std::size_t i = 0; i < t.elems.size(); ++i) {
            if (!(mask >> i & 1)) continue;
            for (std::size_t j = 0; j < t.elems.size(); ++j)
                if (mask >> j & 1) next |= std::uint64_t(1) << t.mult[i][j];
        }
        if (next == mask) return mask;
        mask = next;
    }
}

std::vector<std::uint64_t> all_subgroups(const SmallGroupTable& t) {
    std::uint64_t triv = std::uint64_t(1) << t.id_idx;
    std::vector<std::uint64_t> out{triv};
    std::unordered_set<std::uint64_t> seen{triv};
    for (std::size_t qi = 0; qi < out.size(); ++qi) {
        std::uint64_t s = out[qi];
        for (std::size_t e = 0; e < t.elems.size(); ++e) {
            if (s >> e & 1) continue;
            std::uint64_t ext = close_mask(t, s | (std::uint64_t(1) << e));
            if (seen.insert(ext).second) out.push_back(ext);
        }
    }
    return out;
}

// projections onto both halves surjective
bool subdirect_pair(const SmallGroupTable& t, std::uint64_t mask, std::size_t d,
                    std::size_t factor_order) {
    std::unordered_set<Perm, PermHash> p0, p1;
    for (std::size_t i = 0; i < t.elems.size(); ++i)
        if (mask >> i & 1) {
            p0.insert(restrict_interval(t.elems[i], 0, d));
            p1.insert(restrict_interval(t.elems[i], d, 2 * d));
        }
    return p0.size() == factor_order && p1.size() == factor_order;
}

std::vector<Perm> mask_elements(const SmallGroupTable& t, std::uint64_t mask) {
    std::vector<Perm> out;
    for (std::size_t i = 0; i < t.elems.size(); ++i)
        if ((mask >> i & 1) && !t.elems[i].is_identity()) out.push_back(t.elems[i]);
    return out;
}

// invariant battery tying the decomposition to the enumeration oracle
void check_agreement(const BlockedGroup& bg) {
    LiftWitness w = lift_decompose(bg);
    LiftOracleResult o = lift_oracle(bg);
    REQUIRE(w.index == o.index);
    REQUIRE(!w.normal_subgroup.trivial());

    PermGroup l0 = bg.block_group(0);
    for (const Perm& g : l0.strong_generators())
        for (const Perm& x : w.normal_subgroup.input_generators())
            REQUIRE(w.normal_subgroup.contains(x.conjugated_by(g)));

    for (const Perm& x : w.normal_subgroup.input_generators())
        REQUIRE(o.core.contains(x));

    PermGroup h(bg.degree(), bg.h_generators());
    for (const Perm& x : w.normal_subgroup.input_generators()) {
        Perm e = w.resolve(x);
        REQUIRE(h.contains(e));
        REQUIRE(bg.restricted_to_block(e, 0) == x);
        for (std::size_t blk = 1; blk <= w.index; ++blk)
            for (point_t p : bg.block(blk)) REQUIRE(e[p] == p);
        REQUIRE(w.resolve(x) == e);
    }

    const std::vector<Perm>& gens = w.normal_subgroup.input_generators();
    for (const Perm& a : gens)
        for (const Perm& b : gens) {
            Perm ab = a.then(b);
            REQUIRE(w.normal_subgroup.contains(ab));
            REQUIRE(w.resolve(ab) == w.resolve(a).then(w.resolve(b)));
        }
    REQUIRE(w.resolve(Perm::identity(bg.degree())).is_identity());
}

BlockedGroup pair_blocked(std::size_t d, std::vector<Perm> gens) {
    return BlockedGroup(2 * d, even_blocks(d, 2), std::move(gens), conjugators_for(d, 2));
}

BlockedGroup triple_blocked(std::size_t d, std::vector<Perm> gens) {
    return BlockedGroup(3 * d, even_blocks(d, 3), std::move(gens), conjugators_for(d, 3));
}

} // namespace

TEST_CASE("oracle on hand instances over Sym(3) x Sym(3)") {
    Perm s = s3_swap(), c = s3_cycle(), e = Perm::identity(3);

    SECTION("full product") {
        BlockedGroup bg = pair_blocked(
            3, {tuple_perm({s, e}), tuple_perm({c, e}), tuple_perm({e, s}), tuple_perm({e, c})});
        LiftOracleResult o = lift_oracle(bg);
        REQUIRE(o.index == 1);
        REQUIRE(o.core.order().value() == 6);
    }
    SECTION("diagonal") {
        BlockedGroup bg = pair_blocked(3, {tuple_perm({s, s}), tuple_perm({c, c})});
        LiftOracleResult o = lift_oracle(bg);
        REQUIRE(o.index == 0);
        REQUIRE(o.core.order().value() == 6);
    }
    SECTION("sign-matched pairs") {
        BlockedGroup bg =
            pair_blocked(3, {tuple_perm({s, s}), tuple_perm({c, e}), tuple_perm({e, c})});
        LiftOracleResult o = lift_oracle(bg);
        REQUIRE(o.index == 1);
        REQUIRE(o.core.order().value() == 3);
    }
}

TEST_CASE("decomposition on hand instances over Sym(3) x Sym(3)") {
    Perm s = s3_swap(), c = s3_cycle(), e = Perm::identity(3);

    SECTION("full product: kernel branch") {
        BlockedGroup bg = pair_blocked(
            3, {tuple_perm({s, e}), tuple_perm({c, e}), tuple_perm({e, s}), tuple_perm({e, c})});
        LiftWitness w = lift_decompose(bg);
        REQUIRE(w.index == 1);
        BigInt n = w.normal_subgroup.order().value();
        REQUIRE((n == 3 || n == 6));
        for (const Perm& g : w.normal_subgroup.input_generators())
            REQUIRE(w.resolve(g) == g);
    }
    SECTION("diagonal: restriction branch, tails copy block 0") {
        BlockedGroup bg = pair_blocked(3, {tuple_perm({s, s}), tuple_perm({c, c})});
        LiftWitness w = lift_decompose(bg);
        REQUIRE(w.index == 0);
        REQUIRE(w.normal_subgroup.order().value() == 6);
        Perm s0 = restrict_interval(tuple_perm({s, e}), 0, 3);
        Perm c0 = restrict_interval(tuple_perm({c, e}), 0, 3);
        REQUIRE(w.resolve(s0) == tuple_perm({s, s}));
        REQUIRE(w.resolve(c0) == tuple_perm({c, c}));
    }
    SECTION("sign-matched pairs: kernel seed lands in the alternating part") {
        BlockedGroup bg =
            pair_blocked(3, {tuple_perm({s, s}), tuple_perm({c, e}), tuple_perm({e, c})});
        LiftWitness w = lift_decompose(bg);
        REQUIRE(w.index == 1);
        REQUIRE(w.normal_subgroup.order().value() == 3);
        for (const Perm& g : w.normal_subgroup.input_generators()) {
            REQUIRE(w.resolve(g) == g);
            for (point_t p : bg.block(1)) REQUIRE(g[p] == p);
        }
    }
}

TEST_CASE("witness serialization on the diagonal") {
    Perm s = s3_swap(), c = s3_cycle();
    BlockedGroup bg = pair_blocked(3, {tuple_perm({s, s}), tuple_perm({c, c})});
    LiftWitness w = lift_decompose(bg);
    REQUIRE(w.to_text() ==
            "index: 0\n"
            "generator: 1 0 2 3 4 5\n"
            "lift: 1 0 2 4 3 5\n"
            "generator: 1 2 0 3 4 5\n"
            "lift: 1 2 0 4 5 3\n");
}

TEST_CASE("agreement over every subdirect subgroup of Sym(3) x Sym(3)") {
    Perm s = s3_swap(), c = s3_cycle(), e = Perm::identity(3);
    SmallGroupTable t = make_table(
        6, {tuple_perm({s, e}), tuple_perm({c, e}), tuple_perm({e, s}), tuple_perm({e, c})});
    REQUIRE(t.elems.size() == 36);

    std::size_t subdirect = 0;
    for (std::uint64_t mask : all_subgroups(t)) {
        if (!subdirect_pair(t, mask, 3, 6)) continue;
        ++subdirect;
        check_agreement(pair_blocked(3, mask_elements(t, mask)));
    }
    REQUIRE(subdirect == 8); // Goursat: one per (normal subgroup, compatible isomorphism)
}

TEST_CASE("agreement over every subdirect subgroup of D4 x D4") {
    Perm r = d4_r(), s = d4_s(), e = Perm::identity(4);
    SmallGroupTable t = make_table(
        8, {tuple_perm({r, e}), tuple_perm({s, e}), tuple_perm({e, r}), tuple_perm({e, s})});
    REQUIRE(t.elems.size() == 64);

    std::size_t subdirect = 0;
    for (std::uint64_t mask : all_subgroups(t)) {
        if (!subdirect_pair(t, mask, 4, 8)) continue;
        ++subdirect;
        check_agreement(pair_blocked(4, mask_elements(t, mask)));
    }
    REQUIRE(subdirect == 24);
}

TEST_CASE("mismatched kernel pair needs the central seed") {
    // H pairs the quotients by <r> and by <r^2, s>; the plain block swap
    // does not normalize H, yet (1, r^2) conjugates back into it because
    // every nontrivial normal subgroup of D4 contains r^2.
    Perm r = d4_r(), s = d4_s(), e = Perm::identity(4);
    Perm r2 = r.then(r);
    BlockedGroup bg = pair_blocked(4, {tuple_perm({r, e}), tuple_perm({e, r2}),
                                       tuple_perm({e, s}), tuple_perm({s, r})});
    PermGroup h(8, bg.h_generators());
    REQUIRE(h.order().value() == 32);

    LiftWitness w = lift_decompose(bg);
    REQUIRE(w.index == 1);
    REQUIRE(w.normal_subgroup.order().value() == 2);
    REQUIRE(w.normal_subgroup.contains(tuple_perm({r2, e})));

    LiftOracleResult o = lift_oracle(bg);
    REQUIRE(o.index == 1);
    REQUIRE(o.core.order().value() == 4);
    for (const Perm& g : w.normal_subgroup.input_generators()) REQUIRE(o.core.contains(g));
}

TEST_CASE("curated triples over Sym(3)") {
    Perm s = s3_swap(), c = s3_cycle(), e = Perm::identity(3);

    SECTION("full cube") {
        BlockedGroup bg = triple_blocked(
            3, {tuple_perm({s, e, e}), tuple_perm({c, e, e}), tuple_perm({e, s, e}),
                tuple_perm({e, c, e}), tuple_perm({e, e, s}), tuple_perm({e, e, c})});
        check_agreement(bg);
        REQUIRE(lift_decompose(bg).index == 2);
    }
    SECTION("straight diagonal") {
        BlockedGroup bg = triple_blocked(3, {tuple_perm({s, s, s}), tuple_perm({c, c, c})});
        check_agreement(bg);
        LiftWitness w = lift_decompose(bg);
        REQUIRE(w.index == 0);
        REQUIRE(w.normal_subgroup.order().value() == 6);
        Perm s0 = restrict_interval(tuple_perm({s, e, e}), 0, 3);
        REQUIRE(w.resolve(s0) == tuple_perm({s, s, s}));
    }
    SECTION("twisted diagonal") {
        Perm ss = s.conjugated_by(s), sc = s.conjugated_by(c);
        Perm cs = c.conjugated_by(s), cc = c.conjugated_by(c);
        BlockedGroup bg = triple_blocked(3, {tuple_perm({s, ss, sc}), tuple_perm({c, cs, cc})});
        check_agreement(bg);
        REQUIRE(lift_decompose(bg).index == 0);
    }
    SECTION("free block then a doubled diagonal: index promotes past the recursion") {
        BlockedGroup bg = triple_blocked(3, {tuple_perm({s, e, e}), tuple_perm({c, e, e}),
                                             tuple_perm({e, s, s}), tuple_perm({e, c, c})});
        check_agreement(bg);
        LiftWitness w = lift_decompose(bg);
        REQUIRE(w.index == 2);
        for (const Perm& g : w.normal_subgroup.input_generators()) {
            Perm lift = w.resolve(g);
            for (point_t p : bg.block(1)) REQUIRE(lift[p] == p);
            for (point_t p : bg.block(2)) REQUIRE(lift[p] == p);
        }
    }
    SECTION("all three signs matched") {
        BlockedGroup bg = triple_blocked(3, {tuple_perm({s, s, s}), tuple_perm({c, e, e}),
                                             tuple_perm({e, c, e}), tuple_perm({e, e, c})});
        check_agreement(bg);
        LiftWitness w = lift_decompose(bg);
        REQUIRE(w.index == 2);
        REQUIRE(w.normal_subgroup.order().value() == 3);
    }
    SECTION("product of signs even") {
        BlockedGroup bg = triple_blocked(
            3, {tuple_perm({s, s, e}), tuple_perm({s, e, s}), tuple_perm({c, e, e}),
                tuple_perm({e, c, e}), tuple_perm({e, e, c})});
        PermGroup h(9, bg.h_generators());
        REQUIRE(h.order().value() == 108);
        check_agreement(bg);
        LiftWitness w = lift_decompose(bg);
        REQUIRE(w.index == 2);
        REQUIRE(w.normal_subgroup.order().value() == 3);
    }
    SECTION("doubled diagonal then a free block: no admissible index") {
        // every conjugate of the free tail lands outside the subgroup, and
        // the enumeration oracle rejects for the same reason
        BlockedGroup bg = triple_blocked(3, {tuple_perm({s, s, e}), tuple_perm({c, c, e}),
                                             tuple_perm({e, e, s}), tuple_perm({e, e, c})});
        REQUIRE_THROWS_AS(lift_decompose(bg), precondition_error);
        REQUIRE_THROWS_AS(lift_oracle(bg), precondition_error);
    }
}

TEST_CASE("input validation") {
    Perm s = s3_swap(), c = s3_cycle(), e = Perm::identity(3);

    SECTION("trivial subgroup is rejected") {
        BlockedGroup bg = pair_blocked(3, {Perm::identity(6)});
        REQUIRE_THROWS_AS(lift_decompose(bg), precondition_error);
    }
    SECTION("kernel branch without conjugators") {
        BlockedGroup bg(6, even_blocks(3, 2),
                        {tuple_perm({s, e}), tuple_perm({c, e}), tuple_perm({e, s}),
                         tuple_perm({e, c})});
        REQUIRE_THROWS_AS(lift_decompose(bg), precondition_error);
    }
    SECTION("generator crossing blocks is rejected") {
        REQUIRE_THROWS_AS(BlockedGroup(6, even_blocks(3, 2), {swap_with_block0(3, 2, 1)}),
                          precondition_error);
    }
    SECTION("overlapping blocks are rejected") {
        std::vector<std::vector<point_t>> blocks{interval(0, 4), interval(3, 6)};
        REQUIRE_THROWS_AS(BlockedGroup(6, blocks, {tuple_perm({s, s})}), precondition_error);
    }
    SECTION("conjugator must carry its block onto block 0") {
        std::vector<Perm> bad{Perm::identity(6)};
        REQUIRE_THROWS_AS(BlockedGroup(6, even_blocks(3, 2), {tuple_perm({s, s})}, bad),
                          precondition_error);
    }
    SECTION("blocks must carry conjugate copies") {
        BlockedGroup bg = pair_blocked(3, {tuple_perm({s, e})});
        REQUIRE_THROWS_AS(lift_decompose(bg), precondition_error);
    }
    SECTION("oracle refuses unenumerable blocks") {
        std::vector<point_t> c8(8);
        for (std::size_t i = 0; i < 8; ++i) c8[i] = static_cast<point_t>((i + 1) % 8);
        Perm cyc(c8);
        Perm tr(std::vector<point_t>{1, 0, 2, 3, 4, 5, 6, 7});
        BlockedGroup bg = pair_blocked(8, {tuple_perm({cyc, cyc}), tuple_perm({tr, tr})});
        REQUIRE_THROWS_AS(lift_oracle(bg), budget_error);
    }
}

TEST_CASE("level stabilizer of the binary spine group splits below level 1") {
    TreeGroup g = catalog("full").unfold(3);
    TreeLifting tl = tree_lifting(g, 1);

    REQUIRE(tl.witness.index == 1);
    LiftOracleResult o = lift_oracle(tl.blocked);
    REQUIRE(o.index == 1);
    REQUIRE(o.core.order().value() == 8); // whole automorphism group of the depth-2 subtree

    REQUIRE(!tl.witness.normal_subgroup.trivial());
    for (const Perm& x : tl.witness.normal_subgroup.input_generators()) {
        REQUIRE(o.core.contains(x));
        REQUIRE(tl.witness.resolve(x) == x);
    }

    TreeGroup sub = tl.block0_tree_group();
    REQUIRE(sub.shape().depth() == 2);
    TreeGroupEngine sube(sub);
    REQUIRE(sube.order().value() == 8);
}

TEST_CASE("level stabilizer of the binary odometer is the doubled diagonal") {
    TreeGroup g = catalog("odometer").unfold(5);
    TreeLifting tl = tree_lifting(g, 1);

    REQUIRE(tl.witness.index == 0);
    REQUIRE(tl.witness.normal_subgroup.order().value() == 16);

    LiftOracleResult o = lift_oracle(tl.blocked);
    REQUIRE(o.index == 0);
    REQUIRE(o.core.order().value() == 16);

    // the square of the generator acts identically on both subtrees
    TreeGroupEngine engine(g);
    Perm a = engine.domain().render(g.generators()[0]);
    Perm a2 = a.then(a);
    for (const Perm& x : tl.witness.normal_subgroup.input_generators()) {
        Perm lift = tl.witness.resolve(x);
        Perm mirror = x.conjugated_by(tl.blocked.conjugator(1));
        REQUIRE(lift == x.then(mirror));
    }
    REQUIRE(tl.witness.resolve(tl.blocked.restricted_to_block(a2, 0)) == a2);
}

TEST_CASE("level stabilizer of the Grigorchuk group has a kernel at depth 8") {
    TreeGroup g = catalog("grigorchuk").unfold(8);
    TreeLifting tl = tree_lifting(g, 1);

    REQUIRE(tl.witness.index == 1);
    REQUIRE(!tl.witness.normal_subgroup.trivial());

    PermGroup h(tl.blocked.degree(), tl.blocked.h_generators());
    for (const Perm& x : tl.witness.normal_subgroup.input_generators()) {
        REQUIRE(tl.witness.resolve(x) == x);
        REQUIRE(h.contains(x));
        for (point_t p : tl.blocked.block(1)) REQUIRE(x[p] == p);
    }

    REQUIRE_THROWS_AS(lift_oracle(tl.blocked), budget_error);
}

TEST_CASE("tree lifting preconditions") {
    SECTION("needs two levels of margin") {
        TreeGroup g = catalog("full").unfold(2);
        REQUIRE_THROWS_AS(tree_lifting(g, 1), precondition_error);
    }
    SECTION("level must be positive") {
        TreeGroup g = catalog("full").unfold(3);
        REQUIRE_THROWS_AS(tree_lifting(g, 0), precondition_error);
    }
    SECTION("needs level transitivity") {
        TreeShape shape(std::vector<int>{2, 2, 2});
        TreeGroup g(shape, {Portrait::identity(shape, 3)});
        REQUIRE_THROWS_AS(tree_lifting(g, 1), precondition_error);
    }
}
