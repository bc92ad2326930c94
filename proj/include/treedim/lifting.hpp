#pragma once

// Subdirect products of conjugate block groups and their decomposition into
// a normal subgroup of the first block plus uniquely determined tails.
//
// The decomposition recurses on the number of blocks. When some element of
// H acts only inside the last block, its conjugate into block 0 seeds a
// normal closure there and the remaining blocks are trivial. Otherwise the
// restriction that forgets the last block is injective on H, so every
// element of the smaller problem lifts back uniquely; the lift is recovered
// by walking the stabilizer chain of H built with the retained points as
// forced base prefix.
//
// A brute-force oracle defines the contract on enumerable instances: the
// reported index must match the maximal one admitting unique tails and a
// nontrivial normal core, and the returned subgroup must sit inside that
// core.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/group_engine.hpp"
#include "treedim/perm.hpp"
#include "treedim/perm_group.hpp"
#include "treedim/tree_group.hpp"

namespace treedim {

namespace detail {

inline std::vector<Perm> dedupe_nontrivial(const std::vector<Perm>& in) {
    std::vector<Perm> out;
    std::unordered_set<Perm, PermHash> seen;
    for (const Perm& g : in) {
        if (g.is_identity()) continue;
        if (seen.insert(g).second) out.push_back(g);
    }
    return out;
}

} // namespace detail

// A subgroup H supported on disjoint blocks of points, each block preserved
// setwise, together with optional ambient conjugators carrying block j onto
// block 0. The conjugators are required to normalize H; that is checked
// lazily, at the moment a conjugated element is actually used, because only
// the kernel branch of the decomposition depends on it.
class BlockedGroup {
public:
    BlockedGroup(std::size_t degree, std::vector<std::vector<point_t>> blocks,
                 std::vector<Perm> h_generators, std::vector<Perm> conjugators = {})
        : degree_(degree), blocks_(std::move(blocks)), gens_(std::move(h_generators)),
          conj_(std::move(conjugators)) {
        require(!blocks_.empty(), "BlockedGroup: no blocks");
        block_of_.assign(degree_, -1);
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            std::vector<point_t>& blk = blocks_[b];
            require(!blk.empty(), "BlockedGroup: empty block");
            std::sort(blk.begin(), blk.end());
            for (point_t p : blk) {
                require(p < degree_, "BlockedGroup: block point out of range");
                require(block_of_[p] < 0, "BlockedGroup: blocks overlap");
                block_of_[p] = static_cast<std::int32_t>(b);
            }
        }
        for (const Perm& g : gens_) {
            require(g.degree() == degree_, "BlockedGroup: generator degree mismatch");
            for (std::size_t p = g.window_lo(); p < g.window_hi(); ++p) {
                point_t q = static_cast<point_t>(p);
                if (g[q] == q) continue;
                require(block_of_[p] >= 0,
                        "BlockedGroup: generator moves a point outside the blocks");
                require(block_of_[g[q]] == block_of_[p],
                        "BlockedGroup: generator crosses blocks");
            }
        }
        if (!conj_.empty()) {
            require(conj_.size() == blocks_.size() - 1,
                    "BlockedGroup: one conjugator per block after the first");
            for (std::size_t j = 1; j < blocks_.size(); ++j) {
                const Perm& c = conj_[j - 1];
                require(c.degree() == degree_, "BlockedGroup: conjugator degree mismatch");
                for (point_t p : blocks_[j])
                    require(block_of_[c[p]] == 0,
                            "BlockedGroup: conjugator does not carry its block onto block 0");
            }
        }
    }

    std::size_t degree() const { return degree_; }
    std::size_t block_count() const { return blocks_.size(); }
    const std::vector<point_t>& block(std::size_t b) const { return blocks_[b]; }
    const std::vector<Perm>& h_generators() const { return gens_; }
    bool has_conjugators() const { return !conj_.empty(); }
    const Perm& conjugator(std::size_t j) const {
        require(has_conjugators() && j >= 1 && j < blocks_.size(),
                "BlockedGroup: no conjugator for that block");
        return conj_[j - 1];
    }

    Perm restricted_to_block(const Perm& g, std::size_t b) const {
        std::vector<point_t> img(degree_);
        for (std::size_t p = 0; p < degree_; ++p) img[p] = static_cast<point_t>(p);
        for (point_t p : blocks_[b]) img[p] = g[p];
        return Perm(img);
    }

    // the projection of H to one block, as a group on the full point set
    PermGroup block_group(std::size_t b) const {
        std::vector<Perm> gens;
        for (const Perm& g : gens_) gens.push_back(restricted_to_block(g, b));
        return PermGroup(degree_, detail::dedupe_nontrivial(gens));
    }

private:
    std::size_t degree_;
    std::vector<std::vector<point_t>> blocks_;
    std::vector<Perm> gens_;
    std::vector<Perm> conj_;
    std::vector<std::int32_t> block_of_;
};

// One retained level of the recursion: the chain of the current subgroup
// with the retained blocks' points as forced base prefix. The pointwise
// stabilizer of the prefix is trivial at every stored stage, so prefix
// images determine the element and the chain walk below recovers it.
struct ResolveStage {
    PermGroup chain;
    std::vector<point_t> prefix;
};

namespace detail {

inline Perm resolve_through(const ResolveStage& st, const Perm& target) {
    Perm w = Perm::identity(target.degree());
    for (std::size_t l = 0; l < st.chain.chain_length(); ++l) {
        point_t beta = st.chain.chain_base(l);
        point_t r = w.inverse()[target[beta]];
        w = st.chain.coset_rep(l, r).then(w);
    }
    for (point_t p : st.prefix)
        require(w[p] == target[p], "resolve: images do not lift");
    return w;
}

} // namespace detail

class LiftWitness {
public:
    std::size_t index = 0;    // blocks 1..index of every resolved element are trivial
    PermGroup block0_group;   // projection of H to block 0
    PermGroup normal_subgroup; // N, nontrivial and normal in block0_group
    std::vector<ResolveStage> stages; // innermost first

    // the unique element of H whose retained-block images agree with a
    Perm resolve(const Perm& a) const {
        require(normal_subgroup.contains(a), "resolve: element outside the normal subgroup");
        Perm e = a;
        for (const ResolveStage& st : stages) e = detail::resolve_through(st, e);
        return e;
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "index: " << index << "\n";
        for (const Perm& g : normal_subgroup.input_generators()) {
            os << "generator: " << g.to_string() << "\n";
            os << "lift: " << resolve(g).to_string() << "\n";
        }
        return os.str();
    }
};

namespace detail {

struct LiftRecursion {
    const BlockedGroup& b;

    PermGroup block0_of(const std::vector<Perm>& gens) const {
        std::vector<Perm> restricted;
        for (const Perm& g : gens) restricted.push_back(b.restricted_to_block(g, 0));
        return PermGroup(b.degree(), dedupe_nontrivial(restricted));
    }

    LiftWitness run(const std::vector<Perm>& gens, std::size_t nblocks) const {
        if (nblocks == 1) {
            LiftWitness w;
            w.index = 0;
            w.block0_group = block0_of(gens);
            w.normal_subgroup = w.block0_group;
            require(!w.normal_subgroup.trivial(), "lift_decompose: the subgroup is trivial");
            return w;
        }
        std::vector<point_t> prefix;
        for (std::size_t j = 0; j + 1 < nblocks; ++j)
            prefix.insert(prefix.end(), b.block(j).begin(), b.block(j).end());
        PermGroup chain(b.degree(), gens, prefix);
        std::vector<Perm> kernel_gens = chain.generators_fixing(prefix);
        if (!kernel_gens.empty()) {
            require(b.has_conjugators(),
                    "lift_decompose: kernel branch needs a conjugator for block " +
                        std::to_string(nblocks - 1));
            const Perm& c = b.conjugator(nblocks - 1);
            PermGroup kernel(b.degree(), kernel_gens);
            std::optional<Perm> seed = usable_seed(kernel, c, chain);
            require(seed.has_value(),
                    "lift_decompose: no kernel element stays in the subgroup after "
                    "conjugation; the conjugator does not normalize it");
            LiftWitness w;
            w.index = nblocks - 1;
            w.block0_group = block0_of(gens);
            w.normal_subgroup = w.block0_group.normal_closure({*seed});
            for (const Perm& g : w.normal_subgroup.input_generators())
                require(chain.contains(g), "lift_decompose: normal closure escapes the subgroup");
            return w;
        }
        std::vector<Perm> dropped;
        for (const Perm& g : gens) {
            std::vector<point_t> img(b.degree());
            for (std::size_t p = 0; p < b.degree(); ++p) img[p] = g[static_cast<point_t>(p)];
            for (point_t p : b.block(nblocks - 1)) img[p] = p;
            dropped.push_back(Perm(img));
        }
        LiftWitness w = run(dedupe_nontrivial(dropped), nblocks - 1);
        w.stages.push_back(ResolveStage{std::move(chain), std::move(prefix)});
        return w;
    }

    // Lexicographically least kernel element whose conjugate lands back in
    // the subgroup: strong generators first, full enumeration as fallback
    // when the kernel is small enough.
    std::optional<Perm> usable_seed(const PermGroup& kernel, const Perm& c,
                                    const PermGroup& subgroup) const {
        std::vector<Perm> pool = kernel.strong_generators();
        std::sort(pool.begin(), pool.end());
        for (const Perm& x : pool) {
            Perm a = x.conjugated_by(c);
            if (subgroup.contains(a)) return a;
        }
        if (kernel.order().value() <= BigInt(4096)) {
            std::vector<Perm> elems = kernel.elements(4096);
            std::sort(elems.begin(), elems.end());
            for (const Perm& x : elems) {
                if (x.is_identity()) continue;
                Perm a = x.conjugated_by(c);
                if (subgroup.contains(a)) return a;
            }
        }
        return std::nullopt;
    }
};

} // namespace detail

inline LiftWitness lift_decompose(const BlockedGroup& b) {
    std::vector<Perm> gens = detail::dedupe_nontrivial(b.h_generators());
    require(!gens.empty(), "lift_decompose: the subgroup is trivial");
    if (b.has_conjugators()) {
        PermGroup l0 = b.block_group(0);
        for (std::size_t j = 1; j < b.block_count(); ++j) {
            PermGroup lj = b.block_group(j);
            bool match = lj.order() == l0.order();
            for (const Perm& g : lj.input_generators())
                if (match && !l0.contains(g.conjugated_by(b.conjugator(j)))) match = false;
            require(match, "lift_decompose: block groups are not conjugate copies");
        }
    }
    detail::LiftRecursion rec{b};
    LiftWitness w = rec.run(gens, b.block_count());
    // Trailing blocks on which every resolved element of N is trivial extend
    // the index: the tail coordinates are homomorphic in a by uniqueness, so
    // vanishing on the generators is vanishing on all of N.
    std::size_t k = b.block_count() - 1;
    if (w.index < k) {
        std::vector<Perm> lifts;
        for (const Perm& g : w.normal_subgroup.input_generators())
            lifts.push_back(w.resolve(g));
        while (w.index < k) {
            bool clean = true;
            for (const Perm& e : lifts) {
                for (point_t p : b.block(w.index + 1))
                    if (e[p] != p) { clean = false; break; }
                if (!clean) break;
            }
            if (!clean) break;
            ++w.index;
        }
    }
    return w;
}

struct LiftOracleResult {
    std::size_t index = 0;
    PermGroup core;
};

// Direct enumeration over every element of H. An index i is admissible when
// the only element trivial on blocks 0..i is the identity (tails are then
// unique) and the elements trivial on blocks 1..i project into block 0 with
// a nontrivial normal core; the oracle reports the maximal admissible index
// and that core.
inline LiftOracleResult lift_oracle(const BlockedGroup& b, std::size_t budget = 200000) {
    PermGroup l0 = b.block_group(0);
    for (std::size_t j = 0; j < b.block_count(); ++j)
        if (b.block_group(j).order().value() > BigInt(10000))
            throw budget_error("lift_oracle: block group order exceeds 10000");
    PermGroup h(b.degree(), detail::dedupe_nontrivial(b.h_generators()));
    std::vector<Perm> elems = h.elements(budget);
    auto trivial_on = [&](const Perm& e, std::size_t blk) {
        for (point_t p : b.block(blk))
            if (e[p] != p) return false;
        return true;
    };
    for (std::size_t i = b.block_count(); i-- > 0;) {
        bool unique_tails = true;
        std::vector<Perm> d_proj;
        for (const Perm& e : elems) {
            bool in_d = true;
            for (std::size_t blk = 1; blk <= i && in_d; ++blk)
                if (!trivial_on(e, blk)) in_d = false;
            if (!in_d) continue;
            if (trivial_on(e, 0) && !e.is_identity()) {
                unique_tails = false;
                break;
            }
            d_proj.push_back(b.restricted_to_block(e, 0));
        }
        if (!unique_tails) continue;
        PermGroup core =
            l0.normal_core_of(PermGroup(b.degree(), detail::dedupe_nontrivial(d_proj)));
        if (!core.trivial()) return LiftOracleResult{i, std::move(core)};
    }
    throw precondition_error(
        "lift_oracle: no index admits unique tails and a nontrivial normal core");
}

// The level-stabilizer instance over one truncated tree group: H is the
// pointwise stabilizer of a vertex level, the blocks are the subtrees below
// the level vertices (block 0 under the all-zeros vertex), and conjugators
// come from an orbit transversal of the level, which normalizes H because
// level stabilizers are normal.
struct TreeLifting {
    LiftWitness witness;
    BlockedGroup blocked;
    TreeShape subtree_shape{std::vector<int>{2}};
    Word base_vertex;
    std::size_t level = 0;
    std::size_t block0_offset = 0; // ambient vertex point of base_vertex

    // subtree points j correspond to ambient points block0_offset + 1 + j
    Perm to_ambient(const Perm& sub) const {
        std::vector<point_t> img(blocked.degree());
        for (std::size_t p = 0; p < blocked.degree(); ++p) img[p] = static_cast<point_t>(p);
        for (std::size_t j = 0; j < sub.degree(); ++j)
            img[block0_offset + 1 + j] =
                static_cast<point_t>(block0_offset + 1 + sub[static_cast<point_t>(j)]);
        return Perm(img);
    }

    Perm to_subtree(const Perm& amb) const {
        std::size_t size = subtree_shape.vertex_count();
        require(amb.is_identity() || (amb.window_lo() >= block0_offset + 1 &&
                                      amb.window_hi() <= block0_offset + 1 + size),
                "TreeLifting: element not supported below the base vertex");
        std::vector<point_t> img(size);
        for (std::size_t j = 0; j < size; ++j)
            img[j] = static_cast<point_t>(
                amb[static_cast<point_t>(block0_offset + 1 + j)] - (block0_offset + 1));
        return Perm(img);
    }

    // the block-0 projection as a group of subtree portraits
    TreeGroup block0_tree_group() const {
        VertexDomain sub(subtree_shape);
        PermGroup b0 = blocked.block_group(0);
        std::vector<Portrait> gens;
        for (const Perm& g : b0.input_generators())
            gens.push_back(sub.portrait_of(to_subtree(g)));
        return TreeGroup(subtree_shape, std::move(gens));
    }
};

inline TreeLifting tree_lifting(const TreeGroup& g, std::size_t n_level) {
    require(n_level >= 1, "tree_lifting: level must be positive");
    require(g.depth() >= n_level + 2, "tree_lifting: need two levels below the stabilized level");
    TreeGroupEngine engine(g);
    require(engine.is_level_transitive(n_level),
            "tree_lifting: group is not level-transitive at the requested level");
    const VertexDomain& dom = engine.domain();
    std::size_t count = g.shape().level_count(n_level);
    std::vector<point_t> level_points;
    for (std::size_t i = 0; i < count; ++i)
        level_points.push_back(static_cast<point_t>(dom.dfs_index(n_level, i)));

    PermGroup whole(dom.size(), engine.vertex_generators(), level_points);
    std::vector<Perm> h_gens = whole.generators_fixing(level_points);

    std::vector<std::vector<point_t>> blocks;
    for (std::size_t i = 0; i < count; ++i) {
        auto [lo, hi] = dom.subtree_interval(g.shape().word_at(n_level, i));
        std::vector<point_t> blk;
        for (std::size_t p = lo + 1; p < hi; ++p) blk.push_back(static_cast<point_t>(p));
        blocks.push_back(std::move(blk));
    }

    // orbit transversal of the level: witness[q] maps the base point to q
    std::vector<Perm> witness(dom.size());
    std::vector<char> seen(dom.size(), 0);
    point_t base = level_points[0];
    witness[base] = Perm::identity(dom.size());
    seen[base] = 1;
    std::vector<point_t> queue{base};
    for (std::size_t qi = 0; qi < queue.size(); ++qi)
        for (const Perm& gen : engine.vertex_generators()) {
            point_t to = gen[queue[qi]];
            if (!seen[to]) {
                seen[to] = 1;
                witness[to] = witness[queue[qi]].then(gen);
                queue.push_back(to);
            }
        }
    std::vector<Perm> conjugators;
    for (std::size_t j = 1; j < count; ++j)
        conjugators.push_back(witness[level_points[j]].inverse());

    BlockedGroup blocked(dom.size(), std::move(blocks), std::move(h_gens),
                         std::move(conjugators));
    LiftWitness lifted = lift_decompose(blocked);
    return TreeLifting{std::move(lifted),          std::move(blocked),
                       g.shape().subtree(n_level), g.shape().word_at(n_level, 0),
                       n_level,                    dom.dfs_index(n_level, 0)};
}

} // namespace treedim
