#pragma once

// Finite graphs and exact non-commuting representations: a labelling of the
// vertices by group elements realizes a graph when adjacency holds exactly
// for non-commuting labels. Two pipelines produce a verified representation
// of V_n (n disjoint edges) inside a tree-group truncation: one straight
// from rigid vertex stabilizers when the group is weakly branch, one through
// the level-stabilizer decomposition, taking both elements of each pair from
// a derived rigid stabilizer inside the lifted normal subgroup.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/group_engine.hpp"
#include "treedim/lifting.hpp"
#include "treedim/perm.hpp"
#include "treedim/perm_group.hpp"
#include "treedim/portrait.hpp"
#include "treedim/tree_group.hpp"

namespace treedim {

// undirected, no loops, no multi-edges
class Graph {
public:
    Graph(std::size_t vertex_count, std::vector<std::pair<std::size_t, std::size_t>> edges)
        : size_(vertex_count), edges_(std::move(edges)) {
        for (auto& [u, v] : edges_) {
            require(u != v, "Graph: loops are not allowed");
            require(u < size_ && v < size_, "Graph: edge endpoint out of range");
            if (u > v) std::swap(u, v);
        }
        std::sort(edges_.begin(), edges_.end());
        require(std::adjacent_find(edges_.begin(), edges_.end()) == edges_.end(),
                "Graph: multi-edges are not allowed");
    }

    // n disjoint edges on 2n vertices
    static Graph vn(std::size_t n) {
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i) edges.emplace_back(2 * i, 2 * i + 1);
        return Graph(2 * n, std::move(edges));
    }

    std::size_t vertex_count() const { return size_; }
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

    bool adjacent(std::size_t u, std::size_t v) const {
        if (u > v) std::swap(u, v);
        return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(u, v));
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "vertices: " << size_ << "\n";
        for (const auto& [u, v] : edges_) os << "edge: " << u << " " << v << "\n";
        return os.str();
    }

private:
    std::size_t size_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

inline bool labels_commute(const Perm& a, const Perm& b) { return a.commutes_with(b); }
inline bool labels_commute(const Portrait& a, const Portrait& b) {
    return a.then(b) == b.then(a);
}
inline bool labels_compatible(const Perm& a, const Perm& b) { return a.degree() == b.degree(); }
inline bool labels_compatible(const Portrait& a, const Portrait& b) {
    return a.shape() == b.shape() && a.depth() == b.depth();
}

template <class Label>
struct NCRep {
    Graph graph;
    std::vector<Label> labels; // one per vertex
};

struct VerifyReport {
    bool ok = true;
    std::size_t u = 0, v = 0; // first violating pair when not ok
    bool edge = false;        // what the graph demanded at (u, v)

    std::string to_text() const {
        if (ok) return "ok\n";
        std::ostringstream os;
        os << "violation: " << u << " " << v << " "
           << (edge ? "edge but labels commute" : "no edge but labels do not commute") << "\n";
        return os.str();
    }
};

template <class Label>
VerifyReport verify(const NCRep<Label>& rep) {
    require(rep.labels.size() == rep.graph.vertex_count(), "verify: one label per vertex");
    for (std::size_t v = 1; v < rep.labels.size(); ++v)
        require(labels_compatible(rep.labels[0], rep.labels[v]),
                "verify: labels do not live in one group");
    for (std::size_t u = 0; u < rep.labels.size(); ++u)
        for (std::size_t v = u + 1; v < rep.labels.size(); ++v) {
            bool edge = rep.graph.adjacent(u, v);
            if (edge == labels_commute(rep.labels[u], rep.labels[v]))
                return VerifyReport{false, u, v, edge};
        }
    return VerifyReport{};
}

inline std::string to_text(const NCRep<Portrait>& rep) {
    std::ostringstream os;
    os << rep.graph.to_text();
    for (std::size_t i = 0; i < rep.labels.size(); ++i)
        os << "label " << i << ":\n" << rep.labels[i].to_text() << "\n";
    return os.str();
}

namespace detail {

// distinct nontrivial products of the generators and their inverses, by
// increasing word length, in deterministic discovery order
inline std::vector<Perm> bounded_words(const std::vector<Perm>& gens, std::size_t degree,
                                       std::size_t max_len, std::size_t max_count) {
    std::vector<Perm> alphabet;
    {
        std::unordered_set<Perm, PermHash> seen;
        for (const Perm& g : gens) {
            if (g.is_identity()) continue;
            if (seen.insert(g).second) alphabet.push_back(g);
            Perm gi = g.inverse();
            if (seen.insert(gi).second) alphabet.push_back(gi);
        }
    }
    std::vector<Perm> words;
    std::unordered_set<Perm, PermHash> seen{Perm::identity(degree)};
    std::vector<Perm> layer{Perm::identity(degree)};
    for (std::size_t len = 1; len <= max_len && !layer.empty(); ++len) {
        std::vector<Perm> next;
        for (const Perm& w : layer)
            for (const Perm& a : alphabet) {
                if (words.size() >= max_count) return words;
                Perm x = w.then(a);
                if (!seen.insert(x).second) continue;
                next.push_back(x);
                words.push_back(x);
            }
        layer = std::move(next);
    }
    return words;
}

inline std::optional<std::pair<Perm, Perm>> first_noncommuting(const std::vector<Perm>& words) {
    for (std::size_t j = 0; j < words.size(); ++j)
        for (std::size_t i = 0; i < j; ++i)
            if (!words[i].commutes_with(words[j])) return std::make_pair(words[i], words[j]);
    return std::nullopt;
}

// first non-commuting pair among accepted commutators of word pairs; the
// candidates lie in the derived subgroup by construction
template <class Accept>
std::optional<std::pair<Perm, Perm>> first_noncommuting_derived(const std::vector<Perm>& words,
                                                                Accept&& accept) {
    std::vector<Perm> accepted;
    std::unordered_set<Perm, PermHash> seen;
    for (std::size_t j = 0; j < words.size(); ++j)
        for (std::size_t i = 0; i < j; ++i) {
            Perm c = commutator(words[i], words[j]);
            if (c.is_identity() || !seen.insert(c).second) continue;
            if (!accept(c)) continue;
            for (const Perm& prev : accepted)
                if (!prev.commutes_with(c)) return std::make_pair(prev, c);
            accepted.push_back(c);
        }
    return std::nullopt;
}

} // namespace detail

// Picks n same-level vertices with nontrivial rigid stabilizers (shallowest
// level that offers enough, in vertex order) and searches each stabilizer
// for a non-commuting pair.
inline NCRep<Portrait> construct_vn_weakly_branch(const TreeGroup& g, std::size_t n,
                                                  std::size_t word_bound = 8) {
    require(n >= 1, "construct_vn: need at least one edge");
    TreeGroupEngine engine(g);
    std::vector<RigidStabilizer> chosen;
    for (std::size_t level = 1; level < g.depth() && chosen.empty(); ++level) {
        if (g.shape().level_count(level) < n) continue;
        std::vector<RigidStabilizer> rists = engine.rigid_level_stabilizer(level);
        std::vector<RigidStabilizer> good;
        for (RigidStabilizer& r : rists)
            if (!r.trivial()) good.push_back(std::move(r));
        if (good.size() >= n) {
            good.resize(n);
            chosen = std::move(good);
        }
    }
    if (chosen.empty())
        throw search_exhausted_error(
            "construct_vn: no level provides " + std::to_string(n) +
            " nontrivial rigid stabilizers within depth " + std::to_string(g.depth()) +
            " (word bound " + std::to_string(word_bound) + ")");

    std::vector<Portrait> labels;
    for (const RigidStabilizer& r : chosen) {
        std::vector<Perm> gens;
        for (const Portrait& p : r.generators) gens.push_back(engine.domain().render(p));
        std::vector<Perm> words =
            detail::bounded_words(gens, engine.domain().size(), word_bound, 4096);
        std::optional<std::pair<Perm, Perm>> pair = detail::first_noncommuting(words);
        if (!pair)
            throw search_exhausted_error(
                "construct_vn: no non-commuting pair in the rigid stabilizer at " +
                TreeShape::word_string(r.vertex) + " within word length " +
                std::to_string(word_bound));
        labels.push_back(engine.domain().portrait_of(pair->first));
        labels.push_back(engine.domain().portrait_of(pair->second));
    }
    NCRep<Portrait> rep{Graph::vn(n), std::move(labels)};
    require(verify(rep).ok, "construct_vn: produced labelling failed verification");
    return rep;
}

namespace detail {

// The decomposition witness closes over a single seed, which can land in an
// abelian corner (over the full binary tree the least seed generates leaf
// flips only). The pipeline instead closes over every usable kernel
// generator, re-certifying that the closure sits in H supported on block 0;
// outside the kernel branch the witness subgroup is the resolvable one.
inline PermGroup pipeline_normal_subgroup(const TreeLifting& tl) {
    const BlockedGroup& b = tl.blocked;
    if (!tl.witness.stages.empty() || !b.has_conjugators()) return tl.witness.normal_subgroup;
    std::vector<point_t> prefix;
    for (std::size_t j = 0; j + 1 < b.block_count(); ++j)
        prefix.insert(prefix.end(), b.block(j).begin(), b.block(j).end());
    PermGroup chain(b.degree(), b.h_generators(), prefix);
    PermGroup kernel(b.degree(), chain.generators_fixing(prefix));
    const Perm& c = b.conjugator(b.block_count() - 1);
    std::vector<Perm> seeds;
    std::vector<Perm> pool = kernel.strong_generators();
    std::sort(pool.begin(), pool.end());
    for (const Perm& x : pool) {
        Perm a = x.conjugated_by(c);
        if (chain.contains(a)) seeds.push_back(a);
    }
    if (seeds.empty()) return tl.witness.normal_subgroup;
    PermGroup closure = b.block_group(0).normal_closure(seeds);
    for (const Perm& g : closure.input_generators())
        require(chain.contains(g), "construct_vn: normal closure escapes the subgroup");
    return closure;
}

} // namespace detail

// Decomposes the level stabilizer, then builds the pairs inside the lifted
// normal subgroup from derived rigid stabilizers of the block-0 projection,
// at vertices the subgroup moves, and lifts them through the tail-resolver.
inline NCRep<Portrait> construct_vn_via_lifting(const TreeGroup& g, std::size_t n,
                                                std::size_t n_level,
                                                std::size_t word_bound = 8) {
    require(n >= 1, "construct_vn: need at least one edge");
    TreeLifting tl = tree_lifting(g, n_level);
    TreeGroup block = tl.block0_tree_group();
    TreeGroupEngine sub(block);

    std::size_t margin = std::min<std::size_t>(4, block.depth() - 1);
    require(sub.weakly_branch_evidence(1, margin).all_positive(),
            "construct_vn: block-0 projection is not weakly branch at the evidence level");

    PermGroup lifted = detail::pipeline_normal_subgroup(tl);
    require(!lifted.trivial(), "construct_vn: lifted normal subgroup is trivial");
    bool direct = tl.witness.stages.empty(); // pairs already lie in the stabilizer

    std::vector<RigidStabilizer> chosen;
    for (std::size_t level = 1; level < block.depth() && chosen.empty(); ++level) {
        if (block.shape().level_count(level) < n) continue;
        std::vector<RigidStabilizer> rists = sub.rigid_level_stabilizer(level);
        std::vector<RigidStabilizer> good;
        for (std::size_t i = 0; i < rists.size(); ++i) {
            if (rists[i].trivial()) continue;
            std::size_t pt = tl.block0_offset + 1 +
                             sub.domain().dfs_index(block.shape().word_at(level, i));
            if (!lifted.moves_point(static_cast<point_t>(pt))) continue;
            good.push_back(std::move(rists[i]));
        }
        if (good.size() >= n) {
            good.resize(n);
            chosen = std::move(good);
        }
    }
    require(!chosen.empty(), "construct_vn: no subtree level provides " + std::to_string(n) +
                                 " nontrivial rigid stabilizers moved by the lifted subgroup");

    VertexDomain ambient(g.shape());
    std::vector<Portrait> labels;
    for (const RigidStabilizer& r : chosen) {
        std::vector<Perm> gens;
        for (const Portrait& p : r.generators) gens.push_back(sub.domain().render(p));
        std::vector<Perm> words = detail::bounded_words(gens, sub.domain().size(), word_bound, 512);
        auto accept = [&](const Perm& c) { return lifted.contains(tl.to_ambient(c)); };
        std::optional<std::pair<Perm, Perm>> pair =
            detail::first_noncommuting_derived(words, accept);
        if (!pair)
            throw search_exhausted_error(
                "construct_vn: no non-commuting derived pair inside the lifted subgroup at " +
                TreeShape::word_string(r.vertex) + " within word length " +
                std::to_string(word_bound));
        for (const Perm& half : {pair->first, pair->second}) {
            Perm amb = tl.to_ambient(half);
            labels.push_back(ambient.portrait_of(direct ? amb : tl.witness.resolve(amb)));
        }
    }
    NCRep<Portrait> rep{Graph::vn(n), std::move(labels)};
    require(verify(rep).ok, "construct_vn: produced labelling failed verification");
    return rep;
}

} // namespace treedim
