#pragma once

// Level images, projections, rigid stabilizers, and weak-branchness
// evidence for one truncated tree group.
//
// All heavy chain computations run on the depth-first vertex domain, where
// subtree supports are contiguous intervals. In particular the exact order
// of a level-n image is taken from the vertex action of the depth-n
// truncation (the two kernels coincide: fixing level n pointwise forces
// fixing every shallower level). Chains built directly on the level-n
// points would pay a full-size top orbit with full-width transversals,
// which is hopeless for deep narrow wreath towers.

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/factored.hpp"
#include "treedim/perm.hpp"
#include "treedim/perm_group.hpp"
#include "treedim/portrait.hpp"
#include "treedim/tree.hpp"
#include "treedim/tree_group.hpp"

namespace treedim {

// Action of a truncation on one vertex level. `order` is exact and equals
// |G_depth : St(level)|; the PermGroup on the level points is assembled on
// request because its own certificate can be far more expensive than the
// order computed on the vertex domain.
struct LevelImage {
    std::size_t level = 0;
    std::size_t depth = 0;
    std::size_t points = 1; // number of level vertices
    FactoredInt order;
    std::vector<Perm> generators; // action on lexicographic level vertices

    PermGroup group() const { return PermGroup(points, generators); }
};

struct RigidStabilizer {
    Word vertex;
    std::size_t depth = 0;              // truncation depth of the source
    std::vector<Portrait> generators;   // elements of the truncation
    PermGroup action;                   // image on the leaves under vertex

    bool trivial() const { return action.trivial(); }
};

struct WeaklyBranchEntry {
    std::size_t level = 0;
    bool transitive = false;
    std::vector<bool> rist_trivial_flags;
    std::size_t depth = 0;
    std::size_t margin = 0;

    // transitive at this level, with every rigid stabilizer nontrivial
    bool positive() const {
        if (!transitive) return false;
        for (bool t : rist_trivial_flags)
            if (t) return false;
        return true;
    }
};

struct WeaklyBranchReport {
    std::vector<WeaklyBranchEntry> entries;

    bool all_positive() const {
        for (const auto& e : entries)
            if (!e.positive()) return false;
        return !entries.empty();
    }

    std::string to_text() const {
        std::ostringstream os;
        for (const auto& e : entries) {
            os << "level: " << e.level << "\n";
            os << "transitive: " << (e.transitive ? "true" : "false") << "\n";
            os << "rist_trivial_flags:";
            for (bool t : e.rist_trivial_flags) os << ' ' << (t ? "true" : "false");
            os << "\n";
            os << "depth: " << e.depth << "\n";
            os << "margin: " << e.margin << "\n\n";
        }
        return os.str();
    }
};

class TreeGroupEngine {
public:
    explicit TreeGroupEngine(TreeGroup group)
        : group_(std::move(group)), domain_(group_.shape()) {
        for (const Portrait& g : group_.generators())
            vertex_gens_.push_back(domain_.render(g));
    }

    const TreeGroup& group() const { return group_; }
    const VertexDomain& domain() const { return domain_; }
    const std::vector<Perm>& vertex_generators() const { return vertex_gens_; }

    // the faithful action on all non-root vertices
    PermGroup vertex_group() const {
        return PermGroup(domain_.size(), vertex_gens_);
    }

    FactoredInt order() const { return vertex_group().order(); }

    FactoredInt level_image_order(std::size_t n) const {
        require(n <= group_.depth(), "level_image: level exceeds depth");
        if (n == 0) return FactoredInt();
        if (n == group_.depth()) return order();
        TreeGroupEngine sub(group_.truncated(n));
        return sub.order();
    }

    LevelImage level_image(std::size_t n) const {
        LevelImage img;
        img.level = n;
        img.depth = group_.depth();
        img.points = group_.shape().level_count(n);
        img.order = level_image_order(n);
        for (const Portrait& g : group_.generators())
            img.generators.push_back(g.level_perm(n));
        return img;
    }

    // image of the stabilizer of v under the section at v
    TreeGroup projection(const Word& v) const {
        require(v.size() < group_.depth(), "projection: depth exhausted");
        if (v.empty()) return group_;
        PermGroup st = vertex_group().pointwise_stabilizer(
            {static_cast<point_t>(domain_.dfs_index(v))});
        std::vector<Portrait> sections;
        for (const Perm& p : st.input_generators())
            sections.push_back(domain_.portrait_of(p).section(v));
        return TreeGroup(group_.shape().subtree(v.size()), std::move(sections));
    }

    RigidStabilizer rigid_stabilizer(const Word& v) const {
        require(v.size() < group_.depth(), "rigid_stabilizer: vertex too deep");
        return rist_of(vertex_group(), v);
    }

    std::vector<RigidStabilizer> rigid_level_stabilizer(std::size_t n) const {
        require(n >= 1 && n < group_.depth(), "rigid_level_stabilizer: bad level");
        PermGroup vg = vertex_group();
        std::vector<RigidStabilizer> out;
        out.reserve(group_.shape().level_count(n));
        for (std::size_t i = 0; i < group_.shape().level_count(n); ++i)
            out.push_back(rist_of(vg, group_.shape().word_at(n, i)));
        return out;
    }

    bool is_level_transitive(std::size_t n) const {
        require(n <= group_.depth(), "is_level_transitive: level exceeds depth");
        if (n == 0) return true;
        return orbit_size(domain_.dfs_index(group_.shape().word_at(n, 0))) ==
               group_.shape().level_count(n);
    }

    WeaklyBranchReport weakly_branch_evidence(std::size_t n_max,
                                              std::size_t margin) const {
        require(n_max >= 1 && n_max + margin <= group_.depth(),
                "weakly_branch_evidence: level and margin exceed depth");
        WeaklyBranchReport report;
        for (std::size_t n = 1; n <= n_max; ++n) {
            TreeGroupEngine sub(group_.truncated(n + margin));
            WeaklyBranchEntry e;
            e.level = n;
            e.depth = n + margin;
            e.margin = margin;
            e.transitive = sub.is_level_transitive(n);
            for (const RigidStabilizer& r : sub.rigid_level_stabilizer(n))
                e.rist_trivial_flags.push_back(r.trivial());
            report.entries.push_back(std::move(e));
        }
        return report;
    }

    // Does the derived subgroup of rist(v) lie inside the normal closure of
    // g? Commutators of rigid generators suffice: the closure is normal, so
    // membership of the generating commutators pulls in all their
    // conjugates, and those generate the derived subgroup.
    bool check_rist_in_normal_closure(const Portrait& g, const Word& v) const {
        require(!g.is_identity(), "check_rist_in_normal_closure: trivial element");
        require(v.size() >= 1 && v.size() < group_.depth(),
                "check_rist_in_normal_closure: bad vertex");
        std::size_t q = domain_.dfs_index(v);
        bool moved = false;
        for (const Perm& p : vertex_gens_)
            if (p[static_cast<point_t>(q)] != q) moved = true;
        require(moved, "check_rist_in_normal_closure: vertex not moved by the group");
        PermGroup vg = vertex_group();
        PermGroup closure = vg.normal_closure({domain_.render(g)});
        RigidStabilizer rist = rist_of(vg, v);
        std::vector<Perm> rgens;
        for (const Portrait& r : rist.generators) rgens.push_back(domain_.render(r));
        for (std::size_t i = 0; i < rgens.size(); ++i)
            for (std::size_t j = i + 1; j < rgens.size(); ++j)
                if (!closure.contains(commutator(rgens[i], rgens[j]))) return false;
        return true;
    }

private:
    RigidStabilizer rist_of(const PermGroup& vg, const Word& v) const {
        std::vector<point_t> outside;
        std::size_t lo = 0, hi = domain_.size();
        if (!v.empty()) {
            auto [a, b] = domain_.subtree_interval(v);
            lo = a;
            hi = b;
        }
        for (std::size_t p = 0; p < domain_.size(); ++p)
            if (p < lo || p >= hi) outside.push_back(static_cast<point_t>(p));
        PermGroup st = vg.pointwise_stabilizer(outside);
        RigidStabilizer out;
        out.vertex = v;
        out.depth = group_.depth();
        std::vector<Perm> leaf_gens;
        for (const Perm& p : st.input_generators()) {
            out.generators.push_back(domain_.portrait_of(p));
            leaf_gens.push_back(domain_.leaf_restriction(p, v));
        }
        std::size_t deg = leaf_gens.empty() ? 1 : leaf_gens[0].degree();
        out.action = PermGroup(deg, leaf_gens);
        return out;
    }

    std::size_t orbit_size(std::size_t start) const {
        std::vector<char> seen(domain_.size(), 0);
        std::vector<std::size_t> queue{start};
        seen[start] = 1;
        std::size_t n = 0;
        while (!queue.empty()) {
            std::size_t x = queue.back();
            queue.pop_back();
            ++n;
            for (const Perm& g : vertex_gens_) {
                std::size_t y = g[static_cast<point_t>(x)];
                if (!seen[y]) {
                    seen[y] = 1;
                    queue.push_back(y);
                }
            }
        }
        return n;
    }

    TreeGroup group_;
    VertexDomain domain_;
    std::vector<Perm> vertex_gens_;
};

} // namespace treedim
