#pragma once

// A group of tree automorphisms given by finitely many generator portraits,
// all sharing one bounded shape, plus the vertex domain that turns portraits
// into permutations of the non-root vertices.
//
// The engine numbers vertices in depth-first preorder (children in digit
// order, root excluded). Every subtree is then one contiguous interval, so
// stabilizer chains built on this domain keep their work local to subtrees.
// Level order (lexicographic within a level) is used by formats and by the
// psi calculus; the domain keeps translation tables between the two.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/perm.hpp"
#include "treedim/portrait.hpp"
#include "treedim/tree.hpp"

namespace treedim {

class TreeGroup {
public:
    TreeGroup(const TreeShape& shape, std::vector<Portrait> generators,
              std::vector<std::string> names = {})
        : shape_(shape), gens_(std::move(generators)), names_(std::move(names)) {
        for (const Portrait& g : gens_)
            require(g.shape() == shape_ && g.depth() == shape_.depth(),
                    "TreeGroup: generator shape/depth mismatch");
        if (names_.empty())
            for (std::size_t i = 0; i < gens_.size(); ++i)
                names_.push_back("g" + std::to_string(i));
        require(names_.size() == gens_.size(), "TreeGroup: one name per generator");
    }

    const TreeShape& shape() const { return shape_; }
    std::size_t depth() const { return shape_.depth(); }
    const std::vector<Portrait>& generators() const { return gens_; }
    const std::vector<std::string>& generator_names() const { return names_; }

    TreeGroup truncated(std::size_t d) const {
        require(d <= depth(), "TreeGroup: depth out of range");
        std::vector<Portrait> gens;
        gens.reserve(gens_.size());
        for (const Portrait& g : gens_) gens.push_back(g.truncated(d));
        return TreeGroup(shape_.truncated(d), std::move(gens), names_);
    }

private:
    TreeShape shape_;
    std::vector<Portrait> gens_;
    std::vector<std::string> names_;
};

class VertexDomain {
public:
    explicit VertexDomain(const TreeShape& shape) : shape_(shape) {
        std::size_t d = shape_.depth();
        require(d >= 1, "VertexDomain: depth must be positive");
        require(shape_.vertex_count() <= 65535, "VertexDomain: tree too large");
        sub_size_.assign(d + 1, 1);
        for (std::size_t k = d; k-- > 0;)
            sub_size_[k] = 1 + static_cast<std::size_t>(shape_.arity(k)) * sub_size_[k + 1];
        dfs_of_.assign(d + 1, {});
        for (std::size_t k = 0; k <= d; ++k) dfs_of_[k].resize(shape_.level_count(k));
        vertex_of_.resize(shape_.vertex_count());
        // iterative preorder: (level, lex index) pairs, children pushed in
        // reverse digit order so digit 0 comes out first
        std::vector<std::pair<std::uint32_t, std::uint32_t>> stack;
        for (std::size_t c = shape_.arity(0); c-- > 0;)
            stack.push_back({1, static_cast<std::uint32_t>(c)});
        std::uint32_t next = 0;
        while (!stack.empty()) {
            auto [k, i] = stack.back();
            stack.pop_back();
            dfs_of_[k][i] = next;
            vertex_of_[next] = {k, i};
            ++next;
            if (k < d)
                for (std::size_t c = shape_.arity(k); c-- > 0;)
                    stack.push_back({k + 1, static_cast<std::uint32_t>(
                                                i * shape_.arity(k) + c)});
        }
    }

    const TreeShape& shape() const { return shape_; }
    std::size_t size() const { return vertex_of_.size(); }

    std::size_t dfs_index(std::size_t level, std::size_t lex) const {
        require(level >= 1 && level < dfs_of_.size() && lex < dfs_of_[level].size(),
                "VertexDomain: bad vertex");
        return dfs_of_[level][lex];
    }
    std::size_t dfs_index(const Word& v) const {
        return dfs_index(v.size(), shape_.level_index(v));
    }
    std::pair<std::size_t, std::size_t> vertex_at(std::size_t dfs) const {
        require(dfs < vertex_of_.size(), "VertexDomain: bad index");
        return {vertex_of_[dfs].first, vertex_of_[dfs].second};
    }

    // DFS interval [lo, hi) of the subtree rooted at v, v itself included
    std::pair<std::size_t, std::size_t> subtree_interval(const Word& v) const {
        require(!v.empty() && v.size() <= shape_.depth(), "VertexDomain: bad vertex");
        std::size_t p = dfs_index(v);
        return {p, p + sub_size_[v.size()]};
    }

    // the automorphism as a permutation of the non-root vertices
    Perm render(const Portrait& g) const {
        require(g.shape() == shape_ && g.depth() == shape_.depth(),
                "VertexDomain: portrait shape mismatch");
        std::vector<point_t> img(size());
        for (std::size_t k = 1; k <= shape_.depth(); ++k) {
            const auto& lvl = g.level_image(k);
            for (std::size_t i = 0; i < lvl.size(); ++i)
                img[dfs_of_[k][i]] = static_cast<point_t>(dfs_of_[k][lvl[i]]);
        }
        return Perm(img);
    }

    // inverse of render; the leaf slice determines the portrait
    Portrait portrait_of(const Perm& p) const {
        require(p.degree() == size(), "VertexDomain: degree mismatch");
        std::size_t d = shape_.depth();
        std::vector<point_t> leaves(shape_.leaf_count());
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            std::size_t q = p[static_cast<point_t>(dfs_of_[d][i])];
            require(vertex_of_[q].first == d, "VertexDomain: level not preserved");
            leaves[i] = static_cast<point_t>(vertex_of_[q].second);
        }
        return Portrait::from_leaf_perm(shape_, Perm(leaves));
    }

    // restriction of a subtree-preserving vertex permutation to the leaves
    // under v, reindexed to the subtree's own leaf order
    Perm leaf_restriction(const Perm& p, const Word& v) const {
        std::size_t d = shape_.depth();
        require(v.size() < d, "VertexDomain: vertex too deep");
        std::size_t count = 1;
        for (std::size_t k = v.size(); k < d; ++k) count *= shape_.arity(k);
        std::size_t base = shape_.level_index(v) * count;
        std::vector<point_t> img(count);
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t q = p[static_cast<point_t>(dfs_of_[d][base + i])];
            require(vertex_of_[q].first == d && vertex_of_[q].second >= base &&
                        vertex_of_[q].second < base + count,
                    "VertexDomain: subtree not preserved");
            img[i] = static_cast<point_t>(vertex_of_[q].second - base);
        }
        return Perm(img);
    }

private:
    TreeShape shape_;
    std::vector<std::vector<std::uint32_t>> dfs_of_;            // [level][lex]
    std::vector<std::pair<std::uint32_t, std::uint32_t>> vertex_of_; // dfs -> (level, lex)
    std::vector<std::size_t> sub_size_; // subtree vertex count by level, self included
};

} // namespace treedim
