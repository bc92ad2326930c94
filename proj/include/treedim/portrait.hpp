#pragma once

// Finite-depth portraits of tree automorphisms: one permutation label per
// internal vertex. The action is a right action, applied left-to-right:
// act(compose(g,h), v) == act(h, act(g, v)). On words this reads
// (vw)^g = v^g w^{g|_v}, so the digit at position k is mapped by the label
// at the ORIGINAL length-k prefix, and sections compose by the cocycle
// (g h)|_v = g|_v h|_{v^g}.
//
// A portrait's shape is kept trimmed to its depth; structure below the
// labelled levels is not observable and not stored.

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/perm.hpp"
#include "treedim/tree.hpp"

namespace treedim {

class Portrait {
public:
    Portrait(const TreeShape& shape, std::size_t depth, std::vector<std::vector<Perm>> labels)
        : shape_(shape.truncated(std::min(depth, shape.depth()))), labels_(std::move(labels)) {
        require(depth <= shape.depth(), "Portrait: depth exceeds shape");
        require(labels_.size() == depth, "Portrait: one label level per depth level");
        for (std::size_t k = 0; k < depth; ++k) {
            require(labels_[k].size() == shape_.level_count(k), "Portrait: missing labels");
            for (const Perm& p : labels_[k])
                require(p.degree() == static_cast<std::size_t>(shape_.arity(k)),
                        "Portrait: label degree mismatch");
        }
        rebuild_images();
    }

    static Portrait identity(const TreeShape& shape, std::size_t depth) {
        require(depth <= shape.depth(), "Portrait: depth exceeds shape");
        std::vector<std::vector<Perm>> labels(depth);
        for (std::size_t k = 0; k < depth; ++k)
            labels[k].assign(shape.level_count(k), Perm::identity(shape.arity(k)));
        return Portrait(shape, depth, std::move(labels));
    }

    const TreeShape& shape() const { return shape_; }
    std::size_t depth() const { return labels_.size(); }

    const Perm& label(std::size_t level, std::size_t index) const {
        require(level < labels_.size() && index < labels_[level].size(),
                "Portrait: no such label");
        return labels_[level][index];
    }
    const Perm& label(const Word& v) const { return label(v.size(), shape_.level_index(v)); }

    bool is_identity() const {
        for (const auto& lv : labels_)
            for (const Perm& p : lv)
                if (!p.is_identity()) return false;
        return true;
    }

    // induced permutation of level-k vertex indices (level order)
    const std::vector<std::uint32_t>& level_image(std::size_t k) const {
        require(k < img_.size(), "Portrait: level out of range");
        return img_[k];
    }

    Word act(const Word& v) const {
        require(v.size() <= depth(), "Portrait: vertex deeper than portrait");
        Word out(v.size());
        std::size_t i = 0; // index of the original prefix at level k
        for (std::size_t k = 0; k < v.size(); ++k) {
            require(v[k] >= 0 && v[k] < shape_.arity(k), "Portrait: digit out of range");
            out[k] = labels_[k][i][static_cast<point_t>(v[k])];
            i = i * shape_.arity(k) + static_cast<std::size_t>(v[k]);
        }
        return out;
    }

    // this, then h
    Portrait then(const Portrait& h) const {
        require(shape_ == h.shape_ && depth() == h.depth(), "Portrait: shape/depth mismatch");
        std::vector<std::vector<Perm>> labels(depth());
        for (std::size_t k = 0; k < depth(); ++k) {
            labels[k].reserve(labels_[k].size());
            for (std::size_t i = 0; i < labels_[k].size(); ++i)
                labels[k].push_back(labels_[k][i].then(h.labels_[k][img_[k][i]]));
        }
        return Portrait(shape_, depth(), std::move(labels));
    }

    Portrait inverse() const {
        std::vector<std::vector<Perm>> labels(depth());
        for (std::size_t k = 0; k < depth(); ++k) {
            labels[k].assign(labels_[k].size(), Perm::identity(shape_.arity(k)));
            for (std::size_t i = 0; i < labels_[k].size(); ++i)
                labels[k][img_[k][i]] = labels_[k][i].inverse();
        }
        return Portrait(shape_, depth(), std::move(labels));
    }

    Portrait section(const Word& v) const {
        require(v.size() < depth(), "Portrait: vertex deeper than portrait");
        if (v.empty()) return *this;
        TreeShape sub = shape_.subtree(v.size());
        std::size_t d = depth() - v.size();
        std::vector<std::vector<Perm>> labels(d);
        std::size_t start = shape_.level_index(v);
        for (std::size_t t = 0; t < d; ++t) {
            std::size_t k = v.size() + t;
            std::size_t count = sub.level_count(t);
            labels[t].assign(labels_[k].begin() + start,
                             labels_[k].begin() + start + count);
            start *= shape_.arity(k);
        }
        return Portrait(sub, d, std::move(labels));
    }

    Portrait truncated(std::size_t d) const {
        require(d <= depth(), "Portrait: depth out of range");
        std::vector<std::vector<Perm>> labels(labels_.begin(), labels_.begin() + d);
        return Portrait(shape_, d, std::move(labels));
    }

    // psi_k: all level-k sections in level order plus the induced
    // permutation of the level-k vertices
    std::pair<std::vector<Portrait>, Perm> psi_decompose(std::size_t k) const {
        require(k <= depth(), "Portrait: level out of range");
        std::vector<Portrait> sections;
        sections.reserve(shape_.level_count(k));
        if (k == depth()) {
            Portrait leaf = identity(shape_.subtree(k), 0);
            sections.assign(shape_.level_count(k), leaf);
        } else {
            for (std::size_t i = 0; i < shape_.level_count(k); ++i)
                sections.push_back(section(shape_.word_at(k, i)));
        }
        return {std::move(sections), level_perm(k)};
    }

    static Portrait psi_reassemble(const TreeShape& shape, std::size_t k,
                                   const std::vector<Portrait>& sections, const Perm& top) {
        require(k <= shape.depth(), "Portrait: level out of range");
        require(sections.size() == shape.level_count(k), "Portrait: wrong section count");
        require(top.degree() == shape.level_count(k), "Portrait: top degree mismatch");
        std::size_t sub_depth = sections.empty() ? 0 : sections[0].depth();
        TreeShape sub = shape.subtree(k).truncated(sub_depth);
        for (const Portrait& s : sections)
            require(s.depth() == sub_depth && s.shape_ == sub, "Portrait: ragged sections");
        std::size_t d = k + sub_depth;

        // images of levels 0..k are forced by the top permutation
        std::vector<std::vector<std::uint32_t>> img(k + 1);
        img[k].resize(top.degree());
        for (std::size_t i = 0; i < top.degree(); ++i)
            img[k][i] = top[static_cast<point_t>(i)];
        for (std::size_t j = k; j-- > 0;) {
            std::size_t m = static_cast<std::size_t>(shape.arity(j));
            img[j].resize(shape.level_count(j));
            for (std::size_t i = 0; i < shape.level_count(j); ++i) {
                std::uint32_t parent = img[j + 1][i * m] / m;
                for (std::size_t c = 1; c < m; ++c)
                    require(img[j + 1][i * m + c] / m == parent,
                            "Portrait: top permutation does not preserve blocks");
                img[j][i] = parent;
            }
        }

        std::vector<std::vector<Perm>> labels(d);
        for (std::size_t j = 0; j < k; ++j) {
            std::size_t m = static_cast<std::size_t>(shape.arity(j));
            labels[j].reserve(shape.level_count(j));
            for (std::size_t i = 0; i < shape.level_count(j); ++i) {
                std::vector<point_t> one(m);
                for (std::size_t c = 0; c < m; ++c)
                    one[c] = static_cast<point_t>(img[j + 1][i * m + c] % m);
                labels[j].push_back(Perm(one)); // validates bijectivity
            }
        }
        for (std::size_t t = 0; t < sub_depth; ++t) {
            labels[k + t].reserve(shape.truncated(d).level_count(k + t));
            for (std::size_t i = 0; i < sections.size(); ++i)
                for (const Perm& p : sections[i].labels_[t])
                    labels[k + t].push_back(p);
        }
        return Portrait(shape.truncated(d), d, std::move(labels));
    }

    // permutation of level-k vertex indices
    Perm level_perm(std::size_t k) const {
        require(k < img_.size(), "Portrait: level out of range");
        require(img_[k].size() <= 65535, "Portrait: level too wide for a permutation");
        std::vector<point_t> v(img_[k].begin(), img_[k].end());
        return Perm(v);
    }

    Perm leaf_perm() const { return level_perm(depth()); }

    // Recover a portrait from a faithful leaf action. Fails unless the
    // permutation preserves the tree's block structure at every level.
    static Portrait from_leaf_perm(const TreeShape& shape, const Perm& leaves) {
        require(leaves.degree() == shape.leaf_count(), "Portrait: leaf degree mismatch");
        std::size_t d = shape.depth();
        std::vector<std::vector<std::uint32_t>> img(d + 1);
        img[d].resize(leaves.degree());
        for (std::size_t i = 0; i < leaves.degree(); ++i)
            img[d][i] = leaves[static_cast<point_t>(i)];
        for (std::size_t j = d; j-- > 0;) {
            std::size_t m = static_cast<std::size_t>(shape.arity(j));
            img[j].resize(shape.level_count(j));
            for (std::size_t i = 0; i < shape.level_count(j); ++i) {
                std::uint32_t parent = img[j + 1][i * m] / m;
                for (std::size_t c = 1; c < m; ++c)
                    require(img[j + 1][i * m + c] / m == parent,
                            "Portrait: permutation does not preserve blocks");
                img[j][i] = parent;
            }
        }
        std::vector<std::vector<Perm>> labels(d);
        for (std::size_t j = 0; j < d; ++j) {
            std::size_t m = static_cast<std::size_t>(shape.arity(j));
            labels[j].reserve(shape.level_count(j));
            for (std::size_t i = 0; i < shape.level_count(j); ++i) {
                std::vector<point_t> one(m);
                for (std::size_t c = 0; c < m; ++c)
                    one[c] = static_cast<point_t>(img[j + 1][i * m + c] % m);
                labels[j].push_back(Perm(one));
            }
        }
        return Portrait(shape, d, std::move(labels));
    }

    bool operator==(const Portrait& o) const {
        return shape_ == o.shape_ && labels_ == o.labels_;
    }
    bool operator!=(const Portrait& o) const { return !(*this == o); }

    std::string to_text() const {
        std::ostringstream os;
        os << "shape: " << shape_.to_string() << "\n";
        for (std::size_t k = 0; k < depth(); ++k)
            for (std::size_t i = 0; i < labels_[k].size(); ++i)
                os << TreeShape::word_string(shape_.word_at(k, i)) << " -> "
                   << labels_[k][i].to_string() << "\n";
        return os.str();
    }

    static Portrait parse_text(const std::string& text) {
        std::istringstream is(text);
        std::string line;
        require(static_cast<bool>(std::getline(is, line)), "Portrait: empty input");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        require(line.rfind("shape:", 0) == 0, "Portrait: missing shape header");
        TreeShape shape = TreeShape::parse(line.substr(6));
        std::vector<std::pair<Word, std::string>> entries;
        std::size_t max_level = 0;
        while (std::getline(is, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::size_t arrow = line.find(" -> ");
            require(arrow != std::string::npos, "Portrait: bad label line");
            Word w = TreeShape::parse_word(line.substr(0, arrow));
            entries.emplace_back(w, line.substr(arrow + 4));
            max_level = std::max(max_level, w.size() + 1);
        }
        std::size_t d = entries.empty() ? 0 : max_level;
        require(d <= shape.depth(), "Portrait: labels deeper than shape");
        std::vector<std::vector<Perm>> labels(d);
        std::vector<std::vector<bool>> seen(d);
        for (std::size_t k = 0; k < d; ++k) {
            labels[k].assign(shape.level_count(k), Perm::identity(shape.arity(k)));
            seen[k].assign(shape.level_count(k), false);
        }
        for (const auto& [w, perm_text] : entries) {
            std::size_t k = w.size();
            std::size_t i = shape.level_index(w);
            require(!seen[k][i], "Portrait: duplicate label");
            seen[k][i] = true;
            labels[k][i] = Perm::parse(perm_text, shape.arity(k));
        }
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t i = 0; i < seen[k].size(); ++i)
                require(seen[k][i], "Portrait: incomplete label set");
        return Portrait(shape.truncated(d), d, std::move(labels));
    }

private:
    TreeShape shape_;
    std::vector<std::vector<Perm>> labels_; // [level][level-order index]
    std::vector<std::vector<std::uint32_t>> img_;

    void rebuild_images() {
        img_.assign(depth() + 1, {});
        img_[0] = {0};
        for (std::size_t k = 0; k < depth(); ++k) {
            std::size_t m = static_cast<std::size_t>(shape_.arity(k));
            img_[k + 1].resize(shape_.level_count(k + 1));
            for (std::size_t i = 0; i < labels_[k].size(); ++i)
                for (std::size_t c = 0; c < m; ++c)
                    img_[k + 1][i * m + c] =
                        img_[k][i] * m + labels_[k][i][static_cast<point_t>(c)];
        }
    }
};

inline Portrait compose(const Portrait& g, const Portrait& h) { return g.then(h); }

} // namespace treedim
