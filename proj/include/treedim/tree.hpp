#pragma once

// Spherically homogeneous rooted trees of bounded depth. A shape lists the
// branching degree per level; vertices are digit words. Two vertex
// numberings are used throughout:
//   - level order: within one level, words sorted lexicographically
//     (serialization formats and the psi coordinates use this), and
//   - preorder over all non-root vertices (group engines use this, since
//     every subtree is then one contiguous interval).

#include <cstdint>
#include <string>
#include <vector>

#include "treedim/errors.hpp"

namespace treedim {

using Word = std::vector<int>; // digit word, root = empty

class TreeShape {
public:
    explicit TreeShape(std::vector<int> degrees) : degrees_(std::move(degrees)) {
        for (int m : degrees_) require(m >= 2, "TreeShape: branching degree below 2");
        level_sizes_.assign(depth() + 1, 1);
        for (std::size_t k = 0; k < degrees_.size(); ++k) {
            level_sizes_[k + 1] = level_sizes_[k] * degrees_[k];
            require(level_sizes_[k + 1] <= (1u << 20), "TreeShape: level size over budget");
        }
    }

    std::size_t depth() const { return degrees_.size(); }
    int arity(std::size_t level) const {
        require(level < degrees_.size(), "TreeShape: level out of range");
        return degrees_[level];
    }
    const std::vector<int>& degrees() const { return degrees_; }

    // N_k, number of level-k vertices
    std::size_t level_count(std::size_t k) const {
        require(k < level_sizes_.size(), "TreeShape: level out of range");
        return level_sizes_[k];
    }
    std::size_t leaf_count() const { return level_sizes_[depth()]; }

    // vertices of levels 1..depth (preorder domain size)
    std::size_t vertex_count() const {
        std::size_t n = 0;
        for (std::size_t k = 1; k <= depth(); ++k) n += level_sizes_[k];
        return n;
    }

    // shape of the subtree below a level-k vertex
    TreeShape subtree(std::size_t k) const {
        require(k <= depth(), "TreeShape: level out of range");
        return TreeShape(std::vector<int>(degrees_.begin() + k, degrees_.end()));
    }

    // shape truncated to the first d levels
    TreeShape truncated(std::size_t d) const {
        require(d <= depth(), "TreeShape: depth out of range");
        return TreeShape(std::vector<int>(degrees_.begin(), degrees_.begin() + d));
    }

    bool operator==(const TreeShape& o) const { return degrees_ == o.degrees_; }
    bool operator!=(const TreeShape& o) const { return !(*this == o); }

    // level order: digit word <-> index within its level
    std::size_t level_index(const Word& w) const {
        require(w.size() <= depth(), "TreeShape: word too deep");
        std::size_t idx = 0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            require(w[k] >= 0 && w[k] < degrees_[k], "TreeShape: digit out of range");
            idx = idx * degrees_[k] + static_cast<std::size_t>(w[k]);
        }
        return idx;
    }

    Word word_at(std::size_t level, std::size_t index) const {
        require(level <= depth() && index < level_count(level), "TreeShape: bad vertex");
        Word w(level);
        for (std::size_t k = level; k-- > 0;) {
            w[k] = static_cast<int>(index % degrees_[k]);
            index /= degrees_[k];
        }
        return w;
    }

    static std::string word_string(const Word& w) {
        if (w.empty()) return "ε"; // epsilon, the root
        std::string s;
        for (int d : w) {
            require(d >= 0 && d <= 9, "TreeShape: serialized digits limited to 0..9");
            s += static_cast<char>('0' + d);
        }
        return s;
    }

    static Word parse_word(const std::string& s) {
        if (s == "ε" || s == "e") return {};
        Word w;
        for (char c : s) {
            require(c >= '0' && c <= '9', "TreeShape: bad vertex word");
            w.push_back(c - '0');
        }
        return w;
    }

    std::string to_string() const {
        std::string s;
        for (std::size_t k = 0; k < degrees_.size(); ++k) {
            if (k) s += ',';
            s += std::to_string(degrees_[k]);
        }
        return s;
    }

    static TreeShape parse(const std::string& text) {
        std::vector<int> degrees;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t next = text.find(',', pos);
            if (next == std::string::npos) next = text.size();
            std::string tok = text.substr(pos, next - pos);
            while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.erase(0, 1);
            while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\r')) tok.pop_back();
            require(!tok.empty(), "TreeShape: empty degree token");
            for (char c : tok) require(c >= '0' && c <= '9', "TreeShape: bad degree");
            degrees.push_back(std::stoi(tok));
            pos = next + 1;
        }
        require(!degrees.empty(), "TreeShape: empty shape");
        return TreeShape(degrees);
    }

private:
    std::vector<int> degrees_;
    std::vector<std::size_t> level_sizes_; // N_0..N_depth
};

} // namespace treedim
