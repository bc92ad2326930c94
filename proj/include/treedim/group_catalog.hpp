#pragma once

// Self-similar generator definitions (finite-state wreath recursions) and a
// small catalog of built-in groups used throughout the tests and the CLI.
//
// Two definition styles cover the catalog:
//  - automaton states: each state carries a root permutation and one
//    state-or-identity reference per child; unfolding substitutes
//    recursively to a requested depth;
//  - spine families: one copy of each listed permutation labelled at the
//    all-zeros vertex of every level. These realize full iterated wreath
//    products, whose generating sets must grow with depth.

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/perm.hpp"
#include "treedim/portrait.hpp"
#include "treedim/tree.hpp"
#include "treedim/tree_group.hpp"

namespace treedim {

class AutomatonGroup {
public:
    struct State {
        std::string name;
        Perm root;
        std::vector<std::uint32_t> sections; // state ids; 0 is the identity
    };

    static AutomatonGroup self_similar(int arity, std::vector<State> states,
                                       std::vector<std::string> generators) {
        AutomatonGroup a(arity);
        a.states_.push_back({"e", Perm::identity(arity),
                             std::vector<std::uint32_t>(arity, 0)});
        for (State& s : states) {
            require(s.name != "e", "AutomatonGroup: state name e is reserved");
            require(s.root.degree() == static_cast<std::size_t>(arity),
                    "AutomatonGroup: root permutation degree mismatch");
            require(s.sections.size() == static_cast<std::size_t>(arity),
                    "AutomatonGroup: one section per child");
            for (std::uint32_t id : s.sections)
                require(id <= states.size(), "AutomatonGroup: unresolved section");
            for (const State& t : a.states_)
                require(t.name != s.name, "AutomatonGroup: duplicate state");
            a.states_.push_back(std::move(s));
        }
        for (const std::string& g : generators) {
            std::size_t id = a.state_id(g);
            require(id != 0 || g == "e", "AutomatonGroup: unresolved generator");
            a.gens_.push_back(id);
            a.gen_names_.push_back(g);
        }
        return a;
    }

    static AutomatonGroup spine_family(int arity, std::vector<Perm> labels,
                                       std::vector<std::string> label_names) {
        AutomatonGroup a(arity);
        require(labels.size() == label_names.size(),
                "AutomatonGroup: one name per label");
        for (const Perm& p : labels)
            require(p.degree() == static_cast<std::size_t>(arity),
                    "AutomatonGroup: label degree mismatch");
        a.spine_labels_ = std::move(labels);
        a.spine_names_ = std::move(label_names);
        return a;
    }

    int arity() const { return arity_; }
    bool is_spine_family() const { return !spine_labels_.empty(); }

    // declared states; the implicit identity is not counted
    std::size_t state_count() const { return states_.empty() ? 0 : states_.size() - 1; }

    // number of states with a nontrivial root permutation
    std::size_t active_state_count() const {
        std::size_t n = 0;
        for (const State& s : states_)
            if (!s.root.is_identity()) ++n;
        return n;
    }

    const std::vector<std::string>& generator_names() const { return gen_names_; }

    TreeGroup unfold(std::size_t depth) const {
        TreeShape shape(std::vector<int>(depth, arity_));
        std::vector<Portrait> gens;
        std::vector<std::string> names;
        if (is_spine_family()) {
            for (std::size_t k = 0; k < depth; ++k)
                for (std::size_t t = 0; t < spine_labels_.size(); ++t) {
                    std::vector<std::vector<Perm>> labels(depth);
                    for (std::size_t j = 0; j < depth; ++j)
                        labels[j].assign(shape.level_count(j), Perm::identity(arity_));
                    labels[k][0] = spine_labels_[t]; // the all-zeros vertex is lex-first
                    gens.push_back(Portrait(shape, depth, std::move(labels)));
                    names.push_back(spine_names_[t] + std::to_string(k));
                }
            return TreeGroup(shape, std::move(gens), std::move(names));
        }
        for (std::size_t gi = 0; gi < gens_.size(); ++gi) {
            gens.push_back(unfold_state(gens_[gi], shape, depth));
            names.push_back(gen_names_[gi]);
        }
        return TreeGroup(shape, std::move(gens), std::move(names));
    }

    Portrait unfold_state(std::size_t state, const TreeShape& shape,
                          std::size_t depth) const {
        require(state < states_.size(), "AutomatonGroup: no such state");
        std::vector<std::vector<Perm>> labels(depth);
        std::vector<std::uint32_t> ids{static_cast<std::uint32_t>(state)};
        for (std::size_t k = 0; k < depth; ++k) {
            labels[k].reserve(ids.size());
            std::vector<std::uint32_t> next(ids.size() * arity_);
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const State& s = states_[ids[i]];
                labels[k].push_back(s.root);
                for (int c = 0; c < arity_; ++c)
                    next[i * arity_ + c] = s.sections[c];
            }
            ids = std::move(next);
        }
        return Portrait(shape, depth, std::move(labels));
    }

    std::size_t state_id(const std::string& name) const {
        for (std::size_t i = 0; i < states_.size(); ++i)
            if (states_[i].name == name) return i;
        return 0;
    }

    // Ingestion format: `shape:` (one degree, or equal degrees), optional
    // `generators:` (default: every declared state), then per state a
    // `state:` line followed by `perm:` and `sections:`.
    static AutomatonGroup parse(const std::string& text) {
        std::istringstream is(text);
        std::string line;
        int arity = 0;
        std::vector<std::string> order, gen_names;
        bool have_gens = false;
        struct Raw { std::string perm, sections; };
        std::map<std::string, Raw> raw;
        std::string current;
        while (std::getline(is, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::size_t b = line.find_first_not_of(" \t");
            if (b == std::string::npos || line[b] == '#') continue;
            std::size_t colon = line.find(':', b);
            require(colon != std::string::npos, "AutomatonGroup: bad line");
            std::string key = line.substr(b, colon - b);
            std::string value = line.substr(colon + 1);
            std::size_t vb = value.find_first_not_of(" \t");
            value = vb == std::string::npos ? "" : value.substr(vb);
            if (key == "shape") {
                TreeShape s = TreeShape::parse(value);
                arity = s.arity(0);
                for (std::size_t k = 0; k < s.depth(); ++k)
                    require(s.arity(k) == arity,
                            "AutomatonGroup: self-similar shape must be constant");
            } else if (key == "generators") {
                have_gens = true;
                std::istringstream vs(value);
                for (std::string w; vs >> w;) gen_names.push_back(w);
            } else if (key == "state") {
                require(!value.empty(), "AutomatonGroup: unnamed state");
                require(!raw.count(value), "AutomatonGroup: duplicate state");
                raw[value] = {};
                order.push_back(value);
                current = value;
            } else if (key == "perm") {
                require(!current.empty(), "AutomatonGroup: perm outside a state");
                raw[current].perm = value;
            } else if (key == "sections") {
                require(!current.empty(), "AutomatonGroup: sections outside a state");
                raw[current].sections = value;
            } else {
                throw precondition_error("AutomatonGroup: unknown field " + key);
            }
        }
        require(arity >= 2, "AutomatonGroup: missing shape");
        require(!order.empty(), "AutomatonGroup: no states");
        std::map<std::string, std::uint32_t> id{{"e", 0}};
        for (std::size_t i = 0; i < order.size(); ++i) {
            require(order[i] != "e", "AutomatonGroup: state name e is reserved");
            id[order[i]] = static_cast<std::uint32_t>(i + 1);
        }
        std::vector<State> states;
        for (const std::string& name : order) {
            const Raw& r = raw[name];
            require(!r.perm.empty(), "AutomatonGroup: state lacks a perm");
            require(!r.sections.empty(), "AutomatonGroup: state lacks sections");
            State s;
            s.name = name;
            s.root = Perm::parse(r.perm, arity);
            std::istringstream vs(r.sections);
            for (std::string w; vs >> w;) {
                require(id.count(w), "AutomatonGroup: unresolved section " + w);
                s.sections.push_back(id[w]);
            }
            require(s.sections.size() == static_cast<std::size_t>(arity),
                    "AutomatonGroup: one section per child");
            states.push_back(std::move(s));
        }
        if (!have_gens) gen_names = order;
        for (const std::string& g : gen_names)
            require(id.count(g) && g != "e", "AutomatonGroup: unresolved generator " + g);
        return self_similar(arity, std::move(states), std::move(gen_names));
    }

private:
    explicit AutomatonGroup(int arity) : arity_(arity) {
        require(arity >= 2, "AutomatonGroup: arity below 2");
    }

    int arity_;
    std::vector<State> states_;            // [0] is the identity
    std::vector<std::size_t> gens_;        // generator state ids
    std::vector<std::string> gen_names_;
    std::vector<Perm> spine_labels_;
    std::vector<std::string> spine_names_;
};

inline Perm cycle_perm(int m) {
    std::vector<point_t> img(m);
    for (int i = 0; i < m; ++i) img[i] = static_cast<point_t>((i + 1) % m);
    return Perm(img);
}

inline Perm transposition_perm(int m) {
    std::vector<point_t> img(m);
    for (int i = 0; i < m; ++i) img[i] = static_cast<point_t>(i);
    img[0] = 1;
    img[1] = 0;
    return Perm(img);
}

// the full automorphism group of a bounded shape: cycle and transposition
// labels on the spine generate everything by level transitivity
inline TreeGroup full_tree_group(const TreeShape& shape) {
    std::vector<Portrait> gens;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < shape.depth(); ++k) {
        std::vector<Perm> labels{cycle_perm(shape.arity(k))};
        std::vector<std::string> tags{"c"};
        if (shape.arity(k) > 2) {
            labels.push_back(transposition_perm(shape.arity(k)));
            tags.push_back("t");
        }
        for (std::size_t t = 0; t < labels.size(); ++t) {
            std::vector<std::vector<Perm>> one(shape.depth());
            for (std::size_t j = 0; j < shape.depth(); ++j)
                one[j].assign(shape.level_count(j), Perm::identity(shape.arity(j)));
            one[k][0] = labels[t];
            gens.push_back(Portrait(shape, shape.depth(), std::move(one)));
            names.push_back(tags[t] + std::to_string(k));
        }
    }
    return TreeGroup(shape, std::move(gens), std::move(names));
}

namespace detail {

inline const char* grigorchuk_text() {
    return "shape: 2\n"
           "generators: a b c d\n"
           "state: a\nperm: 1 0\nsections: e e\n"
           "state: b\nperm: 0 1\nsections: a c\n"
           "state: c\nperm: 0 1\nsections: a d\n"
           "state: d\nperm: 0 1\nsections: e b\n";
}

inline const char* gupta_sidki_text() {
    return "shape: 3\n"
           "generators: a t\n"
           "state: a\nperm: 1 2 0\nsections: e e e\n"
           "state: a2\nperm: 2 0 1\nsections: e e e\n"
           "state: t\nperm: 0 1 2\nsections: a a2 t\n";
}

// tower of diagonal digit flips u_{k+1} = (u_k, u_k); elementary abelian,
// level-transitive as deep as the tower reaches
inline AutomatonGroup abelian_diagonal(std::size_t tower) {
    std::vector<AutomatonGroup::State> states;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < tower; ++k) {
        AutomatonGroup::State s;
        s.name = "u" + std::to_string(k);
        s.root = k == 0 ? transposition_perm(2) : Perm::identity(2);
        std::uint32_t prev = static_cast<std::uint32_t>(k); // state ids are 1-based
        s.sections = {k == 0 ? 0 : prev, k == 0 ? 0 : prev};
        states.push_back(std::move(s));
        names.push_back("u" + std::to_string(k));
    }
    return AutomatonGroup::self_similar(2, std::move(states), std::move(names));
}

} // namespace detail

inline AutomatonGroup catalog(const std::string& name) {
    if (name == "full")
        return AutomatonGroup::spine_family(2, {transposition_perm(2)}, {"t"});
    if (name.rfind("sylow_", 0) == 0) {
        const std::string digits = name.substr(6);
        int p = 0;
        for (char c : digits) {
            require(c >= '0' && c <= '9', "catalog: unknown name " + name);
            p = p * 10 + (c - '0');
        }
        require(p == 2 || p == 3 || p == 5 || p == 7,
                "catalog: sylow_p needs a single-digit prime");
        return AutomatonGroup::spine_family(p, {cycle_perm(p)}, {"s"});
    }
    if (name == "odometer")
        return AutomatonGroup::parse("shape: 2\nstate: a\nperm: 1 0\nsections: e a\n");
    if (name == "grigorchuk") return AutomatonGroup::parse(detail::grigorchuk_text());
    if (name == "gupta_sidki_3") return AutomatonGroup::parse(detail::gupta_sidki_text());
    if (name == "abelian_diagonal") return detail::abelian_diagonal(12);
    throw precondition_error("catalog: unknown name " + name);
}

inline const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names{
        "full", "sylow_2", "sylow_3", "odometer",
        "grigorchuk", "gupta_sidki_3", "abelian_diagonal"};
    return names;
}

} // namespace treedim
