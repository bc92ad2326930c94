#pragma once

// Finite permutation groups with a deterministic stabilizer chain.
//
// The chain is built by an incremental Schreier-Sims procedure. Base points
// are chosen in a fixed order (an optional prefix, then natural point
// order), generators are processed in input order, and every derived
// quantity (strong generators, transversals, element enumerations) is a
// pure function of the input sequence, so repeated runs produce identical
// structures.
//
// Exhaustive element enumeration is an oracle facility and is refused
// above a hard budget.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/factored.hpp"
#include "treedim/perm.hpp"

namespace treedim {

inline constexpr std::size_t kEnumerationBudget = 1000000;

class PermGroup {
public:
    explicit PermGroup(std::size_t degree = 1) : degree_(degree) {
        require(degree >= 1 && degree <= 65535, "PermGroup: bad degree");
        base_level_.assign(degree_, kNoBase);
    }

    PermGroup(std::size_t degree, const std::vector<Perm>& generators,
              std::vector<point_t> base_prefix = {})
        : degree_(degree), base_prefix_(std::move(base_prefix)) {
        require(degree >= 1 && degree <= 65535, "PermGroup: bad degree");
        base_level_.assign(degree_, kNoBase);
        for (point_t p : base_prefix_) require(p < degree_, "PermGroup: prefix point out of range");
        for (const Perm& g : generators) {
            require(g.degree() == degree_, "PermGroup: generator degree mismatch");
            input_gens_.push_back(g);
            insert(g);
        }
    }

    std::size_t degree() const { return degree_; }
    const std::vector<Perm>& input_generators() const { return input_gens_; }
    const std::vector<Perm>& strong_generators() const { return pool_; }

    FactoredInt order() const {
        FactoredInt n;
        for (const Level& lv : levels_) n *= FactoredInt::from_int(lv.orbit.size());
        return n;
    }

    bool trivial() const { return levels_.empty(); }

    bool contains(const Perm& p) const {
        require(p.degree() == degree_, "PermGroup: degree mismatch");
        Perm residue;
        return sift(p, 0, residue) == kSiftMember;
    }

    // Orbit of a point under the whole group, in discovery order.
    std::vector<point_t> orbit(point_t p) const {
        std::vector<point_t> out{p};
        std::vector<bool> seen(degree_, false);
        seen[p] = true;
        for (std::size_t i = 0; i < out.size(); ++i)
            for (const Perm& g : pool_) {
                point_t q = g[out[i]];
                if (!seen[q]) {
                    seen[q] = true;
                    out.push_back(q);
                }
            }
        return out;
    }

    bool is_transitive_on_moved_points() const {
        if (levels_.empty()) return false;
        std::size_t moved = 0;
        for (point_t p = 0; p < degree_; ++p)
            if (moves_point(p)) ++moved;
        return orbit(first_moved_point()).size() == moved;
    }

    bool moves_point(point_t p) const {
        for (const Perm& g : pool_)
            if (g[p] != p) return true;
        return false;
    }

    point_t first_moved_point() const {
        for (point_t p = 0; p < degree_; ++p)
            if (moves_point(p)) return p;
        throw precondition_error("PermGroup: trivial group has no moved point");
    }

    // Chain access -----------------------------------------------------

    std::size_t chain_length() const { return levels_.size(); }
    point_t chain_base(std::size_t i) const { return levels_[i].base; }

    const std::vector<point_t>& chain_orbit(std::size_t i) const { return levels_[i].orbit; }

    // Transversal element u with chain_base(level)^u == beta.
    Perm coset_rep(std::size_t level, point_t beta) const {
        const Level& lv = levels_[level];
        std::int32_t pos = lv.lookup(beta);
        require(pos >= 0, "PermGroup: point not in orbit");
        return rep_for_pos(lv, static_cast<std::size_t>(pos));
    }

    // Strong generators fixing every listed point. When the group was
    // built with these points as base prefix, they generate the pointwise
    // stabilizer.
    std::vector<Perm> generators_fixing(const std::vector<point_t>& pts) const {
        std::vector<Perm> out;
        for (const Perm& g : pool_) {
            bool ok = true;
            for (point_t p : pts)
                if (g[p] != p) { ok = false; break; }
            if (ok) out.push_back(g);
        }
        return out;
    }

    // Pointwise stabilizer of a point set, as its own group.
    PermGroup pointwise_stabilizer(const std::vector<point_t>& pts) const {
        PermGroup rebuilt(degree_, pool_, pts);
        return PermGroup(degree_, rebuilt.generators_fixing(pts));
    }

    // Normal closure of the given elements inside this group.
    PermGroup normal_closure(const std::vector<Perm>& seeds) const {
        for (const Perm& s : seeds)
            require(contains(s), "normal_closure: element outside the group");
        PermGroup k(degree_);
        std::deque<Perm> work(seeds.begin(), seeds.end());
        while (!work.empty()) {
            Perm x = std::move(work.front());
            work.pop_front();
            if (k.insert(x)) {
                k.input_gens_.push_back(x);
                for (const Perm& g : input_gens_) work.push_back(x.conjugated_by(g));
            }
        }
        return k;
    }

    // Largest subgroup of h normal in *this; h must be enumerable.
    PermGroup normal_core_of(const PermGroup& h, std::size_t budget = kEnumerationBudget) const {
        for (const Perm& g : h.input_generators())
            require(contains(g), "normal_core: not a subgroup");
        std::vector<Perm> elems = h.elements(budget);
        std::sort(elems.begin(), elems.end());
        for (;;) {
            std::unordered_set<Perm, PermHash> in(elems.begin(), elems.end());
            std::vector<Perm> kept;
            for (const Perm& x : elems) {
                bool ok = true;
                for (const Perm& g : input_gens_)
                    if (!in.count(x.conjugated_by(g))) { ok = false; break; }
                if (ok) kept.push_back(x);
            }
            if (kept.size() == elems.size()) break;
            elems = std::move(kept);
        }
        std::vector<Perm> gens;
        for (const Perm& x : elems)
            if (!x.is_identity()) gens.push_back(x);
        return PermGroup(degree_, gens);
    }

    // Center. Uses the semiregular-centralizer construction when the group
    // is transitive on its moved points, exhaustive enumeration otherwise.
    PermGroup center(std::size_t budget = kEnumerationBudget) const {
        if (levels_.empty()) return PermGroup(degree_);
        if (is_transitive_on_moved_points()) return center_transitive();
        std::vector<Perm> elems = elements(budget);
        std::vector<Perm> gens;
        for (const Perm& x : elems) {
            if (x.is_identity()) continue;
            bool central = true;
            for (const Perm& g : input_gens_)
                if (!x.commutes_with(g)) { central = false; break; }
            if (central) gens.push_back(x);
        }
        return PermGroup(degree_, gens);
    }

    // Lexicographically least nontrivial strong generator. Deterministic
    // given the input generator sequence.
    Perm least_strong_generator() const {
        require(!pool_.empty(), "PermGroup: trivial group");
        return *std::min_element(pool_.begin(), pool_.end());
    }

    // All elements, in deterministic chain-product order (identity first).
    std::vector<Perm> elements(std::size_t budget = kEnumerationBudget) const {
        FactoredInt n = order();
        if (n.value() > static_cast<BigInt>(budget))
            throw budget_error("PermGroup: element enumeration over budget (order " +
                               n.to_string() + ")");
        std::vector<Perm> elems{Perm::identity(degree_)};
        for (std::size_t lv = levels_.size(); lv-- > 0;) {
            const Level& level = levels_[lv];
            std::vector<Perm> next;
            next.reserve(elems.size() * level.orbit.size());
            for (std::size_t pos = 0; pos < level.orbit.size(); ++pos) {
                Perm u = rep_for_pos(level, pos);
                for (const Perm& h : elems) next.push_back(h.then(u));
            }
            elems = std::move(next);
        }
        return elems;
    }

private:
    struct Level {
        point_t base = 0;
        std::vector<point_t> orbit;       // orbit[0] == base, discovery order
        std::vector<std::int32_t> parent; // orbit index, -1 at root
        std::vector<std::int32_t> via;    // pool index of tree edge label
        std::vector<std::uint32_t> processed; // per orbit position: pool watermark
        // hull of orbit points and tree-edge generator windows; transversal
        // elements act inside it
        std::size_t hull_lo = 0, hull_hi = 0;
        // point -> orbit position lookup; representation depends on size
        std::vector<std::int32_t> dense;
        std::unordered_map<point_t, std::int32_t> sparse;

        std::int32_t lookup(point_t p) const {
            if (!dense.empty()) return dense[p];
            auto it = sparse.find(p);
            return it == sparse.end() ? -1 : it->second;
        }

        void index(point_t p, std::int32_t pos, std::size_t degree) {
            if (dense.empty() && orbit.size() > 1024) {
                dense.assign(degree, -1);
                for (std::size_t i = 0; i < orbit.size(); ++i)
                    dense[orbit[i]] = static_cast<std::int32_t>(i);
                sparse.clear();
            }
            if (!dense.empty())
                dense[p] = pos;
            else
                sparse.emplace(p, pos);
        }

        void add_point(point_t p, std::int32_t par, std::int32_t label, std::size_t degree) {
            orbit.push_back(p);
            parent.push_back(par);
            via.push_back(label);
            processed.push_back(0);
            index(p, static_cast<std::int32_t>(orbit.size() - 1), degree);
        }
    };

    static constexpr std::size_t kSiftMember = static_cast<std::size_t>(-1);
    static constexpr std::size_t kNoLevel = static_cast<std::size_t>(-2);
    static constexpr std::uint32_t kNoBase = 0xFFFFFFFFu;

    std::size_t degree_;
    std::vector<point_t> base_prefix_;
    std::vector<Perm> input_gens_;
    std::vector<Perm> pool_;      // strong generators
    std::vector<Perm> pool_inv_;
    std::vector<std::uint32_t> pool_level_; // deepest level where the gen lives
    std::vector<Level> levels_;
    std::vector<std::uint32_t> base_level_; // point -> chain level based there
    std::vector<char> dirty_;      // per level: needs a processing sweep
    std::int64_t dirty_hint_ = -1; // upper bound on the deepest dirty level

    Perm rep_for_pos(const Level& lv, std::size_t pos) const {
        std::vector<std::int32_t> edges;
        for (std::int32_t i = static_cast<std::int32_t>(pos); lv.parent[i] >= 0; i = lv.parent[i])
            edges.push_back(lv.via[i]);
        Perm u = Perm::identity(degree_);
        for (std::size_t i = edges.size(); i-- > 0;) u.then_inplace(pool_[edges[i]]);
        return u;
    }

    // Strip h through levels [from, end). Returns kSiftMember when the
    // residue is the identity, else the level index where stripping stopped
    // (levels_.size() when h fixes every base). The residue is left in
    // `residue`. Levels whose base the residue does not move are skipped
    // wholesale by scanning the residue window against base_level_.
    std::size_t sift(const Perm& h, std::size_t from, Perm& residue) const {
        residue = h;
        for (;;) {
            if (residue.is_identity()) return kSiftMember;
            std::size_t next = kNoLevel;
            for (std::size_t p = residue.window_lo(); p < residue.window_hi(); ++p) {
                point_t q = static_cast<point_t>(p);
                if (residue[q] == q) continue;
                std::uint32_t bl = base_level_[p];
                if (bl != kNoBase && bl >= from && bl < next) next = bl;
            }
            if (next == kNoLevel) return levels_.size();
            const Level& level = levels_[next];
            point_t beta = residue[level.base];
            std::int32_t pos = level.lookup(beta);
            if (pos < 0) return next;
            // multiply by u_beta^{-1}: walk beta up to the root
            for (std::int32_t i = pos; level.parent[i] >= 0; i = level.parent[i])
                residue.then_inplace(pool_inv_[level.via[i]]);
            from = next + 1;
        }
    }

    // Center of a group transitive on its moved points. A central element
    // is determined by the image of one moved point alpha; candidate
    // images are the points fixed by the known stabilizer generators of
    // alpha, and each candidate is propagated along the orbit and then
    // verified, so overcounting candidates is harmless.
    PermGroup center_transitive() const {
        point_t alpha = first_moved_point();
        std::vector<Perm> stab_gens = generators_fixing({alpha});
        std::vector<point_t> orb = orbit(alpha);
        std::vector<Perm> zgens;
        for (point_t beta : orb) {
            bool fixed = true;
            for (const Perm& s : stab_gens)
                if (s[beta] != beta) { fixed = false; break; }
            if (!fixed) continue;
            // propagate c[alpha] = beta along the orbit: c[x^g] = c[x]^g
            std::vector<std::int32_t> img(degree_, -1);
            img[alpha] = beta;
            std::vector<point_t> queue{alpha};
            for (std::size_t i = 0; i < queue.size(); ++i)
                for (const Perm& g : pool_) {
                    point_t y = g[queue[i]];
                    if (img[y] < 0) {
                        img[y] = g[static_cast<point_t>(img[queue[i]])];
                        queue.push_back(y);
                    }
                }
            std::vector<point_t> full(degree_);
            std::vector<bool> hit(degree_, false);
            bool valid = true;
            for (point_t p = 0; p < degree_ && valid; ++p) {
                point_t q = img[p] < 0 ? p : static_cast<point_t>(img[p]);
                full[p] = q;
                if (hit[q]) valid = false;
                hit[q] = true;
            }
            if (!valid) continue;
            Perm c(full);
            if (c.is_identity()) continue;
            bool central = true;
            for (const Perm& g : pool_)
                if (!c.commutes_with(g)) { central = false; break; }
            if (central && contains(c)) zgens.push_back(c);
        }
        return PermGroup(degree_, zgens);
    }

    point_t pick_base(const Perm& g) const {
        for (point_t p : base_prefix_)
            if (g[p] != p) return p;
        for (point_t p = 0; p < degree_; ++p)
            if (g[p] != p) return p;
        throw precondition_error("PermGroup: identity has no base point");
    }

    // Returns true when the group grew.
    bool insert(const Perm& g) {
        if (g.is_identity()) return false;
        Perm residue;
        std::size_t lv = sift(g, 0, residue);
        if (lv == kSiftMember) return false;
        place(residue, lv);
        process();
        return true;
    }

    void place(const Perm& g, std::size_t lv) {
        if (lv == levels_.size()) {
            Level level;
            level.base = pick_base(g);
            level.add_point(level.base, -1, -1, degree_);
            level.hull_lo = level.base;
            level.hull_hi = level.base + 1;
            base_level_[level.base] = static_cast<std::uint32_t>(levels_.size());
            levels_.push_back(std::move(level));
            dirty_.push_back(0);
        }
        pool_.push_back(g);
        pool_inv_.push_back(g.inverse());
        pool_level_.push_back(static_cast<std::uint32_t>(lv));
        for (std::size_t j = 0; j <= lv; ++j) dirty_[j] = 1;
        dirty_hint_ = std::max(dirty_hint_, static_cast<std::int64_t>(lv));
    }

    void process() {
        while (dirty_hint_ >= 0) {
            std::size_t lv = static_cast<std::size_t>(dirty_hint_);
            if (dirty_[lv]) {
                dirty_[lv] = 0;
                sweep(lv); // may raise dirty_hint_ again
            } else {
                --dirty_hint_;
            }
        }
    }

    // Process pending (orbit point, generator) pairs at one level. Aborts
    // early when a placement dirties a deeper level, so deeper levels are
    // always settled first.
    void sweep(std::size_t lv) {
        Level& level = levels_[lv];
        for (std::size_t i = 0; i < level.orbit.size(); ++i) {
            if (level.processed[i] == pool_.size()) continue;
            std::optional<Perm> rep_i;
            for (std::uint32_t id = level.processed[i]; id < pool_.size(); ++id) {
                level.processed[i] = id + 1;
                if (pool_level_[id] < lv) continue;
                const Perm& gen = pool_[id];
                // A generator acting entirely outside the hull fixes the
                // orbit and commutes with the transversal, so its Schreier
                // generators collapse to the generator itself, a known
                // member of the deeper group.
                if (gen.window_hi() <= level.hull_lo || gen.window_lo() >= level.hull_hi)
                    continue;
                point_t from = level.orbit[i];
                point_t to = gen[from];
                std::int32_t pos = level.lookup(to);
                if (pos < 0) {
                    level.hull_lo = std::min({level.hull_lo, gen.window_lo(),
                                              static_cast<std::size_t>(to)});
                    level.hull_hi = std::max({level.hull_hi, gen.window_hi(),
                                              static_cast<std::size_t>(to) + 1});
                    level.add_point(to, static_cast<std::int32_t>(i),
                                    static_cast<std::int32_t>(id), degree_);
                    continue;
                }
                if (level.parent[pos] == static_cast<std::int32_t>(i) &&
                    level.via[pos] == static_cast<std::int32_t>(id))
                    continue; // tree edge
                if (!rep_i) rep_i = rep_for_pos(level, i);
                Perm sgen = rep_i->then(pool_[id]);
                for (std::int32_t j = pos; level.parent[j] >= 0; j = level.parent[j])
                    sgen.then_inplace(pool_inv_[level.via[j]]);
                if (sgen.is_identity()) continue;
                Perm residue;
                std::size_t where = sift(sgen, lv + 1, residue);
                if (where == kSiftMember) continue;
                // place flags this level dirty again; deeper levels settle first
                place(residue, where);
                return;
            }
        }
    }
};

} // namespace treedim
