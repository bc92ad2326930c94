// Logarithmic-index bookkeeping for groups acting on bounded rooted trees.
//
// Everything here is a statement about finite truncations. The per-level
// ratio r_n = log|G_n| / log|W_n| (W_n the full automorphism group of the
// truncated tree) is reported exactly: both orders are kept in factored
// form, the quotient of logs collapses to a rational whenever the two
// integers are commensurable, and falls back to 128-bit reals otherwise.
// No asymptotic quantity is ever estimated; windows over trailing levels
// are labelled as descriptive statistics.
#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/factored.hpp"
#include "treedim/group_engine.hpp"
#include "treedim/tree.hpp"
#include "treedim/tree_group.hpp"

namespace treedim {

// Order of the full automorphism group of the depth-n truncation,
// prod_{k<n} (m_k!)^{N_k}. Its log is the denominator of every ratio.
inline FactoredInt ambient_order(const TreeShape& shape, std::size_t n) {
    require(n <= shape.depth(), "ambient_order: level beyond shape depth");
    FactoredInt f;
    for (std::size_t k = 0; k < n; ++k)
        f *= FactoredInt::factorial(shape.arity(k)).pow(
            static_cast<std::int64_t>(shape.level_count(k)));
    return f;
}

struct LevelRecord {
    std::size_t n = 0;
    FactoredInt log_num; // |G : St_G(n)|, log taken symbolically
    FactoredInt log_den; // |W : St_W(n)|
    LogRatio ratio;
};

struct WindowStats {
    std::size_t levels = 0; // trailing window length
    LogRatio min, max, last;
};

struct DimensionProfile {
    std::string group_id;
    TreeShape shape{std::vector<int>{}};
    std::vector<LevelRecord> records;
    WindowStats window;

    // Table with fixed header, then a blank line and a key: value summary.
    std::string to_csv() const {
        std::ostringstream os;
        os << "n,log_num,log_den,ratio\n";
        for (const LevelRecord& r : records)
            os << r.n << ',' << r.log_num.to_string() << ',' << r.log_den.to_string()
               << ',' << r.ratio.to_string() << '\n';
        os << '\n';
        os << "group: " << group_id << '\n';
        os << "shape: " << shape.to_string() << '\n';
        os << "levels: " << records.size() << '\n';
        os << "window_levels: " << window.levels << '\n';
        os << "window_min: " << window.min.to_string() << '\n';
        os << "window_max: " << window.max.to_string() << '\n';
        os << "window_last: " << window.last.to_string() << '\n';
        return os.str();
    }
};

inline DimensionProfile dimension_profile(const TreeGroup& g, std::size_t n_max,
                                          std::string group_id = "group") {
    require(n_max >= 1 && n_max <= g.depth(),
            "dimension_profile: level range must be 1..depth");
    TreeGroupEngine eng(g.truncated(n_max));
    DimensionProfile prof;
    prof.group_id = std::move(group_id);
    prof.shape = g.shape().truncated(n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
        LevelRecord r;
        r.n = n;
        r.log_num = eng.level_image_order(n);
        r.log_den = ambient_order(prof.shape, n);
        r.ratio = LogRatio::of(r.log_num, r.log_den);
        prof.records.push_back(std::move(r));
    }
    prof.window.levels = (n_max + 2) / 3;
    std::size_t first = prof.records.size() - prof.window.levels;
    prof.window.min = prof.window.max = prof.window.last = prof.records[first].ratio;
    for (std::size_t i = first; i < prof.records.size(); ++i) {
        const LogRatio& x = prof.records[i].ratio;
        if (x < prof.window.min) prof.window.min = x;
        if (prof.window.max < x) prof.window.max = x;
        prof.window.last = x;
    }
    return prof;
}

// log|St(k) : St(k+n)| <= sum over level-k vertices of log|G_v : St_{G_v}(n)|,
// compared as exact integers (left and right are logs of these).
struct InequalityCheck {
    std::size_t k = 0, n = 0;
    FactoredInt left, right;
    bool holds = false;
    bool transitive_level = false; // one projection stood in for the whole level
};

inline InequalityCheck check_level_index_inequality(const TreeGroup& g, std::size_t k,
                                                    std::size_t n) {
    require(n >= 1, "check_level_index_inequality: n must be positive");
    require(k + n <= g.depth(), "check_level_index_inequality: k+n beyond depth");
    TreeGroupEngine eng(g.truncated(k + n));
    InequalityCheck c;
    c.k = k;
    c.n = n;
    c.left = eng.level_image_order(k + n) / eng.level_image_order(k);
    if (k == 0) {
        c.right = eng.level_image_order(n);
        c.transitive_level = true;
    } else if (eng.is_level_transitive(k)) {
        // all level-k projections are conjugate, so one order suffices
        Word v(k, 0);
        TreeGroupEngine proj(eng.projection(v));
        c.right = proj.level_image_order(n).pow(
            static_cast<std::int64_t>(g.shape().level_count(k)));
        c.transitive_level = true;
    } else {
        for (std::size_t i = 0; i < g.shape().level_count(k); ++i) {
            TreeGroupEngine proj(eng.projection(g.shape().word_at(k, i)));
            c.right *= proj.level_image_order(n);
        }
    }
    c.holds = c.left.value() <= c.right.value();
    return c;
}

// When the level-1 rigid stabilizers of G_v vanish in the truncation,
// dropping the last coordinate of the section map is injective on St(1),
// so the first m-1 child projections bound the stabilizer's index.
struct ProjectionBound {
    Word vertex;
    std::size_t n = 0;
    FactoredInt left;  // |St_{G_v}(1) : St_{G_v}(1+n)|
    FactoredInt right; // prod over first m-1 children of |G_vw : St(n)|
    bool holds = false;
};

inline ProjectionBound trivial_rist_projection_bound(const TreeGroup& g, const Word& v,
                                                     std::size_t n) {
    require(n >= 1, "trivial_rist_projection_bound: n must be positive");
    require(v.size() + 1 + n <= g.depth(),
            "trivial_rist_projection_bound: depth budget exceeded");
    TreeGroup gv =
        v.empty() ? g.truncated(1 + n) : TreeGroupEngine(g).projection(v).truncated(1 + n);
    TreeGroupEngine ev(gv);
    for (const RigidStabilizer& r : ev.rigid_level_stabilizer(1))
        require(r.trivial(),
                "trivial_rist_projection_bound: inapplicable, rigid level-1 "
                "stabilizer is nontrivial in the truncation");
    ProjectionBound b;
    b.vertex = v;
    b.n = n;
    b.left = ev.level_image_order(1 + n) / ev.level_image_order(1);
    std::size_t m = gv.shape().arity(0);
    for (std::size_t c = 0; c + 1 < m; ++c) {
        TreeGroupEngine child(ev.projection(Word{static_cast<int>(c)}));
        b.right *= child.level_image_order(n);
    }
    b.holds = b.left.value() <= b.right.value();
    return b;
}

// One step of the descent along a path: the whole truncated order against
// the wreath bound through the child projections. With a trivial level-1
// rigid stabilizer the last child drops out of the product.
struct DecayStep {
    Word vertex;
    std::size_t arity = 0;
    std::size_t depth = 0;      // truncation depth at this step
    bool rist_trivial = false;  // level-1 rigid stabilizers vanish here
    bool transitive = false;    // child projections share one order
    FactoredInt lhs, rhs;
    bool holds = false;
};

struct DecayCertificate {
    std::vector<DecayStep> steps;
    Rational product{1};  // prod over rist-trivial steps of (m-1)/m
    LogRatio end_ratio;   // observed ratio of the end-of-path projection
    bool applicable = false; // some step had a trivial rigid stabilizer
    // exact composed inequality |G| <= prod m_j!^{c_j} * |G_end|^{C};
    // certified only when every step was level-transitive
    bool composed_certified = false;
    FactoredInt composed_lhs, composed_rhs;
    bool composed_holds = false;
};

inline DecayCertificate decay_certificate(const TreeGroup& g, const Word& path,
                                          std::size_t n_levels) {
    require(n_levels >= 1, "decay_certificate: need at least one level");
    require(path.size() >= n_levels, "decay_certificate: path shorter than n_levels");
    require(n_levels < g.depth(), "decay_certificate: depth budget exceeded");

    DecayCertificate cert;
    cert.composed_certified = true;
    TreeGroup cur = g;
    std::vector<FactoredInt> orders;      // A_j at depth d_j
    std::vector<std::int64_t> exponents;  // child multiplicity used at step j
    Word prefix;
    for (std::size_t j = 0; j < n_levels; ++j) {
        std::size_t d = g.depth() - j;
        TreeGroup trunc = cur.truncated(d);
        TreeGroupEngine eng(trunc);
        DecayStep step;
        step.vertex = prefix;
        step.arity = trunc.shape().arity(0);
        step.depth = d;
        step.rist_trivial = true;
        for (const RigidStabilizer& r : eng.rigid_level_stabilizer(1))
            if (!r.trivial()) step.rist_trivial = false;
        step.transitive = eng.is_level_transitive(1);
        step.lhs = eng.order();

        std::size_t keep = step.rist_trivial ? step.arity - 1 : step.arity;
        step.rhs = FactoredInt::factorial(static_cast<std::uint32_t>(step.arity));
        TreeGroup next = eng.projection(Word{path[j]}).truncated(d - 1);
        if (step.transitive) {
            FactoredInt child_order = TreeGroupEngine(next).order();
            step.rhs *= child_order.pow(static_cast<std::int64_t>(keep));
        } else {
            cert.composed_certified = false;
            for (std::size_t c = 0; c < keep; ++c) {
                TreeGroupEngine child(
                    eng.projection(Word{static_cast<int>(c)}).truncated(d - 1));
                step.rhs *= child.order();
            }
        }
        step.holds = step.lhs.value() <= step.rhs.value();
        if (step.rist_trivial) {
            cert.applicable = true;
            cert.product *= Rational(static_cast<std::int64_t>(step.arity) - 1,
                                     static_cast<std::int64_t>(step.arity));
        }
        orders.push_back(step.lhs);
        exponents.push_back(static_cast<std::int64_t>(keep));
        cert.steps.push_back(std::move(step));
        cur = std::move(next);
        prefix.push_back(path[j]);
    }
    FactoredInt end_order = TreeGroupEngine(cur).order();
    cert.end_ratio =
        LogRatio::of(end_order, ambient_order(cur.shape(), g.depth() - n_levels));

    if (cert.composed_certified) {
        // fold the per-step bounds into one exact inequality on |G|
        cert.composed_lhs = orders.front();
        FactoredInt rhs = end_order;
        for (std::size_t j = n_levels; j-- > 0;) {
            rhs = rhs.pow(exponents[j]);
            rhs *= FactoredInt::factorial(
                static_cast<std::uint32_t>(cert.steps[j].arity));
        }
        cert.composed_rhs = rhs;
        cert.composed_holds = cert.composed_lhs.value() <= cert.composed_rhs.value();
    }
    return cert;
}

} // namespace treedim
