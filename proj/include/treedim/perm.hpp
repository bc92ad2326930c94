#pragma once

// Permutations of {0, ..., degree-1} in one-line notation, stored as the
// image slice of the tight moved window [window_lo, window_hi) with the
// identity implied outside. Group operations cost O(window), which is what
// makes long stabilizer chains over tree domains affordable: deep chain
// elements move only a small block of points.
//
// Composition convention is left-to-right: (a.then(b))[p] == b[a[p]].

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "treedim/errors.hpp"

namespace treedim {

using point_t = std::uint16_t;

class Perm {
public:
    Perm() : degree_(1) {}

    explicit Perm(const std::vector<point_t>& images) : degree_(images.size()) {
        require(!images.empty() && images.size() <= 65535, "Perm: bad degree");
        std::vector<bool> seen(degree_, false);
        for (std::size_t p = 0; p < degree_; ++p) {
            require(images[p] < degree_ && !seen[images[p]], "Perm: not a bijection");
            seen[images[p]] = true;
        }
        std::size_t lo = 0, hi = degree_;
        while (lo < hi && images[lo] == lo) ++lo;
        while (hi > lo && images[hi - 1] == hi - 1) --hi;
        lo_ = static_cast<std::uint32_t>(lo == hi ? 0 : lo); // canonical identity window
        img_.assign(images.begin() + lo, images.begin() + hi);
    }

    static Perm identity(std::size_t degree) {
        require(degree >= 1 && degree <= 65535, "Perm: bad degree");
        Perm p;
        p.degree_ = static_cast<std::uint32_t>(degree);
        return p;
    }

    std::size_t degree() const { return degree_; }
    bool is_identity() const { return img_.empty(); }

    std::size_t window_lo() const { return lo_; }
    std::size_t window_hi() const { return lo_ + img_.size(); }

    bool window_disjoint(const Perm& o) const {
        return window_hi() <= o.window_lo() || o.window_hi() <= window_lo();
    }

    point_t operator[](point_t p) const {
        std::size_t k = static_cast<std::size_t>(p) - lo_;
        return k < img_.size() ? img_[k] : p;
    }

    point_t min_moved_point() const {
        require(!img_.empty(), "Perm: identity moves no point");
        return static_cast<point_t>(lo_);
    }

    // this, then o (right action: p -> o[this[p]])
    Perm then(const Perm& o) const {
        require(degree_ == o.degree_, "Perm: degree mismatch");
        if (is_identity()) return o;
        if (o.is_identity()) return *this;
        std::size_t lo = std::min(window_lo(), o.window_lo());
        std::size_t hi = std::max(window_hi(), o.window_hi());
        std::vector<point_t> out(hi - lo);
        for (std::size_t p = lo; p < hi; ++p)
            out[p - lo] = o[(*this)[static_cast<point_t>(p)]];
        return from_window(degree_, lo, std::move(out));
    }

    void then_inplace(const Perm& o) {
        require(degree_ == o.degree_, "Perm: degree mismatch");
        if (o.is_identity()) return;
        if (o.window_lo() >= window_lo() && o.window_hi() <= window_hi()) {
            for (point_t& x : img_) x = o[x];
            retighten();
            return;
        }
        *this = then(o);
    }

    Perm inverse() const {
        Perm out;
        out.degree_ = degree_;
        out.lo_ = lo_;
        out.img_.resize(img_.size());
        for (std::size_t k = 0; k < img_.size(); ++k)
            out.img_[img_[k] - lo_] = static_cast<point_t>(lo_ + k);
        return out;
    }

    // g^{-1} * this * g; cost depends on this->window only
    Perm conjugated_by(const Perm& g) const {
        if (is_identity()) return identity(degree_);
        require(degree_ == g.degree_, "Perm: degree mismatch");
        std::size_t lo = degree_, hi = 0;
        for (std::size_t k = 0; k < img_.size(); ++k) {
            if (img_[k] == lo_ + k) continue;
            std::size_t q = g[static_cast<point_t>(lo_ + k)];
            lo = std::min(lo, q);
            hi = std::max(hi, q + 1);
        }
        std::vector<point_t> out(hi - lo);
        for (std::size_t p = lo; p < hi; ++p) out[p - lo] = static_cast<point_t>(p);
        for (std::size_t k = 0; k < img_.size(); ++k) {
            if (img_[k] == lo_ + k) continue;
            out[g[static_cast<point_t>(lo_ + k)] - lo] = g[img_[k]];
        }
        return from_window(degree_, lo, std::move(out));
    }

    bool commutes_with(const Perm& o) const {
        require(degree_ == o.degree_, "Perm: degree mismatch");
        if (window_disjoint(o)) return true;
        std::size_t lo = std::min(window_lo(), o.window_lo());
        std::size_t hi = std::max(window_hi(), o.window_hi());
        for (std::size_t p = lo; p < hi; ++p) {
            point_t q = static_cast<point_t>(p);
            if ((*this)[o[q]] != o[(*this)[q]]) return false;
        }
        return true;
    }

    friend Perm commutator(const Perm& a, const Perm& b) {
        if (a.window_disjoint(b)) return identity(a.degree_);
        return a.inverse().then(b.inverse()).then(a).then(b);
    }

    bool operator==(const Perm& o) const {
        return degree_ == o.degree_ && lo_ == o.lo_ && img_ == o.img_;
    }
    bool operator!=(const Perm& o) const { return !(*this == o); }

    // lexicographic order on full one-line images
    bool operator<(const Perm& o) const {
        require(degree_ == o.degree_, "Perm: degree mismatch");
        std::size_t lo = std::min(window_lo(), o.window_lo());
        std::size_t hi = std::max(window_hi(), o.window_hi());
        for (std::size_t p = lo; p < hi; ++p) {
            point_t a = (*this)[static_cast<point_t>(p)];
            point_t b = o[static_cast<point_t>(p)];
            if (a != b) return a < b;
        }
        return false;
    }

    std::vector<point_t> images() const {
        std::vector<point_t> out(degree_);
        for (std::size_t p = 0; p < degree_; ++p) out[p] = (*this)[static_cast<point_t>(p)];
        return out;
    }

    std::string to_string() const {
        std::ostringstream os;
        for (std::size_t p = 0; p < degree_; ++p) {
            if (p) os << ' ';
            os << (*this)[static_cast<point_t>(p)];
        }
        return os.str();
    }

    static Perm parse(const std::string& text, std::size_t degree) {
        std::istringstream is(text);
        std::vector<point_t> images;
        long v;
        while (is >> v) {
            require(v >= 0 && v < static_cast<long>(degree), "Perm: image out of range");
            images.push_back(static_cast<point_t>(v));
        }
        require(images.size() == degree, "Perm: wrong image count");
        return Perm(images);
    }

private:
    std::uint32_t degree_;
    std::uint32_t lo_ = 0;
    std::vector<point_t> img_; // images of [lo_, lo_ + size), tight

    static Perm from_window(std::uint32_t degree, std::size_t lo, std::vector<point_t>&& slice) {
        Perm p;
        p.degree_ = degree;
        p.lo_ = static_cast<std::uint32_t>(lo);
        p.img_ = std::move(slice);
        p.retighten();
        return p;
    }

    void retighten() {
        std::size_t f = 0, b = img_.size();
        while (f < b && img_[f] == lo_ + f) ++f;
        while (b > f && img_[b - 1] == lo_ + b - 1) --b;
        if (f == 0 && b == img_.size()) return;
        img_.erase(img_.begin() + b, img_.end());
        img_.erase(img_.begin(), img_.begin() + f);
        lo_ += static_cast<std::uint32_t>(f);
        if (img_.empty()) lo_ = 0;
    }
};

struct PermHash {
    std::size_t operator()(const Perm& p) const {
        std::size_t h = 1469598103934665603ull;
        auto mix = [&h](std::size_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        mix(p.window_lo());
        for (std::size_t q = p.window_lo(); q < p.window_hi(); ++q)
            mix(p[static_cast<point_t>(q)]);
        return h;
    }
};

} // namespace treedim
