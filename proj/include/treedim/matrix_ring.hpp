#pragma once

// Exact matrices over integral domains: integers, prime fields, and
// univariate polynomials over prime fields. Invertibility goes through the
// determinant being a unit; determinants and ranks use fraction-free
// elimination, so every division is exact in the ring. The rank of the
// flattened matrices bounds how many disjoint edges a commutation pattern
// can realize in a given degree: a verified family of n pairs forces
// k^2 >= n.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "treedim/errors.hpp"
#include "treedim/factored.hpp"
#include "treedim/ncgraph.hpp"

namespace treedim {

namespace detail {

inline bool is_prime(std::int64_t p) {
    if (p < 2) return false;
    for (std::int64_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

inline std::int64_t mod_reduce(std::int64_t a, std::int64_t p) {
    std::int64_t r = a % p;
    return r < 0 ? r + p : r;
}

// a^(p-2) mod p
inline std::int64_t mod_inverse(std::int64_t a, std::int64_t p) {
    require(a % p != 0, "mod_inverse: zero has no inverse");
    std::int64_t base = mod_reduce(a, p), acc = 1;
    for (std::int64_t e = p - 2; e > 0; e >>= 1) {
        if (e & 1) acc = acc * base % p;
        base = base * base % p;
    }
    return acc;
}

inline std::int64_t parse_int64(const std::string& token) {
    std::size_t start = token.size() > 0 && (token[0] == '-' || token[0] == '+') ? 1 : 0;
    if (start == token.size()) throw io_error("matrix file: bad integer '" + token + "'");
    for (std::size_t i = start; i < token.size(); ++i)
        if (token[i] < '0' || token[i] > '9')
            throw io_error("matrix file: bad integer '" + token + "'");
    errno = 0;
    char* end = nullptr;
    std::int64_t v = std::strtoll(token.c_str(), &end, 10);
    if (errno != 0 || end != token.c_str() + token.size())
        throw io_error("matrix file: integer out of range '" + token + "'");
    return v;
}

} // namespace detail

class IntegerRing {
public:
    using value_type = BigInt;

    value_type zero() const { return 0; }
    value_type one() const { return 1; }
    value_type add(const value_type& a, const value_type& b) const { return a + b; }
    value_type sub(const value_type& a, const value_type& b) const { return a - b; }
    value_type mul(const value_type& a, const value_type& b) const { return a * b; }
    value_type neg(const value_type& a) const { return -a; }
    value_type div_exact(const value_type& a, const value_type& b) const {
        require(b != 0 && a % b == 0, "IntegerRing: inexact division");
        return a / b;
    }
    bool is_zero(const value_type& a) const { return a == 0; }
    bool is_unit(const value_type& a) const { return a == 1 || a == -1; }

    std::string name() const { return "zz"; }
    std::string to_text(const value_type& a) const { return a.str(); }
    value_type parse(const std::string& token) const {
        std::size_t start = !token.empty() && (token[0] == '-' || token[0] == '+') ? 1 : 0;
        bool ok = start < token.size();
        for (std::size_t i = start; i < token.size(); ++i)
            if (token[i] < '0' || token[i] > '9') ok = false;
        if (!ok) throw io_error("matrix file: bad integer '" + token + "'");
        return value_type(token);
    }
    bool operator==(const IntegerRing&) const { return true; }
    bool operator!=(const IntegerRing&) const { return false; }
};

class PrimeField {
public:
    using value_type = std::int64_t;

    explicit PrimeField(std::int64_t p) : p_(p) {
        require(p >= 2 && p < (std::int64_t{1} << 31), "PrimeField: modulus out of range");
        require(detail::is_prime(p), "PrimeField: modulus must be prime");
    }

    std::int64_t modulus() const { return p_; }
    value_type zero() const { return 0; }
    value_type one() const { return 1 % p_; }
    value_type add(value_type a, value_type b) const { return (a + b) % p_; }
    value_type sub(value_type a, value_type b) const { return detail::mod_reduce(a - b, p_); }
    value_type mul(value_type a, value_type b) const { return a * b % p_; }
    value_type neg(value_type a) const { return detail::mod_reduce(-a, p_); }
    value_type div_exact(value_type a, value_type b) const {
        return a * detail::mod_inverse(b, p_) % p_;
    }
    bool is_zero(value_type a) const { return a == 0; }
    bool is_unit(value_type a) const { return a != 0; }

    std::string name() const { return "fp " + std::to_string(p_); }
    std::string to_text(value_type a) const { return std::to_string(a); }
    value_type parse(const std::string& token) const {
        return detail::mod_reduce(detail::parse_int64(token), p_);
    }
    bool operator==(const PrimeField& o) const { return p_ == o.p_; }
    bool operator!=(const PrimeField& o) const { return p_ != o.p_; }

private:
    std::int64_t p_;
};

// univariate polynomials over a prime field, coefficients low to high
class PolynomialRing {
public:
    using value_type = std::vector<std::int64_t>; // normalized: no trailing zeros

    explicit PolynomialRing(std::int64_t p) : f_(p) {}

    std::int64_t modulus() const { return f_.modulus(); }
    value_type zero() const { return {}; }
    value_type one() const { return {1}; }

    value_type normalized(value_type a) const {
        for (std::int64_t& c : a) c = detail::mod_reduce(c, f_.modulus());
        while (!a.empty() && a.back() == 0) a.pop_back();
        return a;
    }
    value_type add(const value_type& a, const value_type& b) const {
        value_type r(std::max(a.size(), b.size()), 0);
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
        for (std::size_t i = 0; i < b.size(); ++i) r[i] = f_.add(r[i], b[i]);
        return normalized(std::move(r));
    }
    value_type sub(const value_type& a, const value_type& b) const { return add(a, neg(b)); }
    value_type neg(const value_type& a) const {
        value_type r = a;
        for (std::int64_t& c : r) c = f_.neg(c);
        return r;
    }
    value_type mul(const value_type& a, const value_type& b) const {
        if (a.empty() || b.empty()) return {};
        value_type r(a.size() + b.size() - 1, 0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                r[i + j] = f_.add(r[i + j], f_.mul(a[i], b[j]));
        return normalized(std::move(r));
    }
    value_type div_exact(const value_type& a, const value_type& b) const {
        require(!b.empty(), "PolynomialRing: division by zero");
        value_type rem = a, quot(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, 0);
        std::int64_t lead_inv = detail::mod_inverse(b.back(), f_.modulus());
        while (rem.size() >= b.size() && !rem.empty()) {
            std::size_t shift = rem.size() - b.size();
            std::int64_t c = f_.mul(rem.back(), lead_inv);
            quot[shift] = c;
            for (std::size_t i = 0; i < b.size(); ++i)
                rem[shift + i] = f_.sub(rem[shift + i], f_.mul(c, b[i]));
            while (!rem.empty() && rem.back() == 0) rem.pop_back();
        }
        require(rem.empty(), "PolynomialRing: inexact division");
        return normalized(std::move(quot));
    }
    bool is_zero(const value_type& a) const { return a.empty(); }
    bool is_unit(const value_type& a) const { return a.size() == 1; }

    std::string name() const { return "polyfp " + std::to_string(f_.modulus()); }
    std::string to_text(const value_type& a) const {
        if (a.empty()) return "0";
        std::string s;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(a[i]);
        }
        return s;
    }
    value_type parse(const std::string& token) const {
        value_type coeffs;
        std::size_t start = 0;
        while (start <= token.size()) {
            std::size_t comma = token.find(',', start);
            if (comma == std::string::npos) comma = token.size();
            coeffs.push_back(f_.parse(token.substr(start, comma - start)));
            start = comma + 1;
        }
        return normalized(std::move(coeffs));
    }
    bool operator==(const PolynomialRing& o) const { return f_ == o.f_; }
    bool operator!=(const PolynomialRing& o) const { return f_ != o.f_; }

private:
    PrimeField f_;
};

template <class Ring>
class ExactMatrix {
public:
    using value_type = typename Ring::value_type;

    ExactMatrix(Ring ring, std::size_t degree, std::vector<value_type> entries)
        : ring_(std::move(ring)), degree_(degree), entries_(std::move(entries)) {
        require(degree_ >= 1, "ExactMatrix: degree must be positive");
        require(entries_.size() == degree_ * degree_, "ExactMatrix: wrong entry count");
    }

    static ExactMatrix identity(Ring ring, std::size_t degree) {
        std::vector<value_type> e(degree * degree, ring.zero());
        for (std::size_t i = 0; i < degree; ++i) e[i * degree + i] = ring.one();
        return ExactMatrix(std::move(ring), degree, std::move(e));
    }

    const Ring& ring() const { return ring_; }
    std::size_t degree() const { return degree_; }
    const std::vector<value_type>& entries() const { return entries_; }
    const value_type& at(std::size_t i, std::size_t j) const {
        require(i < degree_ && j < degree_, "ExactMatrix: index out of range");
        return entries_[i * degree_ + j];
    }

    ExactMatrix operator*(const ExactMatrix& o) const {
        require(ring_ == o.ring_ && degree_ == o.degree_,
                "ExactMatrix: operands live in different rings");
        std::vector<value_type> r(degree_ * degree_, ring_.zero());
        for (std::size_t i = 0; i < degree_; ++i)
            for (std::size_t l = 0; l < degree_; ++l) {
                const value_type& x = entries_[i * degree_ + l];
                if (ring_.is_zero(x)) continue;
                for (std::size_t j = 0; j < degree_; ++j)
                    r[i * degree_ + j] = ring_.add(r[i * degree_ + j],
                                                   ring_.mul(x, o.entries_[l * degree_ + j]));
            }
        return ExactMatrix(ring_, degree_, std::move(r));
    }

    bool operator==(const ExactMatrix& o) const {
        return ring_ == o.ring_ && degree_ == o.degree_ && entries_ == o.entries_;
    }
    bool operator!=(const ExactMatrix& o) const { return !(*this == o); }

    // fraction-free elimination; the final pivot is the determinant
    value_type determinant() const {
        std::vector<value_type> m = entries_;
        const std::size_t k = degree_;
        value_type prev = ring_.one();
        bool negate = false;
        for (std::size_t c = 0; c < k; ++c) {
            std::size_t pivot = c;
            while (pivot < k && ring_.is_zero(m[pivot * k + c])) ++pivot;
            if (pivot == k) return ring_.zero();
            if (pivot != c) {
                for (std::size_t j = 0; j < k; ++j)
                    std::swap(m[pivot * k + j], m[c * k + j]);
                negate = !negate;
            }
            for (std::size_t i = c + 1; i < k; ++i) {
                for (std::size_t j = c + 1; j < k; ++j)
                    m[i * k + j] = ring_.div_exact(
                        ring_.sub(ring_.mul(m[c * k + c], m[i * k + j]),
                                  ring_.mul(m[i * k + c], m[c * k + j])),
                        prev);
                m[i * k + c] = ring_.zero();
            }
            prev = m[c * k + c];
        }
        return negate ? ring_.neg(prev) : prev;
    }

    bool is_invertible() const { return ring_.is_unit(determinant()); }

private:
    Ring ring_;
    std::size_t degree_;
    std::vector<value_type> entries_;
};

template <class Ring>
bool labels_commute(const ExactMatrix<Ring>& a, const ExactMatrix<Ring>& b) {
    return a * b == b * a;
}
template <class Ring>
bool labels_compatible(const ExactMatrix<Ring>& a, const ExactMatrix<Ring>& b) {
    return a.ring() == b.ring() && a.degree() == b.degree();
}

// rank of the flattened matrices over the fraction field, fraction-free
template <class Ring>
std::size_t independence_rank(const std::vector<ExactMatrix<Ring>>& mats) {
    if (mats.empty()) return 0;
    using value_type = typename Ring::value_type;
    const Ring& ring = mats[0].ring();
    const std::size_t cols = mats[0].degree() * mats[0].degree();
    std::vector<std::vector<value_type>> rows;
    for (const ExactMatrix<Ring>& m : mats) {
        require(labels_compatible(mats[0], m),
                "independence_rank: matrices live in different rings");
        rows.push_back(m.entries());
    }
    value_type prev = ring.one();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
        std::size_t pivot = r;
        while (pivot < rows.size() && ring.is_zero(rows[pivot][c])) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[pivot], rows[r]);
        for (std::size_t i = r + 1; i < rows.size(); ++i) {
            for (std::size_t j = c + 1; j < cols; ++j)
                rows[i][j] = ring.div_exact(ring.sub(ring.mul(rows[r][c], rows[i][j]),
                                                     ring.mul(rows[i][c], rows[r][j])),
                                            prev);
            rows[i][c] = ring.zero();
        }
        prev = rows[r][c];
        ++r;
    }
    return r;
}

// the graph must be a disjoint-edge family and every label invertible
template <class Ring>
bool verify_pattern(const NCRep<ExactMatrix<Ring>>& rep) {
    require(rep.graph.vertex_count() % 2 == 0, "verify_pattern: the graph is not an edge family");
    std::size_t n = rep.graph.vertex_count() / 2;
    std::vector<std::pair<std::size_t, std::size_t>> expect;
    for (std::size_t i = 0; i < n; ++i) expect.emplace_back(2 * i, 2 * i + 1);
    require(rep.graph.edges() == expect, "verify_pattern: the graph is not an edge family");
    require(rep.labels.size() == 2 * n, "verify_pattern: one label per vertex");
    for (std::size_t i = 0; i < rep.labels.size(); ++i)
        require(rep.labels[i].is_invertible(),
                "verify_pattern: label " + std::to_string(i) +
                    " is not invertible (determinant is not a unit)");
    return verify(rep).ok;
}

// a verified family of n pairs in degree k forces rank n and n <= k^2
template <class Ring>
bool assert_sqrt_bound(const NCRep<ExactMatrix<Ring>>& rep) {
    require(verify_pattern(rep), "assert_sqrt_bound: labelling does not verify");
    std::size_t n = rep.graph.vertex_count() / 2;
    if (n == 0) return true;
    std::size_t k = rep.labels[0].degree();
    std::vector<ExactMatrix<Ring>> a_side;
    for (std::size_t i = 0; i < n; ++i) a_side.push_back(rep.labels[2 * i]);
    return independence_rank(a_side) == n && n <= k * k;
}

// i-th pair: elementary matrices in the i-th 2x2 diagonal block
inline NCRep<ExactMatrix<IntegerRing>> block_construction(std::size_t n) {
    require(n >= 1, "block_construction: need at least one pair");
    IntegerRing ring;
    std::size_t k = 2 * n;
    std::vector<ExactMatrix<IntegerRing>> labels;
    for (std::size_t i = 0; i < n; ++i) {
        for (bool upper : {true, false}) {
            ExactMatrix<IntegerRing> m = ExactMatrix<IntegerRing>::identity(ring, k);
            std::vector<BigInt> e = m.entries();
            if (upper)
                e[(2 * i) * k + (2 * i + 1)] = 1;
            else
                e[(2 * i + 1) * k + (2 * i)] = 1;
            labels.push_back(ExactMatrix<IntegerRing>(ring, k, std::move(e)));
        }
    }
    return NCRep<ExactMatrix<IntegerRing>>{Graph::vn(n), std::move(labels)};
}

namespace detail {

// all invertible matrices of the degree over the prime field, in entry
// odometer order
inline std::vector<ExactMatrix<PrimeField>> enumerate_gl(const PrimeField& field,
                                                         std::size_t degree) {
    std::vector<ExactMatrix<PrimeField>> out;
    std::vector<std::int64_t> entries(degree * degree, 0);
    while (true) {
        ExactMatrix<PrimeField> m(field, degree, entries);
        if (m.is_invertible()) out.push_back(std::move(m));
        std::size_t pos = entries.size();
        while (pos > 0 && entries[pos - 1] == field.modulus() - 1) entries[--pos] = 0;
        if (pos == 0) break;
        ++entries[pos - 1];
    }
    return out;
}

inline BigInt gl_order(std::int64_t p, std::size_t degree) {
    BigInt pk = 1;
    for (std::size_t i = 0; i < degree; ++i) pk *= p;
    BigInt order = 1, pi = 1;
    for (std::size_t i = 0; i < degree; ++i) {
        order *= pk - pi;
        pi *= p;
    }
    return order;
}

} // namespace detail

// largest n such that a disjoint-edge family of n pairs labels into
// GL_degree(F_p); pruned depth-first search in entry order
inline std::size_t exhaustive_max_vn(std::int64_t p, std::size_t degree,
                                     std::size_t budget = 10000) {
    PrimeField field(p);
    if (detail::gl_order(p, degree) > BigInt(budget))
        throw budget_error("exhaustive_max_vn: group order exceeds " + std::to_string(budget));
    std::vector<ExactMatrix<PrimeField>> elems = detail::enumerate_gl(field, degree);
    std::vector<std::vector<bool>> commute(elems.size(), std::vector<bool>(elems.size()));
    for (std::size_t i = 0; i < elems.size(); ++i)
        for (std::size_t j = i; j < elems.size(); ++j)
            commute[i][j] = commute[j][i] = labels_commute(elems[i], elems[j]);

    std::size_t best = 0;
    std::vector<std::size_t> stack; // chosen labels, pairs in order
    auto extend = [&](auto&& self, std::size_t a_min) -> void {
        best = std::max(best, stack.size() / 2);
        for (std::size_t a = a_min; a < elems.size(); ++a) {
            bool a_ok = true;
            for (std::size_t prev : stack)
                if (!commute[prev][a]) { a_ok = false; break; }
            if (!a_ok) continue;
            for (std::size_t b = a + 1; b < elems.size(); ++b) {
                if (commute[a][b]) continue;
                bool b_ok = true;
                for (std::size_t prev : stack)
                    if (!commute[prev][b]) { b_ok = false; break; }
                if (!b_ok) continue;
                stack.push_back(a);
                stack.push_back(b);
                self(self, a + 1);
                stack.pop_back();
                stack.pop_back();
            }
        }
    };
    extend(extend, 0);
    require(best <= degree * degree, "exhaustive_max_vn: rank bound violated");
    return best;
}

// matrix labelling file: graph lines, then ring, degree, and row-major
// labels; polynomial entries are comma-joined coefficients low to high
template <class Ring>
std::string to_text(const NCRep<ExactMatrix<Ring>>& rep) {
    std::ostringstream os;
    os << rep.graph.to_text();
    require(!rep.labels.empty(), "matrix labelling: no labels");
    const Ring& ring = rep.labels[0].ring();
    os << "ring: " << ring.name() << "\n";
    os << "degree: " << rep.labels[0].degree() << "\n";
    for (std::size_t i = 0; i < rep.labels.size(); ++i) {
        os << "label " << i << ":";
        for (const auto& e : rep.labels[i].entries()) os << " " << ring.to_text(e);
        os << "\n";
    }
    return os.str();
}

using MatrixLabelling = std::variant<NCRep<ExactMatrix<IntegerRing>>,
                                     NCRep<ExactMatrix<PrimeField>>,
                                     NCRep<ExactMatrix<PolynomialRing>>>;

namespace detail {

template <class Ring>
NCRep<ExactMatrix<Ring>> parse_labelling_body(Ring ring, std::size_t vertices,
                                              std::vector<std::pair<std::size_t, std::size_t>> edges,
                                              std::size_t degree,
                                              const std::vector<std::vector<std::string>>& rows) {
    if (rows.size() != vertices) throw io_error("matrix file: one label line per vertex");
    std::vector<ExactMatrix<Ring>> labels;
    for (const std::vector<std::string>& tokens : rows) {
        if (tokens.size() != degree * degree)
            throw io_error("matrix file: wrong entry count in a label");
        std::vector<typename Ring::value_type> entries;
        for (const std::string& t : tokens) entries.push_back(ring.parse(t));
        labels.push_back(ExactMatrix<Ring>(ring, degree, std::move(entries)));
    }
    try {
        return NCRep<ExactMatrix<Ring>>{Graph(vertices, std::move(edges)), std::move(labels)};
    } catch (const precondition_error& e) {
        throw io_error(std::string("matrix file: ") + e.what());
    }
}

} // namespace detail

inline MatrixLabelling parse_matrix_labelling(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::size_t vertices = 0;
    bool have_vertices = false, have_degree = false;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::string ring_tag;
    std::int64_t ring_mod = 0;
    std::size_t degree = 0;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "vertices:") {
            if (!(ls >> vertices)) throw io_error("matrix file: bad vertices line");
            have_vertices = true;
        } else if (key == "edge:") {
            std::size_t u = 0, v = 0;
            if (!(ls >> u >> v)) throw io_error("matrix file: bad edge line");
            edges.emplace_back(u, v);
        } else if (key == "ring:") {
            if (!(ls >> ring_tag)) throw io_error("matrix file: bad ring line");
            if (ring_tag != "zz" && !(ls >> ring_mod))
                throw io_error("matrix file: ring needs a modulus");
        } else if (key == "degree:") {
            if (!(ls >> degree)) throw io_error("matrix file: bad degree line");
            have_degree = true;
        } else if (key == "label") {
            std::string idx;
            ls >> idx; // "i:" ignored; order is line order
            std::vector<std::string> tokens;
            std::string t;
            while (ls >> t) tokens.push_back(std::move(t));
            rows.push_back(std::move(tokens));
        } else {
            throw io_error("matrix file: unknown line '" + line + "'");
        }
    }
    if (!have_vertices || ring_tag.empty() || !have_degree)
        throw io_error("matrix file: missing vertices, ring, or degree header");
    if (degree < 1) throw io_error("matrix file: degree must be positive");
    try {
        if (ring_tag == "zz")
            return detail::parse_labelling_body(IntegerRing{}, vertices, std::move(edges), degree,
                                                rows);
        if (ring_tag == "fp")
            return detail::parse_labelling_body(PrimeField(ring_mod), vertices, std::move(edges),
                                                degree, rows);
        if (ring_tag == "polyfp")
            return detail::parse_labelling_body(PolynomialRing(ring_mod), vertices,
                                                std::move(edges), degree, rows);
    } catch (const precondition_error& e) {
        throw io_error(std::string("matrix file: ") + e.what());
    }
    throw io_error("matrix file: unknown ring '" + ring_tag + "'");
}

} // namespace treedim
