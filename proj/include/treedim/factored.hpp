#pragma once

// Exact arithmetic carriers.
//
// Group orders and logarithmic index quantities are kept in factored form
// (prime -> exponent). A quotient of two such logs, log A / log B, is a
// rational s/t exactly when the exponent vectors of A and B are parallel
// over Q; that test is decidable here, so ratios are exact whenever they
// are mathematically rational and high-precision reals otherwise.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "treedim/errors.hpp"

namespace treedim {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
// 128 bits of mantissa; comparisons against stated tolerances use 1e-20.
using Real = boost::multiprecision::number<
    boost::multiprecision::backends::cpp_bin_float<128, boost::multiprecision::backends::digit_base_2>>;

inline constexpr double kRealTolerance = 1e-20;

namespace detail {

// Smallest-prime-factor table for factoring orbit sizes and small factorials.
inline const std::vector<std::uint32_t>& spf_table() {
    static const std::vector<std::uint32_t> table = [] {
        constexpr std::uint32_t n = 1 << 16;
        std::vector<std::uint32_t> t(n, 0);
        for (std::uint32_t i = 2; i < n; ++i) {
            if (t[i] == 0) {
                for (std::uint32_t j = i; j < n; j += i)
                    if (t[j] == 0) t[j] = i;
            }
        }
        return t;
    }();
    return table;
}

} // namespace detail

// A positive integer in factored form: sorted (prime, exponent) pairs.
class FactoredInt {
public:
    FactoredInt() = default; // one

    static FactoredInt from_int(std::uint64_t n) {
        require(n > 0, "FactoredInt: value must be positive");
        FactoredInt f;
        const auto& spf = detail::spf_table();
        while (n > 1) {
            std::uint64_t p;
            if (n < spf.size()) {
                p = spf[n];
            } else {
                p = 2;
                while (p * p <= n && n % p != 0) ++p;
                if (n % p != 0) p = n;
            }
            std::int64_t e = 0;
            while (n % p == 0) { n /= p; ++e; }
            f.mul_prime(static_cast<std::int64_t>(p), e);
        }
        return f;
    }

    static FactoredInt factorial(std::uint32_t m) {
        FactoredInt f;
        for (std::uint32_t i = 2; i <= m; ++i) f *= from_int(i);
        return f;
    }

    bool is_one() const { return factors_.empty(); }

    FactoredInt& operator*=(const FactoredInt& o) {
        for (const auto& [p, e] : o.factors_) mul_prime(p, e);
        return *this;
    }
    friend FactoredInt operator*(FactoredInt a, const FactoredInt& b) { return a *= b; }

    FactoredInt& pow_assign(std::int64_t k) {
        require(k >= 0, "FactoredInt: negative power");
        if (k == 0) { factors_.clear(); return *this; }
        for (auto& [p, e] : factors_) e *= k;
        return *this;
    }
    FactoredInt pow(std::int64_t k) const { FactoredInt f = *this; f.pow_assign(k); return f; }

    bool divides(const FactoredInt& o) const {
        for (const auto& [p, e] : factors_) {
            auto it = o.factors_.find(p);
            if (it == o.factors_.end() || it->second < e) return false;
        }
        return true;
    }

    // Exact quotient; requires divisibility.
    friend FactoredInt operator/(const FactoredInt& a, const FactoredInt& b) {
        require(b.divides(a), "FactoredInt: inexact division");
        FactoredInt f = a;
        for (const auto& [p, e] : b.factors_) f.mul_prime(p, -e);
        return f;
    }

    bool operator==(const FactoredInt& o) const { return factors_ == o.factors_; }

    BigInt value() const {
        BigInt v = 1;
        for (const auto& [p, e] : factors_)
            v *= boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(e));
        return v;
    }

    bool operator<=(const FactoredInt& o) const { return value() <= o.value(); }
    bool operator<(const FactoredInt& o) const { return value() < o.value(); }

    // Natural logarithm, 128-bit precision.
    Real log() const {
        Real s = 0;
        for (const auto& [p, e] : factors_) s += Real(e) * boost::multiprecision::log(Real(p));
        return s;
    }

    const std::map<std::int64_t, std::int64_t>& factors() const { return factors_; }

    // Rendering: "1", "2^7", "2^3*3^2".
    std::string to_string() const {
        if (factors_.empty()) return "1";
        std::ostringstream os;
        bool first = true;
        for (const auto& [p, e] : factors_) {
            if (!first) os << '*';
            first = false;
            os << p;
            if (e != 1) os << '^' << e;
        }
        return os.str();
    }

private:
    void mul_prime(std::int64_t p, std::int64_t e) {
        if (e == 0) return;
        auto it = factors_.find(p);
        if (it == factors_.end()) {
            factors_.emplace(p, e);
        } else {
            it->second += e;
            require(it->second >= 0, "FactoredInt: negative exponent");
            if (it->second == 0) factors_.erase(it);
        }
    }

    std::map<std::int64_t, std::int64_t> factors_;
};

// log(num) / log(den) as an exact rational when the exponent vectors are
// parallel; den must not be 1.
inline std::optional<Rational> exact_log_ratio(const FactoredInt& num, const FactoredInt& den) {
    require(!den.is_one(), "exact_log_ratio: zero denominator log");
    if (num.is_one()) return Rational(0);
    const auto& a = num.factors();
    const auto& b = den.factors();
    if (a.size() != b.size()) return std::nullopt;
    auto ita = a.begin();
    auto itb = b.begin();
    // ratio = e_p / f_p for the first prime; all others must agree.
    BigInt s = ita->second, t = itb->second;
    for (; ita != a.end(); ++ita, ++itb) {
        if (ita->first != itb->first) return std::nullopt;
        if (BigInt(ita->second) * t != BigInt(itb->second) * s) return std::nullopt;
    }
    return Rational(s, t);
}

// A log-ratio value: exact where possible, else 128-bit real.
struct LogRatio {
    std::optional<Rational> exact;
    Real approx = 0;

    static LogRatio of(const FactoredInt& num, const FactoredInt& den) {
        LogRatio r;
        r.exact = exact_log_ratio(num, den);
        r.approx = r.exact ? Real(boost::multiprecision::numerator(*r.exact)) /
                                 Real(boost::multiprecision::denominator(*r.exact))
                           : num.log() / den.log();
        return r;
    }

    bool operator<(const LogRatio& o) const {
        if (exact && o.exact) return *exact < *o.exact;
        return approx < o.approx;
    }

    // Rendering: exact values as p/q, approximations tilde-tagged.
    std::string to_string() const {
        std::ostringstream os;
        if (exact) {
            os << boost::multiprecision::numerator(*exact) << '/'
               << boost::multiprecision::denominator(*exact);
        } else {
            os << '~' << std::setprecision(34) << approx;
        }
        return os.str();
    }
};

} // namespace treedim
