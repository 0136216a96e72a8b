#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/rational.hpp>

namespace twosq {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using wide = __int128;
using uwide = unsigned __int128;

using Rational = boost::rational<i64>;

// Raised when an exhaustive enumeration or a table would exceed its guard.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string to_string(uwide v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

inline std::string to_string(wide v) {
    if (v < 0) return "-" + to_string(static_cast<uwide>(-v));
    return to_string(static_cast<uwide>(v));
}

inline std::string to_string(const Rational& q) {
    if (q.denominator() == 1) return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

inline wide abs_w(wide a) { return a < 0 ? -a : a; }

inline wide gcd_w(wide a, wide b) {
    a = abs_w(a);
    b = abs_w(b);
    while (b != 0) {
        wide t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Least non-negative residue.
inline wide mod_w(wide a, wide m) {
    wide r = a % m;
    return r < 0 ? r + m : r;
}

inline i64 mod_i(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

// Inverse of a modulo m; requires gcd(a, m) = 1 and m >= 1.
inline wide inverse_mod(wide a, wide m) {
    if (m == 1) return 0;
    wide r0 = m, r1 = mod_w(a, m), s0 = 0, s1 = 1;
    while (r1 != 0) {
        wide q = r0 / r1;
        wide t = r0 - q * r1;
        r0 = r1;
        r1 = t;
        t = s0 - q * s1;
        s0 = s1;
        s1 = t;
    }
    if (r0 != 1) throw std::logic_error("inverse_mod: arguments are not coprime");
    return mod_w(s0, m);
}

constexpr wide wide_limit = static_cast<wide>(1) << 124;

inline wide mul_checked(wide a, wide b) {
    if (a != 0 && abs_w(b) > wide_limit / abs_w(a))
        throw capacity_error("128-bit lattice arithmetic overflow");
    return a * b;
}

// a*b mod m for 0 <= a, b < m < 2^124, by doubling once the direct product could overflow.
inline wide mulmod(wide a, wide b, wide m) {
    const wide small = static_cast<wide>(1) << 62;
    if (a < small && b < small) return a * b % m;
    wide r = 0;
    while (b > 0) {
        if (b & 1) {
            r += a;
            if (r >= m) r -= m;
        }
        a += a;
        if (a >= m) a -= m;
        b >>= 1;
    }
    return r;
}

inline wide ipow(wide base, int e) {
    wide r = 1;
    for (int i = 0; i < e; ++i) r = mul_checked(r, base);
    return r;
}

inline i64 ipow64(i64 base, int e) {
    wide r = ipow(base, e);
    if (r > std::numeric_limits<i64>::max()) throw capacity_error("power exceeds 64 bits");
    return static_cast<i64>(r);
}

// p-adic valuation of a non-zero integer.
inline int valuation(wide n, wide p) {
    if (n == 0) throw std::domain_error("valuation of zero");
    int e = 0;
    n = abs_w(n);
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

inline int nu2(i64 n) {
    if (n == 0) throw std::domain_error("valuation of zero");
    return __builtin_ctzll(static_cast<u64>(n < 0 ? -n : n));
}

inline i64 odd_part(i64 n) { return n / (i64{1} << nu2(n)); }

inline int worker_count(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Splits [0, count) into `workers` contiguous blocks and sums body(begin, end).
// The result does not depend on the number of workers because T is exact.
template <class T, class Body>
T parallel_block_sum(i64 count, int workers, Body body) {
    workers = std::max(1, std::min<int>(worker_count(workers), static_cast<int>(std::max<i64>(1, count))));
    if (workers == 1) return body(i64{0}, count);
    std::vector<T> partial(static_cast<std::size_t>(workers), T{});
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        i64 lo = count * w / workers, hi = count * (w + 1) / workers;
        pool.emplace_back([&, w, lo, hi] {
            try {
                partial[static_cast<std::size_t>(w)] = body(lo, hi);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    T total{};
    for (auto& v : partial) total += v;
    return total;
}

}  // namespace twosq
