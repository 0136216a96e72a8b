#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "core.hpp"

namespace twosq {

inline int chi(i64 n) {
    i64 r = mod_i(n, 4);
    return r == 1 ? 1 : (r == 3 ? -1 : 0);
}

inline int nu_p(i64 n, i64 p) {
    if (n == 0) throw std::domain_error("nu_p: valuation of zero is undefined");
    if (p < 2) throw std::invalid_argument("nu_p: p must be prime");
    return valuation(n, p);
}

inline bool is_prime(i64 n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    if (n % 3 == 0) return n == 3;
    for (i64 d = 5; d * d <= n; d += 6)
        if (n % d == 0 || n % (d + 2) == 0) return false;
    return true;
}

inline std::vector<i64> primes_up_to(i64 limit) {
    std::vector<i64> out;
    if (limit < 2) return out;
    std::vector<bool> comp(static_cast<std::size_t>(limit + 1), false);
    for (i64 i = 2; i <= limit; ++i) {
        if (comp[static_cast<std::size_t>(i)]) continue;
        out.push_back(i);
        for (i64 j = i * i; j <= limit; j += i) comp[static_cast<std::size_t>(j)] = true;
    }
    return out;
}

using Factorization = std::vector<std::pair<i64, int>>;

// Trial division on a 2,3 + 6k±1 wheel.
inline Factorization factorize(i64 n) {
    if (n <= 0) throw std::domain_error("factorize: argument must be positive");
    Factorization f;
    auto take = [&](i64 p) {
        if (n % p != 0) return;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.emplace_back(p, e);
    };
    take(2);
    take(3);
    for (i64 d = 5; d * d <= n; d += 6) {
        take(d);
        take(d + 2);
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

inline std::vector<i64> divisors(i64 n) {
    std::vector<i64> ds{1};
    for (auto [p, e] : factorize(n)) {
        std::size_t base = ds.size();
        i64 pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < base; ++i) ds.push_back(ds[i] * pk);
        }
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

// Number of representations n = x^2 + y^2 over Z^2, from 4 * sum_{d|n} chi(d).
inline i64 r_count(i64 n) {
    if (n <= 0) throw std::domain_error("r_count: argument must be positive");
    i64 r = 4;
    for (auto [p, e] : factorize(n)) {
        if (p % 4 == 1)
            r *= e + 1;
        else if (p % 4 == 3 && e % 2 == 1)
            return 0;
    }
    return r;
}

// Table of r(n), 0 <= n <= N, built by adding chi(d) along multiples of each odd d.
// Index 0 is unused and holds 0.
class RTable {
public:
    static constexpr i64 default_limit = 100'000'000;

    explicit RTable(i64 N, i64 limit = default_limit) {
        if (N < 1) throw std::invalid_argument("r_sieve: N must be positive");
        if (N > limit)
            throw capacity_error("r_sieve: N = " + std::to_string(N) + " exceeds the table limit " +
                                 std::to_string(limit));
        table_.assign(static_cast<std::size_t>(N + 1), 0);
        for (i64 d = 1; d <= N; d += 2) {
            std::int32_t c = (d % 4 == 1) ? 1 : -1;
            for (i64 m = d; m <= N; m += d) table_[static_cast<std::size_t>(m)] += c;
        }
        for (auto& v : table_) v *= 4;
    }

    i64 size() const { return static_cast<i64>(table_.size()) - 1; }

    i64 operator[](i64 n) const { return table_[static_cast<std::size_t>(n)]; }

    i64 at(i64 n) const {
        if (n < 1 || n > size()) throw std::out_of_range("r table index out of range");
        return table_[static_cast<std::size_t>(n)];
    }

    std::vector<i64> values() const { return {table_.begin() + 1, table_.end()}; }

private:
    std::vector<std::int32_t> table_;
};

inline std::vector<i64> r_sieve(i64 N, i64 limit = RTable::default_limit) {
    return RTable(N, limit).values();
}

struct SAlphaQuery {
    i64 p = 2;
    int n = 0;
    int alpha = 0;
    i64 A = 0;
};

namespace detail {

// S_0(A; 2^n) for any A and n >= 0. Reduces to level n-2 when 4 | A.
inline i64 s0_two(int n, i64 A) {
    if (n == 0) return 1;
    if (n == 1) return 2;
    const i64 q = i64{1} << n;
    A = mod_i(A, q);
    if (A == 0) return q;
    int v = nu2(A);
    if (v >= 2) return 4 * s0_two(n - 2, A / 4);
    if (v == 1) {
        if (n == 2) return 4;
        return mod_i(A / 2, 4) == 1 ? 2 * q : 0;
    }
    return mod_i(A, 4) == 1 ? 2 * q : 0;
}

inline i64 s0_odd(i64 p, int n, i64 A) {
    if (n == 0) return 1;
    const i64 q = ipow64(p, n), q1 = q / p;
    A = mod_i(A, q);
    int v = (A == 0) ? n : valuation(A, p);
    if (p % 4 == 1) {
        if (v >= n) return q + n * (q - q1);
        return (1 + v) * (q - q1);
    }
    if (v >= n) return ipow64(p, 2 * (n / 2));
    return v % 2 == 0 ? q + q1 : 0;
}

inline void check_query(const SAlphaQuery& q) {
    if (!is_prime(q.p)) throw std::invalid_argument("S_alpha: p must be prime");
    if (q.n < 0 || q.alpha < 0 || q.alpha > q.n)
        throw std::invalid_argument("S_alpha: need 0 <= alpha <= n");
}

}  // namespace detail

// Closed form of #{(x, y) mod p^n : p^alpha (x^2 + y^2) = A mod p^n}.
inline i64 s_alpha_closed(const SAlphaQuery& q) {
    detail::check_query(q);
    if (q.p == 2) {
        if (q.alpha != 0 || q.n < 2)
            throw std::invalid_argument("S_alpha at p = 2 is only available for alpha = 0, n >= 2");
        return detail::s0_two(q.n, q.A);
    }
    const i64 pn = ipow64(q.p, q.n);
    const i64 A = mod_i(q.A, pn);
    const int v = (A == 0) ? q.n : valuation(A, q.p);
    if (q.alpha > v) return 0;
    const i64 pa = ipow64(q.p, q.alpha);
    return pa * pa * detail::s0_odd(q.p, q.n - q.alpha, A / pa);
}

// Brute counts of p^alpha (x^2 + y^2) = A mod p^n for every residue A at once.
inline std::vector<i64> s_alpha_brute_table(i64 p, int n, int alpha) {
    detail::check_query({p, n, alpha, 0});
    const i64 pn = ipow64(p, n);
    if (static_cast<wide>(pn) * pn > 100'000'000)
        throw capacity_error("s_alpha_brute: p^(2n) exceeds 1e8");
    const i64 pa = ipow64(p, alpha) % pn;
    // Histogram of squares keeps this O(p^2n) with a small constant.
    std::vector<i64> sq(static_cast<std::size_t>(pn), 0);
    for (i64 x = 0; x < pn; ++x) ++sq[static_cast<std::size_t>(x * x % pn)];
    std::vector<i64> count(static_cast<std::size_t>(pn), 0);
    for (i64 u = 0; u < pn; ++u) {
        const i64 cu = sq[static_cast<std::size_t>(u)];
        if (cu == 0) continue;
        for (i64 w = 0; w < pn; ++w) {
            i64 s = u + w;
            if (s >= pn) s -= pn;
            count[static_cast<std::size_t>(pa * s % pn)] += cu * sq[static_cast<std::size_t>(w)];
        }
    }
    return count;
}

inline i64 s_alpha_brute(const SAlphaQuery& q) {
    const auto t = s_alpha_brute_table(q.p, q.n, q.alpha);
    return t[static_cast<std::size_t>(mod_i(q.A, static_cast<i64>(t.size())))];
}

struct DecompParams {
    i64 m = 1;
    double Xp = 1;
    double Y = 1;
    i64 A_plus = 0, A_minus = 0;
    i64 B_plus = 0, C = 0, B_minus = 0;
};

// Splits sum_{d|m} chi(d) at d = sqrt(X') and at d = Y, X'/Y. Large divisors d are
// written through their cofactor e = m/d, using chi(d) = chi(e) for m = 1 mod 4.
inline DecompParams divisor_decomposition(i64 m, double Xp, double Y) {
    if (m <= 0 || mod_i(m, 4) != 1) throw std::domain_error("divisor_decomposition: m must be positive and 1 mod 4");
    if (static_cast<double>(m) > Xp) throw std::domain_error("divisor_decomposition: m exceeds X'");
    if (!(Y >= 1.0) || Y * Y > Xp) throw std::invalid_argument("divisor_decomposition: need 1 <= Y <= sqrt(X')");
    DecompParams out{m, Xp, Y};
    const long double root = std::sqrt(static_cast<long double>(Xp));
    const long double upper = static_cast<long double>(Xp) / Y;
    const long double lm = static_cast<long double>(m);
    for (i64 d : divisors(m)) {
        const long double ld = static_cast<long double>(d);
        if (ld <= root) out.A_plus += chi(d);
        if (ld <= Y) out.B_plus += chi(d);
        if (ld > Y && ld <= upper) out.C += chi(d);
        // here d plays the cofactor e
        if (lm > ld * root) out.A_minus += chi(d);
        if (lm > ld * upper) out.B_minus += chi(d);
    }
    return out;
}

inline double Q_fn(double lambda) {
    if (!(lambda > 0)) throw std::domain_error("Q: lambda must be positive");
    return lambda * std::log(lambda) - lambda + 1.0;
}

inline double eta() { return 1.0 - (1.0 + std::log(std::log(2.0))) / std::log(2.0); }

}  // namespace twosq
