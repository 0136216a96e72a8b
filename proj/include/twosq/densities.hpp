#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "arith.hpp"
#include "geometry.hpp"
#include "lattice.hpp"

namespace twosq {

// ---------------------------------------------------------------- Euler factors

struct LocalFactor {
    i64 p = 3;
    double value = 1.0;
    int depth = 0;
    double last_term = 0.0;  // magnitude of the last shell that was added
};

constexpr double shell_cutoff = 1e-14;
constexpr int max_depth = 24;

namespace detail {

struct Kahan {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

inline void check_local_args(i64 p, int depth) {
    if (p < 3 || !is_prime(p)) throw std::invalid_argument("local factor: p must be an odd prime");
    if (depth < 0) throw std::invalid_argument("local factor: depth must be non-negative");
    if (depth > max_depth) throw capacity_error("local factor: depth above " + std::to_string(max_depth));
}

// (1 - chi(p)/p)^4 * sum_{0 <= n_i <= depth} chi(p)^{n_1+..+n_4} / index(n), summed shell by shell
// in ascending total degree; stops once a shell contributes less than shell_cutoff.
template <class Index>
LocalFactor shell_sum(i64 p, int depth, Index index) {
    check_local_args(p, depth);
    const int c = chi(p);
    Kahan total;
    double last = 0.0;
    for (int t = 0; t <= 4 * depth; ++t) {
        Kahan shell;
        for (int a = 0; a <= std::min(t, depth); ++a)
            for (int b = 0; b <= std::min(t - a, depth); ++b)
                for (int cc = 0; cc <= std::min(t - a - b, depth); ++cc) {
                    const int dd = t - a - b - cc;
                    if (dd > depth) continue;
                    shell.add(1.0 / static_cast<double>(index(std::array<int, 4>{a, b, cc, dd})));
                }
        total.add((t % 2 == 1 && c == -1) ? -shell.sum : shell.sum);
        last = shell.sum;
        if (t > 0 && shell.sum < shell_cutoff) break;
    }
    const double f = 1.0 - static_cast<double>(c) / static_cast<double>(p);
    return {p, f * f * f * f * total.sum, depth, last};
}

inline WideQuad prime_powers(i64 p, const std::array<int, 4>& e) {
    return {ipow(p, e[0]), ipow(p, e[1]), ipow(p, e[2]), ipow(p, e[3])};
}

}  // namespace detail

inline LocalFactor sigma_p_star(i64 p, const FormSystem& S, int depth = max_depth) {
    return detail::shell_sum(p, depth, [&](const std::array<int, 4>& e) {
        return rho_star(detail::prime_powers(p, e), S);
    });
}

inline LocalFactor sigma_p_general(i64 p, const FormSystem& S, const DParams& dp, int depth = max_depth) {
    const wide base = congruence_lattice(widen(dp.D), S).det();
    return detail::shell_sum(p, depth, [&](const std::array<int, 4>& e) {
        const WideQuad h = detail::prime_powers(p, e);
        WideQuad top{};
        for (std::size_t i = 0; i < 4; ++i) {
            const wide dh = mul_checked(dp.d[i], h[i]);
            top[i] = dh / gcd_w(dh, dp.D[i]) * dp.D[i];
        }
        const wide num = congruence_lattice(top, S).det();
        if (num % base != 0) throw std::logic_error("rho_0: sublattice index is not an integer");
        return num / base;
    });
}

// Exponents max(nu_p(D_i), nu_p(d_i) + n_i) in rho_*, no division by det Gamma_D.
inline LocalFactor c_p_closed(i64 p, const FormSystem& S, const DParams& dp, int depth = max_depth) {
    std::array<int, 4> vd{}, vD{};
    for (std::size_t i = 0; i < 4; ++i) {
        vd[i] = dp.d[i] % p == 0 ? valuation(dp.d[i], p) : 0;
        vD[i] = dp.D[i] % p == 0 ? valuation(dp.D[i], p) : 0;
    }
    return detail::shell_sum(p, depth, [&](const std::array<int, 4>& n) {
        std::array<int, 4> e{};
        for (std::size_t i = 0; i < 4; ++i) e[i] = std::max(vD[i], vd[i] + n[i]);
        return rho_star(detail::prime_powers(p, e), S);
    });
}

struct PAdicQuery {
    i64 p = 3;
    std::array<int, 4> lambda{0, 0, 0, 0};
    std::array<int, 4> mu{0, 0, 0, 0};
    int n = 1;
};

// p^{-6n - sum lambda} * sum_{x mod p^n, p^mu_i | L_i(x)} prod_i S_{lambda_i}(L_i(x); p^n).
inline double omega_p_brute(const PAdicQuery& q, const FormSystem& S) {
    if (q.p < 3 || !is_prime(q.p)) throw std::invalid_argument("omega_p_brute: p must be an odd prime");
    if (q.n < 1) throw std::invalid_argument("omega_p_brute: level must be at least 1");
    const i64 pn = ipow64(q.p, q.n);
    if (static_cast<wide>(pn) * pn > 100'000'000) throw capacity_error("omega_p_brute: p^(2n) exceeds 1e8");
    std::array<std::vector<i64>, 4> table;
    std::array<i64, 4> mu_mod{};
    int lambda_sum = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (q.lambda[i] < 0 || q.lambda[i] > q.n || q.mu[i] < 0)
            throw std::invalid_argument("omega_p_brute: need 0 <= lambda_i <= n and mu_i >= 0");
        lambda_sum += q.lambda[i];
        mu_mod[i] = ipow64(q.p, q.mu[i]);
        table[i].resize(static_cast<std::size_t>(pn));
        for (i64 A = 0; A < pn; ++A)
            table[i][static_cast<std::size_t>(A)] = s_alpha_closed({q.p, q.n, q.lambda[i], A});
    }
    uwide N = 0;
    for (i64 x1 = 0; x1 < pn; ++x1)
        for (i64 x2 = 0; x2 < pn; ++x2) {
            uwide prod = 1;
            for (int i = 0; i < 4 && prod != 0; ++i) {
                const wide v = S[i](x1, x2);
                if (mod_w(v, mu_mod[static_cast<std::size_t>(i)]) != 0) {
                    prod = 0;
                    break;
                }
                prod *= static_cast<uwide>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(mod_w(v, pn))]);
            }
            N += prod;
        }
    return static_cast<double>(static_cast<long double>(N) /
                               std::pow(static_cast<long double>(q.p), 6 * q.n + lambda_sum));
}

// ---------------------------------------------------------------- 2-adic densities

// Residues mod 2^n that are non-zero with odd part = 1 mod 4.
inline bool e_n_member(i64 x, int n) {
    if (n < 3) throw std::domain_error("E_n membership needs n >= 3");
    if (n > 62) throw std::invalid_argument("E_n membership: level too large");
    const u64 mask = (u64{1} << n) - 1;
    const u64 r = static_cast<u64>(x) & mask;
    if (r == 0) return false;
    return ((r >> __builtin_ctzll(r)) & 3) == 1;
}

inline i64 dyadic_exponent(const Rational& q) {
    const i64 den = q.denominator();
    if ((den & (den - 1)) != 0) throw std::invalid_argument("not a dyadic rational: " + to_string(q));
    return __builtin_ctzll(static_cast<u64>(den));
}

// "p/2^k" rendering of a dyadic rational.
inline std::string dyadic_string(const Rational& q) {
    return std::to_string(q.numerator()) + "/2^" + std::to_string(dyadic_exponent(q));
}

inline Rational parse_dyadic(const std::string& s) {
    const auto slash = s.find("/2^");
    if (slash == std::string::npos) return Rational(std::stoll(s));
    const i64 num = std::stoll(s.substr(0, slash));
    const int k = std::stoi(s.substr(slash + 3));
    if (k < 0 || k > 62) throw std::invalid_argument("dyadic exponent out of range in \"" + s + "\"");
    return Rational(num, i64{1} << k);
}

// Brute 2-adic density at level n: #{x mod 2^n : x_1 = 1 mod 4, x_2 = j mod 2, L_i(x) in d_i E_n} / 2^{2n-4}.
// Membership of L in d E_n is tested on d*L, which has the same valuation and odd part mod 4 as L/d.
inline Rational delta_brute(Parity j, int /*k*/, const FormSystem& S, const Quad& d, int n, int workers = 1) {
    if (n < 3) throw std::domain_error("delta_brute: level must be at least 3");
    if (n > 14) throw capacity_error("delta_brute: 4^n cell guard (n <= 14)");
    for (i64 v : d)
        if (v % 2 == 0) throw std::invalid_argument("delta_brute: d must be odd");
    const u64 mask = (u64{1} << n) - 1;
    std::array<u64, 4> ca{}, cb{};
    for (std::size_t i = 0; i < 4; ++i) {
        ca[i] = static_cast<u64>(static_cast<wide>(d[i]) * S[static_cast<int>(i)].a) & mask;
        cb[i] = static_cast<u64>(static_cast<wide>(d[i]) * S[static_cast<int>(i)].b) & mask;
    }
    auto member = [](u64 r) { return r != 0 && ((r >> __builtin_ctzll(r)) & 3) == 1; };
    const i64 rows = i64{1} << (n - 2);  // x_1 = 1 + 4t
    const u64 step = (j == Parity::any) ? 1 : 2;
    const u64 start = (j == Parity::odd) ? 1 : 0;
    const i64 count = parallel_block_sum<i64>(rows, workers, [&](i64 lo, i64 hi) {
        i64 c = 0;
        for (i64 t = lo; t < hi; ++t) {
            const u64 x1 = static_cast<u64>(1 + 4 * t);
            std::array<u64, 4> v{}, inc{};
            for (std::size_t i = 0; i < 4; ++i) {
                v[i] = (ca[i] * x1 + cb[i] * start) & mask;
                inc[i] = (cb[i] * step) & mask;
            }
            for (u64 x2 = start; x2 <= mask; x2 += step) {
                c += member(v[0]) && member(v[1]) && member(v[2]) && member(v[3]);
                for (std::size_t i = 0; i < 4; ++i) v[i] = (v[i] + inc[i]) & mask;
            }
        }
        return c;
    });
    return Rational(count, i64{1} << (2 * n - 4));
}

struct FormProfile {
    int k = 0;    // nu_2 of the coefficient gcd
    int mu = 0;   // nu_2 of the x_1 coefficient after removing 2^k
    int nu = 0;   // same for x_2
    i64 ap = 1;   // odd parts
    i64 bp = 1;
};

struct TwoAdicProfile {
    FormProfile f3, f4;
    int v = 0;  // nu_2(a3' b4' - a4' b3') when all mu, nu vanish; 0 otherwise
};

inline FormProfile form_profile(const LinearForm& L) {
    if (L.a == 0 || L.b == 0) throw std::domain_error("2-adic profile needs non-zero coefficients");
    FormProfile f;
    f.k = std::min(nu2(L.a), nu2(L.b));
    const i64 a = L.a >> f.k, b = L.b >> f.k;
    f.mu = nu2(a);
    f.nu = nu2(b);
    f.ap = a >> f.mu;
    f.bp = b >> f.nu;
    return f;
}

inline TwoAdicProfile two_adic_profile(const LinearForm& L3, const LinearForm& L4) {
    TwoAdicProfile p{form_profile(L3), form_profile(L4), 0};
    if (p.f3.mu == 0 && p.f3.nu == 0 && p.f4.mu == 0 && p.f4.nu == 0) {
        const i64 w = p.f3.ap * p.f4.bp - p.f4.ap * p.f3.bp;
        if (w == 0) throw std::domain_error("2-adic profile: L_3, L_4 proportional");
        p.v = nu2(w);
    }
    return p;
}

inline TwoAdicProfile two_adic_profile(const FormSystem& S) { return two_adic_profile(S[2], S[3]); }

enum class NormKind { k0 = 0, k1 = 1, k2 = 2 };

// Symbolic check of the k-dependent 2-adic congruences on the coefficients. Returns the name of the
// failing condition, or nothing.
inline std::optional<std::string> two_adic_conditions(int k, const FormSystem& S, const Quad& d) {
    auto leading_x1 = [](const LinearForm& L, i64 di) {
        // 2^{-k} L = d x_1 mod 4 for the k = nu_2(a)
        if (L.a == 0) return false;
        const int s = nu2(L.a);
        if (mod_i(L.a >> s, 4) != mod_i(di, 4)) return false;
        return L.b == 0 || nu2(L.b) >= s + 2;
    };
    switch (k) {
        case 0:
            for (int i = 0; i < 4; ++i)
                if (mod_i(S[i].a - d[static_cast<std::size_t>(i)], 4) != 0 || mod_i(S[i].b, 4) != 0)
                    return "(iv): L_" + std::to_string(i + 1) + " is not congruent to d_" + std::to_string(i + 1) +
                           " x_1 mod 4";
            return std::nullopt;
        case 1:
        case 2: {
            const char* tag = k == 1 ? "(iv')" : "(iv'')";
            if (!leading_x1(S[0], d[0])) return std::string(tag) + ": 2^{-k_1} L_1 is not congruent to d_1 x_1 mod 4";
            if (k == 1 && !leading_x1(S[1], d[1]))
                return std::string(tag) + ": 2^{-k_2} L_2 is not congruent to d_2 x_1 mod 4";
            if (k == 2) {
                const auto& L = S[1];
                bool ok = L.b != 0;
                if (ok) {
                    const int s = nu2(L.b);
                    ok = mod_i(L.b >> s, 4) == 1 && (L.a == 0 || nu2(L.a) >= s + 2);
                }
                if (!ok) return std::string(tag) + ": 2^{-k_2} L_2 is not congruent to x_2 mod 4";
            }
            for (int i = 2; i < 4; ++i)
                if (S[i].a == 0 || S[i].b == 0)
                    return std::string(tag) + ": L_" + std::to_string(i + 1) + " has a zero coefficient";
            return std::nullopt;
        }
        default: throw std::invalid_argument("normalisation kind must be 0, 1 or 2");
    }
}

namespace detail {

using FormPair = std::array<LinearForm, 2>;

inline FormPair compose(const FormPair& A, const IntMat2& M) {
    FormPair out;
    for (std::size_t i = 0; i < 2; ++i)
        out[i] = LinearForm(A[i].a * M.m11 + A[i].b * M.m21, A[i].a * M.m12 + A[i].b * M.m22);
    return out;
}

inline bool residue_eq(i64 x, i64 y) { return mod_i(x - y, 4) == 0; }

// delta_{1,1} for the pair (L_3, L_4): five branches on which of mu_j, nu_j vanish.
inline Rational delta_11(const FormPair& A, i64 d3, i64 d4) {
    const TwoAdicProfile P = two_adic_profile(A[0], A[1]);
    const std::array<FormProfile, 2> f{P.f3, P.f4};
    const std::array<i64, 2> d{d3, d4};
    enum Kind { zero, mu, nu };
    auto kind = [](const FormProfile& g) { return g.mu > 0 ? mu : (g.nu > 0 ? nu : zero); };
    auto nu_ok = [&](int i) { return residue_eq(f[i].ap, d[i] - (i64{1} << std::min(f[i].nu, 2))); };
    const Kind k3 = kind(f[0]), k4 = kind(f[1]);
    if (k3 == mu && k4 == mu) {
        const i64 l = f[0].bp * d3 - (i64{1} << std::min(f[0].mu, 2));
        const i64 r = f[1].bp * d4 - (i64{1} << std::min(f[1].mu, 2));
        return Rational(residue_eq(l, r) ? 1 : 0);
    }
    if (k3 == nu && k4 == nu) return Rational(nu_ok(0) && nu_ok(1) ? 2 : 0);
    if ((k3 == nu && k4 == mu) || (k3 == mu && k4 == nu)) return Rational(nu_ok(k3 == nu ? 0 : 1) ? 1 : 0);
    if ((k3 == zero && k4 == nu) || (k3 == nu && k4 == zero)) return Rational(nu_ok(k3 == nu ? 0 : 1) ? 1 : 0);
    if ((k3 == zero && k4 == mu) || (k3 == mu && k4 == zero)) return Rational(1, 2);
    if (P.v == 1) return Rational(1, 2);
    const Rational tail(3, i64{1} << std::min(P.v, 62));
    if (residue_eq(f[0].bp * d3, f[1].bp * d4)) return Rational(1) - tail;
    return tail;
}

// sum_{xi >= start} term(xi) / 2^xi where term is constant from xi0 on; the tail is summed exactly.
template <class Term>
Rational stabilised_series(int start, int xi0, Term term) {
    xi0 = std::max(xi0, start);
    Rational s(0);
    for (int xi = start; xi < xi0; ++xi) s += term(xi) / Rational(i64{1} << xi);
    const Rational T = term(xi0);
    for (int extra = 1; extra <= 3; ++extra)
        if (term(xi0 + extra) != T) throw std::logic_error("2-adic series failed to stabilise at the predicted index");
    return s + T * Rational(2, i64{1} << xi0);
}

inline IntMat2 mxi(int xi) { return IntMat2(1, 0, 0, i64{1} << xi); }

// delta_{*,1} (start = 0) or delta_{0,1} (start = 1) through the M_xi series. Beyond
// xi0 the x_2 part of both forms has valuation >= 2 above the x_1 part and delta_{1,1} is frozen.
inline Rational series_k1(const FormPair& A, i64 d3, i64 d4, int start) {
    int xi0 = 0;
    for (const auto& L : A) xi0 = std::max(xi0, nu2(L.a) - nu2(L.b) + 2);
    return stabilised_series(start, xi0, [&](int xi) { return delta_11(compose(A, mxi(xi)), d3, d4); });
}

inline int kappa(i64 d2) { return mod_i(d2, 4) == 1 ? 1 : -1; }

inline IntMat2 mcd(int c, i64 d2) { return IntMat2(1, 0, kappa(d2) + 4 * c, 4); }

inline int choose_c(const FormPair& A, i64 d2) {
    for (int c = 0; c <= 2; ++c) {
        const i64 s = kappa(d2) + 4 * c;
        if (A[0].a + A[0].b * s != 0 && A[1].a + A[1].b * s != 0) return c;
    }
    throw std::logic_error("no admissible c in {0,1,2}");
}

// delta_{1,2} = delta_{*,1}(A M_{c,d2}) / 4.
inline Rational delta_12(const FormPair& A, i64 d2, i64 d3, i64 d4) {
    const FormPair B = compose(A, mcd(choose_c(A, d2), d2));
    return series_k1(B, d3, d4, 0) / Rational(4);
}

}  // namespace detail

inline IntMat2 m_xi(int xi) {
    if (xi < 0 || xi > 60) throw std::invalid_argument("m_xi: xi out of range");
    return detail::mxi(xi);
}

inline IntMat2 m_cd2(int c, i64 d2) {
    if (c < 0 || c > 2) throw std::invalid_argument("m_cd2: c must be in {0,1,2}");
    if (d2 % 2 == 0) throw std::invalid_argument("m_cd2: d_2 must be odd");
    return detail::mcd(c, d2);
}

// Closed-form delta_{j,k}(A, d).
inline Rational delta_closed(Parity j, int k, const FormSystem& S, const Quad& d) {
    if (auto why = two_adic_conditions(k, S, d)) throw std::domain_error("delta_closed: " + *why);
    if (k == 0) return Rational(j == Parity::any ? 4 : 2);
    const detail::FormPair A{S[2], S[3]};
    const i64 d2 = d[1], d3 = d[2], d4 = d[3];
    if (k == 1) {
        if (j == Parity::odd) return detail::delta_11(A, d3, d4);
        return detail::series_k1(A, d3, d4, j == Parity::even ? 1 : 0);
    }
    if (j == Parity::odd) return detail::delta_12(A, d2, d3, d4);
    // x_2 = 2^xi y_2 keeps L_2 of the required shape only when L_2 does not involve x_1.
    if (S[1].a != 0)
        throw std::domain_error("delta_closed: for k = 2 and j in {0, *} the form L_2 must not involve x_1");
    int xi0 = 0;
    for (const auto& L : A) xi0 = std::max(xi0, nu2(L.a) + 3);
    return detail::stabilised_series(j == Parity::even ? 1 : 0, xi0, [&](int xi) {
        return detail::delta_12(detail::compose(A, detail::mxi(xi)), d2, d3, d4);
    });
}

// ---------------------------------------------------------------- archimedean density

struct Quadrature {
    double value = 0.0;
    double error = 0.0;
};

// 2^4 * integral over R of prod_i int_0^{sqrt(A_i)} ds / sqrt(A_i - s^2), A_i = L_i(x)/d_i.
// The inner integrals use s = sqrt(A) sin(theta); the outer one is a Duffy-mapped fan of triangles.
inline Quadrature omega_infinity(const FormSystem& S, const Quad& d, const ConvexRegion& R, double tol = 1e-10) {
    if (!(tol > 0)) throw std::invalid_argument("omega_infinity: tolerance must be positive");
    for (const auto& v : R.vertices())
        for (int i = 0; i < 4; ++i)
            if (S[i](v) < 0) throw std::domain_error("omega_infinity: L_" + std::to_string(i + 1) + " is negative on R");
    using boost::math::quadrature::gauss_kronrod;
    const double half_pi = boost::math::constants::half_pi<double>();
    double inner_err = 0.0;
    auto inner = [&](double A) {
        const double root = std::sqrt(A);
        double err = 0.0;
        const double val = gauss_kronrod<double, 15>::integrate(
            [&](double th) {
                // A - s^2 = A (1 - sin th)(1 + sin th), 1 - sin th = 2 sin^2(pi/4 - th/2)
                const double h = std::sin(0.5 * (half_pi - th));
                const double den = root * std::sqrt(2.0 * h * h * (1.0 + std::sin(th)));
                return den > 0 ? root * std::cos(th) / den : 1.0;
            },
            0.0, half_pi, 5, 1e-14, &err);
        inner_err = std::max(inner_err, err);
        return val;
    };
    auto density = [&](double x1, double x2) {
        double prod = 16.0;
        for (int i = 0; i < 4; ++i)
            prod *= inner((S[i].a * x1 + S[i].b * x2) / static_cast<double>(d[static_cast<std::size_t>(i)]));
        return prod;
    };
    const auto& V = R.vertices();
    auto as_d = [](const Rational& q) { return boost::rational_cast<double>(q); };
    Quadrature out;
    for (std::size_t t = 1; t + 1 < V.size(); ++t) {
        const double p0x = as_d(V[0].x), p0y = as_d(V[0].y);
        const double e1x = as_d(V[t].x) - p0x, e1y = as_d(V[t].y) - p0y;
        const double e2x = as_d(V[t + 1].x - V[t].x), e2y = as_d(V[t + 1].y - V[t].y);
        const double jac = std::abs(e1x * e2y - e1y * e2x);
        double err_outer = 0.0;
        const double val = gauss_kronrod<double, 15>::integrate(
            [&](double u) {
                double err_in = 0.0;
                const double row = gauss_kronrod<double, 15>::integrate(
                    [&](double w) { return density(p0x + u * e1x + u * w * e2x, p0y + u * e1y + u * w * e2y); },
                    0.0, 1.0, 5, tol * 1e-2, &err_in);
                return u * jac * row;
            },
            0.0, 1.0, 5, tol * 1e-2, &err_outer);
        out.value += val;
        out.error += err_outer;
    }
    out.error += inner_err * out.value;
    return out;
}

// ---------------------------------------------------------------- assembled constants

struct DensityReport {
    Rational delta{0};
    double euler = 1.0;
    i64 euler_cutoff = 0;
    double arch = 0.0;
    double c = 0.0;
    std::string route;
    int depth = 0;
    double max_last_term = 0.0;   // largest final-shell magnitude among the local factors
    double tail_heuristic = 0.0;  // rough size of log prod_{p > P} sigma_p, not a bound
    i64 det_gamma = 1;
};

constexpr const char* route_lattice = "lattice-density";
constexpr const char* route_local = "local-densities";

inline double euler_tail_heuristic(i64 P) {
    const double x = static_cast<double>(std::max<i64>(P, 3));
    return 4.0 / (x * std::log(x));
}

struct EulerProduct {
    double value = 1.0;
    double max_last_term = 0.0;
    std::vector<LocalFactor> factors;
};

template <class Factor>
EulerProduct euler_product(i64 P, Factor factor) {
    if (P < 3) throw std::invalid_argument("prime cutoff must be at least 3");
    EulerProduct out;
    for (i64 p : primes_up_to(P)) {
        if (p == 2) continue;
        LocalFactor f = factor(p);
        out.value *= f.value;
        out.max_last_term = std::max(out.max_last_term, f.last_term);
        out.factors.push_back(f);
    }
    return out;
}

// delta_{j,k} * pi^4 * meas(R) / det Gamma_D * prod_{2 < p <= P} sigma_p.
inline DensityReport predicted_constant(Parity j, int k, const FormSystem& S, const DParams& dp, const ConvexRegion& R,
                                        i64 P = 1000, int depth = max_depth) {
    DensityReport rep;
    rep.route = route_lattice;
    rep.delta = delta_closed(j, k, S, dp.d);
    rep.det_gamma = gamma_lattice(dp.D, S).det();
    const auto E = euler_product(P, [&](i64 p) { return sigma_p_general(p, S, dp, depth); });
    rep.euler = E.value;
    rep.euler_cutoff = P;
    rep.depth = depth;
    rep.max_last_term = E.max_last_term;
    rep.tail_heuristic = euler_tail_heuristic(P);
    const double pi = boost::math::constants::pi<double>();
    rep.arch = pi * pi * pi * pi * boost::rational_cast<double>(measure(R));
    rep.c = boost::rational_cast<double>(rep.delta) * rep.arch / static_cast<double>(rep.det_gamma) * rep.euler;
    return rep;
}

// omega_R(infinity) * delta at level n2 * prod_{2 < p <= P} c_p.
inline DensityReport local_product_constant(Parity j, int k, const FormSystem& S, const DParams& dp,
                                            const ConvexRegion& R, i64 P = 1000, int depth = max_depth,
                                            int n2 = 12, int workers = 1) {
    DensityReport rep;
    rep.route = route_local;
    rep.delta = delta_brute(j, k, S, dp.d, n2, workers);
    rep.det_gamma = gamma_lattice(dp.D, S).det();
    const auto E = euler_product(P, [&](i64 p) { return c_p_closed(p, S, dp, depth); });
    rep.euler = E.value;
    rep.euler_cutoff = P;
    rep.depth = depth;
    rep.max_last_term = E.max_last_term;
    rep.tail_heuristic = euler_tail_heuristic(P);
    rep.arch = omega_infinity(S, dp.d, R).value;
    rep.c = rep.arch * boost::rational_cast<double>(rep.delta) * rep.euler;
    return rep;
}

}  // namespace twosq
