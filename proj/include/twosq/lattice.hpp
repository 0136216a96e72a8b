#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>

#include "arith.hpp"
#include "geometry.hpp"

namespace twosq {

using Quad = std::array<i64, 4>;
using WideQuad = std::array<wide, 4>;

struct DParams {
    Quad d{1, 1, 1, 1};
    Quad D{1, 1, 1, 1};

    DParams() = default;
    DParams(Quad d_, Quad D_) : d(d_), D(D_) { validate(); }

    // Membership in the admissible set: odd, positive, d_i | D_i.
    void validate() const {
        for (int i = 0; i < 4; ++i) {
            const std::string idx = std::to_string(i + 1);
            if (d[i] < 1 || D[i] < 1) throw std::invalid_argument("d_" + idx + " and D_" + idx + " must be positive");
            if (d[i] % 2 == 0) throw std::invalid_argument("d_" + idx + " = " + std::to_string(d[i]) + " is even; (d, D) must have odd entries with d_i | D_i");
            if (D[i] % 2 == 0) throw std::invalid_argument("D_" + idx + " = " + std::to_string(D[i]) + " is even; (d, D) must have odd entries with d_i | D_i");
            if (D[i] % d[i] != 0) throw std::invalid_argument("d_" + idx + " does not divide D_" + idx + "; (d, D) requires d_i | D_i");
        }
    }

    friend bool operator==(const DParams&, const DParams&) = default;
};

// Sublattice in Hermite form: { u*(alpha, beta) + v*(0, gamma) }, 0 <= beta < gamma.
struct HermiteLattice {
    wide alpha = 1, beta = 0, gamma = 1;

    wide det() const { return mul_checked(alpha, gamma); }

    bool contains(wide x1, wide x2) const {
        if (x1 % alpha != 0) return false;
        return (x2 - (x1 / alpha) * beta) % gamma == 0;
    }

    // Intersect with { x : h | a*x1 + b*x2 }.
    HermiteLattice restrict(const LinearForm& f, wide h) const {
        if (h < 1) throw std::invalid_argument("divisibility modulus must be positive");
        if (h == 1) return *this;
        // Condition on (u, v): h | u*P + v*Q.
        const wide P = mod_w(mul_checked(f.a, alpha) + mul_checked(f.b, beta), h);
        const wide Q = mod_w(mul_checked(f.b, gamma), h);
        const wide g = gcd_w(Q, h);
        const wide u_step = g / gcd_w(g, P);
        const wide v_mod = h / g;
        wide v_shift = 0;
        if (v_mod > 1) {
            // u_step * P / g = P / gcd(g, P)
            const wide rhs = mod_w(-(P / gcd_w(g, P)), v_mod);
            v_shift = mulmod(rhs, inverse_mod(Q / g, v_mod), v_mod);
        }
        HermiteLattice out;
        out.alpha = mul_checked(alpha, u_step);
        out.gamma = mul_checked(gamma, v_mod);
        out.beta = mod_w(mul_checked(u_step, beta) + mul_checked(v_shift, gamma), out.gamma);
        return out;
    }
};

inline HermiteLattice congruence_lattice(const WideQuad& h, const FormSystem& S) {
    HermiteLattice L;
    for (int i = 0; i < 4; ++i) L = L.restrict(S[i], h[static_cast<std::size_t>(i)]);
    return L;
}

inline WideQuad widen(const Quad& h) { return {h[0], h[1], h[2], h[3]}; }

inline Lattice2 to_lattice2(const HermiteLattice& H) {
    const wide lim = std::numeric_limits<i64>::max() / 4;
    if (H.alpha > lim || H.gamma > lim) throw capacity_error("lattice basis does not fit 64-bit coordinates");
    return {{static_cast<i64>(H.alpha), static_cast<i64>(H.beta)}, {0, static_cast<i64>(H.gamma)}};
}

// det of { x : h_i | L_i(x) } as M^2 / #{x mod M}, one prime-power block of M at a time.
inline i64 det_by_counting(const Quad& h, const FormSystem& S, i64 block_limit = 10'000) {
    i64 M = 1;
    for (i64 v : h) {
        if (v < 1) throw std::invalid_argument("divisibility moduli must be positive");
        M = std::lcm(M, v);
    }
    i64 det = 1;
    for (auto [p, e] : factorize(M)) {
        const i64 q = ipow64(p, e);
        if (q > block_limit) throw capacity_error("residue block " + std::to_string(q) + " exceeds the counting guard");
        std::array<i64, 4> hp{};
        for (int i = 0; i < 4; ++i) hp[static_cast<std::size_t>(i)] = ipow64(p, h[static_cast<std::size_t>(i)] % p == 0 ? valuation(h[static_cast<std::size_t>(i)], p) : 0);
        i64 count = 0;
        for (i64 x1 = 0; x1 < q; ++x1)
            for (i64 x2 = 0; x2 < q; ++x2) {
                bool ok = true;
                for (int i = 0; i < 4 && ok; ++i) ok = mod_w(S[i](x1, x2), hp[static_cast<std::size_t>(i)]) == 0;
                count += ok;
            }
        det *= q * q / count;
    }
    return det;
}

inline Lattice2 gamma_lattice(const Quad& D, const FormSystem& S) {
    const HermiteLattice H = congruence_lattice(widen(D), S);
    const i64 counted = det_by_counting(D, S);
    if (H.det() != counted)
        throw std::logic_error("lattice determinant mismatch between basis and residue count");
    return to_lattice2(H);
}

inline wide rho_star(const WideQuad& h, const FormSystem& S) {
    for (wide v : h)
        if (v < 1) throw std::invalid_argument("rho_*: entries must be positive");
    return congruence_lattice(h, S).det();
}

inline wide rho_star(const Quad& h, const FormSystem& S) { return rho_star(widen(h), S); }

// det Gamma([D_i, d_i h_i]) / det Gamma(D).
inline wide rho_0(const WideQuad& h, const DParams& dp, const FormSystem& S) {
    WideQuad top{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (h[i] < 1) throw std::invalid_argument("rho_0: entries must be positive");
        const wide dh = mul_checked(dp.d[i], h[i]);
        top[i] = dh / gcd_w(dh, dp.D[i]) * dp.D[i];
    }
    const wide num = congruence_lattice(top, S).det();
    const wide den = congruence_lattice(widen(dp.D), S).det();
    if (num % den != 0) throw std::logic_error("rho_0: sublattice index is not an integer");
    return num / den;
}

inline wide rho_0(const Quad& h, const DParams& dp, const FormSystem& S) { return rho_0(widen(h), dp, S); }

namespace detail {

inline wide norm2(const IVec& v) { return static_cast<wide>(v[0]) * v[0] + static_cast<wide>(v[1]) * v[1]; }
inline wide dot(const IVec& a, const IVec& b) { return static_cast<wide>(a[0]) * b[0] + static_cast<wide>(a[1]) * b[1]; }

inline i64 round_div(wide a, wide b) {
    // nearest integer to a/b, b > 0
    wide q = a / b, r = a % b;
    if (r < 0) {
        --q;
        r += b;
    }
    if (2 * r > b) ++q;
    return static_cast<i64>(q);
}

}  // namespace detail

// Gauss-Lagrange reduction: |e1| <= |e2| and |<e1,e2>| <= |e1|^2 / 2.
inline Lattice2 lagrange_reduce(Lattice2 L) {
    IVec a = L.e1, b = L.e2;
    if (detail::norm2(a) > detail::norm2(b)) std::swap(a, b);
    while (true) {
        const i64 k = detail::round_div(detail::dot(a, b), detail::norm2(a));
        b = {b[0] - k * a[0], b[1] - k * a[1]};
        if (detail::norm2(b) >= detail::norm2(a)) break;
        std::swap(a, b);
    }
    return {a, b};
}

// Basis of Gamma_D with e_11 = 1 mod 4 and 4 | e_21. Among unimodular combinations of the reduced
// basis with coefficients in [-3, 3], the one minimising |e1|*|e2| is returned.
inline Lattice2 normalized_basis(const Quad& D, const FormSystem& S) {
    for (int i = 0; i < 4; ++i)
        if (D[static_cast<std::size_t>(i)] % 2 == 0 || D[static_cast<std::size_t>(i)] < 1)
            throw std::invalid_argument("normalized_basis: all D_i must be odd and positive");
    const Lattice2 red = lagrange_reduce(gamma_lattice(D, S));
    const IVec& b1 = red.e1;
    const IVec& b2 = red.e2;
    std::optional<Lattice2> best;
    long double best_score = 0;
    auto combo = [&](i64 m, i64 n) { return IVec{m * b1[0] + n * b2[0], m * b1[1] + n * b2[1]}; };
    auto positive_first = [](const IVec& v) { return v[0] > 0 || (v[0] == 0 && v[1] > 0); };
    for (i64 m1 = -3; m1 <= 3; ++m1)
        for (i64 n1 = -3; n1 <= 3; ++n1)
            for (i64 m2 = -3; m2 <= 3; ++m2)
                for (i64 n2 = -3; n2 <= 3; ++n2) {
                    const i64 unimod = m1 * n2 - n1 * m2;
                    if (unimod != 1 && unimod != -1) continue;
                    const IVec e1 = combo(m1, n1), e2 = combo(m2, n2);
                    if (mod_i(e1[0], 4) != 1 || mod_i(e2[0], 4) != 0) continue;
                    if (!positive_first(e2)) continue;
                    const long double score = std::sqrt(static_cast<long double>(detail::norm2(e1))) *
                                              std::sqrt(static_cast<long double>(detail::norm2(e2)));
                    if (!best || score < best_score ||
                        (score == best_score && std::tie(e1, e2) < std::tie(best->e1, best->e2))) {
                        best = Lattice2{e1, e2};
                        best_score = score;
                    }
                }
    if (!best) throw std::logic_error("normalized_basis: no basis with odd first coordinate found");
    return *best;
}

struct IndexCheck {
    i64 det_a = 0, det_b = 0, det_intersection = 0;
    bool holds = false;
};

inline bool lattice_contains(const Lattice2& L, i64 x1, i64 x2) {
    // x = u e1 + v e2 with integral (u, v) iff adj(B) x = 0 mod det B
    const wide d = static_cast<wide>(L.e1[0]) * L.e2[1] - static_cast<wide>(L.e2[0]) * L.e1[1];
    const wide u = static_cast<wide>(L.e2[1]) * x1 - static_cast<wide>(L.e2[0]) * x2;
    const wide v = static_cast<wide>(L.e1[0]) * x2 - static_cast<wide>(L.e1[1]) * x1;
    return u % d == 0 && v % d == 0;
}

// [Z^2 : A n B] by counting residues modulo det A * det B, compared with det A * det B.
inline IndexCheck index_product_check(const Lattice2& A, const Lattice2& B) {
    IndexCheck out{A.det(), B.det(), 0, false};
    if (std::gcd(out.det_a, out.det_b) != 1)
        throw std::invalid_argument("index_product_check: determinants must be coprime");
    const i64 N = out.det_a * out.det_b;
    if (static_cast<wide>(N) * N > 100'000'000) throw capacity_error("index_product_check: N^2 exceeds 1e8");
    i64 count = 0;
    for (i64 x1 = 0; x1 < N; ++x1)
        for (i64 x2 = 0; x2 < N; ++x2) count += lattice_contains(A, x1, x2) && lattice_contains(B, x1, x2);
    out.det_intersection = N * N / count;
    out.holds = out.det_intersection == N;
    return out;
}

// Forms y -> L_i(M y).
inline FormSystem transform_forms(const FormSystem& S, const IntMat2& M) {
    std::array<LinearForm, 4> out;
    for (int i = 0; i < 4; ++i) {
        const auto& f = S[i];
        out[static_cast<std::size_t>(i)] = LinearForm(f.a * M.m11 + f.b * M.m21, f.a * M.m12 + f.b * M.m22);
    }
    return FormSystem(out);
}

inline Lattice2 image(const IntMat2& M, const Lattice2& L) { return {M(L.e1), M(L.e2)}; }

struct DetInvariance {
    i64 det_original = 0, det_transformed = 0;
    bool holds = false;
};

inline bool is_power_of_two(i64 v) { return v > 0 && (v & (v - 1)) == 0; }

inline DetInvariance det_invariance_check(const Quad& D, const FormSystem& S, const IntMat2& M) {
    const i64 dm = M.det() < 0 ? -M.det() : M.det();
    if (!is_power_of_two(dm)) throw std::invalid_argument("det_invariance_check: |det M| must be a power of 2");
    for (i64 v : D)
        if (v < 1 || v % 2 == 0) throw std::invalid_argument("det_invariance_check: D must be odd");
    DetInvariance out;
    out.det_original = det_by_counting(D, S);
    out.det_transformed = det_by_counting(D, transform_forms(S, M));
    out.holds = out.det_original == out.det_transformed;
    return out;
}

}  // namespace twosq
