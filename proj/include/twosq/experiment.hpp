#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "arith.hpp"
#include "densities.hpp"
#include "geometry.hpp"
#include "lattice.hpp"

namespace twosq {

struct NhResult {
    bool ok = true;
    std::string condition;  // "(ii)", "(iii)", "(iv)", "(iv')", "(iv'')"
    std::string message;
};

inline NhResult nh_check(int k, const FormSystem& S, const Quad& d, const ConvexRegion& R) {
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (cross_coeff(S[i], S[j]) == 0)
                return {false, "(ii)", "L_" + std::to_string(i + 1) + " and L_" + std::to_string(j + 1) + " are proportional"};
    // Linear forms that are >= 0 at every vertex are > 0 on the open polygon.
    for (const auto& v : R.vertices())
        for (int i = 0; i < 4; ++i)
            if (S[i](v) < 0)
                return {false, "(iii)", "L_" + std::to_string(i + 1) + " is negative at vertex (" + to_string(v.x) +
                                            ", " + to_string(v.y) + ")"};
    if (auto why = two_adic_conditions(k, S, d)) {
        const auto colon = why->find(':');
        return {false, why->substr(0, colon), *why};
    }
    return {};
}

struct ExperimentConfig {
    FormSystem system;
    ConvexRegion region;
    DParams dp;
    Parity j = Parity::any;
    int k = 0;
    std::vector<Rational> X_ladder;
    i64 prime_cutoff = 1000;
    int depth = max_depth;
    int n2 = 12;
    int workers = 0;

    // Throws std::invalid_argument naming the failed hypothesis.
    void validate() const {
        dp.validate();
        if (k < 0 || k > 2) throw std::invalid_argument("k must be 0, 1 or 2");
        const NhResult nh = nh_check(k, system, dp.d, region);
        if (!nh.ok) throw std::invalid_argument("normalisation hypothesis " + nh.condition + " fails: " + nh.message);
        if (prime_cutoff < 3) throw std::invalid_argument("prime_cutoff must be at least 3");
        if (depth < 0 || depth > max_depth) throw std::invalid_argument("depth must lie in [0, 24]");
        if (n2 < 3 || n2 > 14) throw std::invalid_argument("two_adic_level must lie in [3, 14]");
        for (std::size_t i = 0; i < X_ladder.size(); ++i) {
            if (X_ladder[i] <= 0) throw std::invalid_argument("X_ladder entries must be positive");
            if (i > 0 && X_ladder[i] <= X_ladder[i - 1]) throw std::invalid_argument("X_ladder must be increasing");
        }
        if (!X_ladder.empty()) {
            const double rp = boost::rational_cast<double>(r_prime(system, region));
            const double x0 = boost::rational_cast<double>(X_ladder.front());
            if (rp * std::pow(x0, 0.99) < 1.0)
                throw std::invalid_argument("range hypothesis r' X^(1 - 0.01) >= 1 fails for the smallest X");
        }
        const bool full_coefficients = system[2].a != 0 && system[2].b != 0 && system[3].a != 0 && system[3].b != 0;
        if (full_coefficients && !coordinate_bound_holds(system, region))
            throw std::logic_error("coordinate bound r_inf <= 2 L_inf r' violated");
    }
};

// Upper bound for L_i(x)/d_i over X*R, padded by one.
inline i64 sieve_bound(const Rational& X, const FormSystem& S, const Quad& d, const ConvexRegion& R) {
    Rational m(0);
    for (const auto& v : R.vertices())
        for (int i = 0; i < 4; ++i) m = std::max(m, abs(S[i](v)) * X / d[static_cast<std::size_t>(i)]);
    return m.numerator() / m.denominator() + 1;
}

namespace detail {

inline const RTable& ensure_table(std::shared_ptr<const RTable>& holder, i64 bound) {
    if (!holder || holder->size() < bound) holder = std::make_shared<const RTable>(bound);
    return *holder;
}

inline uwide r_product(const RTable& r, const FormSystem& S, const Quad& d, i64 x1, i64 x2) {
    uwide prod = 1;
    for (int i = 0; i < 4; ++i) {
        const wide v = S[i](x1, x2);
        const i64 di = d[static_cast<std::size_t>(i)];
        if (v <= 0 || v % di != 0) throw std::logic_error("form value is not a positive multiple of d_i");
        const i64 rv = r[static_cast<i64>(v / di)];
        if (rv == 0) return 0;
        prod *= static_cast<uwide>(rv);
    }
    return prod;
}

inline u64 narrow_sum(uwide s) {
    if (s > std::numeric_limits<u64>::max()) throw capacity_error("sum exceeds 64 bits");
    return static_cast<u64>(s);
}

}  // namespace detail

// sum over x in Gamma_D, x in X*R, x_1 odd, x_2 = j mod 2 of prod_i r(L_i(x)/d_i).
inline u64 sum_brute(const Rational& X, const ExperimentConfig& cfg, std::shared_ptr<const RTable> table = nullptr) {
    const auto& S = cfg.system;
    const Quad& d = cfg.dp.d;
    const RTable& r = detail::ensure_table(table, sieve_bound(X, S, d, cfg.region));
    const Lattice2 lat = gamma_lattice(cfg.dp.D, S);
    const int W = worker_count(cfg.workers);
    return detail::narrow_sum(parallel_block_sum<uwide>(W, W, [&](i64 lo, i64 hi) {
        uwide acc = 0;
        for (i64 part = lo; part < hi; ++part)
            for_each_point(
                X, cfg.region, lat, cfg.j,
                [&](i64 x1, i64 x2) { acc += detail::r_product(r, S, d, x1, x2); },
                Partition{static_cast<int>(part), W});
        return acc;
    }));
}

struct TransformedSum {
    u64 pulled_back = 0;  // route (a): y over Gamma(D; L o M) in X*R_M
    u64 inverted = 0;     // route (b): x over Gamma_D in X*R, kept when x = M y
    bool agree() const { return pulled_back == inverted; }
};

inline TransformedSum transformed_sum(const Rational& X, const ExperimentConfig& cfg, const IntMat2& M,
                                      std::shared_ptr<const RTable> table = nullptr) {
    const auto& S = cfg.system;
    const Quad& d = cfg.dp.d;
    const RTable& r = detail::ensure_table(table, sieve_bound(X, S, d, cfg.region));
    const int W = worker_count(cfg.workers);
    TransformedSum out;

    const FormSystem SM = transform_forms(S, M);
    const Lattice2 pulled = gamma_lattice(cfg.dp.D, SM);
    const ConvexRegion RM = transform_region(cfg.region, M);
    out.pulled_back = detail::narrow_sum(parallel_block_sum<uwide>(W, W, [&](i64 lo, i64 hi) {
        uwide acc = 0;
        for (i64 part = lo; part < hi; ++part)
            for_each_point(
                X, RM, pulled, cfg.j, [&](i64 y1, i64 y2) { acc += detail::r_product(r, SM, d, y1, y2); },
                Partition{static_cast<int>(part), W});
        return acc;
    }));

    const Lattice2 lat = gamma_lattice(cfg.dp.D, S);
    const wide det = M.det();
    out.inverted = detail::narrow_sum(parallel_block_sum<uwide>(W, W, [&](i64 lo, i64 hi) {
        uwide acc = 0;
        for (i64 part = lo; part < hi; ++part)
            for_each_lattice_point(
                X, cfg.region, lat,
                [&](i64 x1, i64 x2) {
                    const wide n1 = static_cast<wide>(M.m22) * x1 - static_cast<wide>(M.m12) * x2;
                    const wide n2 = static_cast<wide>(M.m11) * x2 - static_cast<wide>(M.m21) * x1;
                    if (n1 % det != 0 || n2 % det != 0) return;
                    if (!parity_matches(cfg.j, static_cast<i64>(n1 / det), static_cast<i64>(n2 / det))) return;
                    acc += detail::r_product(r, S, d, x1, x2);
                },
                Partition{static_cast<int>(part), W});
        return acc;
    }));
    return out;
}

struct XiPair {
    int xi3 = 0, xi4 = 0;
};

// nu_2(2^{-k_j} L_j(x)) for j = 3, 4.
inline XiPair xi_extract(const FormSystem& S, const IVec& x) {
    XiPair out;
    int* slot[2] = {&out.xi3, &out.xi4};
    for (int j = 2; j < 4; ++j) {
        const wide v = S[j](x[0], x[1]);
        if (v == 0) throw std::domain_error("xi_extract: L_" + std::to_string(j + 1) + "(x) = 0");
        const int k = std::min(S[j].a == 0 ? 62 : nu2(S[j].a), S[j].b == 0 ? 62 : nu2(S[j].b));
        *slot[j - 2] = valuation(v, 2) - k;
    }
    return out;
}

struct LadderRow {
    Rational X{1};
    u64 S = 0;
    double S_over_X2 = 0.0;
    double c = 0.0;
    double rel_err = std::numeric_limits<double>::quiet_NaN();  // undefined when c = 0
};

struct AsymptoticTable {
    std::vector<LadderRow> rows;
    DensityReport report;
};

inline AsymptoticTable asymptotic_table(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.X_ladder.empty()) throw std::invalid_argument("asymptotic_table: empty X ladder");
    AsymptoticTable out;
    out.report = predicted_constant(cfg.j, cfg.k, cfg.system, cfg.dp, cfg.region, cfg.prime_cutoff, cfg.depth);
    auto table = std::make_shared<const RTable>(sieve_bound(cfg.X_ladder.back(), cfg.system, cfg.dp.d, cfg.region));
    for (const auto& X : cfg.X_ladder) {
        LadderRow row;
        row.X = X;
        row.S = sum_brute(X, cfg, table);
        const double x = boost::rational_cast<double>(X);
        row.S_over_X2 = static_cast<double>(row.S) / (x * x);
        row.c = out.report.c;
        if (row.c > 0) row.rel_err = std::abs(row.S_over_X2 - row.c) / row.c;
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace twosq
