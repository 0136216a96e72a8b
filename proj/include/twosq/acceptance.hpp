#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "arith.hpp"
#include "densities.hpp"
#include "experiment.hpp"
#include "lattice.hpp"

namespace twosq::acceptance {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;  // wall-clock limit in seconds
};

struct SuiteOptions {
    int workers = 0;
    std::function<void(const std::string&)> log = [](const std::string&) {};
};

// L = (x1, 5x1 + 4x2, x1 + 4x2, 9x1 + 8x2) on (1,2) x (0,1), d = D = 1, j = *, k = 0.
inline ExperimentConfig demo_config() {
    ExperimentConfig cfg;
    cfg.system = FormSystem({LinearForm{1, 0}, LinearForm{5, 4}, LinearForm{1, 4}, LinearForm{9, 8}});
    cfg.region = ConvexRegion::rectangle(1, 0, 2, 1);
    cfg.X_ladder = {250, 500, 1000, 2000, 4000};
    return cfg;
}

// One system of the 2-adic branch suite; parities lists the selectors with a closed form.
struct TwoAdicCase {
    std::string name;
    std::array<LinearForm, 4> forms;
    Quad d;
    int k;
    std::vector<Parity> parities{Parity::odd, Parity::even, Parity::any};
};

inline std::vector<TwoAdicCase> two_adic_suite() {
    using F = LinearForm;
    return {
        {"k0 demo", {F{1, 0}, F{5, 4}, F{1, 4}, F{9, 8}}, {1, 1, 1, 1}, 0},
        {"k0 with d_1 = 3", {F{3, 0}, F{1, 4}, F{5, 4}, F{9, 8}}, {3, 1, 1, 1}, 0},
        {"k1 unit profile v=1", {F{1, 0}, F{1, 4}, F{1, 1}, F{1, 3}}, {1, 1, 1, 1}, 1},
        {"k1 unit profile v=2 same sign", {F{1, 0}, F{1, 4}, F{1, 1}, F{3, 7}}, {1, 1, 1, 1}, 1},
        {"k1 unit profile v=2 opposite sign", {F{1, 0}, F{1, 4}, F{1, 1}, F{5, 1}}, {1, 1, 1, 1}, 1},
        {"k1 unit profile v=3 same sign", {F{1, 0}, F{1, 4}, F{1, 1}, F{9, 1}}, {1, 1, 1, 1}, 1},
        {"k1 unit profile v=3 opposite sign", {F{1, 0}, F{1, 4}, F{1, 1}, F{3, 11}}, {1, 1, 1, 1}, 1},
        {"k1 even x1-coefficients, vanishing", {F{1, 0}, F{1, 4}, F{2, 1}, F{2, 3}}, {1, 1, 1, 1}, 1},
        {"k1 even x1-coefficients, surviving", {F{1, 0}, F{1, 4}, F{2, 1}, F{2, 5}}, {1, 1, 1, 1}, 1},
        {"k1 even x1-coefficients, d_4 = 3", {F{1, 0}, F{1, 4}, F{2, 1}, F{4, 3}}, {1, 1, 1, 3}, 1},
        {"k1 even x2-coefficients, value 2", {F{1, 0}, F{1, 4}, F{3, 2}, F{3, 4}}, {1, 1, 1, 1}, 1},
        {"k1 even x2-coefficients, value 0", {F{1, 0}, F{1, 4}, F{1, 2}, F{3, 4}}, {1, 1, 1, 1}, 1},
        {"k1 even x2-coefficients, d_3 = 3", {F{1, 0}, F{1, 16}, F{1, 2}, F{1, 4}}, {1, 1, 3, 1}, 1},
        {"k1 mixed even x2 / even x1, surviving", {F{1, 0}, F{1, 4}, F{3, 2}, F{2, 1}}, {1, 1, 1, 1}, 1},
        {"k1 mixed even x2 / even x1, vanishing", {F{1, 0}, F{1, 4}, F{1, 2}, F{2, 1}}, {1, 1, 1, 1}, 1},
        {"k1 unit L_3, even x2 in L_4, surviving", {F{1, 0}, F{1, 4}, F{1, 1}, F{3, 2}}, {1, 1, 1, 1}, 1},
        {"k1 unit L_3, even x2 in L_4, vanishing", {F{1, 0}, F{1, 4}, F{1, 1}, F{1, 2}}, {1, 1, 1, 1}, 1},
        {"k1 unit L_3, even x1 in L_4", {F{1, 0}, F{1, 4}, F{1, 1}, F{2, 1}}, {1, 1, 1, 1}, 1},
        {"k1 scaled forms", {F{2, 16}, F{1, 4}, F{4, 4}, F{1, 3}}, {1, 1, 1, 1}, 1},
        {"k2 L_2 = x_2", {F{1, 0}, F{0, 1}, F{1, 1}, F{1, 3}}, {1, 1, 1, 1}, 2},
        {"k2 L_2 = x_2, d_2 = 3", {F{1, 0}, F{0, 1}, F{2, 1}, F{1, 6}}, {1, 3, 1, 1}, 2},
        {"k2 L_2 = 8x_1 + x_2", {F{1, 0}, F{8, 1}, F{3, 1}, F{1, 2}}, {1, 1, 1, 1}, 2, {Parity::odd}},
    };
}

namespace detail {

template <class Body>
CriterionResult timed(int id, std::string title, double budget, Body body) {
    CriterionResult r;
    r.id = id;
    r.title = std::move(title);
    r.budget = budget;
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail << "exception: " << e.what();
        ok = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = ok && r.seconds < budget;
    if (ok && !r.pass) detail << "; over the " << budget << " s budget";
    r.detail = detail.str();
    return r;
}

inline std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

}  // namespace detail

inline CriterionResult criterion_1(const SuiteOptions&) {
    return detail::timed(1, "local representation counts: closed form vs enumeration", 60, [](std::ostream& out) {
        long checked = 0, bad = 0;
        std::string first_bad;
        auto compare = [&](i64 p, int n, int alpha) {
            const auto brute = s_alpha_brute_table(p, n, alpha);
            for (i64 A = 0; A < static_cast<i64>(brute.size()); ++A) {
                ++checked;
                const i64 closed = s_alpha_closed({p, n, alpha, A});
                if (closed != brute[static_cast<std::size_t>(A)] && bad++ == 0)
                    first_bad = "p=" + std::to_string(p) + " n=" + std::to_string(n) + " alpha=" +
                                std::to_string(alpha) + " A=" + std::to_string(A);
            }
        };
        for (i64 p : {3, 5, 7, 11, 13})
            for (int n = 1; n <= 3; ++n)
                for (int alpha = 0; alpha <= n; ++alpha) compare(p, n, alpha);
        for (int n = 2; n <= 4; ++n) compare(2, n, 0);
        out << checked << " queries, " << bad << " mismatches";
        if (bad) out << " (first: " << first_bad << ")";
        return bad == 0;
    });
}

inline CriterionResult criterion_2(const SuiteOptions&) {
    return detail::timed(2, "Gauss circle: summed r(n) vs disk count, N = 10^4", 1, [](std::ostream& out) {
        const i64 N = 10'000;
        i64 summed = 0;
        for (i64 n = 1; n <= N; ++n) summed += r_count(n);
        i64 disk = 0;
        for (i64 x = -100; x <= 100; ++x)
            for (i64 y = -100; y <= 100; ++y) disk += (x * x + y * y >= 1 && x * x + y * y <= N);
        out << "sum r(n) = " << summed << ", lattice points = " << disk;
        return summed == disk;
    });
}

inline CriterionResult criterion_3(const SuiteOptions&) {
    return detail::timed(3, "divisor-sum splittings of r(m), m <= 10^5", 30, [](std::ostream& out) {
        const double Xp = 1e5, Y = 1e2;
        long checked = 0, bad = 0;
        for (i64 m = 1; m <= 100'000; m += 4) {
            const auto dec = divisor_decomposition(m, Xp, Y);
            const i64 r = r_count(m);
            ++checked;
            if (r != 4 * (dec.A_plus + dec.A_minus) || r != 4 * (dec.B_plus + dec.C + dec.B_minus)) {
                if (bad++ == 0) out << "first failure at m=" << m << "; ";
            }
        }
        out << checked << " values of m, " << bad << " failures";
        return bad == 0;
    });
}

inline CriterionResult criterion_4(const SuiteOptions& opt) {
    return detail::timed(4, "2-adic densities: closed form vs enumeration at levels 12 and 13", 120, [&](std::ostream& out) {
        int systems = 0, comparisons = 0, bad = 0;
        for (const auto& c : two_adic_suite()) {
            ++systems;
            const FormSystem S(c.forms);
            Rational by_parity[3];
            for (Parity j : c.parities) {
                const Rational closed = delta_closed(j, c.k, S, c.d);
                const Rational b12 = delta_brute(j, c.k, S, c.d, 12, opt.workers);
                const Rational b13 = delta_brute(j, c.k, S, c.d, 13, opt.workers);
                ++comparisons;
                by_parity[static_cast<int>(j)] = closed;
                const bool ok = closed == b12 && b12 == b13 && closed >= 0 && closed <= 4;
                if (!ok) {
                    ++bad;
                    out << "[" << c.name << ", j=" << to_string(j) << ": closed " << to_string(closed) << ", n=12 "
                        << to_string(b12) << ", n=13 " << to_string(b13) << "] ";
                }
                opt.log("  " + c.name + " j=" + to_string(j) + " delta=" + to_string(closed));
            }
            if (c.parities.size() == 3 && by_parity[2] != by_parity[0] + by_parity[1]) {
                ++bad;
                out << "[" << c.name << ": parity additivity fails] ";
            }
        }
        out << systems << " systems, " << comparisons << " exact comparisons, " << bad << " failures";
        return bad == 0 && systems >= 20;
    });
}

inline CriterionResult criterion_5(const SuiteOptions&) {
    return detail::timed(5, "local factor consistency and p-adic convergence", 120, [](std::ostream& out) {
        const auto cfg = demo_config();
        const FormSystem& S = cfg.system;
        double worst = 0;
        for (i64 p : primes_up_to(50)) {
            if (p == 2) continue;
            const double a = c_p_closed(p, S, cfg.dp, max_depth).value;
            const double b = sigma_p_star(p, S, max_depth).value;
            worst = std::max(worst, std::abs(a - b));
        }
        out << "max |c_p - sigma_p*| over p <= 50: " << detail::fmt(worst) << "; gaps";
        bool ok = worst < 1e-12;
        for (i64 p : {3, 5, 7}) {
            const double cp = c_p_closed(p, S, cfg.dp).value;
            double prev = INFINITY;
            out << " p=" << p << ":";
            for (int n = 1; n <= 3; ++n) {
                const double gap = std::abs(omega_p_brute({p, {0, 0, 0, 0}, {0, 0, 0, 0}, n}, S) - cp);
                out << " " << detail::fmt(gap);
                ok = ok && gap <= prev;
                prev = gap;
            }
            ok = ok && prev < 0.05;
        }
        return ok;
    });
}

inline CriterionResult criterion_6(const SuiteOptions&) {
    return detail::timed(6, "archimedean density by quadrature", 10, [](std::ostream& out) {
        const auto cfg = demo_config();
        const double pi4 = std::pow(boost::math::constants::pi<double>(), 4);
        const ConvexRegion triangle({{1, 0}, {3, 0}, {1, 2}});
        bool ok = true;
        for (const auto* R : {&cfg.region, &triangle}) {
            const auto q = omega_infinity(cfg.system, cfg.dp.d, *R);
            const double expect = pi4 * boost::rational_cast<double>(measure(*R));
            const double diff = std::abs(q.value - expect);
            out << "meas " << to_string(measure(*R)) << ": |diff| " << detail::fmt(diff) << " (est. error "
                << detail::fmt(q.error) << "); ";
            ok = ok && diff < 1e-6 && q.error <= 1e-10;
        }
        return ok;
    });
}

inline CriterionResult criterion_7(const SuiteOptions& opt) {
    return detail::timed(7, "two assemblies of the constant agree", 60, [&](std::ostream& out) {
        auto cfg = demo_config();
        auto variant = cfg;
        variant.dp = DParams({1, 1, 1, 1}, {5, 5, 1, 1});
        bool ok = true;
        for (const auto* c : {&cfg, &variant}) {
            const auto a = predicted_constant(c->j, c->k, c->system, c->dp, c->region, c->prime_cutoff, c->depth);
            const auto b = local_product_constant(c->j, c->k, c->system, c->dp, c->region, c->prime_cutoff, c->depth,
                                                  c->n2, opt.workers);
            const double diff = std::abs(a.c - b.c);
            out << "D=(" << c->dp.D[0] << "," << c->dp.D[1] << "," << c->dp.D[2] << "," << c->dp.D[3]
                << "): c = " << detail::fmt(a.c) << ", |diff| " << detail::fmt(diff) << "; ";
            ok = ok && diff < 1e-8;
        }
        return ok;
    });
}

inline CriterionResult criterion_8(const SuiteOptions& opt) {
    return detail::timed(8, "change of variables: both enumerations agree at X = 500", 60, [&](std::ostream& out) {
        auto cfg = demo_config();
        cfg.workers = opt.workers;
        const Rational X(500);
        auto table = std::make_shared<const RTable>(sieve_bound(X, cfg.system, cfg.dp.d, cfg.region));
        const std::vector<std::pair<std::string, IntMat2>> mats{{"I", IntMat2::identity()},
                                                                {"M_xi(1)", m_xi(1)},
                                                                {"M_xi(2)", m_xi(2)},
                                                                {"M_xi(3)", m_xi(3)},
                                                                {"M_{0,1}", m_cd2(0, 1)}};
        bool ok = true;
        for (const auto& [name, M] : mats) {
            const auto t = transformed_sum(X, cfg, M, table);
            out << name << ": " << t.pulled_back << (t.agree() ? " = " : " != ") << t.inverted << "; ";
            ok = ok && t.agree();
            if (name == "I") {
                const u64 plain = sum_brute(X, cfg, table);
                ok = ok && plain == t.pulled_back;
            }
        }
        return ok;
    });
}

namespace detail {

inline FormSystem random_system(std::mt19937_64& rng) {
    std::uniform_int_distribution<i64> coef(-9, 9);
    while (true) {
        std::array<LinearForm, 4> f;
        bool ok = true;
        for (auto& L : f) {
            const i64 a = coef(rng), b = coef(rng);
            if (a == 0 && b == 0) {
                ok = false;
                break;
            }
            L = LinearForm(a, b);
        }
        if (!ok) continue;
        for (int i = 0; i < 4 && ok; ++i)
            for (int j = i + 1; j < 4 && ok; ++j) ok = cross_coeff(f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(j)]) != 0;
        if (ok) return FormSystem(f);
    }
}

// Hermite basis (alpha, beta), (0, gamma) with a prescribed determinant.
inline Lattice2 random_lattice(std::mt19937_64& rng, i64 det) {
    const auto divs = divisors(det);
    const i64 alpha = divs[std::uniform_int_distribution<std::size_t>(0, divs.size() - 1)(rng)];
    const i64 gamma = det / alpha;
    const i64 beta = std::uniform_int_distribution<i64>(0, gamma - 1)(rng);
    return {{alpha, beta}, {0, gamma}};
}

}  // namespace detail

inline CriterionResult criterion_9(const SuiteOptions&) {
    return detail::timed(9, "lattice laws on random inputs", 60, [](std::ostream& out) {
        std::mt19937_64 rng(20240611);
        int inv_bad = 0, idx_bad = 0, mult_bad = 0;
        const std::vector<i64> odd{1, 3, 5, 7, 9, 15, 21, 25};
        auto pick = [&](const std::vector<i64>& v) {
            return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
        };
        std::uniform_int_distribution<i64> entry(-4, 4);
        for (int t = 0; t < 50; ++t) {
            const i64 target = pick({1, 2, 4, 8});
            IntMat2 M;
            while (true) {
                const i64 a = entry(rng), b = entry(rng), c = entry(rng), d = entry(rng);
                if (std::abs(a * d - b * c) == target) {
                    M = IntMat2(a, b, c, d);
                    break;
                }
            }
            const FormSystem S = detail::random_system(rng);
            const Quad D{pick(odd), pick(odd), pick(odd), pick(odd)};
            inv_bad += !det_invariance_check(D, S, M).holds;
        }
        for (int t = 0; t < 50; ++t) {
            i64 da = 0, db = 0;
            do {
                da = std::uniform_int_distribution<i64>(1, 60)(rng);
                db = std::uniform_int_distribution<i64>(1, 60)(rng);
            } while (std::gcd(da, db) != 1);
            idx_bad += !index_product_check(detail::random_lattice(rng, da), detail::random_lattice(rng, db)).holds;
        }
        const std::vector<i64> primes{3, 5, 7, 11, 13};
        for (int t = 0; t < 50; ++t) {
            const FormSystem S = detail::random_system(rng);
            // h uses one prime, h' another, so the componentwise products are coprime.
            const i64 p = pick(primes);
            i64 q = p;
            while (q == p) q = pick(primes);
            Quad h{}, hp{}, prod{};
            for (std::size_t i = 0; i < 4; ++i) {
                h[i] = ipow64(p, static_cast<int>(std::uniform_int_distribution<int>(0, 2)(rng)));
                hp[i] = ipow64(q, static_cast<int>(std::uniform_int_distribution<int>(0, 2)(rng)));
                prod[i] = h[i] * hp[i];
            }
            const wide lhs = det_by_counting(prod, S);
            mult_bad += lhs != rho_star(h, S) * rho_star(hp, S);
        }
        out << "det invariance " << 50 - inv_bad << "/50, index product " << 50 - idx_bad
            << "/50, multiplicativity " << 50 - mult_bad << "/50";
        return inv_bad == 0 && idx_bad == 0 && mult_bad == 0;
    });
}

inline CriterionResult criterion_10(const SuiteOptions& opt) {
    return detail::timed(10, "asymptotic trend on the demo ladder", 120, [&](std::ostream& out) {
        auto cfg = demo_config();
        cfg.workers = opt.workers;
        const auto tab = asymptotic_table(cfg);
        auto table = std::make_shared<const RTable>(sieve_bound(cfg.X_ladder.back(), cfg.system, cfg.dp.d, cfg.region));
        bool parity_ok = true;
        auto even = cfg, odd = cfg;
        even.j = Parity::even;
        odd.j = Parity::odd;
        for (const auto& row : tab.rows) {
            const u64 s0 = sum_brute(row.X, even, table), s1 = sum_brute(row.X, odd, table);
            parity_ok = parity_ok && row.S == s0 + s1;
            out << "X=" << to_string(row.X) << " rel_err " << detail::fmt(row.rel_err) << "; ";
        }
        const double first = tab.rows.front().rel_err, last = tab.rows.back().rel_err;
        out << "c = " << detail::fmt(tab.report.c) << ", parity split " << (parity_ok ? "exact" : "BROKEN");
        return parity_ok && last < first && last < 0.2;
    });
}

using Criterion = CriterionResult (*)(const SuiteOptions&);

inline const std::vector<Criterion>& all_criteria() {
    static const std::vector<Criterion> v{criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                          criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
    return v;
}

// ids empty = all.
inline std::vector<CriterionResult> run_suite(const SuiteOptions& opt, const std::vector<int>& ids = {}) {
    std::vector<CriterionResult> out;
    const auto& all = all_criteria();
    for (std::size_t i = 0; i < all.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!ids.empty() && std::find(ids.begin(), ids.end(), id) == ids.end()) continue;
        out.push_back(all[i](opt));
    }
    return out;
}

inline std::string format_line(const CriterionResult& r) {
    std::ostringstream s;
    s << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.title << " [" << detail::fmt(r.seconds)
      << " s / " << r.budget << " s] " << r.detail;
    return s.str();
}

}  // namespace twosq::acceptance
