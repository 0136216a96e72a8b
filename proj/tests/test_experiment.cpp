#include <gtest/gtest.h>

#include "twosq/config.hpp"
#include "twosq/experiment.hpp"

using namespace twosq;

namespace {

using F = LinearForm;

ExperimentConfig load_config(const std::string& name) {
    return parse_config(read_file(std::string(TWOSQ_CONFIG_DIR) + "/" + name));
}

ExperimentConfig with_forms(std::array<LinearForm, 4> forms, ConvexRegion R, Parity j, int k) {
    ExperimentConfig cfg;
    cfg.system = FormSystem(forms);
    cfg.region = std::move(R);
    cfg.j = j;
    cfg.k = k;
    cfg.workers = 1;
    return cfg;
}

ConvexRegion demo_region() { return ConvexRegion::rectangle(1, 0, 2, 1); }

}  // namespace

TEST(NhCheck, Examples) {
    const auto R = demo_region();
    EXPECT_TRUE(nh_check(0, load_config("demo.json").system, {1, 1, 1, 1}, R).ok);

    const auto iv = nh_check(0, FormSystem({F{2, 4}, F{5, 4}, F{1, 4}, F{9, 8}}), {1, 1, 1, 1}, R);
    EXPECT_FALSE(iv.ok);
    EXPECT_EQ(iv.condition, "(iv)");

    EXPECT_TRUE(nh_check(1, FormSystem({F{2, 8}, F{1, 8}, F{1, 1}, F{1, 3}}), {1, 1, 1, 1}, R).ok);

    const auto iii = nh_check(0, FormSystem({F{1, 0}, F{1, -4}, F{1, 4}, F{9, 8}}), {1, 1, 1, 1}, R);
    EXPECT_FALSE(iii.ok);
    EXPECT_EQ(iii.condition, "(iii)");

    const auto k2 = nh_check(2, FormSystem({F{1, 0}, F{3, 1}, F{1, 1}, F{1, 3}}), {1, 1, 1, 1}, R);
    EXPECT_FALSE(k2.ok);
    EXPECT_EQ(k2.condition, "(iv'')");
}

TEST(SumBrute, SmallExamples) {
    const auto arithmetic =
        with_forms({F{1, 0}, F{1, 4}, F{1, 8}, F{1, 12}}, ConvexRegion::rectangle(0, 0, 2, 2), Parity::any, 0);
    EXPECT_EQ(sum_brute(1, arithmetic), 1024u);

    auto demo = load_config("demo.json");
    EXPECT_EQ(sum_brute(2, demo), 0u);
    demo.j = Parity::even;
    EXPECT_EQ(sum_brute(2, demo), 0u);
}

TEST(SumBrute, MatchesNaiveLoop) {
    const auto cfg = load_config("demo.json");
    const Rational X(101, 2);
    i64 naive = 0;
    for (i64 x1 = 1; x1 <= 110; x1 += 2)
        for (i64 x2 = 1; x2 <= 60; ++x2) {
            if (!contains(cfg.region, {Rational(x1) / X, Rational(x2) / X})) continue;
            i64 prod = 1;
            for (int i = 0; i < 4; ++i) prod *= r_count(cfg.system[i].a * x1 + cfg.system[i].b * x2);
            naive += prod;
        }
    EXPECT_EQ(sum_brute(X, cfg), static_cast<u64>(naive));
}

TEST(SumBrute, ParityPartsAddUp) {
    auto cfg = load_config("k1_unit_profile.json");
    cfg.workers = 1;
    const Rational X(300);
    cfg.j = Parity::any;
    const u64 all = sum_brute(X, cfg);
    cfg.j = Parity::even;
    const u64 even = sum_brute(X, cfg);
    cfg.j = Parity::odd;
    const u64 odd = sum_brute(X, cfg);
    EXPECT_EQ(all, even + odd);
    EXPECT_GT(even, 0u);
    EXPECT_GT(odd, 0u);
}

TEST(SumBrute, WorkerCountDoesNotMatter) {
    auto cfg = load_config("demo_D5511.json");
    cfg.workers = 1;
    const u64 ref = sum_brute(400, cfg);
    for (int w : {2, 3, 4}) {
        cfg.workers = w;
        EXPECT_EQ(sum_brute(400, cfg), ref) << w;
    }
}

TEST(TransformedSum, BothRoutesAgree) {
    const auto demo = load_config("demo.json");
    for (const IntMat2& M : {m_xi(1), m_xi(2), m_cd2(0, 1), m_cd2(2, 1)}) {
        const auto t = transformed_sum(100, demo, M);
        EXPECT_TRUE(t.agree()) << t.pulled_back << " vs " << t.inverted;
        EXPECT_GT(t.pulled_back, 0u);
    }
    const auto k1 = load_config("k1_unit_profile.json");
    const auto t = transformed_sum(100, k1, m_xi(1));
    EXPECT_TRUE(t.agree());
}

TEST(XiExtract, Examples) {
    const auto S = load_config("demo.json").system;
    const auto a = xi_extract(S, {1, 1});
    EXPECT_EQ(a.xi3, 0);
    EXPECT_EQ(a.xi4, 0);
    const auto b = xi_extract(S, {4, 1});
    EXPECT_EQ(b.xi3, 3);
    EXPECT_EQ(b.xi4, 2);
    const FormSystem scaled({F{1, 0}, F{1, 4}, F{4, 4}, F{2, 6}});
    const auto c = xi_extract(scaled, {1, 1});
    EXPECT_EQ(c.xi3, 1);
    EXPECT_EQ(c.xi4, 2);
    EXPECT_THROW(xi_extract(scaled, {1, -1}), std::domain_error);
}

TEST(Validate, Failures) {
    auto cfg = load_config("demo.json");
    EXPECT_NO_THROW(cfg.validate());
    cfg.X_ladder = {Rational(1, 100)};
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.X_ladder = {10, 5};
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = load_config("demo.json");
    cfg.k = 3;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = load_config("demo.json");
    cfg.dp = DParams({1, 1, 1, 1}, {5, 5, 1, 1});
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Asymptotic, DemoErrorShrinks) {
    auto cfg = load_config("demo.json");
    cfg.X_ladder = {250, 1000, 4000};
    cfg.prime_cutoff = 300;
    const auto tab = asymptotic_table(cfg);
    ASSERT_EQ(tab.rows.size(), 3u);
    EXPECT_LT(tab.rows[2].rel_err, tab.rows[0].rel_err);
    EXPECT_LT(tab.rows[2].rel_err, 0.05);
    for (const auto& r : tab.rows) EXPECT_DOUBLE_EQ(r.c, tab.report.c);
}

TEST(Asymptotic, VanishingConstant) {
    auto cfg = with_forms({F{1, 0}, F{1, 4}, F{2, 1}, F{2, 3}}, demo_region(), Parity::odd, 1);
    cfg.X_ladder = {500, 4000};
    cfg.prime_cutoff = 50;
    const auto tab = asymptotic_table(cfg);
    EXPECT_EQ(tab.report.c, 0.0);
    EXPECT_TRUE(std::isnan(tab.rows[0].rel_err));
    // The 2-adic obstruction is exact, so every sum vanishes.
    for (const auto& r : tab.rows) EXPECT_EQ(r.S, 0u);
    EXPECT_LE(tab.rows[1].S_over_X2, tab.rows[0].S_over_X2);
}

TEST(Asymptotic, RoutesAgreeForNontrivialD) {
    const auto cfg = load_config("demo_D5111.json");
    const auto a = predicted_constant(cfg.j, cfg.k, cfg.system, cfg.dp, cfg.region, 200);
    const auto b = local_product_constant(cfg.j, cfg.k, cfg.system, cfg.dp, cfg.region, 200, max_depth, 10);
    EXPECT_NEAR(a.c, b.c, 1e-8 * a.c);
}

// Pulling back through M with |det M| = 2^t leaves the odd local factors unchanged; only the
// 2-adic density and the region measure move.
TEST(DetInvariance, PredictedConstantTransformsAsExpected) {
    struct Case {
        std::string config;
        IntMat2 M;
        Parity j;
    };
    for (const auto& [name, M, j] :
         {Case{"demo.json", m_xi(1), Parity::any}, Case{"demo.json", m_cd2(0, 1), Parity::any},
          Case{"k1_unit_profile.json", m_xi(1), Parity::odd}, Case{"k1_unit_profile.json", m_xi(1), Parity::any}}) {
        auto cfg = load_config(name);
        cfg.j = j;
        const FormSystem SM = transform_forms(cfg.system, M);
        const ConvexRegion RM = transform_region(cfg.region, M);
        ASSERT_TRUE(det_invariance_check(cfg.dp.D, cfg.system, M).holds);
        const auto c = predicted_constant(cfg.j, cfg.k, cfg.system, cfg.dp, cfg.region, 200);
        const auto cm = predicted_constant(cfg.j, cfg.k, SM, cfg.dp, RM, 200);
        const double expect = c.c * boost::rational_cast<double>(cm.delta / c.delta) / static_cast<double>(M.det());
        EXPECT_NEAR(cm.c, expect, 1e-12 * std::max(1.0, expect)) << name << " j=" << to_string(j);
    }
}
