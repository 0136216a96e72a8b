#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "twosq/geometry.hpp"

using namespace twosq;

namespace {

ConvexRegion unit_square() { return ConvexRegion::rectangle(0, 0, 1, 1); }

FormSystem demo_forms() { return FormSystem({LinearForm{1, 0}, LinearForm{5, 4}, LinearForm{1, 4}, LinearForm{9, 8}}); }

FormSystem arithmetic_forms() {
    return FormSystem({LinearForm{1, 0}, LinearForm{1, 4}, LinearForm{1, 8}, LinearForm{1, 12}});
}

// Equal as cyclic vertex sequences.
bool same_polygon(const ConvexRegion& a, const ConvexRegion& b) {
    if (a.size() != b.size()) return false;
    const auto& u = a.vertices();
    const auto& v = b.vertices();
    for (std::size_t s = 0; s < v.size(); ++s) {
        bool eq = true;
        for (std::size_t i = 0; i < u.size() && eq; ++i) eq = u[i] == v[(i + s) % v.size()];
        if (eq) return true;
    }
    return false;
}

std::set<IVec> as_set(const std::vector<IVec>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Measure, Examples) {
    EXPECT_EQ(measure(unit_square()), Rational(1));
    EXPECT_EQ(measure(ConvexRegion({{0, 0}, {2, 0}, {0, 2}})), Rational(2));
    EXPECT_EQ(measure(ConvexRegion({{1, 0}, {2, 0}, {2, 1}, {1, 1}})), Rational(1));
}

TEST(Measure, RotationAndOrientation) {
    std::vector<Point> v{{0, 0}, {3, 0}, {Rational(7, 2), 2}, {1, 3}};
    const Rational m = measure(ConvexRegion(v));
    for (int s = 0; s < 4; ++s) {
        std::rotate(v.begin(), v.begin() + 1, v.end());
        EXPECT_EQ(measure(ConvexRegion(v)), m);
    }
    std::reverse(v.begin(), v.end());
    EXPECT_EQ(signed_area(v), -m);
    EXPECT_EQ(measure(ConvexRegion(v)), m);
}

TEST(Region, RejectsDegenerateInput) {
    EXPECT_THROW(ConvexRegion({{0, 0}, {1, 0}}), std::invalid_argument);
    EXPECT_THROW(ConvexRegion({{0, 0}, {1, 0}, {2, 0}}), std::invalid_argument);
    EXPECT_THROW(ConvexRegion({{0, 0}, {2, 0}, {1, Rational(1, 2)}, {2, 2}, {0, 2}}), std::invalid_argument);
}

TEST(RInfinity, Examples) {
    EXPECT_EQ(r_infinity(unit_square()), Rational(1));
    EXPECT_EQ(r_infinity(ConvexRegion::rectangle(1, 0, 2, 1)), Rational(2));
    EXPECT_EQ(r_infinity(ConvexRegion({{-3, 0}, {0, 1}, {1, 1}})), Rational(3));
}

TEST(RPrime, Examples) {
    const auto R = ConvexRegion::rectangle(0, 0, 2, 2);
    // L_4(2, 2) = 26
    EXPECT_EQ(r_prime(arithmetic_forms(), R), Rational(26));
    EXPECT_EQ(r_prime(demo_forms(), unit_square()), Rational(17));
    EXPECT_EQ(r_prime(arithmetic_forms(), R.scaled(2)), Rational(52));
}

TEST(LInfinity, Examples) {
    EXPECT_EQ(L_infinity(demo_forms()), 9);
    EXPECT_EQ(L_infinity(FormSystem({LinearForm{1, 0}, LinearForm{0, 1}, LinearForm{1, 1}, LinearForm{1, 2}})), 2);
    const FormSystem permuted({LinearForm{9, 8}, LinearForm{1, 4}, LinearForm{1, 0}, LinearForm{5, 4}});
    EXPECT_EQ(L_infinity(permuted), L_infinity(demo_forms()));
}

TEST(FormSystemValidation, RejectsProportionalOrZeroForms) {
    EXPECT_THROW(FormSystem({LinearForm{1, 0}, LinearForm{2, 0}, LinearForm{1, 4}, LinearForm{9, 8}}),
                 std::invalid_argument);
    EXPECT_THROW(LinearForm(0, 0), std::invalid_argument);
    EXPECT_THROW(IntMat2(1, 2, 2, 4), std::invalid_argument);
}

TEST(TransformRegion, Examples) {
    EXPECT_TRUE(same_polygon(transform_region(unit_square(), IntMat2::identity()), unit_square()));
    const auto R = ConvexRegion::rectangle(1, 0, 2, 1);
    EXPECT_EQ(measure(transform_region(R, IntMat2(1, 0, 0, 2))), measure(R) / 2);
    EXPECT_TRUE(same_polygon(transform_region(unit_square(), IntMat2(1, 0, 0, 4)),
                             ConvexRegion::rectangle(0, 0, 1, Rational(1, 4))));
}

TEST(TransformRegion, MeasureScalesByDeterminant) {
    const auto R = ConvexRegion({{1, 0}, {3, 1}, {2, 3}});
    const IntMat2 M(2, 1, -1, 3);
    EXPECT_EQ(measure(transform_region(R, M)), measure(R) / 7);
}

TEST(TransformRegion, Composition) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<i64> e(-5, 5);
    auto random_matrix = [&] {
        while (true) {
            const i64 a = e(rng), b = e(rng), c = e(rng), d = e(rng);
            if (a * d - b * c != 0) return IntMat2(a, b, c, d);
        }
    };
    const auto R = ConvexRegion({{1, 0}, {4, 1}, {3, Rational(7, 3)}, {0, 2}});
    for (int t = 0; t < 100; ++t) {
        const IntMat2 M = random_matrix(), N = random_matrix();
        EXPECT_TRUE(same_polygon(transform_region(R, M * N), transform_region(transform_region(R, M), N)));
    }
}

TEST(Contains, OpenSemantics) {
    EXPECT_TRUE(contains(unit_square(), {Rational(1, 2), Rational(1, 2)}));
    EXPECT_FALSE(contains(unit_square(), {0, Rational(1, 2)}));
    EXPECT_FALSE(contains(unit_square(), {2, 2}));
}

TEST(IteratePoints, Examples) {
    const Lattice2 Z = Lattice2::integers();
    EXPECT_EQ(collect_points(1, ConvexRegion::rectangle(0, 0, 2, 2), Z, Parity::any), (std::vector<IVec>{{1, 1}}));
    const auto R = ConvexRegion::rectangle(1, 0, 2, 1);
    EXPECT_EQ(collect_points(2, R, Z, Parity::any), (std::vector<IVec>{{3, 1}}));
    EXPECT_TRUE(collect_points(2, R, Z, Parity::even).empty());
}

TEST(IteratePoints, MatchesDirectScan) {
    const auto R = ConvexRegion({{1, 0}, {4, 1}, {3, Rational(7, 3)}, {0, 2}});
    const Lattice2 lat{{3, 1}, {0, 5}};
    const Rational X(37, 3);
    for (Parity j : {Parity::any, Parity::even, Parity::odd}) {
        std::set<IVec> direct;
        for (i64 x1 = -5; x1 <= 60; ++x1)
            for (i64 x2 = -5; x2 <= 60; ++x2) {
                const Point p{Rational(x1) / X, Rational(x2) / X};
                // x = u (3,1) + v (0,5)
                const bool in_lattice = x1 % 3 == 0 && (x2 - x1 / 3) % 5 == 0;
                if (in_lattice && contains(R, p) && parity_matches(j, x1, x2)) direct.insert({x1, x2});
            }
        EXPECT_EQ(as_set(collect_points(X, R, lat, j)), direct);
    }
}

TEST(IteratePoints, PartitionsAreDisjointAndOrderFree) {
    const auto R = ConvexRegion::rectangle(1, 0, 2, 1);
    const Lattice2 lat{{1, 2}, {0, 3}};
    const auto whole = collect_points(50, R, lat, Parity::any);
    std::vector<int> order{0, 1, 2, 3, 4, 5, 6};
    std::mt19937 rng(1);
    for (int t = 0; t < 3; ++t) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<IVec> merged;
        for (int idx : order) {
            const auto part = collect_points(50, R, lat, Parity::any, Partition{idx, 7});
            merged.insert(merged.end(), part.begin(), part.end());
        }
        EXPECT_EQ(merged.size(), whole.size());
        EXPECT_EQ(as_set(merged), as_set(whole));
    }
}

TEST(IteratePoints, CapacityGuard) {
    EXPECT_THROW(collect_points(100000, ConvexRegion::rectangle(0, 0, 1, 1), Lattice2::integers(), Parity::any),
                 capacity_error);
}

TEST(CoordinateBound, HoldsOnDemo) {
    EXPECT_TRUE(coordinate_bound_holds(demo_forms(), ConvexRegion::rectangle(1, 0, 2, 1)));
    EXPECT_TRUE(coordinate_bound_holds(demo_forms(), ConvexRegion({{1, 0}, {3, 0}, {1, 2}})));
}
