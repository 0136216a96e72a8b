#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace twosq {

struct Point {
    Rational x{0}, y{0};
    friend bool operator==(const Point&, const Point&) = default;
};

using IVec = std::array<i64, 2>;

struct LinearForm {
    i64 a = 0;  // coefficient of x_1
    i64 b = 0;  // coefficient of x_2

    LinearForm() = default;
    LinearForm(i64 a_, i64 b_) : a(a_), b(b_) {
        if (a == 0 && b == 0) throw std::invalid_argument("linear form with both coefficients zero");
    }

    wide operator()(i64 x1, i64 x2) const { return static_cast<wide>(a) * x1 + static_cast<wide>(b) * x2; }
    Rational operator()(const Point& p) const { return p.x * a + p.y * b; }

    friend bool operator==(const LinearForm&, const LinearForm&) = default;
};

inline i64 cross_coeff(const LinearForm& f, const LinearForm& g) { return f.a * g.b - g.a * f.b; }

struct IntMat2 {
    i64 m11 = 1, m12 = 0, m21 = 0, m22 = 1;

    IntMat2() = default;
    IntMat2(i64 a, i64 b, i64 c, i64 d) : m11(a), m12(b), m21(c), m22(d) {
        if (det() == 0) throw std::invalid_argument("singular integer matrix");
    }

    static IntMat2 identity() { return {}; }

    i64 det() const { return m11 * m22 - m12 * m21; }

    IVec operator()(const IVec& y) const { return {m11 * y[0] + m12 * y[1], m21 * y[0] + m22 * y[1]}; }
    Point operator()(const Point& y) const { return {y.x * m11 + y.y * m12, y.x * m21 + y.y * m22}; }

    Point inverse_apply(const Point& z) const {
        const Rational d(det());
        return {(z.x * m22 - z.y * m12) / d, (z.y * m11 - z.x * m21) / d};
    }

    friend IntMat2 operator*(const IntMat2& A, const IntMat2& B) {
        return {A.m11 * B.m11 + A.m12 * B.m21, A.m11 * B.m12 + A.m12 * B.m22,
                A.m21 * B.m11 + A.m22 * B.m21, A.m21 * B.m12 + A.m22 * B.m22};
    }

    friend bool operator==(const IntMat2&, const IntMat2&) = default;
};

class FormSystem {
public:
    FormSystem() = default;
    explicit FormSystem(std::array<LinearForm, 4> forms) : forms_(forms) {
        for (int i = 0; i < 4; ++i) {
            if (forms_[i].a == 0 && forms_[i].b == 0)
                throw std::invalid_argument("form L_" + std::to_string(i + 1) + " is zero");
            for (int j = i + 1; j < 4; ++j)
                if (cross_coeff(forms_[i], forms_[j]) == 0)
                    throw std::invalid_argument("forms L_" + std::to_string(i + 1) + " and L_" +
                                                std::to_string(j + 1) + " are proportional");
        }
    }

    const LinearForm& operator[](int i) const { return forms_[static_cast<std::size_t>(i)]; }
    const std::array<LinearForm, 4>& forms() const { return forms_; }

    // Coefficient matrix of (L_3, L_4), rows are forms.
    IntMat2 A_matrix() const { return {forms_[2].a, forms_[2].b, forms_[3].a, forms_[3].b}; }

    friend bool operator==(const FormSystem&, const FormSystem&) = default;

private:
    std::array<LinearForm, 4> forms_{};
};

inline i64 L_infinity(const FormSystem& S) {
    i64 m = 0;
    for (const auto& f : S.forms()) m = std::max({m, f.a < 0 ? -f.a : f.a, f.b < 0 ? -f.b : f.b});
    return m;
}

inline Rational cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Shoelace sum; positive for counterclockwise vertex lists.
inline Rational signed_area(const std::vector<Point>& v) {
    Rational twice(0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = v[i];
        const auto& q = v[(i + 1) % v.size()];
        twice += p.x * q.y - q.x * p.y;
    }
    return twice / 2;
}

// Open interior of a strictly convex rational polygon, stored counterclockwise.
class ConvexRegion {
public:
    ConvexRegion() = default;
    explicit ConvexRegion(std::vector<Point> vertices) : v_(std::move(vertices)) {
        if (v_.size() < 3) throw std::invalid_argument("region needs at least 3 vertices");
        if (signed_area(v_) < 0) std::reverse(v_.begin(), v_.end());
        // Strictly convex and simple iff every other vertex lies strictly left of each edge.
        const std::size_t n = v_.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i || k == (i + 1) % n) continue;
                if (cross(v_[i], v_[(i + 1) % n], v_[k]) <= 0)
                    throw std::invalid_argument("region vertices do not form a strictly convex polygon");
            }
    }

    static ConvexRegion rectangle(Rational x0, Rational y0, Rational x1, Rational y1) {
        return ConvexRegion({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
    }

    const std::vector<Point>& vertices() const { return v_; }
    std::size_t size() const { return v_.size(); }

    ConvexRegion scaled(const Rational& X) const {
        if (X <= 0) throw std::invalid_argument("dilation factor must be positive");
        std::vector<Point> w;
        for (const auto& p : v_) w.push_back({p.x * X, p.y * X});
        return ConvexRegion(std::move(w));
    }

    friend bool operator==(const ConvexRegion&, const ConvexRegion&) = default;

private:
    std::vector<Point> v_;
};

inline Rational measure(const ConvexRegion& R) { return signed_area(R.vertices()); }

inline Rational r_infinity(const ConvexRegion& R) {
    Rational m(0);
    for (const auto& p : R.vertices()) m = std::max({m, abs(p.x), abs(p.y)});
    return m;
}

inline Rational r_prime(const FormSystem& S, const ConvexRegion& R) {
    Rational m(0);
    for (const auto& p : R.vertices())
        for (const auto& f : S.forms()) m = std::max(m, abs(f(p)));
    return m;
}

inline bool contains(const ConvexRegion& R, const Point& pt) {
    const auto& v = R.vertices();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (cross(v[i], v[(i + 1) % v.size()], pt) <= 0) return false;
    return true;
}

// R_M = { M^{-1} z : z in R }.
inline ConvexRegion transform_region(const ConvexRegion& R, const IntMat2& M) {
    std::vector<Point> w;
    for (const auto& p : R.vertices()) w.push_back(M.inverse_apply(p));
    return ConvexRegion(std::move(w));
}

// Rank-2 sublattice of Z^2 with basis vectors e1, e2.
struct Lattice2 {
    IVec e1{1, 0};
    IVec e2{0, 1};

    i64 det() const {
        i64 d = e1[0] * e2[1] - e2[0] * e1[1];
        return d < 0 ? -d : d;
    }

    static Lattice2 integers() { return {}; }

    friend bool operator==(const Lattice2&, const Lattice2&) = default;
};

enum class Parity { even, odd, any };

inline std::string to_string(Parity j) {
    switch (j) {
        case Parity::even: return "0";
        case Parity::odd: return "1";
        default: return "star";
    }
}

inline Parity parse_parity(const std::string& s) {
    if (s == "0") return Parity::even;
    if (s == "1") return Parity::odd;
    if (s == "star" || s == "*") return Parity::any;
    throw std::invalid_argument("parity selector must be \"star\", \"0\" or \"1\", got \"" + s + "\"");
}

inline bool parity_matches(Parity j, i64 x1, i64 x2) {
    if ((x1 & 1) == 0) return false;
    if (j == Parity::any) return true;
    return (x2 & 1) == (j == Parity::odd ? 1 : 0);
}

struct Partition {
    int index = 0;
    int count = 1;
};

namespace detail {

inline i64 floor_div(wide a, wide b) {
    wide q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return static_cast<i64>(q);
}

inline i64 ceil_div(wide a, wide b) { return -floor_div(-a, b); }

// Half-plane alpha*u + beta*v > gamma in lattice coordinates.
struct HalfPlane {
    wide alpha, beta, gamma;
};

inline i64 lcm_den(std::initializer_list<Rational> qs) {
    i64 l = 1;
    for (const auto& q : qs) l = std::lcm(l, q.denominator());
    return l;
}

struct Scan {
    std::vector<HalfPlane> planes;
    i64 u_lo = 0, u_hi = -1, v_lo = 0, v_hi = -1;
};

inline Scan prepare_scan(const Rational& X, const ConvexRegion& R, const Lattice2& lat) {
    if (X <= 0) throw std::invalid_argument("dilation X must be positive");
    const auto& v = R.vertices();
    const wide det = static_cast<wide>(lat.e1[0]) * lat.e2[1] - static_cast<wide>(lat.e2[0]) * lat.e1[1];
    if (det == 0) throw std::invalid_argument("degenerate lattice basis");
    Scan s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& p = v[i];
        const Point& q = v[(i + 1) % v.size()];
        // Interior of X*R: ex*y - ey*x > X*(ex*py - ey*px).
        const Rational ex = q.x - p.x, ey = q.y - p.y;
        const Rational rhs = X * (ex * p.y - ey * p.x);
        const i64 L = lcm_den({ex, ey, rhs});
        const wide cx = -static_cast<wide>((ey * L).numerator());
        const wide cy = static_cast<wide>((ex * L).numerator());
        const wide g = static_cast<wide>((rhs * L).numerator());
        s.planes.push_back({cx * lat.e1[0] + cy * lat.e1[1], cx * lat.e2[0] + cy * lat.e2[1], g});
    }
    // Bounding box of the region in lattice coordinates (u, v) = B^{-1} x.
    bool first = true;
    for (const auto& p : v) {
        const Rational x = p.x * X, y = p.y * X;
        const Rational u = (x * lat.e2[1] - y * lat.e2[0]) / static_cast<i64>(det);
        const Rational w = (y * lat.e1[0] - x * lat.e1[1]) / static_cast<i64>(det);
        const i64 uf = floor_div(u.numerator(), u.denominator()), uc = ceil_div(u.numerator(), u.denominator());
        const i64 wf = floor_div(w.numerator(), w.denominator()), wc = ceil_div(w.numerator(), w.denominator());
        if (first) {
            s.u_lo = uf, s.u_hi = uc, s.v_lo = wf, s.v_hi = wc;
            first = false;
        } else {
            s.u_lo = std::min(s.u_lo, uf), s.u_hi = std::max(s.u_hi, uc);
            s.v_lo = std::min(s.v_lo, wf), s.v_hi = std::max(s.v_hi, wc);
        }
    }
    const wide box = static_cast<wide>(s.u_hi - s.u_lo + 1) * (s.v_hi - s.v_lo + 1);
    if (box > 1'000'000'000) throw capacity_error("point enumeration box exceeds 1e9 candidates");
    return s;
}

}  // namespace detail

// Calls f(x1, x2) for every point of lat strictly inside X*R, without parity filtering.
// The u-range of the bounding box is split into part.count blocks; block part.index is visited.
template <class F>
void for_each_lattice_point(const Rational& X, const ConvexRegion& R, const Lattice2& lat, F&& f,
                            Partition part = {}) {
    const detail::Scan s = detail::prepare_scan(X, R, lat);
    const i64 width = s.u_hi - s.u_lo + 1;
    const i64 ub = s.u_lo + width * part.index / part.count;
    const i64 ue = s.u_lo + width * (part.index + 1) / part.count;
    for (i64 u = ub; u < ue; ++u) {
        i64 vlo = s.v_lo, vhi = s.v_hi;
        bool empty = false;
        for (const auto& h : s.planes) {
            const wide rest = h.gamma - h.alpha * u;  // need beta*v > rest
            if (h.beta > 0)
                vlo = std::max(vlo, detail::floor_div(rest, h.beta) + 1);
            else if (h.beta < 0)
                vhi = std::min(vhi, detail::ceil_div(rest, h.beta) - 1);
            else if (rest >= 0)
                empty = true;
        }
        if (empty) continue;
        for (i64 w = vlo; w <= vhi; ++w) f(u * lat.e1[0] + w * lat.e2[0], u * lat.e1[1] + w * lat.e2[1]);
    }
}

// Same, restricted to x1 odd and x2 = j mod 2.
template <class F>
void for_each_point(const Rational& X, const ConvexRegion& R, const Lattice2& lat, Parity j, F&& f,
                    Partition part = {}) {
    for_each_lattice_point(
        X, R, lat,
        [&](i64 x1, i64 x2) {
            if (parity_matches(j, x1, x2)) f(x1, x2);
        },
        part);
}

inline std::vector<IVec> collect_points(const Rational& X, const ConvexRegion& R, const Lattice2& lat, Parity j,
                                        Partition part = {}) {
    std::vector<IVec> out;
    for_each_point(X, R, lat, j, [&](i64 a, i64 b) { out.push_back({a, b}); }, part);
    return out;
}

// Coordinates of R are bounded through the values of L_3, L_4 (invert A).
inline bool coordinate_bound_holds(const FormSystem& S, const ConvexRegion& R) {
    return r_infinity(R) <= Rational(2 * L_infinity(S)) * r_prime(S, R);
}

}  // namespace twosq
