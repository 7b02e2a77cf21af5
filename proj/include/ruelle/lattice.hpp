#pragma once

// Integer hyperbolic linear algebra on the 2-torus: spectral splitting of a
// hyperbolic automorphism, the dual expanding/contracting cones, and exact
// enumeration of fixed and periodic points.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/errors.hpp"

namespace ruelle {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

using IntMat2 = std::array<std::array<std::int64_t, 2>, 2>;

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw OverflowRisk("integer overflow in 2x2 matrix arithmetic");
    return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw OverflowRisk("integer overflow in 2x2 matrix arithmetic");
    return r;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

} // namespace detail

inline IntMat2 int_mat_mul(const IntMat2& a, const IntMat2& b) {
    using detail::checked_add;
    using detail::checked_mul;
    IntMat2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r[i][j] = checked_add(checked_mul(a[i][0], b[0][j]),
                                  checked_mul(a[i][1], b[1][j]));
    return r;
}

inline IntMat2 int_mat_pow(const IntMat2& m, int n) {
    IntMat2 r{{{1, 0}, {0, 1}}};
    for (int k = 0; k < n; ++k) r = int_mat_mul(r, m);
    return r;
}

inline std::int64_t int_det(const IntMat2& m) {
    return detail::checked_add(detail::checked_mul(m[0][0], m[1][1]),
                               -detail::checked_mul(m[0][1], m[1][0]));
}

// A hyperbolic integer 2x2 matrix M together with its spectral splitting:
// lambda = |eigenvalue| > 1 of M (and of its transpose), unit eigenvectors
// u_plus/u_minus of the transpose for the expanding/contracting eigenvalues,
// and the oblique projectors P+ / P- onto those dual eigendirections
// (P+ + P- = I, P+ P- = 0).
struct HyperbolicAutomorphism {
    std::int64_t a, b, c, d;
    std::int64_t det;
    double lambda;
    double mu_plus;   // signed transpose eigenvalue with |mu_plus| = lambda
    double mu_minus;  // signed transpose eigenvalue with |mu_minus| = lambda^{-1}|det|
    Eigen::Vector2d u_plus, u_minus;
    Eigen::Matrix2d proj_plus, proj_minus;

    IntMat2 int_matrix() const { return {{{a, b}, {c, d}}}; }
    Eigen::Matrix2d matrix() const {
        Eigen::Matrix2d m;
        m << double(a), double(b), double(c), double(d);
        return m;
    }
    Eigen::Matrix2d transpose_matrix() const {
        Eigen::Matrix2d m;
        m << double(a), double(c), double(b), double(d);
        return m;
    }
    // M^T n for an integer frequency vector, exact.
    std::array<std::int64_t, 2> transpose_apply(std::int64_t n1, std::int64_t n2) const {
        using detail::checked_add;
        using detail::checked_mul;
        return {checked_add(checked_mul(a, n1), checked_mul(c, n2)),
                checked_add(checked_mul(b, n1), checked_mul(d, n2))};
    }
    bool is_diagonal() const { return b == 0 && c == 0; }
};

// Oblique decomposition n = plus_part + minus_part along the dual
// eigendirections, with the Euclidean magnitudes of both parts.
struct DualSplit {
    Eigen::Vector2d plus_part, minus_part;
    double plus_norm, minus_norm;
    // The signed quantity ||n+|| - ||n-||.
    double signed_norm() const { return plus_norm - minus_norm; }
};

enum class Cone { Plus, Minus, Boundary };

struct FixedPointSet {
    std::vector<Eigen::Vector2d> points; // in [0,1)^2, lexicographically sorted
    std::int64_t count;
};

namespace detail {

// Deterministic sign convention: first nonzero component positive.
inline Eigen::Vector2d canonical_unit(Eigen::Vector2d v) {
    v.normalize();
    double lead = std::abs(v(0)) > 1e-14 ? v(0) : v(1);
    if (lead < 0) v = -v;
    return v;
}

// Unit eigenvector of the transpose [[a,c],[b,d]] for eigenvalue mu; picks the
// better-conditioned of the two row equations.
inline Eigen::Vector2d transpose_eigenvector(std::int64_t a, std::int64_t b,
                                             std::int64_t c, std::int64_t d,
                                             double mu) {
    Eigen::Vector2d v1(double(c), mu - double(a));
    Eigen::Vector2d v2(mu - double(d), double(b));
    Eigen::Vector2d v = v1.norm() >= v2.norm() ? v1 : v2;
    return canonical_unit(v);
}

} // namespace detail

// Validates hyperbolicity and computes the splitting data. By default the
// matrix is required to be unimodular (|det| = 1); pass false to allow any
// nonzero determinant with real off-circle eigenvalues.
inline HyperbolicAutomorphism validate_hyperbolic(std::int64_t a, std::int64_t b,
                                                  std::int64_t c, std::int64_t d,
                                                  bool require_unimodular = true) {
    HyperbolicAutomorphism h;
    h.a = a; h.b = b; h.c = c; h.d = d;
    h.det = detail::checked_add(detail::checked_mul(a, d),
                                -detail::checked_mul(b, c));
    if (h.det == 0)
        throw SingularMatrix("matrix has determinant 0");
    if (require_unimodular && std::llabs(h.det) != 1)
        throw NotHyperbolic("matrix is not unimodular (|det| = " +
                            std::to_string(std::llabs(h.det)) +
                            "); pass require_unimodular = false to allow");

    const double tr = double(a + d);
    const double disc = tr * tr - 4.0 * double(h.det);
    if (disc <= 0.0)
        throw NotHyperbolic(disc < 0.0
                                ? "eigenvalues are a complex conjugate pair"
                                : "repeated real eigenvalue, no splitting");
    const double root = std::sqrt(disc);
    // Stable quadratic: the larger-magnitude root first, the other via det.
    double big = (tr >= 0.0) ? (tr + root) / 2.0 : (tr - root) / 2.0;
    double small = double(h.det) / big;
    if (std::abs(std::abs(big) - 1.0) < 1e-12 || std::abs(std::abs(small) - 1.0) < 1e-12)
        throw NotHyperbolic("an eigenvalue lies on the unit circle");
    if (std::abs(big) < 1.0 || std::abs(small) > 1.0)
        throw NotHyperbolic("eigenvalues do not straddle the unit circle");

    h.lambda = std::abs(big);
    h.mu_plus = big;
    h.mu_minus = small;
    h.u_plus = detail::transpose_eigenvector(a, b, c, d, big);
    h.u_minus = detail::transpose_eigenvector(a, b, c, d, small);

    Eigen::Matrix2d s;
    s.col(0) = h.u_plus;
    s.col(1) = h.u_minus;
    Eigen::Matrix2d s_inv = s.inverse();
    h.proj_plus = h.u_plus * s_inv.row(0);
    h.proj_minus = h.u_minus * s_inv.row(1);
    return h;
}

inline HyperbolicAutomorphism validate_hyperbolic(const IntMat2& m,
                                                  bool require_unimodular = true) {
    return validate_hyperbolic(m[0][0], m[0][1], m[1][0], m[1][1], require_unimodular);
}

inline DualSplit dual_split(const HyperbolicAutomorphism& m, const Eigen::Vector2d& n) {
    DualSplit s;
    s.plus_part = m.proj_plus * n;
    s.minus_part = m.proj_minus * n;
    s.plus_norm = s.plus_part.norm();
    s.minus_norm = s.minus_part.norm();
    return s;
}

inline DualSplit dual_split(const HyperbolicAutomorphism& m, std::int64_t n1, std::int64_t n2) {
    return dual_split(m, Eigen::Vector2d(double(n1), double(n2)));
}

inline Cone cone_of(const HyperbolicAutomorphism& m, const Eigen::Vector2d& n,
                    double boundary_tol = 1e-12) {
    const DualSplit s = dual_split(m, n);
    const double diff = s.signed_norm();
    if (diff > boundary_tol) return Cone::Plus;
    if (diff < -boundary_tol) return Cone::Minus;
    return Cone::Boundary;
}

namespace detail {

// Integer solutions y of 0 <= alpha + c*y <= q-1. Returns {lo, hi}; when
// c == 0 the interval is unbounded (flagged by all = true) or empty.
struct IntInterval {
    std::int64_t lo = 0, hi = -1;
    bool all = false;
    bool empty() const { return !all && lo > hi; }
};

inline IntInterval solve_affine_range(std::int64_t alpha, std::int64_t c, std::int64_t q) {
    IntInterval iv;
    if (c == 0) {
        if (alpha >= 0 && alpha < q) iv.all = true;
        return iv;
    }
    // -alpha <= c*y <= q-1-alpha; dividing by c flips the bounds when c < 0.
    const std::int64_t lo_num = -alpha, hi_num = q - 1 - alpha;
    if (c > 0) {
        iv.lo = -floor_div(-lo_num, c); // ceil(lo_num / c)
        iv.hi = floor_div(hi_num, c);
    } else {
        iv.lo = -floor_div(-hi_num, c); // ceil(hi_num / c)
        iv.hi = floor_div(lo_num, c);
    }
    return iv;
}

} // namespace detail

// All x in [0,1)^2 with (I - A)x integral, for an integer matrix A with
// det(I - A) != 0. Solved exactly: x = adj(I-A) v / det(I-A) over integer
// candidates v, accepting exactly those with both components in [0,1).
inline FixedPointSet fixed_points_of_integer_matrix(const IntMat2& a_mat) {
    using detail::checked_add;
    using detail::checked_mul;
    IntMat2 dmat{{{1 - a_mat[0][0], -a_mat[0][1]},
                  {-a_mat[1][0], 1 - a_mat[1][1]}}};
    const std::int64_t det = int_det(dmat);
    if (det == 0)
        throw DegenerateFixedEquation("det(I - M) = 0: eigenvalue 1 present");
    const std::int64_t q = std::llabs(det);
    const std::int64_t sgn = det > 0 ? 1 : -1;
    // t = sgn * adj(D) v must satisfy 0 <= t_i < q; then x = t / q.
    const std::int64_t p11 = sgn * dmat[1][1], p12 = -sgn * dmat[0][1];
    const std::int64_t p21 = -sgn * dmat[1][0], p22 = sgn * dmat[0][0];

    // v1 range from the corners of D [0,1]^2.
    const std::int64_t xs[4] = {0, dmat[0][0], dmat[0][1],
                                checked_add(dmat[0][0], dmat[0][1])};
    std::int64_t v1_min = *std::min_element(xs, xs + 4);
    std::int64_t v1_max = *std::max_element(xs, xs + 4);

    FixedPointSet out;
    out.count = 0;
    for (std::int64_t v1 = v1_min; v1 <= v1_max; ++v1) {
        auto r1 = detail::solve_affine_range(checked_mul(p11, v1), p12, q);
        auto r2 = detail::solve_affine_range(checked_mul(p21, v1), p22, q);
        if (r1.empty() || r2.empty()) continue;
        std::int64_t lo, hi;
        if (r1.all && r2.all) continue; // impossible: det != 0
        if (r1.all) { lo = r2.lo; hi = r2.hi; }
        else if (r2.all) { lo = r1.lo; hi = r1.hi; }
        else { lo = std::max(r1.lo, r2.lo); hi = std::min(r1.hi, r2.hi); }
        for (std::int64_t v2 = lo; v2 <= hi; ++v2) {
            const std::int64_t t1 = checked_add(checked_mul(p11, v1), checked_mul(p12, v2));
            const std::int64_t t2 = checked_add(checked_mul(p21, v1), checked_mul(p22, v2));
            if (t1 < 0 || t1 >= q || t2 < 0 || t2 >= q) continue;
            out.points.emplace_back(double(t1) / double(q), double(t2) / double(q));
            ++out.count;
        }
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
                  return u(0) != v(0) ? u(0) < v(0) : u(1) < v(1);
              });
    return out;
}

inline FixedPointSet fixed_points_linear(const HyperbolicAutomorphism& m) {
    return fixed_points_of_integer_matrix(m.int_matrix());
}

// Fixed points of M^n on the torus; count = |det(I - M^n)|.
inline FixedPointSet periodic_points_linear(const HyperbolicAutomorphism& m, int n,
                                            std::int64_t count_cap = 1000000) {
    if (n < 1) throw ConfigError("period must be >= 1");
    const IntMat2 mn = int_mat_pow(m.int_matrix(), n);
    IntMat2 dmat{{{1 - mn[0][0], -mn[0][1]}, {-mn[1][0], 1 - mn[1][1]}}};
    const std::int64_t det = int_det(dmat);
    if (det == 0)
        throw DegenerateFixedEquation("det(I - M^n) = 0");
    if (std::llabs(det) > count_cap)
        throw OverflowRisk("|det(I - M^" + std::to_string(n) + ")| = " +
                           std::to_string(std::llabs(det)) +
                           " exceeds the periodic point cap " +
                           std::to_string(count_cap));
    return fixed_points_of_integer_matrix(mn);
}

} // namespace ruelle
