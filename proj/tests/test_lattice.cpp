#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "ruelle/lattice.hpp"

using namespace ruelle;

namespace {

// Characteristic-polynomial oracle: the expanding root of t^2 - tr t + det.
double char_poly_lambda(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    const long double tr = static_cast<long double>(a + d);
    const long double det = static_cast<long double>(a * d - b * c);
    const long double root = std::sqrt(tr * tr - 4.0L * det);
    const long double big = tr >= 0 ? (tr + root) / 2.0L : (tr - root) / 2.0L;
    return static_cast<double>(std::fabs(big));
}

// Independent split oracle: solve [u+ u-] s = n by Cramer's rule.
std::pair<Eigen::Vector2d, Eigen::Vector2d>
split_by_solve(const HyperbolicAutomorphism& m, const Eigen::Vector2d& n) {
    Eigen::Matrix2d s;
    s.col(0) = m.u_plus;
    s.col(1) = m.u_minus;
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    const double cp = (n(0) * s(1, 1) - s(0, 1) * n(1)) / det;
    const double cm = (s(0, 0) * n(1) - n(0) * s(1, 0)) / det;
    return {cp * m.u_plus, cm * m.u_minus};
}

// Brute-force rational grid oracle: count x = (i/q, j/q) with A x = x (mod 1),
// exactly in integer arithmetic.
std::int64_t grid_fixed_count(const IntMat2& a, std::int64_t q) {
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < q; ++i)
        for (std::int64_t j = 0; j < q; ++j) {
            const std::int64_t r1 = (a[0][0] - 1) * i + a[0][1] * j;
            const std::int64_t r2 = a[1][0] * i + (a[1][1] - 1) * j;
            if (r1 % q == 0 && r2 % q == 0) ++count;
        }
    return count;
}

const IntMat2 kCat{{{2, 1}, {1, 1}}};      // Arnol'd cat map
const IntMat2 kExample{{{3, 1}, {2, 1}}};  // lambda = 2 + sqrt(3)

} // namespace

TEST_CASE("validate_hyperbolic: spectral data") {
    SECTION("example matrix has lambda = 2 + sqrt(3) and eigenvector (1+sqrt(3), 1)") {
        const auto h = validate_hyperbolic(kExample);
        REQUIRE(h.det == 1);
        CHECK(h.lambda == Catch::Approx(2.0 + std::sqrt(3.0)).epsilon(1e-14));
        Eigen::Vector2d expected(1.0 + std::sqrt(3.0), 1.0);
        expected.normalize();
        CHECK((h.u_plus - expected).norm() < 1e-13);
        Eigen::Vector2d expected_minus(1.0 - std::sqrt(3.0), 1.0);
        expected_minus = -expected_minus.normalized(); // first component positive
        CHECK((h.u_minus - expected_minus).norm() < 1e-13);
    }
    SECTION("cat map lambda matches the characteristic-polynomial oracle") {
        const auto h = validate_hyperbolic(kCat);
        CHECK(h.lambda == Catch::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-14));
        CHECK(h.lambda == Catch::Approx(char_poly_lambda(2, 1, 1, 1)).epsilon(1e-14));
    }
    SECTION("parabolic shear is rejected") {
        CHECK_THROWS_AS(validate_hyperbolic(1, 1, 0, 1), NotHyperbolic);
    }
    SECTION("rotation-like (complex eigenvalues) is rejected") {
        CHECK_THROWS_AS(validate_hyperbolic(0, -1, 1, 0), NotHyperbolic);
    }
    SECTION("singular matrix is rejected") {
        CHECK_THROWS_AS(validate_hyperbolic(1, 1, 1, 1), SingularMatrix);
    }
    SECTION("non-unimodular rejected by default, allowed when relaxed") {
        CHECK_THROWS_AS(validate_hyperbolic(3, 1, 1, 1), NotHyperbolic);
        const auto h = validate_hyperbolic(3, 1, 1, 1, false); // det = 2
        CHECK(h.lambda > 1.0);
        CHECK(std::abs(h.mu_minus) < 1.0);
    }
    SECTION("projector identities") {
        for (const auto& m : {kCat, kExample, IntMat2{{{1, 1}, {1, 0}}}}) {
            const auto h = validate_hyperbolic(m);
            CHECK((h.proj_plus + h.proj_minus - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((h.proj_plus * h.proj_minus).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("dual_split") {
    const auto h = validate_hyperbolic(kExample);

    SECTION("zero vector splits to zero") {
        const auto s = dual_split(h, 0, 0);
        CHECK(s.plus_norm == 0.0);
        CHECK(s.minus_norm == 0.0);
        CHECK(s.signed_norm() == 0.0);
    }
    SECTION("n = (1,0) matches the 2x2 solve oracle") {
        const auto s = dual_split(h, 1, 0);
        const auto [p, q] = split_by_solve(h, Eigen::Vector2d(1, 0));
        CHECK((s.plus_part - p).norm() < 1e-13);
        CHECK((s.minus_part - q).norm() < 1e-13);
    }
    SECTION("reconstruction and adapted-norm identities over the ball") {
        for (const auto& m : {kCat, kExample, IntMat2{{{1, 1}, {1, 0}}}}) {
            const auto hm = validate_hyperbolic(m);
            const Eigen::Matrix2d mt = hm.transpose_matrix();
            for (int n1 = -50; n1 <= 50; ++n1)
                for (int n2 = -50; n2 <= 50; ++n2) {
                    const Eigen::Vector2d n(n1, n2);
                    const auto s = dual_split(hm, n);
                    REQUIRE((s.plus_part + s.minus_part - n).cwiseAbs().maxCoeff() < 1e-12);
                    if (n1 == 0 && n2 == 0) continue;
                    const auto sm = dual_split(hm, mt * n);
                    REQUIRE(sm.plus_norm == Catch::Approx(hm.lambda * s.plus_norm).margin(1e-10 * (1 + s.plus_norm)));
                    const double contracted = std::abs(hm.mu_minus) * s.minus_norm;
                    REQUIRE(sm.minus_norm == Catch::Approx(contracted).margin(1e-10 * (1 + s.minus_norm)));
                }
        }
    }
}

TEST_CASE("cone_of") {
    const auto h = validate_hyperbolic(kExample);
    SECTION("zero is on the boundary") {
        CHECK(cone_of(h, Eigen::Vector2d(0, 0)) == Cone::Boundary);
    }
    SECTION("dual eigendirections classify as Plus / Minus") {
        CHECK(cone_of(h, 100.0 * h.u_plus) == Cone::Plus);
        CHECK(cone_of(h, 100.0 * h.u_minus) == Cone::Minus);
    }
    SECTION("classification agrees with the split oracle on integer vectors") {
        for (int n1 = -12; n1 <= 12; ++n1)
            for (int n2 = -12; n2 <= 12; ++n2) {
                const Eigen::Vector2d n(n1, n2);
                const auto [p, q] = split_by_solve(h, n);
                const double diff = p.norm() - q.norm();
                const Cone c = cone_of(h, n);
                if (diff > 1e-12) REQUIRE(c == Cone::Plus);
                else if (diff < -1e-12) REQUIRE(c == Cone::Minus);
                else REQUIRE(c == Cone::Boundary);
            }
    }
    SECTION("symmetric under n -> -n") {
        for (int n1 = -10; n1 <= 10; ++n1)
            for (int n2 = -10; n2 <= 10; ++n2)
                REQUIRE(cone_of(h, Eigen::Vector2d(n1, n2)) ==
                        cone_of(h, Eigen::Vector2d(-n1, -n2)));
    }
}

TEST_CASE("fixed_points_linear") {
    SECTION("cat map has the single fixed point (0,0)") {
        const auto h = validate_hyperbolic(kCat);
        const auto fp = fixed_points_linear(h);
        REQUIRE(fp.count == 1);
        CHECK(fp.points[0].norm() == 0.0);
    }
    SECTION("example matrix has two fixed points including the origin") {
        const auto h = validate_hyperbolic(kExample);
        const auto fp = fixed_points_linear(h);
        REQUIRE(fp.count == 2);
        CHECK(fp.points[0].norm() == 0.0);
        CHECK((fp.points[1] - Eigen::Vector2d(0.5, 0.0)).norm() < 1e-15);
    }
    SECTION("count equals |det(I-M)| and matches the rational grid oracle") {
        for (const auto& m : {kCat, kExample, IntMat2{{{1, 1}, {1, 0}}}, IntMat2{{{4, 1}, {3, 1}}}}) {
            const auto h = validate_hyperbolic(m);
            const auto fp = fixed_points_linear(h);
            IntMat2 d{{{1 - m[0][0], -m[0][1]}, {-m[1][0], 1 - m[1][1]}}};
            const std::int64_t q = std::llabs(int_det(d));
            REQUIRE(fp.count == q);
            REQUIRE(grid_fixed_count(m, q) == q);
            REQUIRE(grid_fixed_count(m, 3 * q) == q); // finer grid, same solutions
            // every reported point solves (I - M)x in Z^2
            const Eigen::Matrix2d md = h.matrix();
            for (const auto& x : fp.points) {
                const Eigen::Vector2d r = x - md * x;
                CHECK(std::abs(r(0) - std::round(r(0))) < 1e-12);
                CHECK(std::abs(r(1) - std::round(r(1))) < 1e-12);
            }
        }
    }
}

TEST_CASE("periodic_points_linear") {
    const auto h = validate_hyperbolic(kCat);
    SECTION("period 1 reduces to fixed_points_linear") {
        const auto a = fixed_points_linear(h);
        const auto b = periodic_points_linear(h, 1);
        REQUIRE(a.count == b.count);
        for (std::size_t i = 0; i < a.points.size(); ++i)
            CHECK((a.points[i] - b.points[i]).norm() == 0.0);
    }
    SECTION("cat map counts at periods 2 and 3 match the determinant oracle") {
        CHECK(periodic_points_linear(h, 2).count == 5);  // det(I - M^2) = -5
        CHECK(periodic_points_linear(h, 3).count == 16); // det(I - M^3) = -16
        const IntMat2 m3 = int_mat_pow(kCat, 3);
        IntMat2 d{{{1 - m3[0][0], -m3[0][1]}, {-m3[1][0], 1 - m3[1][1]}}};
        CHECK(std::llabs(int_det(d)) == 16);
    }
    SECTION("all periodic points actually close up under M^n") {
        const auto pp = periodic_points_linear(h, 3);
        const Eigen::Matrix2d md = h.matrix();
        std::set<std::pair<long, long>> seen;
        for (const auto& x : pp.points) {
            Eigen::Vector2d y = x;
            for (int k = 0; k < 3; ++k) {
                y = md * y;
                y -= y.array().floor().matrix();
            }
            Eigen::Vector2d diff = y - x;
            diff -= diff.array().round().matrix();
            REQUIRE(diff.cwiseAbs().maxCoeff() < 1e-10);
            seen.insert({std::lround(x(0) * 1e9), std::lround(x(1) * 1e9)});
        }
        REQUIRE(seen.size() == pp.points.size()); // points are distinct
    }
    SECTION("cap triggers OverflowRisk") {
        CHECK_THROWS_AS(periodic_points_linear(h, 6, 100), OverflowRisk);
    }
}
