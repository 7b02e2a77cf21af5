#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ruelle/aniso_space.hpp"

using namespace ruelle;

namespace {
const auto kExample = validate_hyperbolic(3, 1, 2, 1);
const auto kCat = validate_hyperbolic(2, 1, 1, 1);
} // namespace

TEST_CASE("log_weight") {
    const AnisotropicWeight w(kExample, 0.05);
    SECTION("zero frequency has weight 1") {
        CHECK(w.log_weight(0, 0) == 0.0);
    }
    SECTION("unstable dual eigendirection gives -2 pi c ||n||") {
        const Eigen::Vector2d n = 7.0 * kExample.u_plus;
        CHECK(w.log_weight(n) == Catch::Approx(-two_pi * 0.05 * 7.0).margin(1e-12));
        CHECK(w.log_weight(n) < 0.0);
    }
    SECTION("n = (1,0) matches the split-based formula") {
        const auto s = dual_split(kExample, 1, 0);
        CHECK(w.log_weight(1, 0) ==
              Catch::Approx(-two_pi * 0.05 * (s.plus_norm - s.minus_norm)).margin(1e-14));
    }
    SECTION("antisymmetric under swapping the cone roles") {
        // swapping u_plus/u_minus swaps the roles of the two projections
        HyperbolicAutomorphism swapped = kExample;
        std::swap(swapped.u_plus, swapped.u_minus);
        std::swap(swapped.proj_plus, swapped.proj_minus);
        const AnisotropicWeight ws(swapped, 0.05);
        for (int n1 = -20; n1 <= 20; ++n1)
            for (int n2 = -20; n2 <= 20; ++n2)
                REQUIRE(w.log_weight(n1, n2) ==
                        Catch::Approx(-ws.log_weight(n1, n2)).margin(1e-12));
    }
    SECTION("telescoping is exact in log space") {
        const double l1 = w.log_weight(3, -2), l2 = w.log_weight(-5, 1), l3 = w.log_weight(2, 9);
        CHECK((l1 - l2) + (l2 - l3) == Catch::Approx(l1 - l3).margin(1e-15));
    }
    SECTION("c must be positive") {
        CHECK_THROWS_AS(AnisotropicWeight(kExample, 0.0), ConfigError);
    }
}

TEST_CASE("hardy_log_weight") {
    CHECK(hardy_log_weight({0, 0}, 0.1) == 0.0);
    CHECK(hardy_log_weight({1, 0}, 0.1) == Catch::Approx(-0.2 * std::numbers::pi).margin(1e-15));
    CHECK(hardy_log_weight({2, -3}, 0.05) == Catch::Approx(-0.5 * std::numbers::pi).margin(1e-15));
}

TEST_CASE("embedding_margin") {
    SECTION("zero at n = 0 and positive along the unstable dual direction") {
        const AnisotropicWeight w(kExample, 0.05);
        CHECK(embedding_margin(w, {0, 0}) == 0.0);
        CHECK(embedding_margin(w, 9.0 * kExample.u_plus) > 0.0);
    }
    SECTION("nonnegative over the whole ball for both test matrices") {
        for (const auto& h : {kExample, kCat}) {
            const AnisotropicWeight w(h, 0.05);
            double min_margin = 1e300;
            for (int n1 = -50; n1 <= 50; ++n1)
                for (int n2 = -50; n2 <= 50; ++n2)
                    min_margin = std::min(min_margin,
                                          embedding_margin(w, {double(n1), double(n2)}));
            REQUIRE(min_margin >= 0.0);
        }
    }
}

TEST_CASE("BasisIndex") {
    const BasisIndex basis(3);
    SECTION("size and origin") {
        CHECK(basis.size() == 49);
        CHECK(basis.frequency(0) == Eigen::Vector2i(0, 0));
        CHECK(basis.position(0, 0) == 0);
    }
    SECTION("shells are ordered and lookup inverts the enumeration") {
        int prev_shell = 0;
        for (int i = 0; i < basis.size(); ++i) {
            const auto n = basis.frequency(i);
            const int shell = std::max(std::abs(n(0)), std::abs(n(1)));
            REQUIRE(shell >= prev_shell);
            prev_shell = shell;
            REQUIRE(basis.position(n(0), n(1)) == i);
        }
    }
    SECTION("lexicographic within a shell") {
        // shell 1 starts right after the origin
        CHECK(basis.frequency(1) == Eigen::Vector2i(-1, -1));
        CHECK(basis.frequency(2) == Eigen::Vector2i(-1, 0));
        CHECK(basis.frequency(3) == Eigen::Vector2i(-1, 1));
        CHECK(basis.frequency(4) == Eigen::Vector2i(0, -1));
        CHECK(basis.frequency(5) == Eigen::Vector2i(0, 1));
    }
    SECTION("outside the ball returns -1") {
        CHECK(basis.position(4, 0) == -1);
        CHECK(basis.position(0, -4) == -1);
        CHECK(basis.position(1000000000000LL, 2) == -1);
    }
}
