#pragma once

// Anisotropic and Hardy weights on the Fourier lattice, plus the truncated
// basis index set. All weights are carried as logarithms; products and ratios
// of weights are sums, which keeps the huge dynamic range of the weight
// ratios away from floating-point overflow.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/errors.hpp"
#include "ruelle/lattice.hpp"

namespace ruelle {

// The map n -> exp(-2 pi c (||n+|| - ||n-||)) as its logarithm.
struct AnisotropicWeight {
    HyperbolicAutomorphism m;
    double c;

    AnisotropicWeight(const HyperbolicAutomorphism& matrix, double weight_c)
        : m(matrix), c(weight_c) {
        if (!(c > 0.0)) throw ConfigError("weight parameter c must be > 0");
    }

    double log_weight(const Eigen::Vector2d& n) const {
        return -two_pi_c() * dual_split(m, n).signed_norm();
    }
    double log_weight(std::int64_t n1, std::int64_t n2) const {
        return log_weight(Eigen::Vector2d(double(n1), double(n2)));
    }

    // Equivalence constant ||P-||_{1->2}: max column 2-norm of the
    // contracting projector. Gives ||n-|| <= kappa ||n||_1 for all n.
    double kappa() const {
        return std::max(m.proj_minus.col(0).norm(), m.proj_minus.col(1).norm());
    }

private:
    double two_pi_c() const { return two_pi * c; }
};

inline double hardy_log_weight(const Eigen::Vector2d& n, double r) {
    if (!(r > 0.0)) throw ConfigError("Hardy parameter r must be > 0");
    return -two_pi * r * (std::abs(n(0)) + std::abs(n(1)));
}

// kappa ||n||_1 + (||n+|| - ||n-||); nonnegative by construction of kappa.
inline double embedding_margin(const AnisotropicWeight& w, const Eigen::Vector2d& n) {
    const auto s = dual_split(w.m, n);
    return w.kappa() * (std::abs(n(0)) + std::abs(n(1))) + s.signed_norm();
}

// Deterministic enumeration of {n : ||n||_inf <= N}, lexicographic by
// (||n||_inf, n1, n2); index 0 is n = (0,0).
class BasisIndex {
public:
    explicit BasisIndex(int radius) : radius_(radius) {
        if (radius < 1) throw ConfigError("truncation radius N must be >= 1");
        const int w = 2 * radius + 1;
        order_.reserve(std::size_t(w) * w);
        position_.assign(std::size_t(w) * w, -1);
        for (int shell = 0; shell <= radius; ++shell)
            for (int n1 = -shell; n1 <= shell; ++n1)
                for (int n2 = -shell; n2 <= shell; ++n2) {
                    if (std::max(std::abs(n1), std::abs(n2)) != shell) continue;
                    position_[flat(n1, n2)] = int(order_.size());
                    order_.emplace_back(n1, n2);
                }
    }

    int radius() const { return radius_; }
    int size() const { return int(order_.size()); }
    const Eigen::Vector2i& frequency(int index) const { return order_[index]; }
    const std::vector<Eigen::Vector2i>& order() const { return order_; }

    // -1 when the frequency lies outside the ball.
    int position(std::int64_t n1, std::int64_t n2) const {
        if (std::llabs(n1) > radius_ || std::llabs(n2) > radius_) return -1;
        return position_[flat(int(n1), int(n2))];
    }

private:
    std::size_t flat(int n1, int n2) const {
        return std::size_t(n1 + radius_) * (2 * radius_ + 1) + std::size_t(n2 + radius_);
    }
    int radius_;
    std::vector<Eigen::Vector2i> order_;
    std::vector<int> position_;
};

} // namespace ruelle
