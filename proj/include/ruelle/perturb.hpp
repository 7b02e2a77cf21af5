#pragma once

// The first-order trace functional B_M and the structured perturbation
// generators: generic profiles psi_0(x_j) v_j, volume-preserving directions
// solved exactly in integers from alpha_1 d = alpha_2 b (j = 1) or
// alpha_1 c = alpha_2 a (j = 2), and their volume-breaking tilts along the
// j-th column of M.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/analytic_maps.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/lattice.hpp"

namespace ruelle {

struct BFunctionalResult {
    double value = 0.0;
    std::vector<std::pair<Eigen::Vector2d, double>> per_fixed_point;
    std::int64_t n_m = 0;
};

// (I - M)^{-1}, exact adjugate over the integer determinant.
inline Eigen::Matrix2d inverse_of_one_minus(const HyperbolicAutomorphism& m) {
    const std::int64_t d00 = 1 - m.a, d01 = -m.b, d10 = -m.c, d11 = 1 - m.d;
    const std::int64_t det = d00 * d11 - d01 * d10;
    if (det == 0) throw DegenerateFixedEquation("det(I - M) = 0");
    Eigen::Matrix2d inv;
    inv << double(d11), double(-d01), double(-d10), double(d00);
    return inv / double(det);
}

// B_M(psi) = N_M^{-1} sum_{Mx=x} tr((I - M)^{-1} D_x psi).
inline BFunctionalResult b_functional(const HyperbolicAutomorphism& m,
                                      const TrigPolynomial& psi) {
    const Eigen::Matrix2d inv = inverse_of_one_minus(m);
    const auto fixed = fixed_points_linear(m);
    BFunctionalResult out;
    out.n_m = fixed.count;
    double sum = 0.0;
    for (const auto& x : fixed.points) {
        const double term = (inv * psi.jacobian(x)).trace();
        out.per_fixed_point.emplace_back(x, term);
        sum += term;
    }
    out.value = sum / double(fixed.count);
    return out;
}

enum class PerturbationKind { Generic, VolumePreserving, VolumeBreaking };

struct StructuredPerturbation {
    PerturbationKind kind;
    int j = 1;                 // coordinate index, 1-based as in the identities
    Profile1D profile;
    Eigen::Vector2d alpha;     // realized direction (unit for the alpha-based kinds)
    double delta = 0.0;        // VolumeBreaking only
    TrigPolynomial realized;
    BFunctionalResult b;
    bool in_generic_set = false;
};

namespace detail {

inline void require_generic(StructuredPerturbation& p) {
    double scale = 1.0;
    for (const auto& [x, term] : p.b.per_fixed_point)
        scale = std::max(scale, std::abs(term));
    p.in_generic_set = std::abs(p.b.value) > 1e-12 * scale;
    if (!p.in_generic_set)
        throw NotInGenericSet(
            "B_M vanishes for this profile; raise the profile frequency or shift "
            "its phase");
}

} // namespace detail

// psi(x) = psi_0(x_j) v_j with v_j the j-th column of ((I - M)^T)^{-1}.
inline StructuredPerturbation make_generic(const HyperbolicAutomorphism& m, int j,
                                           const Profile1D& profile) {
    if (j != 1 && j != 2) throw ConfigError("coordinate index j must be 1 or 2");
    StructuredPerturbation out;
    out.kind = PerturbationKind::Generic;
    out.j = j;
    out.profile = profile;
    out.alpha = inverse_of_one_minus(m).row(j - 1).transpose();
    out.realized = profile_times_direction(profile, j, out.alpha);
    out.b = b_functional(m, out.realized);
    detail::require_generic(out);
    return out;
}

namespace detail {

// Integer solution of the determinant-preserving condition e. g. (b, d) for
// j = 1; nonzero because M is invertible.
inline Eigen::Vector2d volume_preserving_direction(const HyperbolicAutomorphism& m,
                                                   int j) {
    if (j != 1 && j != 2) throw ConfigError("coordinate index j must be 1 or 2");
    if (m.is_diagonal())
        throw DiagonalMatrix("volume-preserving construction needs a non-diagonal M");
    Eigen::Vector2d alpha = j == 1 ? Eigen::Vector2d(double(m.b), double(m.d))
                                   : Eigen::Vector2d(double(m.a), double(m.c));
    return alpha / alpha.norm();
}

inline void check_det_identity(const HyperbolicAutomorphism& m,
                               const TrigPolynomial& realized,
                               const std::function<double(const Eigen::Vector2d&)>& expected,
                               int grid = 64,
                               const std::vector<double>& eps_list = {0.01, 0.1}) {
    for (double eps : eps_list) {
        PerturbedMap t{m, realized, eps, 1.0};
        for (int i = 0; i < grid; ++i)
            for (int jj = 0; jj < grid; ++jj) {
                const Eigen::Vector2d x(double(i) / grid, double(jj) / grid);
                const Eigen::Matrix2d dt = t.derivative(x);
                const double det = dt(0, 0) * dt(1, 1) - dt(0, 1) * dt(1, 0);
                const double want = expected(x) * eps; // deviation scaled by eps
                if (std::abs(det - double(m.det) - want) > 1e-12)
                    throw DetDriftDetected(
                        "determinant identity violated at grid point (" +
                        std::to_string(x(0)) + ", " + std::to_string(x(1)) +
                        ") for eps = " + std::to_string(eps));
            }
    }
}

} // namespace detail

// Realizes psi(x) = phi(x_j) alpha with alpha solving the cofactor condition,
// verifies det(M + eps D psi) = det(M) on a grid, and certifies membership in
// the generic set.
inline StructuredPerturbation make_volume_preserving(const HyperbolicAutomorphism& m,
                                                     int j, const Profile1D& profile) {
    StructuredPerturbation out;
    out.kind = PerturbationKind::VolumePreserving;
    out.j = j;
    out.profile = profile;
    out.alpha = detail::volume_preserving_direction(m, j);
    out.realized = profile_times_direction(profile, j, out.alpha);
    detail::check_det_identity(m, out.realized,
                               [](const Eigen::Vector2d&) { return 0.0; });
    out.b = b_functional(m, out.realized);
    detail::require_generic(out);
    return out;
}

// Tilts the volume-preserving direction by delta along the j-th column of M:
// det(M + eps D psi) - det M = det M * delta * eps * phi'(x_j) pointwise.
inline StructuredPerturbation make_volume_breaking(const HyperbolicAutomorphism& m,
                                                   int j, const Profile1D& profile,
                                                   double delta) {
    if (delta == 0.0) throw ConfigError("volume-breaking delta must be nonzero");
    StructuredPerturbation out;
    out.kind = PerturbationKind::VolumeBreaking;
    out.j = j;
    out.profile = profile;

    const Eigen::Vector2d alpha = detail::volume_preserving_direction(m, j);
    const Eigen::Vector2d w_j = j == 1 ? Eigen::Vector2d(double(m.a), double(m.c))
                                       : Eigen::Vector2d(double(m.b), double(m.d));
    const Eigen::Vector2d v_j = inverse_of_one_minus(m).row(j - 1).transpose();
    // the sign of delta must keep v_j . (alpha + delta w_j) away from zero
    if (std::abs(v_j.dot(alpha + delta * w_j)) < std::abs(v_j.dot(alpha - delta * w_j)))
        delta = -delta;
    out.delta = delta;
    out.alpha = alpha + delta * w_j;
    out.realized = profile_times_direction(profile, j, out.alpha);

    const double det_m = double(m.det);
    detail::check_det_identity(
        m, out.realized,
        [&](const Eigen::Vector2d& x) {
            return det_m * delta * profile.derivative(x(j - 1));
        });
    out.b = b_functional(m, out.realized);
    detail::require_generic(out);
    return out;
}

// Fraction of grid points where |det(M + eps D psi)| deviates from |det M| by
// more than tol; the volume-breaking construction should be close to 1.
inline double volume_breaking_fraction(const HyperbolicAutomorphism& m,
                                       const StructuredPerturbation& p, double eps,
                                       int grid = 64, double tol = 1e-9) {
    PerturbedMap t{m, p.realized, eps, 1.0};
    long hits = 0;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const Eigen::Vector2d x(double(i) / grid, double(j) / grid);
            const Eigen::Matrix2d dt = t.derivative(x);
            const double det = dt(0, 0) * dt(1, 1) - dt(0, 1) * dt(1, 0);
            if (std::abs(std::abs(det) - std::llabs(m.det)) > tol) ++hits;
        }
    return double(hits) / (double(grid) * grid);
}

// Residual of the determinant-preserving identity: both sides of
//   det D(T + T_phi) - det DT = (-1)^j phi'(x_j) sum_i (-1)^i alpha_i det B_{i,j}(DT)
// evaluated independently at x; B_{i,j} strikes row i and column j.
inline double detpres_residual(const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& jac,
                               int j, const Eigen::Vector2d& alpha,
                               const Profile1D& profile, const Eigen::Vector2d& x) {
    if (j != 1 && j != 2) throw ConfigError("coordinate index j must be 1 or 2");
    const Eigen::Matrix2d dt = jac(x);
    const double dphi = profile.derivative(x(j - 1));

    Eigen::Matrix2d perturbed = dt;
    perturbed.col(j - 1) += alpha * dphi;
    const double lhs = (perturbed(0, 0) * perturbed(1, 1) - perturbed(0, 1) * perturbed(1, 0)) -
                       (dt(0, 0) * dt(1, 1) - dt(0, 1) * dt(1, 0));

    // minors: striking row i, column j leaves a scalar in d = 2
    const auto minor = [&](int i) { return dt(1 - (i - 1), 1 - (j - 1)); };
    double sum = 0.0;
    for (int i = 1; i <= 2; ++i)
        sum += (i % 2 == 0 ? 1.0 : -1.0) * alpha(i - 1) * minor(i);
    const double rhs = (j % 2 == 0 ? 1.0 : -1.0) * dphi * sum;
    return std::abs(lhs - rhs);
}

} // namespace ruelle
