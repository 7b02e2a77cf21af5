#pragma once

// The transfer operator as the adjoint of the Koopman matrix under the real
// pairing: its matrix is the transpose, its spectrum coincides with the
// Koopman spectrum, and its fixed left functional is the SRB measure. The
// extracted functional is validated against Birkhoff averages of forward
// orbits started from Lebesgue-random points.

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/detail/parallel.hpp"
#include "ruelle/eig.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/koopman.hpp"

namespace ruelle {

// Matrix of L_T on the dual basis: the transpose of the Koopman matrix.
inline Eigen::MatrixXcd transfer_matrix(const KoopmanMatrix& k) {
    return k.entries.transpose();
}

// mu(phi_n) per basis index, normalized so the pairing with the constant
// function is 1. residual = ||v^T K - v^T||_inf for the normalized left vector.
struct SrbFunctional {
    std::vector<Eigen::Vector2i> frequencies;
    Eigen::VectorXcd coefficients;
    double residual = 0.0;
    double eigenvalue_gap = 0.0;

    std::complex<double> coefficient(int n1, int n2, const BasisIndex& basis) const {
        const int i = basis.position(n1, n2);
        return i < 0 ? std::complex<double>(0.0, 0.0) : coefficients(i);
    }
};

// Left eigenvector of K for the eigenvalue nearest 1, as the functional's
// Fourier-Stieltjes coefficients mu(phi_n) = C_n v_n.
inline SrbFunctional srb_extract(const KoopmanMatrix& k, double gap_tol = 1e-6) {
    const auto eig = dense_eigensolve(k.entries, EigVectors::Left);
    const int dim = int(eig.values.size());
    int best = 0, second = -1;
    for (int i = 1; i < dim; ++i) {
        const double d = std::abs(eig.values(i) - 1.0);
        if (d < std::abs(eig.values(best) - 1.0)) {
            second = best;
            best = i;
        } else if (second < 0 || d < std::abs(eig.values(second) - 1.0)) {
            second = i;
        }
    }
    if (second >= 0 && std::abs(eig.values(second) - 1.0) <= gap_tol)
        throw EigenvalueOneNotSimple(
            "second eigenvalue within " + std::to_string(gap_tol) +
            " of 1; the truncation does not isolate the SRB functional");

    // u^H K = lambda u^H, so v = conj(u) satisfies v^T K = lambda v^T.
    Eigen::VectorXcd v = eig.vectors.col(best).conjugate();
    if (std::abs(v(0)) < 1e-300)
        throw EigenvalueOneNotSimple("fixed left vector has no constant component");
    v /= v(0); // pairing with the constant function phi_0 is exactly 1

    SrbFunctional out;
    out.frequencies = k.basis.order();
    out.coefficients.resize(dim);
    for (int i = 0; i < dim; ++i)
        out.coefficients(i) = std::exp(k.log_weights[i]) * v(i);
    out.residual = (v.transpose() * k.entries - v.transpose()).cwiseAbs().maxCoeff();
    out.eigenvalue_gap =
        second >= 0 ? std::abs(eig.values(second) - 1.0) : 1e300;
    return out;
}

// Scalar observable f(x) = sum_k c_k exp(i 2 pi k.x) with conjugate-symmetric
// coefficients; pairs with the SRB functional as mu(f) = sum_k c_k mu(phi_k).
class ScalarObservable {
public:
    ScalarObservable() = default;

    void add_mode(Mode k, std::complex<double> coef) {
        const Mode mk{-k[0], -k[1]};
        if (k == mk) {
            modes_[k] += std::complex<double>(coef.real(), 0.0);
        } else {
            modes_[k] += coef;
            modes_[mk] += std::conj(coef);
        }
    }

    static ScalarObservable cosine(Mode k, double amp = 1.0) {
        ScalarObservable f;
        f.add_mode(k, std::complex<double>(0.5 * amp, 0.0));
        return f;
    }

    double eval(const Eigen::Vector2d& x) const {
        std::complex<double> acc = 0.0;
        for (const auto& [k, c] : modes_)
            acc += c * std::exp(std::complex<double>(0.0, two_pi * (k[0] * x(0) + k[1] * x(1))));
        return acc.real();
    }

    const std::map<Mode, std::complex<double>>& modes() const { return modes_; }

private:
    std::map<Mode, std::complex<double>> modes_;
};

inline std::complex<double> srb_pairing(const SrbFunctional& mu, const BasisIndex& basis,
                                        const ScalarObservable& f) {
    std::complex<double> acc = 0.0;
    for (const auto& [k, c] : f.modes()) {
        const int i = basis.position(k[0], k[1]);
        if (i < 0)
            throw ConfigError("observable frequency outside the truncation ball");
        acc += c * mu.coefficients(i);
    }
    return acc;
}

// (1/T) sum_t f(T^t x0) averaged over Lebesgue-random starting points, with a
// burn-in transient discarded. Deterministic for a fixed seed; the reduction
// order over points is fixed.
inline double birkhoff_average(const PerturbedMap& t, const ScalarObservable& f,
                               int n_points = 1000, int iterations = 10000,
                               int burn_in = 100, std::uint64_t seed = 20240611,
                               int threads = 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Eigen::Vector2d> starts(n_points);
    for (auto& x : starts) x = Eigen::Vector2d(u(rng), u(rng));

    std::vector<double> per_point(n_points, 0.0);
    detail::parallel_for(
        n_points,
        [&](long p, int) {
            Eigen::Vector2d x = starts[p];
            for (int s = 0; s < burn_in; ++s) x = t.eval(x);
            double acc = 0.0;
            for (int s = 0; s < iterations; ++s) {
                acc += f.eval(x);
                x = t.eval(x);
            }
            per_point[p] = acc / double(iterations);
        },
        threads);
    double total = 0.0;
    for (double v : per_point) total += v;
    return total / double(n_points);
}

} // namespace ruelle
