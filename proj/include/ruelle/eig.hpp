#pragma once

// Dense nonsymmetric complex eigenproblems via LAPACK zgeev, with the
// canonical eigenvalue ordering used throughout: descending modulus, and
// within a conjugate pair the member with argument in [0, pi] first.

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/errors.hpp"

namespace ruelle {

enum class EigVectors { None, Left, Right };

struct EigenDecomposition {
    Eigen::VectorXcd values;
    // vectors.col(j) pairs with values(j); empty unless requested.
    // Left vectors u satisfy u^H A = lambda u^H (LAPACK convention).
    Eigen::MatrixXcd vectors;
};

inline EigenDecomposition dense_eigensolve(const Eigen::MatrixXcd& a,
                                           EigVectors which = EigVectors::None) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    if (a.cols() != n) throw ConfigError("eigensolve: matrix must be square");
    Eigen::MatrixXcd work = a; // zgeev destroys its input
    EigenDecomposition out;
    out.values.resize(n);
    Eigen::MatrixXcd vl, vr;
    char jobvl = 'N', jobvr = 'N';
    if (which == EigVectors::Left) { jobvl = 'V'; vl.resize(n, n); }
    if (which == EigVectors::Right) { jobvr = 'V'; vr.resize(n, n); }
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, jobvl, jobvr, n, work.data(), n, out.values.data(),
        jobvl == 'V' ? vl.data() : nullptr, n,
        jobvr == 'V' ? vr.data() : nullptr, n);
    if (info > 0)
        throw EigenNoConverge("zgeev: QR iteration failed to converge (info = " +
                              std::to_string(info) + ")");
    if (info < 0)
        throw ConfigError("zgeev: illegal argument " + std::to_string(-info));
    if (which == EigVectors::Left) out.vectors = std::move(vl);
    if (which == EigVectors::Right) out.vectors = std::move(vr);
    return out;
}

// Permutation sorting eigenvalues by (modulus desc, |arg| asc, arg >= 0 first).
inline std::vector<int> canonical_eigen_order(const Eigen::VectorXcd& values) {
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
        const double mi = std::abs(values(i)), mj = std::abs(values(j));
        if (mi != mj) return mi > mj;
        const double ai = std::arg(values(i)), aj = std::arg(values(j));
        if (std::abs(ai) != std::abs(aj)) return std::abs(ai) < std::abs(aj);
        return ai > aj;
    });
    return idx;
}

inline Eigen::VectorXcd sorted_eigenvalues(const Eigen::VectorXcd& values) {
    const auto idx = canonical_eigen_order(values);
    Eigen::VectorXcd out(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) out(i) = values(idx[i]);
    return out;
}

} // namespace ruelle
