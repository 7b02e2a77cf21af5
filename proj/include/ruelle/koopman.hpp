#pragma once

// Truncated weighted Koopman matrix of T = M + eps*psi on the anisotropic
// basis, assembled from oscillatory integrals
//
//   I_{n1,n2}(T) = int exp(i 2 pi (n2.T(x) - n1.x)) dx,
//
// evaluated spectrally: n2.T(x) = (M^T n2).x + eps n2.psi(x), so I_{n1,n2} is
// the Fourier coefficient of g_{n2}(x) = exp(i 2 pi eps n2.psi(x)) at the
// frequency n1 - M^T n2, read off a single 2-D FFT per column. The weighted
// entry is exp(logC_{n1} - logC_{n2}) I_{n1,n2}.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/analytic_maps.hpp"
#include "ruelle/aniso_space.hpp"
#include "ruelle/detail/parallel.hpp"
#include "ruelle/eig.hpp"
#include "ruelle/errors.hpp"

namespace ruelle {

namespace detail {

inline bool is_pow2(int g) { return g > 0 && (g & (g - 1)) == 0; }

inline int next_pow2(std::int64_t n) {
    int g = 1;
    while (g < n) g <<= 1;
    return g;
}

// Process-lifetime FFTW plan per grid size; plan creation is serialized,
// new-array execution is thread-safe.
class FftPlanCache {
public:
    static fftw_plan get(int grid) {
        static FftPlanCache cache;
        std::lock_guard<std::mutex> lock(cache.mutex_);
        auto it = cache.plans_.find(grid);
        if (it != cache.plans_.end()) return it->second;
        fftw_complex* scratch = fftw_alloc_complex(std::size_t(grid) * grid);
        fftw_plan plan = fftw_plan_dft_2d(grid, grid, scratch, scratch,
                                          FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_free(scratch);
        cache.plans_.emplace(grid, plan);
        return plan;
    }

private:
    FftPlanCache() = default;
    ~FftPlanCache() {
        for (auto& [g, p] : plans_) fftw_destroy_plan(p);
    }
    std::mutex mutex_;
    std::map<int, fftw_plan> plans_;
};

struct FftBuffers {
    explicit FftBuffers(int grid)
        : size(std::size_t(grid) * grid),
          in(fftw_alloc_complex(size)),
          out(fftw_alloc_complex(size)) {}
    ~FftBuffers() {
        fftw_free(in);
        fftw_free(out);
    }
    FftBuffers(const FftBuffers&) = delete;
    FftBuffers& operator=(const FftBuffers&) = delete;
    std::size_t size;
    fftw_complex* in;
    fftw_complex* out;
};

} // namespace detail

struct OscOptions {
    double window_tol = 1e-12; // ceiling for certified zeroing outside the window
    int threads = 0;           // 0 = hardware default, capped by RUELLE_THREADS
};

struct OscDiagnostics {
    double alias_bound = 0.0;     // largest rim magnitude over all FFT columns
    long out_of_window_zeros = 0; // requested coefficients certified ~0
};

// Engine for one (map, grid) pair: holds the sampled psi component fields and
// extracts one column of oscillatory integrals per FFT.
class OscillatoryEngine {
public:
    OscillatoryEngine(const PerturbedMap& t, int grid)
        : map_(t), grid_(grid) {
        if (!detail::is_pow2(grid))
            throw GridTooSmall("grid size must be a power of two, got " +
                               std::to_string(grid));
        plan_ = detail::FftPlanCache::get(grid);
        if (map_.epsilon != 0.0 && !map_.psi.empty()) {
            const std::size_t npts = std::size_t(grid) * grid;
            field1_.resize(npts);
            field2_.resize(npts);
            for (int a = 0; a < grid; ++a)
                for (int b = 0; b < grid; ++b) {
                    const Eigen::Vector2d x(double(a) / grid, double(b) / grid);
                    const Eigen::Vector2d v = map_.psi.eval(x);
                    field1_[std::size_t(a) * grid + b] = v(0);
                    field2_[std::size_t(a) * grid + b] = v(1);
                }
        }
    }

    int grid() const { return grid_; }
    const PerturbedMap& map() const { return map_; }

    // Column j of the unweighted integral matrix for the given basis. The
    // result is deterministic for fixed grid regardless of threading. Returns
    // the rim magnitude of this column's transform (0 for exact delta columns).
    double column(const BasisIndex& basis, int j, std::complex<double>* col,
                  detail::FftBuffers& buf, double window_tol,
                  long* out_of_window = nullptr) const {
        const int dim = basis.size();
        const Eigen::Vector2i n2 = basis.frequency(j);
        const auto shift = map_.m.transpose_apply(n2(0), n2(1));
        const double s1 = two_pi * map_.epsilon * double(n2(0));
        const double s2 = two_pi * map_.epsilon * double(n2(1));

        std::fill(col, col + dim, std::complex<double>(0.0, 0.0));
        if (field1_.empty() || (s1 == 0.0 && s2 == 0.0)) {
            // g == 1 exactly: I_{n1,n2} = delta(n1 = M^T n2).
            const int row = basis.position(shift[0], shift[1]);
            if (row >= 0) col[row] = 1.0;
            return 0.0;
        }

        auto* in = reinterpret_cast<std::complex<double>*>(buf.in);
        auto* out = reinterpret_cast<std::complex<double>*>(buf.out);
        const std::size_t npts = buf.size;
        for (std::size_t p = 0; p < npts; ++p) {
            const double phase = s1 * field1_[p] + s2 * field2_[p];
            in[p] = {std::cos(phase), std::sin(phase)};
        }
        fftw_execute_dft(plan_, buf.in, buf.out);

        const double norm = 1.0 / (double(grid_) * double(grid_));
        const int half = grid_ / 2;
        double rim = 0.0;
        for (int b = 0; b < grid_; ++b)
            rim = std::max(rim, std::abs(out[std::size_t(half) * grid_ + b]));
        for (int a = 0; a < grid_; ++a)
            rim = std::max(rim, std::abs(out[std::size_t(a) * grid_ + half]));
        rim *= norm;

        for (int i = 0; i < dim; ++i) {
            const Eigen::Vector2i n1 = basis.frequency(i);
            const std::int64_t f1 = std::int64_t(n1(0)) - shift[0];
            const std::int64_t f2 = std::int64_t(n1(1)) - shift[1];
            if (std::llabs(f1) <= half - 1 && std::llabs(f2) <= half - 1) {
                const std::size_t idx =
                    std::size_t((f1 % grid_ + grid_) % grid_) * grid_ +
                    std::size_t((f2 % grid_ + grid_) % grid_);
                col[i] = out[idx] * norm;
            } else if (rim <= window_tol) {
                if (out_of_window) ++*out_of_window; // certified negligible
            } else {
                throw GridTooSmall(
                    "requested frequency (" + std::to_string(f1) + ", " +
                    std::to_string(f2) + ") outside the window of G = " +
                    std::to_string(grid_) + " and rim bound " +
                    std::to_string(rim) + " exceeds the zeroing tolerance");
            }
        }
        return rim;
    }

private:
    PerturbedMap map_;
    int grid_;
    fftw_plan plan_;
    std::vector<double> field1_, field2_;
};

// Default grid rule: the window must cover every requested output frequency
// n1 - M^T n2 plus the bandwidth of exp(i 2 pi eps n2.psi), whose Fourier
// tail is Bessel-like and dies superexponentially past its amplitude.
inline int auto_grid_size(const HyperbolicAutomorphism& m, int radius,
                          const TrigPolynomial& psi, double epsilon) {
    const std::int64_t rowsum =
        std::max(std::llabs(m.a) + std::llabs(m.c), std::llabs(m.b) + std::llabs(m.d));
    const std::int64_t requested = std::int64_t(radius) * (1 + rowsum);
    std::int64_t band = 0;
    if (epsilon != 0.0 && !psi.empty()) {
        const double amp = two_pi * std::abs(epsilon) * std::sqrt(2.0) * radius *
                           psi.coefficient_mass();
        const std::int64_t mstar = std::int64_t(std::ceil(1.5 * amp)) + 40;
        band = std::int64_t(psi.max_freq()) * mstar;
    }
    const std::int64_t need = std::max<std::int64_t>(2 * (requested + band), 128);
    if (need > (std::int64_t(1) << 24))
        throw GridTooSmall("auto grid would need G >= " + std::to_string(need));
    return detail::next_pow2(need);
}

// Unweighted integrals I_{n1,n2}(T) over the basis; column j is frequency
// basis.frequency(j). Parallel over columns, bit-stable for fixed grid.
inline Eigen::MatrixXcd oscillatory_integrals(const PerturbedMap& t,
                                              const BasisIndex& basis, int grid,
                                              const OscOptions& opts = {},
                                              OscDiagnostics* diag = nullptr) {
    const int dim = basis.size();
    OscillatoryEngine engine(t, grid);
    Eigen::MatrixXcd integrals(dim, dim);

    const int workers = detail::worker_count(opts.threads);
    std::vector<std::unique_ptr<detail::FftBuffers>> buffers(workers);
    std::vector<double> rims(workers, 0.0);
    std::vector<long> zeros(workers, 0);
    detail::parallel_for(
        dim,
        [&](long j, int w) {
            if (!buffers[w]) buffers[w] = std::make_unique<detail::FftBuffers>(grid);
            const double rim =
                engine.column(basis, int(j), integrals.col(j).data(), *buffers[w],
                              opts.window_tol, &zeros[w]);
            rims[w] = std::max(rims[w], rim);
        },
        workers);
    if (diag) {
        for (int w = 0; w < workers; ++w) {
            diag->alias_bound = std::max(diag->alias_bound, rims[w]);
            diag->out_of_window_zeros += zeros[w];
        }
    }
    return integrals;
}

// Doubles the grid on a small deterministic set of columns and compares the
// requested coefficients; a change above tol means the grid is unsafe.
inline void alias_selfcheck(const PerturbedMap& t, const BasisIndex& basis,
                            int grid, double tol = 1e-10) {
    if (t.epsilon == 0.0 || t.psi.empty()) return; // delta columns are exact
    const int n = basis.radius();
    std::vector<int> cols;
    for (const auto& f : {Eigen::Vector2i(n, n), Eigen::Vector2i(-n, n),
                          Eigen::Vector2i(n, 0), Eigen::Vector2i(0, n),
                          Eigen::Vector2i(1, 1)}) {
        const int j = basis.position(f(0), f(1));
        if (j >= 0) cols.push_back(j);
    }
    const int dim = basis.size();
    OscillatoryEngine coarse(t, grid), fine(t, 2 * grid);
    detail::FftBuffers buf_c(grid), buf_f(2 * grid);
    std::vector<std::complex<double>> col_c(dim), col_f(dim);
    for (int j : cols) {
        coarse.column(basis, j, col_c.data(), buf_c, 1.0);
        fine.column(basis, j, col_f.data(), buf_f, 1.0);
        for (int i = 0; i < dim; ++i)
            if (std::abs(col_c[i] - col_f[i]) > tol)
                throw AliasingSuspect(
                    "coefficient at row " + std::to_string(i) + ", column " +
                    std::to_string(j) + " changed by " +
                    std::to_string(std::abs(col_c[i] - col_f[i])) +
                    " when doubling G = " + std::to_string(grid));
    }
}

struct AssemblyStats {
    double max_abs_entry = 0.0;
    std::vector<double> shell_max; // max weighted |entry|, shell = ||n1||_1 + ||n2||_1
    double alias_bound = 0.0;
    long out_of_window_zeros = 0;
    double strip_bound = 0.0;
    double max_log_ratio = 0.0;
};

struct KoopmanMatrix {
    BasisIndex basis;
    Eigen::MatrixXcd entries;        // weighted: exp(logC_i - logC_j) I_ij
    std::vector<double> log_weights; // logC per basis index
    int grid = 0;
    AssemblyStats stats;

    // Unweighted integral I_{n_i, n_j}(T), recovered exactly up to rounding.
    std::complex<double> integral(int i, int j) const {
        return entries(i, j) * std::exp(log_weights[j] - log_weights[i]);
    }
};

struct AssembleOptions {
    std::optional<int> grid;    // power of two; derived by auto_grid_size if absent
    bool alias_selfcheck = true;
    double alias_tol = 1e-10;
    double window_tol = 1e-12;
    int threads = 0;
};

inline KoopmanMatrix assemble(const PerturbedMap& t, const AnisotropicWeight& w,
                              int radius, const AssembleOptions& opts = {}) {
    if (!(w.c < t.strip_halfwidth))
        throw ConfigError("c must be < r");
    KoopmanMatrix k{BasisIndex(radius), {}, {}, 0, {}};
    const int dim = k.basis.size();
    k.grid = opts.grid ? *opts.grid
                       : auto_grid_size(t.m, radius, t.psi, t.epsilon);
    if (!detail::is_pow2(k.grid))
        throw GridTooSmall("grid size must be a power of two, got " +
                           std::to_string(k.grid));
    if (opts.alias_selfcheck) alias_selfcheck(t, k.basis, k.grid, opts.alias_tol);

    k.log_weights.resize(dim);
    std::vector<double> l1(dim); // ||n||_1 per index, for the shell statistics
    for (int i = 0; i < dim; ++i) {
        const auto n = k.basis.frequency(i);
        k.log_weights[i] = w.log_weight(n(0), n(1));
        l1[i] = std::abs(n(0)) + std::abs(n(1));
    }

    OscDiagnostics diag;
    OscOptions osc{opts.window_tol, opts.threads};
    k.entries = oscillatory_integrals(t, k.basis, k.grid, osc, &diag);
    k.stats.alias_bound = diag.alias_bound;
    k.stats.out_of_window_zeros = diag.out_of_window_zeros;
    k.stats.strip_bound = t.strip_distance_bound();

    const int n_shells = 4 * radius + 1;
    const int workers = detail::worker_count(opts.threads);
    std::vector<std::vector<double>> shell_scratch(
        workers, std::vector<double>(n_shells, 0.0));
    std::vector<double> max_entry(workers, 0.0), max_ratio(workers, 0.0);
    detail::parallel_for(
        dim,
        [&](long j, int worker) {
            auto& shells = shell_scratch[worker];
            for (int i = 0; i < dim; ++i) {
                const double delta = k.log_weights[i] - k.log_weights[std::size_t(j)];
                std::complex<double> v = k.entries(i, j);
                if (v != 0.0 && delta > 700.0) {
                    const double logmag = delta + std::log(std::abs(v));
                    if (logmag > 700.0)
                        throw WeightOverflow(
                            "weighted entry magnitude exp(" + std::to_string(logmag) +
                            ") overflows; reduce c, N, or epsilon");
                    v = std::polar(std::exp(logmag), std::arg(v));
                } else {
                    v *= std::exp(delta);
                }
                k.entries(i, j) = v;
                const double mag = std::abs(v);
                const int shell = int(l1[i] + l1[std::size_t(j)]);
                shells[shell] = std::max(shells[shell], mag);
                max_entry[worker] = std::max(max_entry[worker], mag);
                max_ratio[worker] = std::max(max_ratio[worker], std::abs(delta));
            }
        },
        workers);

    k.stats.shell_max.assign(n_shells, 0.0);
    for (int worker = 0; worker < workers; ++worker) {
        for (int s = 0; s < n_shells; ++s)
            k.stats.shell_max[s] = std::max(k.stats.shell_max[s], shell_scratch[worker][s]);
        k.stats.max_abs_entry = std::max(k.stats.max_abs_entry, max_entry[worker]);
        k.stats.max_log_ratio = std::max(k.stats.max_log_ratio, max_ratio[worker]);
    }
    return k;
}

// Least-squares slope of log(shell max) against the shell index, over the
// shells with a nonzero maximum.
inline double decay_slope(const AssemblyStats& stats) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t s = 0; s < stats.shell_max.size(); ++s) {
        if (stats.shell_max[s] <= 0.0) continue;
        const double x = double(s), y = std::log(stats.shell_max[s]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    if (m < 2) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// The k largest-modulus eigenvalues in the canonical order.
inline Eigen::VectorXcd resonances(const KoopmanMatrix& k, int count) {
    const auto eig = dense_eigensolve(k.entries, EigVectors::None);
    const Eigen::VectorXcd sorted = sorted_eigenvalues(eig.values);
    return sorted.head(std::min<Eigen::Index>(count, sorted.size()));
}

// Sum of diagonal entries; the weights cancel on the diagonal, so this equals
// the truncated sum of I_{n,n}(T).
inline std::complex<double> trace_matrix(const KoopmanMatrix& k) {
    return k.entries.trace();
}

// Periodic-orbit trace: sum over fixed points of T^n of 1/|det(I - D T^n)|.
inline double trace_orbit(const PerturbedMap& t, int period,
                          std::int64_t count_cap = 1000000) {
    const auto points = fixed_points_perturbed(t, period, 1e-12, 50, 1e-8, count_cap);
    double sum = 0.0;
    for (const auto& x0 : points) {
        Eigen::Vector2d x = x0;
        Eigen::Matrix2d jac = Eigen::Matrix2d::Identity();
        for (int s = 0; s < period; ++s) {
            jac = t.derivative(x) * jac;
            x = t.eval(x);
        }
        const Eigen::Matrix2d a = Eigen::Matrix2d::Identity() - jac;
        sum += 1.0 / std::abs(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
    }
    return sum;
}

// Traces of K^m for m = 1..p with at most two dense products (p <= 5).
inline std::vector<std::complex<double>> power_traces(const Eigen::MatrixXcd& k, int p) {
    std::vector<std::complex<double>> t;
    if (p < 1) return t;
    t.reserve(p);
    t.push_back(k.trace());
    if (p >= 2) t.push_back(k.cwiseProduct(k.transpose()).sum());
    Eigen::MatrixXcd k2, k4;
    if (p >= 3) {
        k2 = k * k;
        t.push_back(k2.cwiseProduct(k.transpose()).sum());
    }
    if (p >= 4) t.push_back(k2.cwiseProduct(k2.transpose()).sum());
    if (p >= 5) {
        k4 = k2 * k2;
        t.push_back(k4.cwiseProduct(k.transpose()).sum());
    }
    for (int m = 6; m <= p; ++m) {
        k4 = k4 * k;
        t.push_back(k4.trace());
    }
    return t;
}

// Coefficients of det(1 - zK) from the power traces via Newton's identities:
// a_0 = 1, a_m = -(1/m) sum_{j=1..m} t_j a_{m-j}.
inline std::vector<std::complex<double>>
newton_det_coeffs(const std::vector<std::complex<double>>& traces) {
    std::vector<std::complex<double>> a(traces.size() + 1);
    a[0] = 1.0;
    for (std::size_t m = 1; m < a.size(); ++m) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 1; j <= m; ++j) acc += traces[j - 1] * a[m - j];
        a[m] = -acc / double(m);
    }
    return a;
}

struct DetCoeffs {
    std::vector<std::complex<double>> from_matrix; // a_0..a_p via tr K^m
    std::vector<std::complex<double>> from_orbit;  // a_0..a_p via periodic orbits
};

inline DetCoeffs det_coeffs(const KoopmanMatrix& k, const PerturbedMap& t, int order,
                            std::int64_t count_cap = 1000000) {
    if (order < 0) throw ConfigError("determinant order must be >= 0");
    DetCoeffs out;
    out.from_matrix = newton_det_coeffs(power_traces(k.entries, order));
    std::vector<std::complex<double>> orbit;
    for (int n = 1; n <= order; ++n) {
        try {
            orbit.emplace_back(trace_orbit(t, n, count_cap), 0.0);
        } catch (const OverflowRisk& e) {
            throw PeriodTooDeep(e.what());
        }
    }
    out.from_orbit = newton_det_coeffs(orbit);
    return out;
}

// Resonance summary emitted by the CLI.
struct ResonanceReport {
    Eigen::VectorXcd eigenvalues;
    std::complex<double> trace_matrix;
    double trace_orbit = 0.0;
    std::vector<std::complex<double>> det_coeffs_matrix, det_coeffs_orbit;
    int radius = 0;
    int grid = 0;
    double c = 0.0, epsilon = 0.0;
};

} // namespace ruelle
