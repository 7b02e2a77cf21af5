#pragma once

// Real trigonometric polynomials on the 2-torus, perturbed maps T = M + eps*psi,
// certified strip bounds, and Newton continuation of fixed/periodic points from
// their linear seeds.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ruelle/errors.hpp"
#include "ruelle/lattice.hpp"

namespace ruelle {

using Mode = std::array<int, 2>;

// A finite Fourier sum psi(x) = sum_k coef_k exp(i 2 pi k.x) with values in R^2.
// Reality is structural: the coefficient at -k is kept equal to conj(coef_k).
class TrigPolynomial {
public:
    using ModeMap = std::map<Mode, Eigen::Vector2cd>;

    TrigPolynomial() = default;

    // Inserts coef at k and conj(coef) at -k. Accumulates if k already present.
    void add_mode(Mode k, const Eigen::Vector2cd& coef) {
        const Mode mk{-k[0], -k[1]};
        if (k == mk) { // k = 0 carries the mean; only its real part survives
            modes_[k] += (coef + coef.conjugate()) * 0.5;
        } else {
            modes_[k] += coef;
            modes_[mk] += coef.conjugate();
        }
        prune();
    }

    const ModeMap& modes() const { return modes_; }
    bool empty() const { return modes_.empty(); }

    int max_freq() const {
        int m = 0;
        for (const auto& [k, c] : modes_)
            m = std::max({m, std::abs(k[0]), std::abs(k[1])});
        return m;
    }

    Eigen::Vector2d eval(const Eigen::Vector2d& x) const {
        Eigen::Vector2cd acc = Eigen::Vector2cd::Zero();
        for (const auto& [k, c] : modes_) {
            const double phase = two_pi * (k[0] * x(0) + k[1] * x(1));
            acc += c * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        return acc.real();
    }

    // Jacobian D psi(x); termwise differentiation of the modes.
    Eigen::Matrix2d jacobian(const Eigen::Vector2d& x) const {
        Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
        for (const auto& [k, c] : modes_) {
            const double phase = two_pi * (k[0] * x(0) + k[1] * x(1));
            const std::complex<double> e(std::cos(phase), std::sin(phase));
            const std::complex<double> i2pi(0.0, two_pi);
            acc.col(0) += c * (i2pi * double(k[0]) * e);
            acc.col(1) += c * (i2pi * double(k[1]) * e);
        }
        return acc.real();
    }

    TrigPolynomial scaled(double s) const {
        TrigPolynomial out;
        for (const auto& [k, c] : modes_) out.modes_[k] = s * c;
        out.prune();
        return out;
    }

    TrigPolynomial plus(const TrigPolynomial& other) const {
        TrigPolynomial out = *this;
        for (const auto& [k, c] : other.modes_) out.modes_[k] += c;
        out.prune();
        return out;
    }

    // sum_k ||coef_k||_2, the amplitude bound sup |n.psi| <= ||n|| * this.
    double coefficient_mass() const {
        double s = 0.0;
        for (const auto& [k, c] : modes_) s += c.norm();
        return s;
    }

private:
    void prune() {
        for (auto it = modes_.begin(); it != modes_.end();)
            it = it->second.norm() == 0.0 ? modes_.erase(it) : std::next(it);
    }
    ModeMap modes_;
};

// 1-D profile amp * sin(2 pi (q t + phase)), phase in turns.
struct Profile1D {
    int q = 1;
    double amp = 1.0;
    double phase = 0.0;

    double value(double t) const { return amp * std::sin(two_pi * (q * t + phase)); }
    double derivative(double t) const {
        return amp * two_pi * q * std::cos(two_pi * (q * t + phase));
    }
    bool constant() const { return q == 0 || amp == 0.0; }
};

// psi(x) = profile(x_j) * direction, with j in {1,2} (paper indexing).
inline TrigPolynomial profile_times_direction(const Profile1D& p, int j,
                                              const Eigen::Vector2d& direction) {
    if (j != 1 && j != 2) throw ConfigError("coordinate index j must be 1 or 2");
    TrigPolynomial out;
    if (p.constant()) return out;
    // amp sin(2 pi (q t + phase)) = -i/2 amp e^{i 2 pi phase} e^{i 2 pi q t} + c.c.
    const std::complex<double> half(0.0, -0.5);
    const std::complex<double> coef =
        half * p.amp * std::exp(std::complex<double>(0.0, two_pi * p.phase));
    Mode k{0, 0};
    k[j - 1] = p.q;
    out.add_mode(k, coef * direction);
    return out;
}

// JSON schema: [ {"k":[int,int], "re":[f,f], "im":[f,f]}, ... ].
// The loader completes a missing conjugate partner and rejects an inconsistent one.
inline TrigPolynomial trig_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("psi modes: expected a JSON array");
    std::map<Mode, Eigen::Vector2cd> listed;
    for (const auto& entry : j) {
        if (!entry.is_object() || !entry.contains("k") || !entry.contains("re") ||
            !entry.contains("im"))
            throw ConfigError("psi mode: expected {k:[int,int], re:[f,f], im:[f,f]}");
        const auto karr = entry.at("k");
        const auto re = entry.at("re");
        const auto im = entry.at("im");
        if (karr.size() != 2 || re.size() != 2 || im.size() != 2)
            throw ConfigError("psi mode: k, re, im must each have 2 entries");
        if (!karr[0].is_number_integer() || !karr[1].is_number_integer())
            throw ConfigError("psi mode: k must be integer");
        Mode k{karr[0].get<int>(), karr[1].get<int>()};
        Eigen::Vector2cd c(std::complex<double>(re[0].get<double>(), im[0].get<double>()),
                           std::complex<double>(re[1].get<double>(), im[1].get<double>()));
        if (listed.count(k)) throw ConfigError("psi mode: duplicate frequency");
        listed[k] = c;
    }
    TrigPolynomial out;
    for (const auto& [k, c] : listed) {
        const Mode mk{-k[0], -k[1]};
        if (k == mk) {
            if (c.imag().cwiseAbs().maxCoeff() > 1e-12)
                throw ConfigError("psi mode at k = 0 must be real");
            out.add_mode(k, c);
            continue;
        }
        auto partner = listed.find(mk);
        if (partner != listed.end()) {
            if ((partner->second - c.conjugate()).norm() > 1e-12 * (1.0 + c.norm()))
                throw ConfigError("psi modes at k and -k violate conjugate symmetry");
            if (k < mk) out.add_mode(k, c); // insert each pair once
        } else {
            out.add_mode(k, c);
        }
    }
    return out;
}

inline nlohmann::json trig_to_json(const TrigPolynomial& psi) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [k, c] : psi.modes()) {
        j.push_back({{"k", {k[0], k[1]}},
                     {"re", {c(0).real(), c(1).real()}},
                     {"im", {c(0).imag(), c(1).imag()}}});
    }
    return j;
}

// T = M + eps * psi with a strip half-width r for the certified C^1 bound.
struct PerturbedMap {
    HyperbolicAutomorphism m;
    TrigPolynomial psi;
    double epsilon = 0.0;
    double strip_halfwidth = 0.1;

    // Lift to R^2 (no reduction).
    Eigen::Vector2d lift(const Eigen::Vector2d& x) const {
        Eigen::Vector2d y = m.matrix() * x;
        if (epsilon != 0.0 && !psi.empty()) y += epsilon * psi.eval(x);
        return y;
    }

    // Torus map: lift reduced mod 1 into [0,1)^2.
    Eigen::Vector2d eval(const Eigen::Vector2d& x) const {
        Eigen::Vector2d y = lift(x);
        y -= y.array().floor().matrix();
        return y;
    }

    // D_x T = M + eps * D psi(x).
    Eigen::Matrix2d derivative(const Eigen::Vector2d& x) const {
        Eigen::Matrix2d dm = m.matrix();
        if (epsilon != 0.0 && !psi.empty()) dm += epsilon * psi.jacobian(x);
        return dm;
    }

    // Certified upper bound for d(T, M) = sup|T-M| + sup|DT-DM| on the strip
    // A_r: sum over modes of eps (1 + 2 pi ||k||_2) ||coef_k|| e^{2 pi r ||k||_1}.
    double strip_distance_bound() const {
        double s = 0.0;
        for (const auto& [k, c] : psi.modes()) {
            const double k1 = std::abs(k[0]) + std::abs(k[1]);
            const double k2 = std::hypot(double(k[0]), double(k[1]));
            s += (1.0 + two_pi * k2) * c.norm() * std::exp(two_pi * strip_halfwidth * k1);
        }
        return epsilon * s;
    }
};

namespace detail {

inline double torus_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    Eigen::Vector2d d = a - b;
    d -= d.array().round().matrix();
    return d.cwiseAbs().maxCoeff();
}

} // namespace detail

// Continues every fixed point of M^n to a fixed point of T^n by Newton
// iteration on x -> T^n(x) - x - v, where the integer lift v is frozen from
// the linear seed. Returns points in [0,1)^2 aligned with the linear seeds.
inline std::vector<Eigen::Vector2d>
fixed_points_perturbed(const PerturbedMap& t, int period,
                       double newton_tol = 1e-12, int max_iter = 50,
                       double collision_tol = 1e-8,
                       std::int64_t count_cap = 1000000) {
    const auto seeds = periodic_points_linear(t.m, period, count_cap);
    const IntMat2 mn = int_mat_pow(t.m.int_matrix(), period);

    std::vector<Eigen::Vector2d> out;
    out.reserve(seeds.points.size());
    for (const auto& seed : seeds.points) {
        // v = (M^n - I) x0 is integral because x0 is a fixed point of M^n mod 1;
        // freezing it keeps Newton on the analytic branch through the seed.
        Eigen::Vector2d v(
            double(mn[0][0]) * seed(0) + double(mn[0][1]) * seed(1) - seed(0),
            double(mn[1][0]) * seed(0) + double(mn[1][1]) * seed(1) - seed(1));
        v = v.array().round().matrix();

        Eigen::Vector2d x = seed;
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            Eigen::Vector2d y = x;
            Eigen::Matrix2d jac = Eigen::Matrix2d::Identity();
            for (int k = 0; k < period; ++k) {
                jac = t.derivative(y) * jac;
                y = t.lift(y);
            }
            const Eigen::Vector2d f = y - x - v;
            if (f.cwiseAbs().maxCoeff() < newton_tol) {
                converged = true;
                break;
            }
            const Eigen::Matrix2d a = jac - Eigen::Matrix2d::Identity();
            const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
            if (det == 0.0) break;
            x -= Eigen::Vector2d(a(1, 1) * f(0) - a(0, 1) * f(1),
                                 -a(1, 0) * f(0) + a(0, 0) * f(1)) / det;
        }
        if (!converged)
            throw NewtonDiverged("Newton failed from seed (" + std::to_string(seed(0)) +
                                 ", " + std::to_string(seed(1)) + ") at period " +
                                 std::to_string(period) +
                                 "; epsilon too large for continuation");
        x -= x.array().floor().matrix();
        out.push_back(x);
    }

    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (detail::torus_distance(out[i], out[j]) < collision_tol)
                throw CountMismatch("two continued fixed points collided within " +
                                    std::to_string(collision_tol));
    return out;
}

} // namespace ruelle
