#pragma once

// Experiment configuration: a single JSON file per run, schema-validated
// before any computation, plus the emission helpers shared by the CLI
// commands. Output formatting is locale-independent with 17 significant
// digits, so reruns are byte-identical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruelle/errors.hpp"
#include "ruelle/koopman.hpp"
#include "ruelle/perturb.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

using Json = nlohmann::ordered_json;

struct BirkhoffConfig {
    int points = 1000;
    int iterations = 10000;
    int burn_in = 100;
    std::uint64_t seed = 20240611;
};

struct ExperimentConfig {
    std::array<std::int64_t, 4> matrix{};
    Json psi; // null, mode array, or structured spec
    double epsilon = 0.0;
    double c = 0.05;
    double r = 0.1;
    int radius = 0;
    std::optional<int> grid; // absent = "auto"
    int eigenvalue_count = 10;
    int period = 1;
    int order = 4;
    std::vector<double> eps_list;
    bool require_unimodular = true;
    std::int64_t periodic_point_cap = 1000000;
    BirkhoffConfig birkhoff;
    std::vector<Mode> observables{{1, 0}, {0, 1}, {1, 1}};
};

namespace detail {

inline void require_keys(const Json& j, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown configuration key: " + key);
}

inline double get_number(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

inline std::int64_t get_integer(const Json& j, const char* key, std::int64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        throw ConfigError(std::string(key) + " must be an integer");
    return j.at(key).get<std::int64_t>();
}

} // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    detail::require_keys(j, {"matrix", "psi", "epsilon", "c", "r", "N", "G",
                             "eigenvalue_count", "period", "order", "eps_list",
                             "require_unimodular", "periodic_point_cap", "birkhoff",
                             "observables"});
    ExperimentConfig cfg;

    if (!j.contains("matrix") || !j.at("matrix").is_array() || j.at("matrix").size() != 4)
        throw ConfigError("matrix must be an array of 4 integers, row-major");
    for (int i = 0; i < 4; ++i) {
        if (!j.at("matrix")[i].is_number_integer())
            throw ConfigError("matrix entries must be integers");
        cfg.matrix[i] = j.at("matrix")[i].get<std::int64_t>();
    }

    if (j.contains("psi")) cfg.psi = j.at("psi");

    cfg.epsilon = detail::get_number(j, "epsilon", 0.0);
    if (cfg.epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
    cfg.c = detail::get_number(j, "c", 0.05);
    cfg.r = detail::get_number(j, "r", 0.1);
    if (!(cfg.c > 0.0)) throw ConfigError("c must be > 0");
    if (!(cfg.r > 0.0)) throw ConfigError("r must be > 0");
    if (!(cfg.c < cfg.r)) throw ConfigError("c must be < r");

    cfg.radius = int(detail::get_integer(j, "N", 0));
    if (cfg.radius < 1) throw ConfigError("N must be an integer >= 1");

    if (j.contains("G") && !j.at("G").is_null()) {
        const auto& g = j.at("G");
        if (g.is_string()) {
            if (g.get<std::string>() != "auto")
                throw ConfigError("G must be an integer or \"auto\"");
        } else if (g.is_number_integer()) {
            cfg.grid = g.get<int>();
            if (*cfg.grid < 2) throw ConfigError("G must be >= 2");
        } else {
            throw ConfigError("G must be an integer or \"auto\"");
        }
    }

    cfg.eigenvalue_count = int(detail::get_integer(j, "eigenvalue_count", 10));
    if (cfg.eigenvalue_count < 1) throw ConfigError("eigenvalue_count must be >= 1");
    cfg.period = int(detail::get_integer(j, "period", 1));
    if (cfg.period < 1) throw ConfigError("period must be >= 1");
    cfg.order = int(detail::get_integer(j, "order", 4));
    if (cfg.order < 0 || cfg.order > 5) throw ConfigError("order must be in 0..5");

    if (j.contains("eps_list")) {
        if (!j.at("eps_list").is_array()) throw ConfigError("eps_list must be an array");
        for (const auto& e : j.at("eps_list")) {
            if (!e.is_number() || e.get<double>() < 0.0)
                throw ConfigError("eps_list entries must be numbers >= 0");
            cfg.eps_list.push_back(e.get<double>());
        }
    }

    if (j.contains("require_unimodular")) {
        if (!j.at("require_unimodular").is_boolean())
            throw ConfigError("require_unimodular must be a boolean");
        cfg.require_unimodular = j.at("require_unimodular").get<bool>();
    }
    cfg.periodic_point_cap = detail::get_integer(j, "periodic_point_cap", 1000000);
    if (cfg.periodic_point_cap < 1) throw ConfigError("periodic_point_cap must be >= 1");

    if (j.contains("birkhoff")) {
        const auto& b = j.at("birkhoff");
        if (!b.is_object()) throw ConfigError("birkhoff must be an object");
        detail::require_keys(b, {"points", "iterations", "burn_in", "seed"});
        cfg.birkhoff.points = int(detail::get_integer(b, "points", cfg.birkhoff.points));
        cfg.birkhoff.iterations =
            int(detail::get_integer(b, "iterations", cfg.birkhoff.iterations));
        cfg.birkhoff.burn_in = int(detail::get_integer(b, "burn_in", cfg.birkhoff.burn_in));
        cfg.birkhoff.seed = std::uint64_t(
            detail::get_integer(b, "seed", std::int64_t(cfg.birkhoff.seed)));
        if (cfg.birkhoff.points < 1 || cfg.birkhoff.iterations < 1 || cfg.birkhoff.burn_in < 0)
            throw ConfigError("birkhoff parameters out of range");
    }

    if (j.contains("observables")) {
        if (!j.at("observables").is_array() || j.at("observables").empty())
            throw ConfigError("observables must be a nonempty array of [int,int]");
        cfg.observables.clear();
        for (const auto& o : j.at("observables")) {
            if (!o.is_array() || o.size() != 2 || !o[0].is_number_integer() ||
                !o[1].is_number_integer())
                throw ConfigError("observables must be [int,int] frequency pairs");
            cfg.observables.push_back({o[0].get<int>(), o[1].get<int>()});
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

// The perturbation named by the config: either explicit modes or one of the
// structured generators.
struct ResolvedPerturbation {
    TrigPolynomial psi;
    std::optional<StructuredPerturbation> structured;
};

inline Profile1D parse_profile(const Json& p) {
    if (!p.is_object()) throw ConfigError("profile must be an object {q, amp, phase}");
    detail::require_keys(p, {"q", "amp", "phase"});
    Profile1D out;
    out.q = int(detail::get_integer(p, "q", 1));
    if (out.q < 0) throw ConfigError("profile frequency q must be >= 0");
    out.amp = detail::get_number(p, "amp", 1.0);
    out.phase = detail::get_number(p, "phase", 0.0);
    return out;
}

inline ResolvedPerturbation resolve_perturbation(const ExperimentConfig& cfg,
                                                 const HyperbolicAutomorphism& m) {
    ResolvedPerturbation out;
    if (cfg.psi.is_null()) return out;
    if (cfg.psi.is_array()) {
        out.psi = trig_from_json(cfg.psi);
        return out;
    }
    if (!cfg.psi.is_object())
        throw ConfigError("psi must be a mode array or a structured spec");
    detail::require_keys(cfg.psi, {"kind", "j", "profile", "delta"});
    if (!cfg.psi.contains("kind") || !cfg.psi.at("kind").is_string())
        throw ConfigError("structured psi needs a string kind");
    const std::string kind = cfg.psi.at("kind").get<std::string>();
    const int j = int(detail::get_integer(cfg.psi, "j", 1));
    const Profile1D profile = cfg.psi.contains("profile")
                                  ? parse_profile(cfg.psi.at("profile"))
                                  : Profile1D{};
    if (kind == "generic") {
        out.structured = make_generic(m, j, profile);
    } else if (kind == "volume_preserving") {
        out.structured = make_volume_preserving(m, j, profile);
    } else if (kind == "volume_breaking") {
        const double delta = detail::get_number(cfg.psi, "delta", 0.5);
        out.structured = make_volume_breaking(m, j, profile, delta);
    } else {
        throw ConfigError("unknown psi kind: " + kind);
    }
    out.psi = out.structured->realized;
    return out;
}

// A structured perturbation on a diagonal matrix can never satisfy the
// cofactor condition; surface that before hyperbolicity validation so the
// error name matches the failing construction.
inline void reject_diagonal_for_structured(const ExperimentConfig& cfg) {
    if (!cfg.psi.is_object() || !cfg.psi.contains("kind")) return;
    const std::string kind = cfg.psi.at("kind").get<std::string>();
    if (kind != "volume_preserving" && kind != "volume_breaking") return;
    if (cfg.matrix[1] == 0 && cfg.matrix[2] == 0)
        throw DiagonalMatrix("volume perturbations need a non-diagonal matrix");
}

inline HyperbolicAutomorphism matrix_of(const ExperimentConfig& cfg) {
    return validate_hyperbolic(cfg.matrix[0], cfg.matrix[1], cfg.matrix[2],
                               cfg.matrix[3], cfg.require_unimodular);
}

inline PerturbedMap map_of(const ExperimentConfig& cfg, const HyperbolicAutomorphism& m,
                           const TrigPolynomial& psi) {
    return PerturbedMap{m, psi, cfg.epsilon, cfg.r};
}

// ---- emission helpers ----------------------------------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    out << body;
}

inline Json complex_json(const std::complex<double>& z) {
    return Json{{"re", z.real()}, {"im", z.imag()}};
}

inline Json report_json(const ResonanceReport& report) {
    Json j;
    j["N"] = report.radius;
    j["G"] = report.grid;
    j["c"] = report.c;
    j["epsilon"] = report.epsilon;
    Json eigs = Json::array();
    for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i) {
        const auto z = report.eigenvalues(i);
        eigs.push_back(Json{{"re", z.real()}, {"im", z.imag()}, {"modulus", std::abs(z)}});
    }
    j["eigenvalues"] = eigs;
    j["trace_matrix"] = complex_json(report.trace_matrix);
    j["trace_orbit"] = report.trace_orbit;
    if (!report.det_coeffs_matrix.empty()) {
        Json m = Json::array(), o = Json::array();
        for (const auto& z : report.det_coeffs_matrix) m.push_back(complex_json(z));
        for (const auto& z : report.det_coeffs_orbit) o.push_back(complex_json(z));
        j["det_coeffs_matrix"] = m;
        j["det_coeffs_orbit"] = o;
    }
    return j;
}

inline std::string eigenvalues_csv(const Eigen::VectorXcd& values) {
    std::string csv = "re,im,modulus\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        csv += format_double(values(i).real());
        csv += ',';
        csv += format_double(values(i).imag());
        csv += ',';
        csv += format_double(std::abs(values(i)));
        csv += '\n';
    }
    return csv;
}

// Row-major binary dump: 16-byte header {magic "KOOP", u32 dim, u32 reserved,
// u32 padding}, then little-endian (re, im) float64 pairs.
inline void dump_matrix_binary(const std::filesystem::path& path,
                               const Eigen::MatrixXcd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write matrix dump: " + path.string());
    const std::uint32_t dim = std::uint32_t(m.rows());
    const std::uint32_t zero = 0;
    out.write("KOOP", 4);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    out.write(reinterpret_cast<const char*>(&zero), 4);
    out.write(reinterpret_cast<const char*>(&zero), 4);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double re = m(i, j).real(), im = m(i, j).imag();
            out.write(reinterpret_cast<const char*>(&re), 8);
            out.write(reinterpret_cast<const char*>(&im), 8);
        }
}

} // namespace ruelle
