// Command-line driver: spectrum, trace-check, fixed-points, detpoly, perturb,
// and srb pipelines over a JSON experiment configuration. Exit codes: 0 on
// success, 2 on configuration/schema violations, 3 on numerical errors; every
// error path emits a machine-readable JSON record on standard error.

#include <CLI11.hpp>

#include <complex>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "ruelle/config.hpp"

namespace {

using namespace ruelle;
namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<double> epsilon;
    std::optional<double> c;
    std::optional<int> radius;
    std::optional<std::string> grid;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment configuration (JSON)")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (default: .)");
    cmd->add_option("--epsilon", args.epsilon, "override epsilon");
    cmd->add_option("--c", args.c, "override the anisotropic weight parameter");
    cmd->add_option("--N", args.radius, "override the truncation radius");
    cmd->add_option("--G", args.grid, "override the grid size (integer or \"auto\")");
}

ExperimentConfig load_with_overrides(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args.config_path);
    if (args.epsilon) cfg.epsilon = *args.epsilon;
    if (args.c) cfg.c = *args.c;
    if (args.radius) cfg.radius = *args.radius;
    if (args.grid) {
        if (*args.grid == "auto") {
            cfg.grid.reset();
        } else {
            try {
                cfg.grid = std::stoi(*args.grid);
            } catch (...) {
                throw ConfigError("--G must be an integer or \"auto\"");
            }
        }
    }
    if (cfg.epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
    if (!(cfg.c > 0.0 && cfg.c < cfg.r)) throw ConfigError("c must be < r");
    if (cfg.radius < 1) throw ConfigError("N must be an integer >= 1");
    return cfg;
}

fs::path out_file(const CommonArgs& args, const char* name) {
    fs::create_directories(args.out_dir);
    return fs::path(args.out_dir) / name;
}

KoopmanMatrix assemble_from(const ExperimentConfig& cfg, const PerturbedMap& t,
                            const AnisotropicWeight& w) {
    AssembleOptions opts;
    opts.grid = cfg.grid;
    return assemble(t, w, cfg.radius, opts);
}

int cmd_spectrum(const CommonArgs& args, bool dump_matrix) {
    const ExperimentConfig cfg = load_with_overrides(args);
    reject_diagonal_for_structured(cfg);
    const auto m = matrix_of(cfg);
    const auto pert = resolve_perturbation(cfg, m);
    const PerturbedMap t = map_of(cfg, m, pert.psi);
    const AnisotropicWeight w(m, cfg.c);
    const KoopmanMatrix k = assemble_from(cfg, t, w);

    ResonanceReport report;
    report.eigenvalues = resonances(k, std::min(cfg.eigenvalue_count, k.basis.size()));
    report.trace_matrix = trace_matrix(k);
    report.trace_orbit = trace_orbit(t, 1, cfg.periodic_point_cap);
    report.radius = cfg.radius;
    report.grid = k.grid;
    report.c = cfg.c;
    report.epsilon = cfg.epsilon;

    Json j = report_json(report);
    j["matrix"] = cfg.matrix;
    j["strip_bound"] = k.stats.strip_bound;
    j["decay_slope"] = decay_slope(k.stats);
    j["alias_bound"] = k.stats.alias_bound;
    if (pert.structured) j["b_functional"] = pert.structured->b.value;

    write_text(out_file(args, "eigenvalues.csv"), eigenvalues_csv(report.eigenvalues));
    write_text(out_file(args, "report.json"), j.dump(2) + "\n");
    if (dump_matrix) dump_matrix_binary(out_file(args, "matrix.koop"), k.entries);
    return 0;
}

int cmd_trace_check(const CommonArgs& args) {
    const ExperimentConfig cfg = load_with_overrides(args);
    reject_diagonal_for_structured(cfg);
    const auto m = matrix_of(cfg);
    const auto pert = resolve_perturbation(cfg, m);
    const auto b = b_functional(m, pert.psi);
    double scale = 1.0;
    for (const auto& [x, term] : b.per_fixed_point) scale = std::max(scale, std::abs(term));
    if (std::abs(b.value) <= 1e-12 * scale) {
        Json warn{{"warning", "B_M = 0"},
                  {"message", "psi is not in the generic set; the first-order "
                              "column degenerates to 1"}};
        std::cerr << warn.dump() << "\n";
    }

    std::vector<double> eps_values = cfg.eps_list;
    if (eps_values.empty()) eps_values.push_back(cfg.epsilon);

    std::string csv =
        "epsilon,trace_matrix_re,trace_matrix_im,trace_orbit,first_order,"
        "resid_matrix_vs_orbit,resid_first_order\n";
    const AnisotropicWeight w(m, cfg.c);
    for (double eps : eps_values) {
        ExperimentConfig run = cfg;
        run.epsilon = eps;
        const PerturbedMap t = map_of(run, m, pert.psi);
        const KoopmanMatrix k = assemble_from(run, t, w);
        const std::complex<double> tm = trace_matrix(k);
        const double to = trace_orbit(t, 1, cfg.periodic_point_cap);
        const double first = 1.0 + eps * b.value;
        csv += format_double(eps) + "," + format_double(tm.real()) + "," +
               format_double(tm.imag()) + "," + format_double(to) + "," +
               format_double(first) + "," + format_double(std::abs(tm - to)) + "," +
               format_double(std::abs(to - first)) + "\n";
    }
    write_text(out_file(args, "trace_check.csv"), csv);
    return 0;
}

int cmd_fixed_points(const CommonArgs& args, int period_flag) {
    ExperimentConfig cfg = load_with_overrides(args);
    if (period_flag > 0) cfg.period = period_flag;
    reject_diagonal_for_structured(cfg);
    const auto m = matrix_of(cfg);
    const auto pert = resolve_perturbation(cfg, m);
    const PerturbedMap t = map_of(cfg, m, pert.psi);

    const auto points =
        fixed_points_perturbed(t, cfg.period, 1e-12, 50, 1e-8, cfg.periodic_point_cap);
    std::string csv = "x1,x2,weight\n";
    for (const auto& x0 : points) {
        Eigen::Vector2d x = x0;
        Eigen::Matrix2d jac = Eigen::Matrix2d::Identity();
        for (int s = 0; s < cfg.period; ++s) {
            jac = t.derivative(x) * jac;
            x = t.eval(x);
        }
        const Eigen::Matrix2d a = Eigen::Matrix2d::Identity() - jac;
        const double weight = 1.0 / std::abs(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
        csv += format_double(x0(0)) + "," + format_double(x0(1)) + "," +
               format_double(weight) + "\n";
    }
    write_text(out_file(args, "fixed_points.csv"), csv);
    return 0;
}

int cmd_detpoly(const CommonArgs& args, int order_flag) {
    ExperimentConfig cfg = load_with_overrides(args);
    if (order_flag >= 0) {
        if (order_flag > 5) throw ConfigError("order must be in 0..5");
        cfg.order = order_flag;
    }
    reject_diagonal_for_structured(cfg);
    const auto m = matrix_of(cfg);
    const auto pert = resolve_perturbation(cfg, m);
    const PerturbedMap t = map_of(cfg, m, pert.psi);
    const AnisotropicWeight w(m, cfg.c);
    const KoopmanMatrix k = assemble_from(cfg, t, w);
    const DetCoeffs dc = det_coeffs(k, t, cfg.order, cfg.periodic_point_cap);

    std::string csv = "order,re_matrix,im_matrix,re_orbit,im_orbit\n";
    for (int i = 0; i <= cfg.order; ++i) {
        csv += std::to_string(i) + "," + format_double(dc.from_matrix[i].real()) + "," +
               format_double(dc.from_matrix[i].imag()) + "," +
               format_double(dc.from_orbit[i].real()) + "," +
               format_double(dc.from_orbit[i].imag()) + "\n";
    }
    write_text(out_file(args, "detpoly.csv"), csv);
    return 0;
}

int cmd_perturb(const CommonArgs& args) {
    const ExperimentConfig cfg = load_with_overrides(args);
    if (!cfg.psi.is_object() || !cfg.psi.contains("kind"))
        throw ConfigError("perturb needs a structured psi spec with a kind");
    reject_diagonal_for_structured(cfg);
    const auto m = matrix_of(cfg);
    const auto pert = resolve_perturbation(cfg, m);
    const StructuredPerturbation& p = *pert.structured;

    Json j;
    j["kind"] = cfg.psi.at("kind");
    j["j"] = p.j;
    j["profile"] = Json{{"q", p.profile.q}, {"amp", p.profile.amp}, {"phase", p.profile.phase}};
    if (p.kind == PerturbationKind::VolumeBreaking) j["delta"] = p.delta;
    j["alpha"] = Json::array({p.alpha(0), p.alpha(1)});
    j["b_functional"] = p.b.value;
    j["n_fixed_points"] = p.b.n_m;
    Json per = Json::array();
    for (const auto& [x, term] : p.b.per_fixed_point)
        per.push_back(Json{{"x", Json::array({x(0), x(1)})}, {"term", term}});
    j["per_fixed_point"] = per;
    j["in_generic_set"] = p.in_generic_set;
    j["det_identity_verified"] = p.kind != PerturbationKind::Generic;
    if (p.kind == PerturbationKind::VolumeBreaking) {
        const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : 0.1;
        j["volume_breaking_fraction"] = volume_breaking_fraction(m, p, eps);
        j["fraction_epsilon"] = eps;
    }
    j["modes"] = trig_to_json(p.realized);
    write_text(out_file(args, "perturbation.json"), j.dump(2) + "\n");
    return 0;
}

int cmd_srb(const CommonArgs& args) {
    const ExperimentConfig cfg = load_with_overrides(args);
    reject_diagonal_for_structured(cfg);
    const auto m = matrix_of(cfg);
    const auto pert = resolve_perturbation(cfg, m);
    const PerturbedMap t = map_of(cfg, m, pert.psi);
    const AnisotropicWeight w(m, cfg.c);
    const KoopmanMatrix k = assemble_from(cfg, t, w);
    const SrbFunctional mu = srb_extract(k);

    std::string csv = "n1,n2,re,im\n";
    for (int i = 0; i < k.basis.size(); ++i) {
        const auto n = k.basis.frequency(i);
        csv += std::to_string(n(0)) + "," + std::to_string(n(1)) + "," +
               format_double(mu.coefficients(i).real()) + "," +
               format_double(mu.coefficients(i).imag()) + "\n";
    }
    write_text(out_file(args, "srb_coefficients.csv"), csv);

    Json j;
    j["residual"] = mu.residual;
    j["eigenvalue_gap"] = mu.eigenvalue_gap;
    Json comparisons = Json::array();
    for (const Mode& mode : cfg.observables) {
        const auto f = ScalarObservable::cosine(mode);
        const double srb_value = srb_pairing(mu, k.basis, f).real();
        const double orbit = birkhoff_average(t, f, cfg.birkhoff.points,
                                              cfg.birkhoff.iterations,
                                              cfg.birkhoff.burn_in, cfg.birkhoff.seed);
        comparisons.push_back(Json{{"observable", Json::array({mode[0], mode[1]})},
                                   {"srb", srb_value},
                                   {"birkhoff", orbit},
                                   {"abs_diff", std::abs(srb_value - orbit)}});
    }
    j["birkhoff_comparisons"] = comparisons;
    write_text(out_file(args, "srb_report.json"), j.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ruelle resonances of perturbed hyperbolic toral automorphisms"};
    app.require_subcommand(1);

    CommonArgs spectrum_args, trace_args, fixed_args, detpoly_args, perturb_args, srb_args;
    bool dump_matrix = false;
    int period_flag = 0, order_flag = -1;

    auto* spectrum = app.add_subcommand("spectrum", "assemble K_T and report resonances");
    add_common(spectrum, spectrum_args);
    spectrum->add_flag("--dump-matrix", dump_matrix, "write the weighted matrix (binary)");

    auto* trace = app.add_subcommand("trace-check",
                                     "trace identities across an epsilon sweep");
    add_common(trace, trace_args);

    auto* fixed = app.add_subcommand("fixed-points", "continued periodic points");
    add_common(fixed, fixed_args);
    fixed->add_option("--period", period_flag, "period n >= 1");

    auto* detpoly = app.add_subcommand("detpoly", "dynamical determinant coefficients");
    add_common(detpoly, detpoly_args);
    detpoly->add_option("--order", order_flag, "max coefficient order (<= 5)");

    auto* perturb = app.add_subcommand("perturb", "structured perturbation generators");
    add_common(perturb, perturb_args);

    auto* srb = app.add_subcommand("srb", "SRB functional and Birkhoff validation");
    add_common(srb, srb_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        nlohmann::ordered_json err{{"error", "ConfigError"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }

    try {
        if (spectrum->parsed()) return cmd_spectrum(spectrum_args, dump_matrix);
        if (trace->parsed()) return cmd_trace_check(trace_args);
        if (fixed->parsed()) return cmd_fixed_points(fixed_args, period_flag);
        if (detpoly->parsed()) return cmd_detpoly(detpoly_args, order_flag);
        if (perturb->parsed()) return cmd_perturb(perturb_args);
        if (srb->parsed()) return cmd_srb(srb_args);
    } catch (const ConfigError& e) {
        nlohmann::ordered_json err{{"error", e.name()}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const Error& e) {
        nlohmann::ordered_json err{{"error", e.name()}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        nlohmann::ordered_json err{{"error", "InternalError"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 3;
    }
    return 0;
}
