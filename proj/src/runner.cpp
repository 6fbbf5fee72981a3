#include "codim1/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "codim1/analysis.hpp"
#include "codim1/report.hpp"

namespace codim1 {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Sink {
    const RunConfig& cfg;
    std::string sub;
    std::vector<std::string> flags;

    bool wants(const std::string& f) const {
        return std::find(cfg.formats.begin(), cfg.formats.end(), f) != cfg.formats.end();
    }

    void emit(const CsvTable& table, const ordered_json& records, const ordered_json& summary) {
        fs::path dir(cfg.out_dir);
        fs::create_directories(dir);
        if (wants("csv")) write_csv(dir / (sub + ".csv"), table);
        if (wants("json")) {
            ordered_json j = report_envelope(sub, cfg, flags);
            j["records"] = records;
            j["summary"] = summary;
            write_json(dir / (sub + ".json"), j);
        }
        std::cout << sub << ": wrote " << (wants("csv") ? sub + ".csv " : "")
                  << (wants("json") ? sub + ".json" : "") << "\n";
        if (!flags.empty()) {
            std::cout << sub << ": flagged\n";
            for (const auto& f : flags) std::cout << "  flag: " << f << "\n";
        }
    }
};

double grading_defect(const OperatorMatrix& H, const GradingMatrix& G) {
    double worst = 0;
    for (int c = 0; c < H.entries.outerSize(); ++c)
        for (SpMat::InnerIterator it(H.entries, c); it; ++it) {
            double gij = G.diag[it.row()] * G.diag[it.col()];
            worst = std::max(worst, std::abs(it.value()) * std::abs(1.0 + gij));
        }
    return worst;
}

void dump_matrix(const fs::path& path, const SpMat& A) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("report: cannot open " + path.string());
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it)
            os << it.row() << ',' << it.col() << ',' << format_float(it.value().real()) << ','
               << format_float(it.value().imag()) << '\n';
}

int run_spectrum(const RunConfig& cfg, const OffsetGeometry& g, Sink& sink) {
    Grid1D grid_u(cfg.n_u, 0.0, g.profile.length);
    CsvTable t;
    t.header = {"mode", "k", "eigenvalue", "residual", "epsilon", "t"};
    ordered_json records = ordered_json::array();
    for (double m : mode_list(cfg, g.profile)) {
        OperatorMatrix D = assemble_mode_dirac(g, m, 0.0, grid_u);
        if (!cfg.dump_matrix_dir.empty()) {
            fs::create_directories(cfg.dump_matrix_dir);
            dump_matrix(fs::path(cfg.dump_matrix_dir) / ("mode_" + format_float(m) + ".txt"),
                        D.entries);
        }
        EigOptions opt;
        opt.k = (D.dim() > 8192) ? cfg.k : -1;
        opt.seed = cfg.seed;
        opt.herm_tol = cfg.tol_hermiticity;
        SpectrumResult S = eig_symmetric(D, opt);
        for (size_t i = 0; i < S.eigenvalues.size(); ++i) {
            t.rows.push_back({format_float(m), format_int((long long)i),
                              format_float(S.eigenvalues[i]), format_float(S.residual_bound),
                              format_float(0.0), format_float(1.0)});
            ordered_json r;
            r["mode"] = m;
            r["k"] = (long long)i;
            r["eigenvalue"] = S.eigenvalues[i];
            r["residual"] = S.residual_bound;
            r["epsilon"] = 0.0;
            r["t"] = 1.0;
            records.push_back(r);
        }
    }
    ordered_json summary;
    summary["modes"] = mode_list(cfg, g.profile);
    summary["n_u"] = cfg.n_u;
    sink.emit(t, records, summary);
    return sink.flags.empty() ? 0 : 2;
}

int run_index(const RunConfig& cfg, const OffsetGeometry& g, Sink& sink) {
    (void)g;
    CsvTable t;
    t.header = {"epsilon", "index", "ker_plus", "ker_minus"};
    ordered_json records = ordered_json::array();
    for (double eps : cfg.epsilons) {
        Grid1D grid_s(cfg.n_s, -eps, eps);
        OperatorMatrix T = assemble_normal_T(eps, grid_s);
        EigOptions opt;
        opt.vectors = true;
        opt.seed = cfg.seed;
        opt.herm_tol = cfg.tol_hermiticity;
        SpectrumResult S = eig_symmetric(T, opt);
        IndexResult idx =
            graded_index(T, normal_grading(cfg.n_s), S, std::nullopt, cfg.tol_gap_ratio);
        if (idx.indeterminate) {
            std::ostringstream os;
            os << "index: indeterminate at epsilon " << format_float(eps) << " (" << idx.flag_reason
               << ")";
            sink.flags.push_back(os.str());
        }
        t.rows.push_back({format_float(eps), format_int(idx.index),
                          format_int(idx.kernel_dim_plus), format_int(idx.kernel_dim_minus)});
        double minabs = std::numeric_limits<double>::infinity();
        for (double v : S.eigenvalues) minabs = std::min(minabs, std::abs(v));
        ordered_json r;
        r["epsilon"] = eps;
        r["index"] = idx.index;
        r["ker_plus"] = idx.kernel_dim_plus;
        r["ker_minus"] = idx.kernel_dim_minus;
        r["kernel_threshold"] = idx.kernel_threshold;
        r["gap_ratio"] = idx.gap_ratio;
        r["indeterminate"] = idx.indeterminate;
        r["flag_reason"] = idx.flag_reason;
        r["min_abs_eigenvalue"] = minabs;
        r["residual"] = S.residual_bound;
        records.push_back(r);
    }
    ordered_json summary;
    summary["n_s"] = cfg.n_s;
    sink.emit(t, records, summary);
    return sink.flags.empty() ? 0 : 2;
}

void convergence_tables(const ConvergenceReport& rep, CsvTable& t, ordered_json& records,
                        ordered_json& summary) {
    t.header = {"param_name", "param_value", "error"};
    for (size_t i = 0; i < rep.params.size(); ++i) {
        t.rows.push_back(
            {rep.param_name, format_float(rep.params[i]), format_float(rep.errors[i])});
        ordered_json r;
        r["param_name"] = rep.param_name;
        r["param_value"] = rep.params[i];
        r["error"] = rep.errors[i];
        records.push_back(r);
    }
    summary["fitted_order"] = rep.fit.valid ? ordered_json(rep.fit.order) : ordered_json(nullptr);
    summary["fit_residual"] = rep.fit.valid ? ordered_json(rep.fit.residual) : ordered_json(nullptr);
    summary["flagged"] = rep.flagged;
    summary["flag_reason"] = rep.flag_reason;
}

int run_expansion(const RunConfig& cfg, const OffsetGeometry& g, Sink& sink) {
    std::vector<double> modes = {mode_list(cfg, g.profile).front()};
    ConvergenceReport rep =
        expansion_sweep(g, modes, cfg.epsilons, cfg.n_u, cfg.n_s, cfg.k, cfg.seed);
    if (rep.flagged) sink.flags.push_back("expansion: " + rep.flag_reason);
    CsvTable t;
    ordered_json records = ordered_json::array(), summary;
    convergence_tables(rep, t, records, summary);
    summary["modes"] = modes;
    sink.emit(t, records, summary);
    return sink.flags.empty() ? 0 : 2;
}

int run_curvature(const RunConfig& cfg, const OffsetGeometry& g, Sink& sink) {
    CurvatureReport rep = curvature_convergence(g, cfg.epsilons);
    bool eps_decreasing = true;
    for (size_t i = 0; i + 1 < cfg.epsilons.size(); ++i)
        eps_decreasing = eps_decreasing && cfg.epsilons[i + 1] < cfg.epsilons[i];
    if (eps_decreasing)
        for (size_t i = 0; i + 1 < rep.deviations.size(); ++i)
            if (!(rep.deviations[i + 1] < rep.deviations[i])) {
                sink.flags.push_back("curvature: deviation did not shrink with epsilon");
                break;
            }
    CsvTable t;
    t.header = {"epsilon", "deviation"};
    ordered_json records = ordered_json::array();
    for (size_t i = 0; i < rep.eps_list.size(); ++i) {
        t.rows.push_back({format_float(rep.eps_list[i]), format_float(rep.deviations[i])});
        ordered_json r;
        r["epsilon"] = rep.eps_list[i];
        r["deviation"] = rep.deviations[i];
        records.push_back(r);
    }
    ordered_json summary;
    summary["limit_error_s0"] = rep.limit_error_s0;
    sink.emit(t, records, summary);
    return sink.flags.empty() ? 0 : 2;
}

int run_homotopy(const RunConfig& cfg, const OffsetGeometry& g, Sink& sink) {
    HomotopyReport rep = homotopy_scan(g, mode_list(cfg, g.profile), cfg.epsilons.front(),
                                       cfg.t_points, cfg.n_u, cfg.n_s, cfg.k, cfg.seed);
    if (rep.flagged) sink.flags.push_back("homotopy: " + rep.flag_reason);
    CsvTable t;
    t.header = {"t", "index", "min_abs_eigenvalue"};
    ordered_json records = ordered_json::array();
    for (size_t i = 0; i < rep.t_values.size(); ++i) {
        t.rows.push_back({format_float(rep.t_values[i]), format_int(rep.index_per_t[i]),
                          format_float(rep.min_abs_eig[i])});
        ordered_json r;
        r["t"] = rep.t_values[i];
        r["index"] = rep.index_per_t[i];
        r["min_abs_eigenvalue"] = rep.min_abs_eig[i];
        records.push_back(r);
    }
    ordered_json summary;
    summary["epsilon"] = cfg.epsilons.front();
    summary["max_jump"] = rep.max_jump;
    summary["worst_jump_ratio"] = rep.worst_jump_ratio;
    sink.emit(t, records, summary);
    return sink.flags.empty() ? 0 : 2;
}

int run_probe(const RunConfig& cfg, const OffsetGeometry& g, Sink& sink) {
    double m = mode_list(cfg, g.profile).front();
    CsvTable t;
    t.header = {"level", "n_u", "n_s", "ratio1", "ratio2"};
    ordered_json records = ordered_json::array();
    auto row = [&](int level, int nu, int ns, const ProbeStats& st) {
        t.rows.push_back({format_int(level), format_int(nu), format_int(ns),
                          format_float(st.ratio1_max), format_float(st.ratio2_max)});
        ordered_json r;
        r["level"] = level;
        r["n_u"] = nu;
        r["n_s"] = ns;
        r["ratio1"] = st.ratio1_max;
        r["ratio2"] = st.ratio2_max;
        records.push_back(r);
    };
    int trials = 100;
    double growth1 = 0, growth2 = 0;
    ProbeReport rep;
    for (int lev = 0; lev + 1 < cfg.refinement_levels; ++lev) {
        int nu = cfg.n_u << lev, ns = cfg.n_s << lev;
        rep = probe_study(g, m, cfg.epsilons.front(), nu, ns, trials, cfg.seed);
        row(lev, nu, ns, rep.base);
        growth1 = std::max(growth1, rep.growth1);
        growth2 = std::max(growth2, rep.growth2);
        trials = rep.base.trials;
    }
    if (cfg.refinement_levels == 1) {
        rep = probe_study(g, m, cfg.epsilons.front(), cfg.n_u, cfg.n_s, trials, cfg.seed);
        row(0, cfg.n_u, cfg.n_s, rep.base);
    } else {
        int last = cfg.refinement_levels - 1;
        row(last, cfg.n_u << last, cfg.n_s << last, rep.doubled);
        if (growth1 > 2.0 || growth2 > 2.0)
            sink.flags.push_back("probe: ratio growth above 2 under grid doubling");
    }
    ordered_json summary;
    summary["mode"] = m;
    summary["epsilon"] = cfg.epsilons.front();
    summary["trials"] = rep.base.trials;
    if (cfg.refinement_levels > 1) {
        summary["growth1"] = growth1;
        summary["growth2"] = growth2;
    } else {
        summary["growth1"] = nullptr;
        summary["growth2"] = nullptr;
    }
    sink.emit(t, records, summary);
    return sink.flags.empty() ? 0 : 2;
}

int run_validate(const RunConfig& cfg, const OffsetGeometry& g, Sink& sink) {
    CsvTable t;
    t.header = {"check", "value", "threshold", "status"};
    ordered_json records = ordered_json::array();
    auto add = [&](const std::string& name, double value, double threshold) {
        bool ok = value <= threshold;
        t.rows.push_back({name, format_float(value), format_float(threshold), ok ? "pass" : "fail"});
        ordered_json r;
        r["check"] = name;
        r["value"] = value;
        r["threshold"] = threshold;
        r["status"] = ok ? "pass" : "fail";
        records.push_back(r);
        if (!ok) sink.flags.push_back("validate: " + name + " failed");
    };

    double speed_err = 0;
    for (int i = 0; i <= 64; ++i) {
        double u = g.profile.length * i / 64.0;
        speed_err = std::max(
            speed_err, std::abs(std::hypot(g.profile.rho_p(u), g.profile.z_p(u)) - 1.0));
    }
    add("unit_speed", speed_err, 1e-8);

    double m0 = mode_list(cfg, g.profile).front();
    Grid1D grid_u(cfg.n_u, 0.0, g.profile.length);
    double eps = cfg.epsilons.front();
    Grid1D grid_s(cfg.n_s, -eps, eps);
    OperatorMatrix D = assemble_mode_dirac(g, m0, 0.0, grid_u);
    add("hermiticity_mode_dirac", hermiticity_defect(D), cfg.tol_hermiticity);
    OperatorMatrix T = assemble_normal_T(eps, grid_s);
    add("hermiticity_normal", hermiticity_defect(T), cfg.tol_hermiticity);
    auto HG = assemble_product(g, m0, eps, grid_u, grid_s);
    add("hermiticity_product", hermiticity_defect(HG.first), cfg.tol_hermiticity);
    add("product_grading_odd", grading_defect(HG.first, HG.second), 0.0);

    TwistReport tw0 = verify_twist_unitary_trivial();
    add("twist_trivial", std::max({tw0.unitarity, tw0.identity, tw0.grading}), 1e-15);
    double tw_worst = 0;
    for (unsigned seed = 0; seed < 20; ++seed) {
        TwistReport tw = verify_twist_unitary(seed);
        tw_worst = std::max({tw_worst, tw.unitarity, tw.identity, tw.grading});
    }
    add("twist_seeded", tw_worst, 1e-13);

    double s0 = std::min(0.35, 0.8 * 0.9 * g.focal_bound());
    double agree = 0;
    lambda_trace_identity(g, {4e-3, 2e-3, 1e-3}, s0, 1e-4, &agree);
    add("lambda_trace_agreement", agree, 1e-8);

    EigOptions opt;
    opt.vectors = true;
    opt.seed = cfg.seed;
    SpectrumResult S = eig_symmetric(D, opt);
    add("eig_residual_relative", S.residual_bound / std::max(S.op_norm_est, 1e-300),
        cfg.tol_residual);

    ordered_json summary;
    summary["focal_bound"] = g.focal_bound();
    summary["profile_length"] = g.profile.length;
    summary["checks"] = records.size();
    sink.emit(t, records, summary);
    return sink.flags.empty() ? 0 : 2;
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& cfg) {
    OffsetGeometry g = build_geometry(cfg);
    validate_config(cfg, g);
    Sink sink{cfg, subcommand, {}};
    if (subcommand == "spectrum") return run_spectrum(cfg, g, sink);
    if (subcommand == "index") return run_index(cfg, g, sink);
    if (subcommand == "expansion") return run_expansion(cfg, g, sink);
    if (subcommand == "curvature") return run_curvature(cfg, g, sink);
    if (subcommand == "homotopy") return run_homotopy(cfg, g, sink);
    if (subcommand == "probe") return run_probe(cfg, g, sink);
    if (subcommand == "validate") return run_validate(cfg, g, sink);
    throw Error("unknown subcommand '" + subcommand + "'");
}

}  // namespace codim1
