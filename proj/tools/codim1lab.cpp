#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codim1/config.hpp"
#include "codim1/errors.hpp"
#include "codim1/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for offset-surface Dirac families"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, std::string>> names = {
        {"spectrum", "tangential mode operator eigenvalues at s = 0"},
        {"index", "graded index of the normal operator per epsilon"},
        {"expansion", "product spectrum against the s = 0 leaf as epsilon shrinks"},
        {"curvature", "scalar curvature term: tube deviation and the s = 0 limit"},
        {"homotopy", "index stability along the interpolation parameter t"},
        {"probe", "anticommutator and splitting probes on random tube states"},
        {"validate", "structural identities: hermiticity, grading, twist, metric"}};
    struct Args {
        std::string config_path;
        std::vector<double> epsilons;
        int n_u = -1, n_s = -1;
        double m_max = -1;
        long long seed = -1;
        std::string out, format, dump_dir;
    };
    std::vector<Args> args(names.size());
    for (size_t i = 0; i < names.size(); ++i) {
        CLI::App* sub = app.add_subcommand(names[i].first, names[i].second);
        Args& a = args[i];
        sub->add_option("--config", a.config_path, "JSON config file")->required();
        sub->add_option("--epsilons", a.epsilons, "tube half-widths (overrides config)");
        sub->add_option("--n-u", a.n_u, "tangential grid points");
        sub->add_option("--n-s", a.n_s, "normal grid points");
        sub->add_option("--m-max", a.m_max, "largest angular mode");
        sub->add_option("--seed", a.seed, "RNG seed");
        sub->add_option("--out", a.out, "output directory");
        sub->add_option("--format", a.format, "comma-separated output formats (csv,json)");
        if (names[i].first == "spectrum")
            sub->add_option("--dump-matrix", a.dump_dir, "directory for assembled matrix dumps");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        for (size_t i = 0; i < names.size(); ++i) {
            if (!app.get_subcommand(names[i].first)->parsed()) continue;
            const Args& a = args[i];
            codim1::RunConfig cfg = codim1::load_config(a.config_path);
            codim1::CliOverrides ov;
            ov.epsilons = a.epsilons;
            if (a.n_u >= 0) ov.n_u = a.n_u;
            if (a.n_s >= 0) ov.n_s = a.n_s;
            if (a.m_max >= 0) ov.m_max = a.m_max;
            if (a.seed >= 0) ov.seed = (unsigned long long)a.seed;
            if (!a.out.empty()) ov.out_dir = a.out;
            if (!a.format.empty()) ov.formats = a.format;
            if (!a.dump_dir.empty()) ov.dump_matrix_dir = a.dump_dir;
            codim1::apply_overrides(cfg, ov);
            return codim1::run(names[i].first, cfg);
        }
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
