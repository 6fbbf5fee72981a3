#include "codim1/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace codim1 {

std::string format_float(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string format_int(long long v) { return std::to_string(v); }

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("report: cannot open " + path.string());
    auto line = [&](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    };
    line(table.header);
    for (const auto& row : table.rows) line(row);
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("report: cannot open " + path.string());
    os << j.dump(2) << '\n';
}

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
    nlohmann::ordered_json g;
    g["kind"] = cfg.geometry.kind;
    if (cfg.geometry.kind == "sphere") g["radius"] = cfg.geometry.radius;
    if (cfg.geometry.kind == "spheroid") {
        g["equatorial_radius"] = cfg.geometry.equatorial_radius;
        g["polar_radius"] = cfg.geometry.polar_radius;
    }
    if (cfg.geometry.kind == "torus") {
        g["major_radius"] = cfg.geometry.major_radius;
        g["minor_radius"] = cfg.geometry.minor_radius;
    }
    if (cfg.geometry.kind == "custom") {
        nlohmann::ordered_json pts = nlohmann::ordered_json::array();
        for (const auto& p : cfg.geometry.custom_points) pts.push_back({p[0], p[1]});
        g["points"] = pts;
    }
    g["normal_orientation"] = cfg.geometry.normal_orientation;
    g["spin_structure"] = cfg.geometry.spin_structure;

    nlohmann::ordered_json j;
    j["geometry"] = g;
    j["n_u"] = cfg.n_u;
    j["n_s"] = cfg.n_s;
    j["refinement_levels"] = cfg.refinement_levels;
    j["profile_nodes"] = cfg.profile_nodes;
    j["epsilons"] = cfg.epsilons;
    j["m_max"] = cfg.m_max;
    j["t_points"] = cfg.t_points;
    j["k"] = cfg.k;
    j["seed"] = cfg.seed;
    j["tol_hermiticity"] = cfg.tol_hermiticity;
    j["tol_residual"] = cfg.tol_residual;
    j["tol_gap_ratio"] = cfg.tol_gap_ratio;
    j["formats"] = cfg.formats;
    return j;
}

nlohmann::ordered_json report_envelope(const std::string& subcommand, const RunConfig& cfg,
                                       const std::vector<std::string>& flags) {
    nlohmann::ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["config"] = config_echo(cfg);
    j["flags"] = flags;
    return j;
}

}  // namespace codim1
