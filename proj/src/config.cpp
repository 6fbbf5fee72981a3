#include "codim1/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace codim1 {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + where + it.key() + "'");
}

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("config: ") + key + " must be a number");
    return j[key].get<double>();
}

int integer(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer())
        throw ConfigError(std::string("config: ") + key + " must be an integer");
    return j[key].get<int>();
}

std::string text(const json& j, const char* key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) throw ConfigError(std::string("config: ") + key + " must be a string");
    return j[key].get<std::string>();
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(j, {"geometry", "n_u", "n_s", "refinement_levels", "profile_nodes", "epsilons",
                       "m_max", "t_points", "k", "seed", "tol_hermiticity", "tol_residual",
                       "tol_gap_ratio", "output"},
                   "");

    RunConfig cfg;
    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        if (!g.is_object()) throw ConfigError("config: geometry must be an object");
        reject_unknown(g, {"kind", "radius", "equatorial_radius", "polar_radius", "major_radius",
                           "minor_radius", "points", "normal_orientation", "spin_structure"},
                       "geometry.");
        cfg.geometry.kind = text(g, "kind", cfg.geometry.kind);
        cfg.geometry.radius = num(g, "radius", cfg.geometry.radius);
        cfg.geometry.equatorial_radius = num(g, "equatorial_radius", cfg.geometry.equatorial_radius);
        cfg.geometry.polar_radius = num(g, "polar_radius", cfg.geometry.polar_radius);
        cfg.geometry.major_radius = num(g, "major_radius", cfg.geometry.major_radius);
        cfg.geometry.minor_radius = num(g, "minor_radius", cfg.geometry.minor_radius);
        cfg.geometry.normal_orientation =
            integer(g, "normal_orientation", cfg.geometry.normal_orientation);
        cfg.geometry.spin_structure = text(g, "spin_structure", cfg.geometry.spin_structure);
        if (g.contains("points")) {
            if (!g["points"].is_array()) throw ConfigError("config: geometry.points must be an array");
            for (const auto& p : g["points"]) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigError("config: geometry.points entries must be [rho, z] pairs");
                cfg.geometry.custom_points.push_back({p[0].get<double>(), p[1].get<double>()});
            }
        }
    }
    cfg.n_u = integer(j, "n_u", cfg.n_u);
    cfg.n_s = integer(j, "n_s", cfg.n_s);
    cfg.refinement_levels = integer(j, "refinement_levels", cfg.refinement_levels);
    cfg.profile_nodes = integer(j, "profile_nodes", cfg.profile_nodes);
    if (j.contains("epsilons")) {
        if (!j["epsilons"].is_array()) throw ConfigError("config: epsilons must be an array");
        for (const auto& e : j["epsilons"]) {
            if (!e.is_number()) throw ConfigError("config: epsilons must contain numbers");
            cfg.epsilons.push_back(e.get<double>());
        }
    }
    cfg.m_max = num(j, "m_max", cfg.m_max);
    cfg.t_points = integer(j, "t_points", cfg.t_points);
    cfg.k = integer(j, "k", cfg.k);
    {
        long long s = (long long)num(j, "seed", (double)cfg.seed);
        if (s < 0) throw ConfigError("config: seed must be nonnegative");
        cfg.seed = (unsigned)s;
    }
    cfg.tol_hermiticity = num(j, "tol_hermiticity", cfg.tol_hermiticity);
    cfg.tol_residual = num(j, "tol_residual", cfg.tol_residual);
    cfg.tol_gap_ratio = num(j, "tol_gap_ratio", cfg.tol_gap_ratio);
    if (j.contains("output")) {
        const json& o = j["output"];
        if (!o.is_object()) throw ConfigError("config: output must be an object");
        reject_unknown(o, {"directory", "formats"}, "output.");
        cfg.out_dir = text(o, "directory", cfg.out_dir);
        if (o.contains("formats")) {
            if (!o["formats"].is_array()) throw ConfigError("config: output.formats must be an array");
            cfg.formats.clear();
            for (const auto& f : o["formats"]) {
                if (!f.is_string()) throw ConfigError("config: output.formats must contain strings");
                cfg.formats.push_back(f.get<std::string>());
            }
        }
    }
    return cfg;
}

void apply_overrides(RunConfig& cfg, const CliOverrides& ovr) {
    if (!ovr.epsilons.empty()) cfg.epsilons = ovr.epsilons;
    if (ovr.n_u) cfg.n_u = *ovr.n_u;
    if (ovr.n_s) cfg.n_s = *ovr.n_s;
    if (ovr.m_max) cfg.m_max = *ovr.m_max;
    if (ovr.seed) cfg.seed = *ovr.seed;
    if (ovr.out_dir) cfg.out_dir = *ovr.out_dir;
    if (ovr.dump_matrix_dir) cfg.dump_matrix_dir = *ovr.dump_matrix_dir;
    if (ovr.formats) {
        cfg.formats.clear();
        std::stringstream ss(*ovr.formats);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) cfg.formats.push_back(tok);
        }
    }
}

OffsetGeometry build_geometry(const RunConfig& cfg) {
    const GeometryConfig& gc = cfg.geometry;
    SpinStructure spin;
    if (gc.spin_structure == "antiperiodic")
        spin = SpinStructure::Antiperiodic;
    else if (gc.spin_structure == "periodic")
        spin = SpinStructure::Periodic;
    else
        throw ConfigError("config: spin_structure must be 'antiperiodic' or 'periodic'");

    std::vector<double> params;
    if (gc.kind == "sphere")
        params = {gc.radius};
    else if (gc.kind == "spheroid")
        params = {gc.equatorial_radius, gc.polar_radius};
    else if (gc.kind == "torus")
        params = {gc.major_radius, gc.minor_radius};
    else if (gc.kind != "custom")
        throw ConfigError("config: geometry.kind must be sphere, spheroid, torus, or custom");

    ProfileCurve profile =
        build_profile(gc.kind, params, cfg.profile_nodes, spin, gc.custom_points);
    return make_offset_geometry(std::move(profile), gc.normal_orientation);
}

void validate_config(const RunConfig& cfg, const OffsetGeometry& g) {
    if (cfg.epsilons.empty()) throw ConfigError("config: epsilons must be non-empty");
    for (double e : cfg.epsilons) {
        if (!(e > 0)) {
            std::ostringstream os;
            os << "config: epsilon " << e << " must be positive";
            throw ConfigError(os.str());
        }
        double bound = 0.9 * g.focal_bound();
        if (e > bound) {
            std::ostringstream os;
            os << "config: epsilon " << e << " exceeds 0.9*focal bound " << bound;
            throw ConfigError(os.str());
        }
    }
    if (cfg.n_u < 2) throw ConfigError("config: n_u must be at least 2");
    if (cfg.n_s < 2) throw ConfigError("config: n_s must be at least 2");
    if (cfg.refinement_levels < 1 || cfg.refinement_levels > 6)
        throw ConfigError("config: refinement_levels must lie in [1, 6]");
    if (cfg.profile_nodes < 16) throw ConfigError("config: profile_nodes must be at least 16");
    if (cfg.t_points < 2) throw ConfigError("config: t_points must be at least 2");
    if (cfg.k < 1) throw ConfigError("config: k must be at least 1");
    if (!(cfg.m_max > 0)) throw ConfigError("config: m_max must be positive");
    if (!(cfg.tol_hermiticity > 0) || !(cfg.tol_residual > 0) || !(cfg.tol_gap_ratio > 0))
        throw ConfigError("config: tolerances must be positive");
    if (cfg.formats.empty()) throw ConfigError("config: output.formats must be non-empty");
    for (const auto& f : cfg.formats)
        if (f != "csv" && f != "json")
            throw ConfigError("config: unknown output format '" + f + "'");
    if (mode_list(cfg, g.profile).empty())
        throw ConfigError("config: m_max yields no admissible modes");
    if (cfg.geometry.normal_orientation != 1 && cfg.geometry.normal_orientation != -1)
        throw ConfigError("config: normal_orientation must be +1 or -1");
}

std::vector<double> mode_list(const RunConfig& cfg, const ProfileCurve& profile) {
    std::vector<double> modes;
    bool half = (profile.topology == Topology::IntervalWithPoles) ||
                (profile.spin == SpinStructure::Antiperiodic);
    if (half) {
        for (double m = 0.5; m <= cfg.m_max + 1e-12; m += 1.0) {
            modes.push_back(m);
            modes.push_back(-m);
        }
    } else {
        modes.push_back(0.0);
        for (double m = 1.0; m <= cfg.m_max + 1e-12; m += 1.0) {
            modes.push_back(m);
            modes.push_back(-m);
        }
    }
    return modes;
}

}  // namespace codim1
