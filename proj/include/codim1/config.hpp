#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "codim1/geometry.hpp"

namespace codim1 {

struct GeometryConfig {
    std::string kind = "sphere";
    double radius = 1.0;
    double equatorial_radius = 1.0;
    double polar_radius = 1.5;
    double major_radius = 2.0;
    double minor_radius = 0.5;
    std::vector<std::array<double, 2>> custom_points;
    int normal_orientation = 1;
    std::string spin_structure = "antiperiodic";
};

struct RunConfig {
    GeometryConfig geometry;
    int n_u = 64;
    int n_s = 32;
    int refinement_levels = 3;
    int profile_nodes = 512;
    std::vector<double> epsilons;
    double m_max = 4.5;
    int t_points = 11;
    int k = 6;
    unsigned seed = 1234;
    double tol_hermiticity = 1e-12;
    double tol_residual = 1e-8;
    double tol_gap_ratio = 10.0;
    std::string out_dir = ".";
    std::vector<std::string> formats = {"csv", "json"};
    std::string dump_matrix_dir;  // spectrum subcommand: write matrix text dumps here
};

struct CliOverrides {
    std::vector<double> epsilons;
    std::optional<int> n_u, n_s;
    std::optional<double> m_max;
    std::optional<unsigned> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> formats;  // comma separated
    std::optional<std::string> dump_matrix_dir;
};

RunConfig load_config(const std::string& path);
void apply_overrides(RunConfig& cfg, const CliOverrides& ovr);

OffsetGeometry build_geometry(const RunConfig& cfg);
// throws ConfigError; focal violations name the offending epsilon
void validate_config(const RunConfig& cfg, const OffsetGeometry& g);
std::vector<double> mode_list(const RunConfig& cfg, const ProfileCurve& profile);

}  // namespace codim1
