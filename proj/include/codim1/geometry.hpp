#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "codim1/errors.hpp"

namespace codim1 {

enum class Topology { IntervalWithPoles, Circle };
enum class SpinStructure { Antiperiodic, Periodic };

// Unit-speed generating curve u -> (rho(u), z(u)), u in [0, L].
// Curvatures are stored for the default orientation nu = (-z', rho');
// OffsetGeometry applies the orientation sign on top.
struct ProfileCurve {
    std::string kind;
    Topology topology = Topology::IntervalWithPoles;
    SpinStructure spin = SpinStructure::Antiperiodic;
    double length = 0;
    std::vector<double> arclength_nodes;

    std::function<double(double)> rho, z, rho_p, z_p;
    std::function<double(double)> kappa_mu0, kappa_pi0;    // principal curvatures at s=0
    std::function<double(double)> kappa_mu0_p, kappa_pi0_p;  // d/du of the above
};

ProfileCurve make_sphere(double radius, int n_nodes = 512);
ProfileCurve make_spheroid(double equatorial_radius, double polar_radius, int n_nodes = 512);
ProfileCurve make_torus(double major_radius, double minor_radius, int n_nodes = 512,
                        SpinStructure spin = SpinStructure::Antiperiodic);
ProfileCurve make_custom(const std::vector<std::array<double, 2>>& samples, int n_nodes = 512);

struct Frame {
    Eigen::Vector3d e_u, e_phi, nu;
};

struct OffsetGeometry {
    ProfileCurve profile;
    int normal_orientation = 1;
    double epsilon0 = 0;  // focal bound

    double rho(double u) const { return profile.rho(u); }
    double kappa_mu(double u) const { return normal_orientation * profile.kappa_mu0(u); }
    double kappa_pi(double u) const { return normal_orientation * profile.kappa_pi0(u); }
    double kappa_mu_p(double u) const { return normal_orientation * profile.kappa_mu0_p(u); }
    double kappa_pi_p(double u) const { return normal_orientation * profile.kappa_pi0_p(u); }

    double a(double u, double s) const { return 1.0 - s * kappa_mu(u); }
    double r(double u, double s) const { return profile.rho(u) * (1.0 - s * kappa_pi(u)); }

    double focal_bound() const { return epsilon0; }
    void require_offset(double s) const;

    // Lambda = rho/(a r) = 1/((1 - s k_mu)(1 - s k_pi)); the rho factor cancels.
    double lambda(double u, double s) const;
    double trace_II(double u, double s) const;

    // amplitude of the correction term A: (1/(2 Lambda)) a^{-1} d_u Lambda
    double a_field(double u, double s) const;
    // scalar curvature field -(a^{-1}d_u Lambda)^2/(4 Lambda^2) - (Tr II_s)^2/4
    double curvature_field(double u, double s) const;

    Eigen::Vector3d chart(double u, double phi, double s) const;
    Frame frame(double u, double phi) const;
};

OffsetGeometry make_offset_geometry(ProfileCurve profile, int normal_orientation = 1);

// free-function wrappers
ProfileCurve build_profile(const std::string& kind, const std::vector<double>& params,
                           int n_nodes = 512,
                           SpinStructure spin = SpinStructure::Antiperiodic,
                           const std::vector<std::array<double, 2>>& custom_samples = {});
std::pair<double, double> principal_curvatures(const OffsetGeometry& g, double u);
double focal_bound(const OffsetGeometry& g);
double lambda(const OffsetGeometry& g, double u, double s);
double trace_II(const OffsetGeometry& g, double u, double s);
std::pair<Eigen::Vector3d, Frame> fermi_chart(const OffsetGeometry& g, double u, double phi,
                                              double s);

}  // namespace codim1
