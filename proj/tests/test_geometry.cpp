#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "codim1/geometry.hpp"

using namespace codim1;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("sphere profile closed form") {
    for (double R : {1.0, 3.0}) {
        auto prof = make_sphere(R);
        CHECK(prof.length == doctest::Approx(kPi * R).epsilon(1e-14));
        CHECK(prof.topology == Topology::IntervalWithPoles);
        for (double f : {0.1, 0.45, 0.8}) {
            double u = f * prof.length;
            CHECK(std::hypot(prof.rho_p(u), prof.z_p(u)) == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(prof.kappa_mu0(u) == doctest::Approx(-1.0 / R).epsilon(1e-13));
            CHECK(prof.kappa_pi0(u) == doctest::Approx(-1.0 / R).epsilon(1e-13));
            CHECK(prof.kappa_mu0_p(u) == doctest::Approx(0.0));
        }
        CHECK(prof.rho(0.0) == doctest::Approx(0.0));
        CHECK(prof.rho(prof.length) == doctest::Approx(0.0));
        auto g = make_offset_geometry(prof);
        CHECK(g.epsilon0 == doctest::Approx(R).epsilon(1e-12));
    }
}

TEST_CASE("torus profile closed form") {
    auto prof = make_torus(2.0, 0.5);
    CHECK(prof.length == doctest::Approx(2 * kPi * 0.5).epsilon(1e-14));
    CHECK(prof.topology == Topology::Circle);
    CHECK(prof.rho(0.0) == doctest::Approx(2.5));
    CHECK(prof.kappa_mu0(0.0) == doctest::Approx(-2.0));
    CHECK(prof.kappa_pi0(0.0) == doctest::Approx(-0.4));
    // innermost circle: u = pi * r, rho = R - r, kappa_pi flips sign
    double ui = kPi * 0.5;
    CHECK(prof.rho(ui) == doctest::Approx(1.5));
    CHECK(prof.kappa_pi0(ui) == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
    auto g = make_offset_geometry(prof);
    CHECK(g.epsilon0 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(make_torus(0.5, 2.0), InvalidGeometry);
}

TEST_CASE("spheroid arclength parametrization") {
    auto prof = make_spheroid(1.0, 1.5);
    CHECK(prof.length == doctest::Approx(3.96635989732264745).epsilon(1e-10));
    for (double f : {0.05, 0.3, 0.5, 0.77, 0.95}) {
        double u = f * prof.length;
        CHECK(std::hypot(prof.rho_p(u), prof.z_p(u)) == doctest::Approx(1.0).epsilon(1e-8));
    }
    // poles: both curvatures equal -c/a^2
    CHECK(prof.kappa_mu0(0.0) == doctest::Approx(-1.5).epsilon(1e-8));
    // equator (u = L/2): w = c, so kappa_mu = -a c/c^3, kappa_pi = -c/(a c) = -1/a
    double um = 0.5 * prof.length;
    CHECK(prof.kappa_mu0(um) == doctest::Approx(-1.0 / 2.25).epsilon(1e-8));
    CHECK(prof.kappa_pi0(um) == doctest::Approx(-1.0).epsilon(1e-8));
    auto g = make_offset_geometry(prof);
    CHECK(g.epsilon0 == doctest::Approx(1.0 / 1.5).epsilon(1e-8));

    // derivative fields against central differences
    double h = 1e-6;
    for (double f : {0.2, 0.6}) {
        double u = f * prof.length;
        double fd_mu = (prof.kappa_mu0(u + h) - prof.kappa_mu0(u - h)) / (2 * h);
        double fd_pi = (prof.kappa_pi0(u + h) - prof.kappa_pi0(u - h)) / (2 * h);
        CHECK(prof.kappa_mu0_p(u) == doctest::Approx(fd_mu).epsilon(1e-5));
        CHECK(prof.kappa_pi0_p(u) == doctest::Approx(fd_pi).epsilon(1e-5));
    }
}

TEST_CASE("custom profile from resampled sphere points") {
    std::vector<std::array<double, 2>> pts;
    int n = 200;
    for (int i = 0; i <= n; ++i) {
        double t = kPi * i / n;
        pts.push_back({std::sin(t), std::cos(t)});
    }
    auto prof = make_custom(pts);
    CHECK(prof.topology == Topology::IntervalWithPoles);
    CHECK(prof.length == doctest::Approx(kPi).epsilon(1e-6));
    for (double f : {0.2, 0.5, 0.8}) {
        double u = f * prof.length;
        CHECK(std::hypot(prof.rho_p(u), prof.z_p(u)) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(prof.kappa_mu0(u) == doctest::Approx(-1.0).epsilon(1e-3));
        CHECK(prof.kappa_pi0(u) == doctest::Approx(-1.0).epsilon(1e-3));
    }
    CHECK_THROWS_AS(make_custom({{0.0, 1.0}, {1.0, 0.0}}), InvalidGeometry);
    // does not close onto the axis
    CHECK_THROWS_AS(make_custom({{0.0, 1.0}, {1.0, 0.5}, {1.0, -0.5}, {0.5, -1.0}}),
                    InvalidGeometry);
}

TEST_CASE("orientation flip negates curvatures, keeps focal bound") {
    auto g1 = make_offset_geometry(make_spheroid(1.0, 1.5), 1);
    auto g2 = make_offset_geometry(make_spheroid(1.0, 1.5), -1);
    double u = 0.4 * g1.profile.length;
    CHECK(g1.kappa_mu(u) == doctest::Approx(-g2.kappa_mu(u)).epsilon(1e-14));
    CHECK(g1.kappa_pi(u) == doctest::Approx(-g2.kappa_pi(u)).epsilon(1e-14));
    CHECK(g1.epsilon0 == doctest::Approx(g2.epsilon0));
    CHECK_THROWS_AS(make_offset_geometry(make_sphere(1.0), 2), InvalidGeometry);
}

TEST_CASE("offset bound enforcement") {
    auto g = make_offset_geometry(make_sphere(1.0));
    CHECK(focal_bound(g) == doctest::Approx(1.0));
    CHECK_NOTHROW(g.require_offset(0.9));
    CHECK_NOTHROW(g.require_offset(-0.9));
    CHECK_THROWS_AS(g.require_offset(0.95), FocalViolation);
    try {
        g.require_offset(1.2);
        CHECK(false);
    } catch (const FocalViolation& e) {
        CHECK(std::string(e.what()).find("exceeds") != std::string::npos);
        CHECK(e.offset == doctest::Approx(1.2));
    }
    CHECK_THROWS_AS(principal_curvatures(g, -0.1), DomainError);
    CHECK_THROWS_AS(principal_curvatures(g, g.profile.length + 0.1), DomainError);
    auto [km, kp] = principal_curvatures(g, 0.5);
    CHECK(km == doctest::Approx(-1.0));
    CHECK(kp == doctest::Approx(-1.0));
}

TEST_CASE("offset fields on the sphere") {
    auto g = make_offset_geometry(make_sphere(1.0));
    double u = 0.3 * g.profile.length;
    CHECK(lambda(g, u, 0.3) == doctest::Approx(1.0 / (1.3 * 1.3)).epsilon(1e-14));
    CHECK(trace_II(g, u, 0.3) == doctest::Approx(-2.0 / 1.3).epsilon(1e-14));
    CHECK(g.a_field(u, 0.3) == 0.0);
    CHECK(g.curvature_field(u, 0.3) == doctest::Approx(-1.0 / (1.3 * 1.3)).epsilon(1e-13));
    CHECK(g.curvature_field(u, 0.0) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("offset fields on the torus outermost circle") {
    auto g = make_offset_geometry(make_torus(2.0, 0.5));
    CHECK(trace_II(g, 0.0, 0.0) == doctest::Approx(-2.4).epsilon(1e-13));
    CHECK(trace_II(g, 0.0, 0.1) == doctest::Approx(-2.05128205128205128).epsilon(1e-13));
    CHECK(lambda(g, 0.0, 0.1) == doctest::Approx(1.0 / (1.2 * 1.04)).epsilon(1e-13));
}

TEST_CASE("chart jacobian matches a*r and lambda cancels it") {
    auto g = make_offset_geometry(make_spheroid(1.0, 1.5));
    double u = 0.37 * g.profile.length, phi = 1.1, s = 0.21;
    double h = 1e-6;
    Eigen::Matrix3d J;
    auto col = [&](int c, double du, double dphi, double ds) {
        Eigen::Vector3d xp = g.chart(u + du * h, phi + dphi * h, s + ds * h);
        Eigen::Vector3d xm = g.chart(u - du * h, phi - dphi * h, s - ds * h);
        J.col(c) = (xp - xm) / (2 * h);
    };
    col(0, 1, 0, 0);
    col(1, 0, 1, 0);
    col(2, 0, 0, 1);
    double a = g.a(u, s);
    double r = g.r(u, s);
    CHECK(std::abs(J.determinant()) == doctest::Approx(a * r).epsilon(1e-6));
    CHECK(g.lambda(u, s) * a * r == doctest::Approx(g.rho(u)).epsilon(1e-13));
}

TEST_CASE("frame is orthonormal and chart moves along nu with s") {
    auto g = make_offset_geometry(make_torus(2.0, 0.5));
    double u = 0.23 * g.profile.length, phi = 0.7;
    auto [x, F] = fermi_chart(g, u, phi, 0.12);
    CHECK(F.e_u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(F.e_phi.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(F.nu.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(F.e_u.dot(F.e_phi)) < 1e-12);
    CHECK(std::abs(F.e_u.dot(F.nu)) < 1e-12);
    CHECK(std::abs(F.e_phi.dot(F.nu)) < 1e-12);
    // right-handed: e_u x e_phi = nu
    CHECK((F.e_u.cross(F.e_phi) - F.nu).norm() < 1e-12);
    Eigen::Vector3d x0 = g.chart(u, phi, 0.0);
    CHECK((x - (x0 + 0.12 * F.nu)).norm() < 1e-12);
}
