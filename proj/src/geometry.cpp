#include "codim1/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace codim1 {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> uniform_nodes(double length, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = length * i / (n - 1);
    return v;
}

// forward arclength table u(theta) on a uniform theta grid, composite Simpson
struct ArclengthMap {
    double t0, t1, dt;
    std::vector<double> u_at;  // u(t0 + i dt)
    std::function<double(double)> speed;

    void build(double a, double b, int panels, std::function<double(double)> w) {
        t0 = a;
        t1 = b;
        dt = (b - a) / panels;
        speed = std::move(w);
        u_at.resize(panels + 1);
        u_at[0] = 0.0;
        for (int i = 0; i < panels; ++i) {
            double ta = t0 + i * dt;
            u_at[i + 1] =
                u_at[i] + dt / 6.0 * (speed(ta) + 4.0 * speed(ta + 0.5 * dt) + speed(ta + dt));
        }
    }

    double length() const { return u_at.back(); }

    double u_of_t(double t) const {
        t = std::clamp(t, t0, t1);
        int i = std::min((int)((t - t0) / dt), (int)u_at.size() - 2);
        double ta = t0 + i * dt, d = t - ta;
        if (d <= 0) return u_at[i];
        return u_at[i] + d / 6.0 * (speed(ta) + 4.0 * speed(ta + 0.5 * d) + speed(t));
    }

    double t_of_u(double u) const {
        u = std::clamp(u, 0.0, length());
        auto it = std::upper_bound(u_at.begin(), u_at.end(), u);
        int i = std::clamp((int)(it - u_at.begin()) - 1, 0, (int)u_at.size() - 2);
        double t = t0 + i * dt + (u - u_at[i]) / std::max(speed(t0 + i * dt), 1e-300);
        for (int iter = 0; iter < 4; ++iter) {
            t = std::clamp(t, t0, t1);
            t -= (u_of_t(t) - u) / speed(t);
        }
        return std::clamp(t, t0, t1);
    }
};

// clamped cubic spline; end slopes from one-sided parabolas through the
// first/last three samples (natural ends flatten curvature at pole crossings)
struct CubicSpline {
    std::vector<double> x, y, m;  // m: second derivatives

    void build(const std::vector<double>& xs, const std::vector<double>& ys) {
        x = xs;
        y = ys;
        int n = (int)x.size();
        m.assign(n, 0.0);
        if (n < 3) return;
        auto slope = [&](int i) { return (y[i + 1] - y[i]) / (x[i + 1] - x[i]); };
        double h0 = x[1] - x[0], h1 = x[2] - x[1];
        double he = x[n - 1] - x[n - 2], hp = x[n - 2] - x[n - 3];
        double sa = slope(0) + (slope(0) - slope(1)) * h0 / (h0 + h1);
        double sb = slope(n - 2) + (slope(n - 2) - slope(n - 3)) * he / (he + hp);
        std::vector<double> a(n, 0), b(n, 0), c(n, 0), d(n, 0);
        b[0] = h0 / 3.0;
        c[0] = h0 / 6.0;
        d[0] = slope(0) - sa;
        for (int i = 1; i + 1 < n; ++i) {
            double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
            a[i] = hl / 6.0;
            b[i] = (hl + hr) / 3.0;
            c[i] = hr / 6.0;
            d[i] = slope(i) - slope(i - 1);
        }
        a[n - 1] = he / 6.0;
        b[n - 1] = he / 3.0;
        d[n - 1] = sb - slope(n - 2);
        for (int i = 1; i < n; ++i) {
            double f = a[i] / b[i - 1];
            b[i] -= f * c[i - 1];
            d[i] -= f * d[i - 1];
        }
        m[n - 1] = d[n - 1] / b[n - 1];
        for (int i = n - 2; i >= 0; --i) m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
    }

    int seg(double t) const {
        int i = (int)(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
        return std::clamp(i, 0, (int)x.size() - 2);
    }

    double eval(double t, int deriv = 0) const {
        int i = seg(t);
        double h = x[i + 1] - x[i], A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
        if (deriv == 0)
            return A * y[i] + B * y[i + 1] +
                   ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
        if (deriv == 1)
            return (y[i + 1] - y[i]) / h +
                   (-(3 * A * A - 1) * m[i] + (3 * B * B - 1) * m[i + 1]) * h / 6.0;
        return A * m[i] + B * m[i + 1];
    }
};

}  // namespace

ProfileCurve make_sphere(double radius, int n_nodes) {
    if (!(radius > 0)) throw InvalidGeometry("geometry: sphere radius must be positive");
    double R = radius;
    ProfileCurve p;
    p.kind = "sphere";
    p.topology = Topology::IntervalWithPoles;
    p.length = kPi * R;
    p.arclength_nodes = uniform_nodes(p.length, std::max(n_nodes, 16));
    p.rho = [R](double u) { return R * std::sin(u / R); };
    p.z = [R](double u) { return R * std::cos(u / R); };
    p.rho_p = [R](double u) { return std::cos(u / R); };
    p.z_p = [R](double u) { return -std::sin(u / R); };
    p.kappa_mu0 = [R](double) { return -1.0 / R; };
    p.kappa_pi0 = [R](double) { return -1.0 / R; };
    p.kappa_mu0_p = [](double) { return 0.0; };
    p.kappa_pi0_p = [](double) { return 0.0; };
    return p;
}

ProfileCurve make_torus(double major_radius, double minor_radius, int n_nodes,
                        SpinStructure spin) {
    if (!(major_radius > 0) || !(minor_radius > 0))
        throw InvalidGeometry("geometry: torus radii must be positive");
    if (!(minor_radius < major_radius))
        throw InvalidGeometry("geometry: torus minor radius must be smaller than major radius");
    double R = major_radius, r = minor_radius;
    ProfileCurve p;
    p.kind = "torus";
    p.topology = Topology::Circle;
    p.spin = spin;
    p.length = 2.0 * kPi * r;
    p.arclength_nodes = uniform_nodes(p.length, std::max(n_nodes, 16));
    p.rho = [R, r](double u) { return R + r * std::cos(u / r); };
    p.z = [r](double u) { return -r * std::sin(u / r); };
    p.rho_p = [r](double u) { return -std::sin(u / r); };
    p.z_p = [r](double u) { return -std::cos(u / r); };
    p.kappa_mu0 = [r](double) { return -1.0 / r; };
    p.kappa_pi0 = [R, r](double u) {
        return -std::cos(u / r) / (R + r * std::cos(u / r));
    };
    p.kappa_mu0_p = [](double) { return 0.0; };
    p.kappa_pi0_p = [R, r](double u) {
        double rho = R + r * std::cos(u / r);
        return R * std::sin(u / r) / (r * rho * rho);
    };
    return p;
}

ProfileCurve make_spheroid(double equatorial_radius, double polar_radius, int n_nodes) {
    if (!(equatorial_radius > 0) || !(polar_radius > 0))
        throw InvalidGeometry("geometry: spheroid radii must be positive");
    double A = equatorial_radius, C = polar_radius;
    // ellipse (rho, z) = (A sin t, C cos t), t in [0, pi]
    auto speed = [A, C](double t) {
        double ct = std::cos(t), st = std::sin(t);
        return std::sqrt(A * A * ct * ct + C * C * st * st);
    };
    auto map = std::make_shared<ArclengthMap>();
    map->build(0.0, kPi, 8192, speed);

    ProfileCurve p;
    p.kind = "spheroid";
    p.topology = Topology::IntervalWithPoles;
    p.length = map->length();
    p.arclength_nodes = uniform_nodes(p.length, std::max(n_nodes, 16));
    auto w_of = [A, C](double t) {
        double ct = std::cos(t), st = std::sin(t);
        return std::sqrt(A * A * ct * ct + C * C * st * st);
    };
    p.rho = [map, A](double u) { return A * std::sin(map->t_of_u(u)); };
    p.z = [map, C](double u) { return C * std::cos(map->t_of_u(u)); };
    p.rho_p = [map, A, w_of](double u) {
        double t = map->t_of_u(u);
        return A * std::cos(t) / w_of(t);
    };
    p.z_p = [map, C, w_of](double u) {
        double t = map->t_of_u(u);
        return -C * std::sin(t) / w_of(t);
    };
    p.kappa_mu0 = [map, A, C, w_of](double u) {
        double w = w_of(map->t_of_u(u));
        return -A * C / (w * w * w);
    };
    p.kappa_pi0 = [map, A, C, w_of](double u) {
        return -C / (A * w_of(map->t_of_u(u)));
    };
    // w' = (C^2 - A^2) sin t cos t / w
    p.kappa_mu0_p = [map, A, C, w_of](double u) {
        double t = map->t_of_u(u), w = w_of(t);
        double wp = (C * C - A * A) * std::sin(t) * std::cos(t) / w;
        return 3.0 * A * C * wp / std::pow(w, 5);
    };
    p.kappa_pi0_p = [map, A, C, w_of](double u) {
        double t = map->t_of_u(u), w = w_of(t);
        double wp = (C * C - A * A) * std::sin(t) * std::cos(t) / w;
        return (C / A) * wp / (w * w * w);
    };
    return p;
}

ProfileCurve make_custom(const std::vector<std::array<double, 2>>& samples, int n_nodes) {
    if (samples.size() < 4) throw InvalidGeometry("geometry: custom profile needs >= 4 samples");
    int ns = (int)samples.size();
    std::vector<double> t(ns), rr(ns), zz(ns);
    double scale = 0;
    for (int i = 0; i < ns; ++i) {
        rr[i] = samples[i][0];
        zz[i] = samples[i][1];
        scale = std::max({scale, std::abs(rr[i]), std::abs(zz[i])});
        if (i > 0) {
            double d = std::hypot(rr[i] - rr[i - 1], zz[i] - zz[i - 1]);
            if (!(d > 0)) throw InvalidGeometry("geometry: custom profile has duplicate samples");
            t[i] = t[i - 1] + d;
        }
    }
    bool pole_lo = std::abs(rr.front()) <= 1e-9 * scale;
    bool pole_hi = std::abs(rr.back()) <= 1e-9 * scale;
    if (!pole_lo || !pole_hi)
        throw InvalidGeometry("geometry: custom profile must run pole to pole (rho = 0 at ends)");

    auto sr = std::make_shared<CubicSpline>();
    auto sz = std::make_shared<CubicSpline>();
    sr->build(t, rr);
    sz->build(t, zz);
    auto speed = [sr, sz](double tt) {
        return std::hypot(sr->eval(tt, 1), sz->eval(tt, 1));
    };
    auto map = std::make_shared<ArclengthMap>();
    map->build(0.0, t.back(), 4096, speed);

    ProfileCurve p;
    p.kind = "custom";
    p.topology = Topology::IntervalWithPoles;
    p.length = map->length();
    p.arclength_nodes = uniform_nodes(p.length, std::max(n_nodes, 16));
    p.rho = [map, sr](double u) { return sr->eval(map->t_of_u(u)); };
    p.z = [map, sz](double u) { return sz->eval(map->t_of_u(u)); };
    p.rho_p = [map, sr, sz](double u) {
        double tt = map->t_of_u(u);
        return sr->eval(tt, 1) / std::hypot(sr->eval(tt, 1), sz->eval(tt, 1));
    };
    p.z_p = [map, sr, sz](double u) {
        double tt = map->t_of_u(u);
        return sz->eval(tt, 1) / std::hypot(sr->eval(tt, 1), sz->eval(tt, 1));
    };
    auto kmu = [map, sr, sz](double u) {
        double tt = map->t_of_u(u);
        double rp = sr->eval(tt, 1), zp = sz->eval(tt, 1);
        double rpp = sr->eval(tt, 2), zpp = sz->eval(tt, 2);
        double w = std::hypot(rp, zp);
        return (rp * zpp - rpp * zp) / (w * w * w);
    };
    double L = p.length;
    auto kpi = [map, sr, sz, kmu, L](double u) {
        double tt = map->t_of_u(u);
        double rho = sr->eval(tt);
        if (std::abs(rho) < 1e-3) return kmu(std::clamp(u, 1e-3 * L, (1.0 - 1e-3) * L));
        double rp = sr->eval(tt, 1), zp = sz->eval(tt, 1);
        return sz->eval(tt, 1) / (rho * std::hypot(rp, zp));
    };
    p.kappa_mu0 = kmu;
    p.kappa_pi0 = kpi;
    double hfd = 1e-5 * p.length;
    p.kappa_mu0_p = [kmu, hfd, L](double u) {
        double ul = std::max(u - hfd, 0.0), ur = std::min(u + hfd, L);
        return (kmu(ur) - kmu(ul)) / (ur - ul);
    };
    p.kappa_pi0_p = [kpi, hfd, L](double u) {
        double ul = std::max(u - hfd, 0.0), ur = std::min(u + hfd, L);
        return (kpi(ur) - kpi(ul)) / (ur - ul);
    };
    return p;
}

ProfileCurve build_profile(const std::string& kind, const std::vector<double>& params, int n_nodes,
                           SpinStructure spin,
                           const std::vector<std::array<double, 2>>& custom_samples) {
    if (kind == "sphere") {
        if (params.size() != 1) throw InvalidGeometry("geometry: sphere takes one parameter");
        return make_sphere(params[0], n_nodes);
    }
    if (kind == "spheroid") {
        if (params.size() != 2) throw InvalidGeometry("geometry: spheroid takes two parameters");
        return make_spheroid(params[0], params[1], n_nodes);
    }
    if (kind == "torus") {
        if (params.size() != 2) throw InvalidGeometry("geometry: torus takes two parameters");
        return make_torus(params[0], params[1], n_nodes, spin);
    }
    if (kind == "custom") return make_custom(custom_samples, n_nodes);
    throw InvalidGeometry("geometry: unknown kind '" + kind + "'");
}

OffsetGeometry make_offset_geometry(ProfileCurve profile, int normal_orientation) {
    if (normal_orientation != 1 && normal_orientation != -1)
        throw InvalidGeometry("geometry: normal_orientation must be +1 or -1");
    OffsetGeometry g;
    g.profile = std::move(profile);
    g.normal_orientation = normal_orientation;
    double maxk = 0;
    const auto& nodes = g.profile.arclength_nodes;
    std::vector<double> scan = nodes;
    if (scan.size() < 1024) {
        scan.resize(2048);
        for (size_t i = 0; i < scan.size(); ++i)
            scan[i] = g.profile.length * (double)i / (scan.size() - 1);
    }
    for (double u : scan)
        maxk = std::max({maxk, std::abs(g.profile.kappa_mu0(u)), std::abs(g.profile.kappa_pi0(u))});
    g.epsilon0 = maxk > 0 ? 1.0 / maxk : std::numeric_limits<double>::infinity();
    return g;
}

void OffsetGeometry::require_offset(double s) const {
    double bound = 0.9 * epsilon0;
    if (std::abs(s) > bound * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "offset s=" << s << " exceeds 0.9*focal bound " << bound;
        throw FocalViolation(s, os.str());
    }
}

double OffsetGeometry::lambda(double u, double s) const {
    require_offset(s);
    return 1.0 / ((1.0 - s * kappa_mu(u)) * (1.0 - s * kappa_pi(u)));
}

double OffsetGeometry::trace_II(double u, double s) const {
    require_offset(s);
    double km = kappa_mu(u), kp = kappa_pi(u);
    return km / (1.0 - s * km) + kp / (1.0 - s * kp);
}

double OffsetGeometry::a_field(double u, double s) const {
    require_offset(s);
    double km = kappa_mu(u), kp = kappa_pi(u);
    double gl = kappa_mu_p(u) / (1.0 - s * km) + kappa_pi_p(u) / (1.0 - s * kp);
    return s * gl / (2.0 * a(u, s));
}

double OffsetGeometry::curvature_field(double u, double s) const {
    double af = a_field(u, s);
    double tr = trace_II(u, s);
    return -af * af - 0.25 * tr * tr;
}

Eigen::Vector3d OffsetGeometry::chart(double u, double phi, double s) const {
    require_offset(s);
    double nr = normal_orientation * (-profile.z_p(u));
    double nz = normal_orientation * profile.rho_p(u);
    double rs = profile.rho(u) + s * nr;
    double zs = profile.z(u) + s * nz;
    return {rs * std::cos(phi), rs * std::sin(phi), zs};
}

Frame OffsetGeometry::frame(double u, double phi) const {
    double rp = profile.rho_p(u), zp = profile.z_p(u);
    double nr = normal_orientation * (-zp), nz = normal_orientation * rp;
    Frame f;
    f.e_u = {rp * std::cos(phi), rp * std::sin(phi), zp};
    f.e_phi = {-std::sin(phi), std::cos(phi), 0.0};
    f.nu = {nr * std::cos(phi), nr * std::sin(phi), nz};
    return f;
}

std::pair<double, double> principal_curvatures(const OffsetGeometry& g, double u) {
    if (u < -1e-12 || u > g.profile.length * (1.0 + 1e-12))
        throw DomainError("geometry: u outside [0, L]");
    return {g.kappa_mu(u), g.kappa_pi(u)};
}

double focal_bound(const OffsetGeometry& g) { return g.epsilon0; }

double lambda(const OffsetGeometry& g, double u, double s) { return g.lambda(u, s); }

double trace_II(const OffsetGeometry& g, double u, double s) { return g.trace_II(u, s); }

std::pair<Eigen::Vector3d, Frame> fermi_chart(const OffsetGeometry& g, double u, double phi,
                                              double s) {
    return {g.chart(u, phi, s), g.frame(u, phi)};
}

}  // namespace codim1
