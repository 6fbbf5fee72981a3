#include "codim1/operators.hpp"

#include <cmath>
#include <vector>

#include "codim1/rng.hpp"

namespace codim1 {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kWilsonC = 3.0;

using Trip = Eigen::Triplet<cplx>;
const cplx I{0.0, 1.0};

void check_mode(double m, const ProfileCurve& p) {
    double two_m = 2.0 * m;
    double r = std::round(two_m);
    if (std::abs(two_m - r) > 1e-9) throw InvalidMode("mode: 2m must be an integer");
    long k = (long)r;
    bool half = (k % 2 != 0);
    bool want_half = (p.topology == Topology::IntervalWithPoles) ||
                     (p.spin == SpinStructure::Antiperiodic);
    if (want_half && !half)
        throw InvalidMode("mode: m must be a half-integer for this spin structure");
    if (!want_half && half)
        throw InvalidMode("mode: m must be an integer for the periodic spin structure");
}

SpMat from_triplets(Eigen::Index n, std::vector<Trip>& trips) {
    SpMat M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());
    M.makeCompressed();
    return M;
}

}  // namespace

double hermiticity_defect(const OperatorMatrix& M) {
    SpMat d = SpMat(M.entries.adjoint()) - M.entries;
    double worst = 0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SpMat::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
}

OperatorMatrix assemble_mode_dirac(const OffsetGeometry& g, double m, double s,
                                   const Grid1D& grid_u) {
    check_mode(m, g.profile);
    g.require_offset(s);
    if (std::abs(grid_u.lo) > 1e-12 || std::abs(grid_u.hi - g.profile.length) > 1e-12 * g.profile.length)
        throw InvalidGrid("grid: tangential grid must span [0, L]");

    int n = grid_u.n;
    double h = grid_u.h();
    bool circle = (g.profile.topology == Topology::Circle);
    double tau = (g.profile.spin == SpinStructure::Antiperiodic) ? -1.0 : 1.0;
    double sgn = (m >= 0) ? 1.0 : -1.0;

    std::vector<double> B(n), Minv(n);
    for (int j = 0; j < n; ++j) {
        double u = grid_u.node(j);
        B[j] = 1.0 / g.a(u, s);
        Minv[j] = m / g.r(u, s);
    }

    // upper block C = -i(K + M + Y), lower block Cq = -i(K - M - Y);
    // K: centered antisymmetric first difference with coefficient averaging,
    // Y: sign-matched mass-channel stabilization c*h^2*(B(-Lap)+(-Lap)B)/2.
    std::vector<Trip> trips;
    trips.reserve(8 * n);
    auto put = [&](int j, int k, cplx c_val, cplx cq_val) {
        if (c_val != cplx(0, 0)) trips.emplace_back(2 * j, 2 * k + 1, c_val);
        if (cq_val != cplx(0, 0)) trips.emplace_back(2 * j + 1, 2 * k, cq_val);
    };

    for (int j = 0; j < n; ++j) {
        double yd = 2.0 * sgn * kWilsonC * B[j];
        double diag = Minv[j] + yd, diag_q = -Minv[j] - yd;
        if (!circle && j == 0) {
            double kv = -B[0] / (2.0 * h);
            diag += kv * (-sgn);
            diag_q += kv * (+sgn);
        }
        if (!circle && j == n - 1) {
            double kv = B[n - 1] / (2.0 * h);
            diag += kv * (-(-sgn));
            diag_q += kv * (-sgn);
        }
        put(j, j, -I * diag, -I * diag_q);
    }
    for (int j = 0; j + 1 < n; ++j) {
        double ks = (B[j] + B[j + 1]) / (4.0 * h);
        double ys = -sgn * kWilsonC * (B[j] + B[j + 1]) / 2.0;
        put(j, j + 1, -I * (ks + ys), -I * (ks - ys));
        put(j + 1, j, -I * (-ks + ys), -I * (-ks - ys));
    }
    if (circle) {
        double kw = (B[n - 1] + B[0]) / (4.0 * h);
        double yw = -sgn * kWilsonC * tau * (B[n - 1] + B[0]) / 2.0;
        put(n - 1, 0, -I * (tau * kw + yw), -I * (tau * kw - yw));
        put(0, n - 1, -I * (-tau * kw + yw), -I * (-tau * kw - yw));
    }

    OperatorMatrix D;
    D.entries = from_triplets(2 * n, trips);
    D.basis = "u-interleaved";
    D.weight = "half-density";
    D.m = m;
    D.bandwidth = circle ? -1 : 3;
    D.s = s;
    return D;
}

GradingMatrix mode_grading(int n_u) {
    GradingMatrix G;
    G.label = GradingLabel::GammaS;
    G.diag.resize(2 * n_u);
    for (int j = 0; j < n_u; ++j) {
        G.diag[2 * j] = 1.0;
        G.diag[2 * j + 1] = -1.0;
    }
    return G;
}

int normal_slots(int n_s) { return 2 * n_s - 1; }

double normal_slot_position(const Grid1D& grid_s, int slot) {
    if (slot < 0 || slot >= normal_slots(grid_s.n)) throw DomainError("normal grid: bad slot");
    if (slot % 2 == 0) return grid_s.node(slot / 2);
    return grid_s.lo + (slot / 2 + 1) * grid_s.h();
}

OperatorMatrix assemble_normal_T(double eps, const Grid1D& grid_s) {
    if (!(eps > 0)) throw DomainError("normal operator: eps must be positive");
    if (std::abs(grid_s.lo + eps) > 1e-12 * eps || std::abs(grid_s.hi - eps) > 1e-12 * eps)
        throw InvalidGrid("grid: normal grid must span [-eps, eps]");
    int n = grid_s.n;
    // assembled on the unit interval and scaled by 1/eps, so the rescaling
    // T_eps = (1/eps) T_1 holds exactly entry by entry
    double h1 = 2.0 / n;
    double scale = 1.0 / eps;
    std::vector<Trip> trips;
    trips.reserve(4 * n);
    for (int j = 0; j + 1 < n; ++j) {
        double sigma = -1.0 + (j + 1) * h1;  // interior dual node
        double fj = -(kPi / 2.0) * std::tan(kPi * sigma / 2.0);
        cplx bd_l = I * (-1.0 / h1 - fj / 2.0) * scale;  // couples dual j to primal j
        cplx bd_r = I * (1.0 / h1 - fj / 2.0) * scale;   // couples dual j to primal j+1
        int q = 2 * j + 1, pl = 2 * j, pr = 2 * j + 2;
        trips.emplace_back(q, pl, bd_l);
        trips.emplace_back(pl, q, std::conj(bd_l));
        trips.emplace_back(q, pr, bd_r);
        trips.emplace_back(pr, q, std::conj(bd_r));
    }
    OperatorMatrix T;
    T.entries = from_triplets(2 * n - 1, trips);
    T.basis = "s-two-grid-interleaved";
    T.weight = "flat";
    T.bandwidth = 1;
    T.eps = eps;
    return T;
}

GradingMatrix normal_grading(int n_s) {
    GradingMatrix G;
    G.label = GradingLabel::Sigma3;
    G.diag.resize(normal_slots(n_s));
    for (int k = 0; k < G.diag.size(); ++k) G.diag[k] = (k % 2 == 0) ? 1.0 : -1.0;
    return G;
}

OperatorMatrix assemble_A_term(const OffsetGeometry& g, double m, const Grid1D& grid_u,
                               const Grid1D& grid_s) {
    check_mode(m, g.profile);
    int nb = 2 * grid_u.n;
    int slots = normal_slots(grid_s.n);
    std::vector<Trip> trips;
    trips.reserve((size_t)slots * grid_u.n * 2);
    for (int k = 0; k < slots; ++k) {
        double s = normal_slot_position(grid_s, k);
        for (int j = 0; j < grid_u.n; ++j) {
            double af = g.a_field(grid_u.node(j), s);
            if (af == 0.0) continue;
            int base = k * nb + 2 * j;
            trips.emplace_back(base, base + 1, -I * af);
            trips.emplace_back(base + 1, base, I * af);
        }
    }
    OperatorMatrix A;
    A.entries = from_triplets((Eigen::Index)slots * nb, trips);
    A.basis = "slot-major(u-interleaved)";
    A.weight = "half-density";
    A.m = m;
    A.bandwidth = 1;
    return A;
}

namespace {

std::pair<OperatorMatrix, GradingMatrix> assemble_family(const OffsetGeometry& g, double m,
                                                         double eps, double t,
                                                         const Grid1D& grid_u, int n_s,
                                                         bool rescaled_form) {
    Grid1D grid_s(n_s, -eps, eps);
    Grid1D unit_s(n_s, -1.0, 1.0);
    OperatorMatrix T = assemble_normal_T(eps, grid_s);
    int slots = normal_slots(n_s);
    int nb = 2 * grid_u.n;
    Eigen::Index dim = (Eigen::Index)slots * nb;

    std::vector<Trip> trips;
    trips.reserve((size_t)slots * 10 * grid_u.n);
    for (int k = 0; k < slots; ++k) {
        double sk = rescaled_form ? eps * normal_slot_position(unit_s, k)
                                  : normal_slot_position(grid_s, k);
        OperatorMatrix D = assemble_mode_dirac(g, m, sk * t, grid_u);
        Eigen::Index off = (Eigen::Index)k * nb;
        for (int c = 0; c < D.entries.outerSize(); ++c)
            for (SpMat::InnerIterator it(D.entries, c); it; ++it)
                trips.emplace_back(off + it.row(), off + it.col(), it.value());
    }
    for (int c = 0; c < T.entries.outerSize(); ++c)
        for (SpMat::InnerIterator it(T.entries, c); it; ++it) {
            Eigen::Index ro = (Eigen::Index)it.row() * nb, co = (Eigen::Index)it.col() * nb;
            for (int a = 0; a < nb; ++a) {
                double gamma = (a % 2 == 0) ? 1.0 : -1.0;
                trips.emplace_back(ro + a, co + a, it.value() * gamma);
            }
        }

    OperatorMatrix H;
    H.entries = from_triplets(dim, trips);
    H.basis = "slot-major(u-interleaved)";
    H.weight = "half-density";
    H.m = m;
    H.bandwidth = nb;
    H.eps = eps;
    H.t = t;

    GradingMatrix G;
    G.label = GradingLabel::Product;
    G.diag.resize(dim);
    for (int k = 0; k < slots; ++k) {
        double gs = (k % 2 == 0) ? 1.0 : -1.0;
        for (int a = 0; a < nb; ++a) G.diag[(Eigen::Index)k * nb + a] = gs * ((a % 2 == 0) ? 1.0 : -1.0);
    }
    return {std::move(H), std::move(G)};
}

}  // namespace

std::pair<OperatorMatrix, GradingMatrix> assemble_homotopy(const OffsetGeometry& g, double m,
                                                           double eps, double t,
                                                           const Grid1D& grid_u,
                                                           const Grid1D& grid_s) {
    if (t < 0.0 || t > 1.0) throw DomainError("homotopy: t must lie in [0, 1]");
    if (std::abs(grid_s.lo + eps) > 1e-12 * eps || std::abs(grid_s.hi - eps) > 1e-12 * eps)
        throw InvalidGrid("grid: normal grid must span [-eps, eps]");
    return assemble_family(g, m, eps, t, grid_u, grid_s.n, false);
}

std::pair<OperatorMatrix, GradingMatrix> assemble_product(const OffsetGeometry& g, double m,
                                                          double eps, const Grid1D& grid_u,
                                                          const Grid1D& grid_s) {
    return assemble_homotopy(g, m, eps, 1.0, grid_u, grid_s);
}

RescaleMap rescale_grid(double eps) {
    if (!(eps > 0)) throw DomainError("rescale: eps must be positive");
    return RescaleMap{eps};
}

std::pair<OperatorMatrix, GradingMatrix> assemble_product_rescaled(const OffsetGeometry& g,
                                                                   double m, double eps,
                                                                   const Grid1D& grid_u,
                                                                   int n_s) {
    return assemble_family(g, m, eps, 1.0, grid_u, n_s, true);
}

namespace {

using Mat = Eigen::MatrixXcd;

Mat kron2(const Mat& A, const Mat& B) {
    Mat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

TwistReport twist_check(const Mat& D, const Mat& f, const Mat& P, const Eigen::VectorXd& gam_diag,
                        double tol) {
    Eigen::Index N = D.rows();
    Mat gam = gam_diag.cast<cplx>().asDiagonal();
    Mat s1(2, 2), s2(2, 2), s3(2, 2), id2 = Mat::Identity(2, 2);
    s1 << 0, 1, 1, 0;
    s2 << 0, cplx(0, -1), cplx(0, 1), 0;
    s3 << 1, 0, 0, -1;

    Mat Ap(2, 2), Am(2, 2);
    Ap << 1, 0, 0, cplx(0, -1);
    Am = std::exp(cplx(0, kPi / 4)) / std::sqrt(2.0) * (s1 + s2);
    Mat Pp = (Mat::Identity(N, N) + gam) / 2.0, Pm = (Mat::Identity(N, N) - gam) / 2.0;
    Mat U = kron2(Pp, Ap) + kron2(Pm, Am);

    TwistReport rep;
    rep.unitarity = (U * U.adjoint() - Mat::Identity(2 * N, 2 * N)).cwiseAbs().maxCoeff();
    Mat lhs = kron2(f, s1) + cplx(0, 1) * kron2(gam * (D + P), s2);
    Mat rhs = kron2(D, id2) + cplx(0, 1) * kron2(gam * P, s1) - kron2(gam * f, s2);
    rep.identity = (U * lhs * U.adjoint() - rhs).cwiseAbs().maxCoeff();
    rep.grading =
        (U * kron2(Mat::Identity(N, N), s3) * U.adjoint() - kron2(gam, s3)).cwiseAbs().maxCoeff();
    double herm = (lhs - lhs.adjoint()).cwiseAbs().maxCoeff();
    rep.pass = rep.unitarity <= tol && rep.identity <= tol && rep.grading <= tol && herm <= tol;
    return rep;
}

}  // namespace

TwistReport verify_twist_unitary(unsigned seed, int n_placeholder, double tol) {
    int N = n_placeholder;
    if (N < 2 || N % 2 != 0) throw DomainError("twist: placeholder dimension must be even");
    Rng rng(seed);
    Eigen::VectorXd gd(N);
    for (int i = 0; i < N; ++i) gd[i] = (i < N / 2) ? 1.0 : -1.0;
    auto rand_mat = [&]() {
        Mat A(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) A(i, j) = rng.cnormal();
        return A;
    };
    Mat gam = gd.cast<cplx>().asDiagonal();
    Mat D = rand_mat();
    D = (D + D.adjoint()).eval() / 2.0;
    D = ((D - gam * D * gam) / 2.0).eval();  // grading-odd hermitian
    Mat f = rand_mat();
    f = (f + f.adjoint()).eval() / 2.0;
    f = ((f + gam * f * gam) / 2.0).eval();  // grading-even hermitian
    Mat P = rand_mat();
    P = (P - P.adjoint()).eval() / 2.0;
    P = ((P + gam * P * gam) / 2.0).eval();  // grading-even anti-hermitian
    return twist_check(D, f, P, gd, tol);
}

TwistReport verify_twist_unitary_trivial(double tol) {
    int N = 2;
    Eigen::VectorXd gd(N);
    gd << 1.0, -1.0;
    Mat D = Mat::Zero(N, N), f = Mat::Identity(N, N), P = Mat::Zero(N, N);
    return twist_check(D, f, P, gd, tol);
}

}  // namespace codim1
