#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "codim1/operators.hpp"
#include "codim1/spectral.hpp"

using namespace codim1;

namespace {

OperatorMatrix from_dense(const Eigen::MatrixXcd& A, int bandwidth = -1) {
    OperatorMatrix M;
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            if (A(i, j) != cplx(0, 0)) trips.emplace_back(i, j, A(i, j));
    M.entries.resize(A.rows(), A.cols());
    M.entries.setFromTriplets(trips.begin(), trips.end());
    M.bandwidth = bandwidth;
    M.basis = "synthetic";
    M.weight = "flat";
    return M;
}

GradingMatrix alt_grading(int n) {
    GradingMatrix G;
    G.label = GradingLabel::Sigma3;
    G.diag.resize(n);
    for (int i = 0; i < n; ++i) G.diag[i] = (i % 2 == 0) ? 1.0 : -1.0;
    return G;
}

}  // namespace

TEST_CASE("two by two diagonal") {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2, 2);
    A(0, 0) = 3.0;
    A(1, 1) = -2.0;
    auto S = eig_symmetric(from_dense(A));
    CHECK(S.eigenvalues[0] == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(S.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("non-hermitian input is refused") {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2, 2);
    A(0, 1) = cplx(0.0, 1.0);
    A(1, 0) = cplx(0.0, 1.0);  // adjoint would need -i
    CHECK_THROWS_AS(eig_symmetric(from_dense(A)), SolverError);
}

TEST_CASE("banded and dense paths agree on the mode operator") {
    auto g = make_offset_geometry(make_sphere(1.0));
    Grid1D gu(128, 0.0, g.profile.length);
    auto D = assemble_mode_dirac(g, 0.5, 0.0, gu);
    REQUIRE(D.bandwidth == 3);
    OperatorMatrix Dd = D;
    Dd.bandwidth = -1;
    EigOptions opt;
    opt.vectors = true;
    auto Sb = eig_symmetric(D, opt);
    auto Sd = eig_symmetric(Dd, opt);
    CHECK(Sb.grid_info.find("zhbevd") != std::string::npos);
    CHECK(Sd.grid_info.find("zheevd") != std::string::npos);
    double worst = 0;
    for (size_t i = 0; i < Sb.eigenvalues.size(); ++i)
        worst = std::max(worst, std::abs(Sb.eigenvalues[i] - Sd.eigenvalues[i]));
    CHECK(worst <= 1e-12 * Sb.op_norm_est);
    CHECK(Sb.residual_bound <= 1e-10 * Sb.op_norm_est);
    CHECK(Sd.residual_bound <= 1e-10 * Sb.op_norm_est);
}

TEST_CASE("declared bandwidth is checked against the entries") {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(6, 6);
    A(0, 3) = 1.0;
    A(3, 0) = 1.0;
    auto M = from_dense(A, 1);
    CHECK_THROWS_AS(eig_symmetric(M), SolverError);
}

TEST_CASE("shift-invert path matches the banded path above the dense limit") {
    double eps = 0.25;
    int n_s = 4600;  // dim 9199 exceeds the dense limit
    Grid1D gs(n_s, -eps, eps);
    auto T = assemble_normal_T(eps, gs);
    EigOptions li;
    li.k = 6;
    li.vectors = true;
    auto Sl = eig_symmetric(T, li);
    CHECK(Sl.grid_info.find("lanczos") != std::string::npos);
    CHECK(Sl.truncated_warning);
    CHECK(Sl.eigenvalues.size() == 6);
    CHECK(Sl.residual_bound <= 1e-8 * Sl.op_norm_est);

    EigOptions bn;  // full banded solve without vectors for reference
    auto Sb = eig_symmetric(T, bn);
    CHECK(Sb.grid_info.find("zhbevd") != std::string::npos);
    std::vector<double> ref = Sb.eigenvalues;
    std::sort(ref.begin(), ref.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    ref.resize(6);
    std::sort(ref.begin(), ref.end());
    double scale = std::abs(ref.back()) + std::abs(ref.front());
    for (int i = 0; i < 6; ++i) CHECK(std::abs(Sl.eigenvalues[i] - ref[i]) <= 1e-8 * scale);
}

TEST_CASE("dimension above the dense limit requires a count") {
    double eps = 0.25;
    Grid1D gs(4600, -eps, eps);
    auto T = assemble_normal_T(eps, gs);
    EigOptions opt;
    opt.vectors = true;  // banded fallback requires no vectors; k missing
    CHECK_THROWS_AS(eig_symmetric(T, opt), SolverError);
}

TEST_CASE("requested count truncates to the smallest magnitudes") {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(5, 5);
    double vals[5] = {-4.0, -0.3, 0.1, 2.0, 7.0};
    for (int i = 0; i < 5; ++i) A(i, i) = vals[i];
    auto M = from_dense(A);
    EigOptions opt;
    opt.k = 2;
    auto S = eig_symmetric(M, opt);
    CHECK(S.truncated_warning);
    REQUIRE(S.eigenvalues.size() == 2);
    CHECK(S.eigenvalues[0] == doctest::Approx(-0.3));
    CHECK(S.eigenvalues[1] == doctest::Approx(0.1));
}

TEST_CASE("graded index on synthetic spectra") {
    // clear kernel: one tiny eigenvalue aligned with the + sector
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(4, 4);
    A(0, 0) = 1e-13;
    A(1, 1) = 0.7;
    A(2, 2) = -0.7;
    A(3, 3) = 1.1;
    auto M = from_dense(A);
    GradingMatrix G = alt_grading(4);
    G.diag << 1.0, -1.0, 1.0, -1.0;
    EigOptions opt;
    opt.vectors = true;
    auto S = eig_symmetric(M, opt);
    auto idx = graded_index(M, G, S, 0.7);
    CHECK(idx.index == 1);
    CHECK(idx.kernel_dim_plus == 1);
    CHECK(idx.kernel_dim_minus == 0);
    CHECK_FALSE(idx.indeterminate);
    CHECK(idx.kernel_threshold > 1e-13);
    CHECK(idx.kernel_threshold < 0.7);

    // empty candidate window: index 0 with infinite gap
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(2, 2);
    B(0, 0) = 1.0;
    B(1, 1) = -1.0;
    auto MB = from_dense(B);
    auto SB = eig_symmetric(MB, opt);
    auto idxB = graded_index(MB, alt_grading(2), SB, 1.9);
    CHECK(idxB.index == 0);
    CHECK(std::isinf(idxB.gap_ratio));
    CHECK_FALSE(idxB.indeterminate);

    // gapless ladder: flagged indeterminate
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(4, 4);
    C(0, 0) = 0.1;
    C(1, 1) = 0.2;
    C(2, 2) = 0.4;
    C(3, 3) = 0.8;
    auto MC = from_dense(C);
    auto SC = eig_symmetric(MC, opt);
    auto idxC = graded_index(MC, alt_grading(4), SC, 1.6);
    CHECK(idxC.indeterminate);
    CHECK(idxC.flag_reason.find("gap ratio") != std::string::npos);

    // kernel present but eigenvectors absent
    auto SnoV = eig_symmetric(M);
    auto idxNoV = graded_index(M, G, SnoV, 0.7);
    CHECK(idxNoV.indeterminate);
    CHECK(idxNoV.flag_reason == "eigenvectors unavailable for the grading split");
}

TEST_CASE("graded index flags misaligned kernel vectors") {
    // single near-kernel vector (1,-1)/sqrt(2) straddles the grading diag(1,-1)
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(4, 4);
    A(0, 0) = 0.5;
    A(1, 1) = 0.5;
    A(0, 1) = 0.5 - 1e-13;
    A(1, 0) = 0.5 - 1e-13;
    A(2, 2) = 1.3;
    A(3, 3) = -1.3;
    auto M = from_dense(A);
    EigOptions opt;
    opt.vectors = true;
    auto S = eig_symmetric(M, opt);
    auto idx = graded_index(M, alt_grading(4), S, 0.9);
    CHECK(idx.indeterminate);
    CHECK(idx.flag_reason == "kernel candidates are not grading-aligned");

    // a straddling PAIR spans a grading-invariant plane and splits cleanly
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(4, 4);
    B(0, 1) = 1e-12;
    B(1, 0) = 1e-12;
    B(2, 2) = 1.0;
    B(3, 3) = -1.0;
    auto MB = from_dense(B);
    auto SB = eig_symmetric(MB, opt);
    auto idxB = graded_index(MB, alt_grading(4), SB, 1.0);
    CHECK_FALSE(idxB.indeterminate);
    CHECK(idxB.index == 0);
    CHECK(idxB.kernel_dim_plus == 1);
    CHECK(idxB.kernel_dim_minus == 1);
}

TEST_CASE("match_spectra is zero on identical spectra and positional otherwise") {
    auto g = make_offset_geometry(make_sphere(1.0));
    Grid1D gu(64, 0.0, g.profile.length);
    auto S = eig_symmetric(assemble_mode_dirac(g, 0.5, 0.0, gu));
    auto d = match_spectra(S, S, 8);
    REQUIRE(d.size() == 8);
    for (auto& m : d) CHECK(m.delta == 0.0);

    SpectrumResult A, B;
    A.eigenvalues = {-2.0, -0.5, 0.5, 2.0};
    B.eigenvalues = {-2.0, -0.4, 0.6, 2.0};
    bool trunc = false;
    auto d2 = match_spectra(A, B, 2, &trunc);
    REQUIRE(d2.size() == 2);
    CHECK(std::abs(d2[0].delta) == doctest::Approx(0.1));
    CHECK(std::abs(d2[1].delta) == doctest::Approx(0.1));
}

TEST_CASE("anticommutator probe on exactly anticommuting blocks") {
    // D1 = sigma_1 within each node, D2 = grading-weighted identity: {s1, s3} = 0
    int n_u = 3, n_s = 4;
    int slots = 2 * n_s - 1, nb = 2 * n_u;
    Eigen::Index dim = (Eigen::Index)slots * nb;
    Eigen::MatrixXcd D1 = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd D2 = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < slots; ++k)
        for (int j = 0; j < n_u; ++j) {
            Eigen::Index b = (Eigen::Index)k * nb + 2 * j;
            D1(b, b + 1) = 1.0;
            D1(b + 1, b) = 1.0;
            double w = (k + 1) * 0.3;
            D2(b, b) = w;
            D2(b + 1, b + 1) = -w;
        }
    auto M1 = from_dense(D1);
    auto M2 = from_dense(D2);
    M1.basis = M2.basis = "slot-major(u-interleaved)";
    M1.eps = M2.eps = 0.25;
    auto st = anticommutator_probe(M1, M2, n_u, slots, 20, 7);
    CHECK(st.ratio1_max <= 1e-28);
    CHECK(st.ratio2_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.trials == 20);

    CHECK_THROWS_AS(anticommutator_probe(M1, M2, n_u + 1, slots, 5, 7), DomainError);
}

TEST_CASE("probe ratios on the sphere product operator stay near one") {
    auto g = make_offset_geometry(make_sphere(1.0));
    double eps = 0.2;
    int n_u = 16, n_s = 8;
    Grid1D gu(n_u, 0.0, g.profile.length), gs(n_s, -eps, eps);
    auto [H, G] = assemble_product(g, 0.5, eps, gu, gs);
    int slots = normal_slots(n_s), nb = 2 * n_u;

    // split H into the leaf part and the normal part
    auto T = assemble_normal_T(eps, gs);
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int c = 0; c < T.entries.outerSize(); ++c)
        for (SpMat::InnerIterator it(T.entries, c); it; ++it)
            for (int a = 0; a < nb; ++a)
                trips.emplace_back(it.row() * nb + a, it.col() * nb + a,
                                   it.value() * (a % 2 == 0 ? 1.0 : -1.0));
    OperatorMatrix D2;
    D2.entries.resize(H.dim(), H.dim());
    D2.entries.setFromTriplets(trips.begin(), trips.end());
    D2.basis = H.basis;
    D2.eps = eps;
    OperatorMatrix D1 = H;
    D1.entries = (H.entries - D2.entries).pruned();

    auto st = anticommutator_probe(D1, D2, n_u, slots, 25, 1234);
    CHECK(std::isfinite(st.ratio1_max));
    CHECK(st.ratio2_max >= 1.0 - 1e-9);
    CHECK(st.ratio2_max <= 1.5);
}
