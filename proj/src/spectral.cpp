#include "codim1/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include <Eigen/SparseLU>

#include "codim1/rng.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace codim1 {

namespace {

// single-threaded BLAS so repeated runs reduce in the same order
struct ThreadPin {
    ThreadPin() {
        setenv("OPENBLAS_NUM_THREADS", "1", 1);
        setenv("OMP_NUM_THREADS", "1", 1);
        if (openblas_set_num_threads) openblas_set_num_threads(1);
    }
};
const ThreadPin thread_pin{};

constexpr Eigen::Index kDenseLimit = 8192;

double gershgorin_norm(const SpMat& A) {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(A.rows());
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it) sums[it.row()] += std::abs(it.value());
    return A.rows() ? sums.maxCoeff() : 0.0;
}

// keep the k entries of smallest magnitude, preserving ascending value order
void truncate_smallest(SpectrumResult& R, int k) {
    if (k <= 0 || (Eigen::Index)R.eigenvalues.size() <= k) return;
    std::vector<int> idx(R.eigenvalues.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(R.eigenvalues[a]) < std::abs(R.eigenvalues[b]);
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<double> ev(k);
    Eigen::MatrixXcd vecs;
    if (R.vectors.size()) vecs.resize(R.vectors.rows(), k);
    for (int i = 0; i < k; ++i) {
        ev[i] = R.eigenvalues[idx[i]];
        if (R.vectors.size()) vecs.col(i) = R.vectors.col(idx[i]);
    }
    R.eigenvalues = std::move(ev);
    R.vectors = std::move(vecs);
    R.truncated_warning = true;
}

double pair_residuals(const SpMat& A, SpectrumResult& R) {
    double worst = 0;
    for (Eigen::Index i = 0; i < R.vectors.cols(); ++i) {
        Eigen::VectorXcd v = R.vectors.col(i);
        worst = std::max(worst, (A * v - R.eigenvalues[i] * v).norm() / std::max(v.norm(), 1e-300));
    }
    return worst;
}

SpectrumResult dense_path(const OperatorMatrix& M, const EigOptions& opt, double norm_est) {
    Eigen::Index n = M.dim();
    Eigen::MatrixXcd A(M.entries);
    std::vector<double> w(n);
    char jobz = opt.vectors ? 'V' : 'N';
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, jobz, 'L', (lapack_int)n, A.data(),
                                     (lapack_int)n, w.data());
    if (info != 0) throw SolverError("solver: zheevd failed with info " + std::to_string(info));
    SpectrumResult R;
    R.eigenvalues = std::move(w);
    R.op_norm_est = norm_est;
    R.mode = M.m;
    if (opt.vectors) R.vectors = std::move(A);
    std::ostringstream os;
    os << "zheevd dense n=" << n;
    R.grid_info = os.str();
    truncate_smallest(R, opt.k);
    R.residual_bound = opt.vectors ? pair_residuals(M.entries, R)
                                   : 10.0 * (double)n * 2.22e-16 * norm_est;
    return R;
}

SpectrumResult banded_path(const OperatorMatrix& M, const EigOptions& opt, double norm_est) {
    Eigen::Index n = M.dim();
    int kd = M.bandwidth;
    int ldab = kd + 1;
    std::vector<cplx> ab((size_t)ldab * n, cplx(0, 0));
    for (int c = 0; c < M.entries.outerSize(); ++c)
        for (SpMat::InnerIterator it(M.entries, c); it; ++it) {
            Eigen::Index i = it.row(), j = it.col();
            if (i > j) continue;  // upper triangle carries the Hermitian data
            if (j - i > kd) throw SolverError("solver: entry outside declared bandwidth");
            ab[(size_t)j * ldab + (kd + i - j)] = it.value();
        }
    std::vector<double> w(n);
    char jobz = opt.vectors ? 'V' : 'N';
    Eigen::MatrixXcd z;
    if (opt.vectors) z.resize(n, n);
    lapack_int info =
        LAPACKE_zhbevd(LAPACK_COL_MAJOR, jobz, 'U', (lapack_int)n, kd, ab.data(), ldab, w.data(),
                       opt.vectors ? z.data() : nullptr, (lapack_int)std::max<Eigen::Index>(1, n));
    if (info != 0) throw SolverError("solver: zhbevd failed with info " + std::to_string(info));
    SpectrumResult R;
    R.eigenvalues = std::move(w);
    R.op_norm_est = norm_est;
    R.mode = M.m;
    if (opt.vectors) R.vectors = std::move(z);
    std::ostringstream os;
    os << "zhbevd banded n=" << n << " kd=" << kd;
    R.grid_info = os.str();
    truncate_smallest(R, opt.k);
    R.residual_bound = opt.vectors ? pair_residuals(M.entries, R)
                                   : 10.0 * (double)n * 2.22e-16 * norm_est;
    return R;
}

SpectrumResult lanczos_path(const OperatorMatrix& M, const EigOptions& opt, double norm_est) {
    const SpMat& A = M.entries;
    Eigen::Index n = A.rows();
    int k = opt.k;
    if (k <= 0)
        throw SolverError("solver: dimension above the dense limit requires a requested count k");

    Eigen::SparseLU<SpMat> lu;
    double sigma = 0;
    bool factored = false;
    for (double sh : {0.0, 1e-10 * std::max(1.0, norm_est), 1e-6 * std::max(1.0, norm_est)}) {
        SpMat As = A;
        if (sh != 0.0) {
            SpMat Id(n, n);
            Id.setIdentity();
            As = A - cplx(sh, 0) * Id;
        }
        lu.compute(As);
        if (lu.info() == Eigen::Success) {
            sigma = sh;
            factored = true;
            break;
        }
    }
    if (!factored) throw SolverError("solver: shifted factorization failed");

    int m_max = std::min<Eigen::Index>(n, 240 + 2 * k);
    int m_first = std::min<Eigen::Index>(n, 120 + 2 * k);
    Eigen::MatrixXcd V(n, m_max + 1);
    std::vector<double> alpha, beta;  // beta[j] ties V.col(j) to V.col(j+1)

    Rng rng(opt.seed);
    {
        Eigen::VectorXcd v0(n);
        for (Eigen::Index i = 0; i < n; ++i) v0[i] = rng.cnormal();
        V.col(0) = v0 / v0.norm();
    }

    int m_eff = 0;
    bool breakdown = false;
    auto step = [&](int j) {
        Eigen::VectorXcd w = lu.solve(V.col(j));
        double aj = V.col(j).dot(w).real();
        w -= aj * V.col(j);
        if (j > 0) w -= beta[j - 1] * V.col(j - 1);
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w);
        double bj = w.norm();
        alpha.push_back(aj);
        if (bj < 1e-13) {
            breakdown = true;
            return false;
        }
        beta.push_back(bj);
        V.col(j + 1) = w / bj;
        return true;
    };

    struct Ritz {
        double theta;
        Eigen::VectorXd y;
        double resid;
    };
    auto extract = [&](int m, std::vector<Ritz>& out) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        std::vector<int> idx(m);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
        });
        out.clear();
        double bm = (int)beta.size() >= m ? beta[m - 1] : 0.0;
        for (int i = 0; i < std::min(k, m); ++i) {
            Ritz r;
            r.theta = es.eigenvalues()[idx[i]];
            r.y = es.eigenvectors().col(idx[i]);
            r.resid = std::abs(bm * r.y[m - 1]);
            out.push_back(std::move(r));
        }
    };

    std::vector<Ritz> ritz;
    bool converged = false;
    int j = 0;
    for (int stage_end : {m_first, m_max}) {
        for (; j < stage_end && !breakdown; ++j)
            if (!step(j)) break;
        m_eff = (int)alpha.size();
        extract(m_eff, ritz);
        converged = (int)ritz.size() >= std::min(k, m_eff);
        for (const auto& r : ritz)
            if (r.resid > 1e-10 * std::max(std::abs(r.theta), 1e-300)) converged = false;
        if (breakdown) converged = (int)ritz.size() >= k;  // exact invariant subspace
        if (converged) break;
    }
    if (!converged) throw SolverError("solver: Lanczos did not converge");
    if ((int)ritz.size() < k) throw SolverError("solver: Lanczos subspace too small");

    double theta_max = 0;
    for (const auto& r : ritz) theta_max = std::max(theta_max, std::abs(r.theta));
    std::vector<std::pair<double, Eigen::VectorXcd>> pairs;
    for (const auto& r : ritz) {
        if (std::abs(r.theta) < 1e-14 * theta_max)
            throw SolverError("solver: spurious Ritz value in shift-invert spectrum");
        Eigen::VectorXcd x = V.leftCols(m_eff) * r.y.cast<cplx>();
        x /= x.norm();
        pairs.emplace_back(sigma + 1.0 / r.theta, std::move(x));
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    SpectrumResult R;
    R.op_norm_est = norm_est;
    R.mode = M.m;
    R.truncated_warning = true;
    R.vectors.resize(n, (Eigen::Index)pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        R.eigenvalues.push_back(pairs[i].first);
        R.vectors.col((Eigen::Index)i) = pairs[i].second;
    }
    R.residual_bound = pair_residuals(A, R);
    if (!opt.vectors) R.vectors.resize(0, 0);
    std::ostringstream os;
    os << "lanczos shift-invert n=" << n << " k=" << k << " steps=" << m_eff << " sigma=" << sigma;
    R.grid_info = os.str();
    return R;
}

}  // namespace

SpectrumResult eig_symmetric(const OperatorMatrix& M, const EigOptions& opt) {
    Eigen::Index n = M.dim();
    if (n == 0) throw SolverError("solver: empty matrix");
    double norm_est = gershgorin_norm(M.entries);
    double defect = hermiticity_defect(M);
    if (defect > opt.herm_tol * std::max(1.0, norm_est)) {
        std::ostringstream os;
        os << "solver: matrix is not Hermitian (defect " << defect << ")";
        throw SolverError(os.str());
    }
    if (n <= kDenseLimit) {
        if (M.bandwidth >= 0 && M.bandwidth < n - 1) return banded_path(M, opt, norm_est);
        return dense_path(M, opt, norm_est);
    }
    if (M.bandwidth >= 0 && !opt.vectors && opt.k <= 0) return banded_path(M, opt, norm_est);
    return lanczos_path(M, opt, norm_est);
}

IndexResult graded_index(const OperatorMatrix& M, const GradingMatrix& G,
                         const SpectrumResult& spectrum,
                         std::optional<double> first_nonzero_estimate, double gap_ratio_tol) {
    if (G.diag.size() != M.dim()) throw DomainError("index: grading dimension mismatch");
    IndexResult out;
    double cap = first_nonzero_estimate ? 0.5 * std::abs(*first_nonzero_estimate)
                                        : 0.1 * std::max(spectrum.op_norm_est, 1e-300);
    out.kernel_threshold = cap;

    std::vector<int> cand;
    double sentinel = -1;
    for (size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
        double a = std::abs(spectrum.eigenvalues[i]);
        if (a < cap)
            cand.push_back((int)i);
        else if (sentinel < 0 || a < sentinel)
            sentinel = a;
    }
    bool full_spectrum = (Eigen::Index)spectrum.eigenvalues.size() == M.dim();
    if (sentinel < 0) {
        if (!full_spectrum) {
            out.indeterminate = true;
            out.flag_reason = "kernel window exceeds the computed part of the spectrum";
            return out;
        }
        sentinel = cap;
    }
    if (cand.empty()) {
        out.index = 0;
        out.gap_ratio = std::numeric_limits<double>::infinity();
        return out;
    }

    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
        return std::abs(spectrum.eigenvalues[a]) < std::abs(spectrum.eigenvalues[b]);
    });
    std::vector<double> vals;
    for (int i : cand) vals.push_back(std::abs(spectrum.eigenvalues[i]));
    vals.push_back(sentinel);
    size_t split = 0;
    double best = 0;
    for (size_t i = 0; i + 1 < vals.size(); ++i) {
        double r = vals[i + 1] / std::max(vals[i], 1e-300);
        if (r > best) {
            best = r;
            split = i + 1;
        }
    }
    out.gap_ratio = best;
    std::vector<int> kernel(cand.begin(), cand.begin() + split);
    out.kernel_threshold = std::sqrt(std::max(vals[split - 1], 1e-300) * vals[split]);
    if (best < gap_ratio_tol) {
        out.indeterminate = true;
        std::ostringstream os;
        os << "kernel gap ratio " << best << " below " << gap_ratio_tol;
        out.flag_reason = os.str();
    }

    if (!kernel.empty()) {
        if (spectrum.vectors.cols() != (Eigen::Index)spectrum.eigenvalues.size()) {
            out.indeterminate = true;
            out.flag_reason = "eigenvectors unavailable for the grading split";
            return out;
        }
        Eigen::MatrixXcd Vk(spectrum.vectors.rows(), kernel.size());
        for (size_t i = 0; i < kernel.size(); ++i) Vk.col((Eigen::Index)i) = spectrum.vectors.col(kernel[i]);
        Eigen::MatrixXcd B = Vk.adjoint() * (G.diag.cast<cplx>().asDiagonal() * Vk);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            double b = es.eigenvalues()[i];
            if (std::abs(std::abs(b) - 1.0) > 1e-6) {
                out.indeterminate = true;
                out.flag_reason = "kernel candidates are not grading-aligned";
            }
            if (b > 0)
                ++out.kernel_dim_plus;
            else
                ++out.kernel_dim_minus;
        }
    }
    out.index = out.kernel_dim_plus - out.kernel_dim_minus;
    return out;
}

std::vector<SpectrumMatch> match_spectra(const SpectrumResult& A, const SpectrumResult& B, int k,
                                         bool* truncated) {
    auto pick = [&](const SpectrumResult& S) {
        std::vector<double> v = S.eigenvalues;
        std::sort(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
        if (k > 0 && (int)v.size() > k) v.resize(k);
        std::sort(v.begin(), v.end());
        return v;
    };
    std::vector<double> a = pick(A), b = pick(B);
    size_t m = std::min(a.size(), b.size());
    if (truncated) *truncated = A.truncated_warning || B.truncated_warning || a.size() != b.size();
    std::vector<SpectrumMatch> out;
    for (size_t i = 0; i < m; ++i) out.push_back({a[i], b[i], a[i] - b[i]});
    return out;
}

ProbeStats anticommutator_probe(const OperatorMatrix& D1, const OperatorMatrix& D2, int n_u,
                                int slots, int trials, unsigned seed) {
    if (D1.dim() != D2.dim()) throw DomainError("probe: operator dimensions differ");
    Eigen::Index dim = D1.dim();
    if (dim != (Eigen::Index)slots * 2 * n_u) throw DomainError("probe: basis layout mismatch");
    double eps = D2.eps ? *D2.eps : (D1.eps ? *D1.eps : 1.0);
    int n_s = (slots + 1) / 2;
    Grid1D grid_s(n_s, -eps, eps);

    constexpr double kPi = 3.14159265358979323846;
    // band-limited separable probes: sin((p+1) pi u / L) x cos(q pi s / 2 eps)
    Eigen::MatrixXd phi(n_u, 4), chi(slots, 3);
    for (int j = 0; j < n_u; ++j)
        for (int p = 0; p < 4; ++p) phi(j, p) = std::sin((p + 1) * kPi * (j + 0.5) / n_u);
    for (int kslot = 0; kslot < slots; ++kslot) {
        double s = normal_slot_position(grid_s, kslot);
        for (int q = 0; q < 3; ++q) chi(kslot, q) = std::cos(q * kPi * s / (2.0 * eps));
    }

    Rng rng(seed);
    ProbeStats st;
    st.trials = trials;
    Eigen::VectorXcd psi(dim);
    for (int t = 0; t < trials; ++t) {
        cplx c[4][3][2];
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 3; ++q)
                for (int s2 = 0; s2 < 2; ++s2) c[p][q][s2] = rng.cnormal();
        psi.setZero();
        for (int kslot = 0; kslot < slots; ++kslot)
            for (int j = 0; j < n_u; ++j)
                for (int s2 = 0; s2 < 2; ++s2) {
                    cplx v = 0;
                    for (int p = 0; p < 4; ++p)
                        for (int q = 0; q < 3; ++q) v += c[p][q][s2] * phi(j, p) * chi(kslot, q);
                    psi[(Eigen::Index)kslot * 2 * n_u + 2 * j + s2] = v;
                }
        Eigen::VectorXcd y1 = D1.entries * psi;
        Eigen::VectorXcd y2 = D2.entries * psi;
        Eigen::VectorXcd anti = D1.entries * y2 + D2.entries * y1;
        double n0 = psi.squaredNorm(), a1 = y1.squaredNorm(), a2 = y2.squaredNorm();
        double r1 = anti.squaredNorm() / (n0 + a1);
        double r2 = (n0 + a1 + a2) / (n0 + (y1 + y2).squaredNorm());
        st.ratio1_max = std::max(st.ratio1_max, r1);
        st.ratio2_max = std::max(st.ratio2_max, r2);
    }
    return st;
}

}  // namespace codim1
