#pragma once

#include <array>
#include <string>
#include <vector>

#include "codim1/geometry.hpp"
#include "codim1/spectral.hpp"

namespace codim1 {

struct OrderFit {
    double order = 0;
    double residual = 0;  // rms log-log least-squares residual
    bool valid = false;   // >= 2 positive samples with distinct parameters
};

OrderFit fit_order(const std::vector<double>& params, const std::vector<double>& errors);

struct ConvergenceReport {
    std::string param_name;
    std::vector<double> params;
    std::vector<double> errors;
    OrderFit fit;
    bool flagged = false;
    std::string flag_reason;
};

struct CurvatureReport {
    std::vector<double> eps_list;
    std::vector<double> deviations;  // sup over |s|<=eps of |c(u,s) - limit(u)|
    double limit_error_s0 = 0;       // max |c(u,0) - (-(Tr II_0)^2/4)|
};

struct HomotopyReport {
    std::vector<double> t_values;
    std::vector<int> index_per_t;  // summed over modes
    std::vector<double> min_abs_eig;
    double max_jump = 0;           // worst adjacent eigenvalue jump
    double worst_jump_ratio = 0;   // jump / local gap
    bool flagged = false;
    std::string flag_reason;
};

struct ProbeReport {
    ProbeStats base, doubled;
    double growth1 = 0, growth2 = 0;
};

// k smallest-|lambda| eigenvalues of H(eps) against spec(D_{X_0,m}) per mode, max
// mismatch per eps; contract: errors strictly decreasing, fitted order >= 0.9.
ConvergenceReport expansion_sweep(const OffsetGeometry& g, const std::vector<double>& modes,
                                  const std::vector<double>& eps_list, int n_u, int n_s, int k,
                                  unsigned seed);

// smallest nonzero |eigenvalue| of gamma (x) T_eps vs eps; order -1.
ConvergenceReport divergent_term_check(const std::vector<double>& eps_list, int n_s);

// d/ds log Lambda = Tr II_s: central differences at base offset s0 against the
// closed form; errors are max over a fixed u sample.
ConvergenceReport lambda_trace_identity(const OffsetGeometry& g, const std::vector<double>& h_list,
                                        double s0, double h_check = 1e-4,
                                        double* agreement_at_check = nullptr);

CurvatureReport curvature_convergence(const OffsetGeometry& g,
                                      const std::vector<double>& eps_list);

HomotopyReport homotopy_scan(const OffsetGeometry& g, const std::vector<double>& modes,
                             double eps, int t_points, int n_u, int n_s, int k, unsigned seed);

// Pointwise identity D_Y = c(nu)[c_s(e_u) d_{e_u} + c_s(e_phi) d_{e_phi}
//   - (i/2)(Tr II_fd - Tr II) - i d_s] psi on seeded band-limited spinors; the
// connection trace is finite-differenced from the normal field, the subtracted trace
// uses the closed form, so a wrong trace_II leaves an O(1) defect.
ConvergenceReport decomposition_residual(const OffsetGeometry& g,
                                         const std::vector<double>& h_list, unsigned seed);

ConvergenceReport a_term_norm_sweep(const OffsetGeometry& g, const std::vector<double>& eps_list);

ProbeReport probe_study(const OffsetGeometry& g, double m, double eps, int n_u, int n_s,
                        int trials, unsigned seed);

}  // namespace codim1
