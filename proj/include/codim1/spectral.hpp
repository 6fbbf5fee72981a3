#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "codim1/operators.hpp"

namespace codim1 {

struct SpectrumResult {
    std::vector<double> eigenvalues;  // ascending
    double mode = std::numeric_limits<double>::quiet_NaN();
    double residual_bound = 0;  // max ||Hv - lambda v|| over reported pairs (or solver bound)
    double op_norm_est = 0;
    std::string grid_info;
    Eigen::MatrixXcd vectors;  // columns matching eigenvalues; may be empty
    bool truncated_warning = false;
};

struct EigOptions {
    int k = -1;           // -1: all (dense/banded paths); > 0: k smallest-|lambda|
    bool vectors = false;
    unsigned seed = 1234;  // iterative starting vector
    double herm_tol = 1e-12;
};

// Dense full decomposition for dim <= 8192 (banded storage solver when the matrix is
// banded), seeded shift-invert Lanczos extraction above that.
SpectrumResult eig_symmetric(const OperatorMatrix& M, const EigOptions& opt = {});

struct IndexResult {
    int kernel_dim_plus = 0;
    int kernel_dim_minus = 0;
    int index = 0;
    double kernel_threshold = 0;
    double gap_ratio = 0;
    bool indeterminate = false;
    std::string flag_reason;
};

// Kernel detection by largest multiplicative gap below the threshold
// 0.5 * first_nonzero_estimate (0.1 * spectral span if absent); gap ratio < 10 flags
// the result as indeterminate.
IndexResult graded_index(const OperatorMatrix& M, const GradingMatrix& G,
                         const SpectrumResult& spectrum,
                         std::optional<double> first_nonzero_estimate = std::nullopt,
                         double gap_ratio_tol = 10.0);

struct SpectrumMatch {
    double a, b, delta;
};
std::vector<SpectrumMatch> match_spectra(const SpectrumResult& A, const SpectrumResult& B, int k,
                                         bool* truncated = nullptr);

struct ProbeStats {
    double ratio1_max = 0;  // ||{D1,D2} psi||^2 / (||psi||^2 + ||D1 psi||^2)
    double ratio2_max = 0;  // (||psi||^2+||D1 psi||^2+||D2 psi||^2)/(||psi||^2+||(D1+D2) psi||^2)
    int trials = 0;
};

// Random band-limited test vectors on the slot x mode product basis.
ProbeStats anticommutator_probe(const OperatorMatrix& D1, const OperatorMatrix& D2, int n_u,
                                int slots, int trials, unsigned seed);

}  // namespace codim1
