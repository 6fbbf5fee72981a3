#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <optional>
#include <string>
#include <utility>

#include "codim1/geometry.hpp"
#include "codim1/grid.hpp"

namespace codim1 {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;

enum class GradingLabel { GammaS, Sigma3, Product };

struct GradingMatrix {
    Eigen::VectorXd diag;
    GradingLabel label;
};

struct OperatorMatrix {
    SpMat entries;
    std::string basis;
    std::string weight;
    double m = 0;
    int bandwidth = -1;  // >= 0: Hermitian-banded in the stored ordering
    std::optional<double> eps, s, t;

    Eigen::Index dim() const { return entries.rows(); }
};

// max |H - H^*| over entries
double hermiticity_defect(const OperatorMatrix& M);

// Per-mode Dirac operator of the leaf X_s in the flat-measure half-density form,
// interleaved ordering (p_0, q_0, p_1, q_1, ...) on grid_u nodes.
OperatorMatrix assemble_mode_dirac(const OffsetGeometry& g, double m, double s,
                                   const Grid1D& grid_u);
GradingMatrix mode_grading(int n_u);  // gamma_s: +1 on p, -1 on q

// Correction term A stored in the Hermitian sigma_2 gauge, block diagonal over
// the normal-grid slots of the product basis.
OperatorMatrix assemble_A_term(const OffsetGeometry& g, double m, const Grid1D& grid_u,
                               const Grid1D& grid_s);

// Normal operator T = i d/ds sigma_1 - f sigma_2, f = -(pi/2e) tan(pi s/2e),
// two-grid closure: n primal nodes (+ chirality), n-1 interior dual nodes (-).
// Interleaved ordering (p_0, q_0, p_1, q_1, ..., p_{n-1}), dim 2n-1.
OperatorMatrix assemble_normal_T(double eps, const Grid1D& grid_s);
GradingMatrix normal_grading(int n_s);  // sigma_3 on the two-grid: +1 primal, -1 dual

// number of slots of the normal two-grid and the s-position of each slot
int normal_slots(int n_s);
double normal_slot_position(const Grid1D& grid_s, int slot);

// Product operator H = D-blocks + gamma_s (x) T on slot (outer) x mode (inner) basis.
// The Lambda-commutator correction is absorbed exactly by the s-independent
// half-density weight a r Lambda = rho.
std::pair<OperatorMatrix, GradingMatrix> assemble_product(const OffsetGeometry& g, double m,
                                                          double eps, const Grid1D& grid_u,
                                                          const Grid1D& grid_s);

// Homotopy family: geometry coefficients evaluated at offset s*t; t=1 is the product.
std::pair<OperatorMatrix, GradingMatrix> assemble_homotopy(const OffsetGeometry& g, double m,
                                                           double eps, double t,
                                                           const Grid1D& grid_u,
                                                           const Grid1D& grid_s);

// Node map s -> s/eps of the rescaling unitary.
struct RescaleMap {
    double eps;
    double operator()(double s) const { return s / eps; }
};
RescaleMap rescale_grid(double eps);

// Cross-check assembly of H(eps) from the unit normal grid: D blocks at eps*sigma_k
// plus (1/eps) gamma (x) T_1.
std::pair<OperatorMatrix, GradingMatrix> assemble_product_rescaled(const OffsetGeometry& g,
                                                                   double m, double eps,
                                                                   const Grid1D& grid_u,
                                                                   int n_s);

struct TwistReport {
    double unitarity = 0;
    double identity = 0;
    double grading = 0;
    bool pass = false;
};

// Finite-dimensional check of the twist unitary
// U (f x s1 + i gamma (D + d) x s2) U* = D x 1 + gamma (i d) x s1 - gamma f x s2,
// U (1 x s3) U* = gamma x s3, with seeded random placeholders.
TwistReport verify_twist_unitary(unsigned seed, int n_placeholder = 8, double tol = 1e-13);
TwistReport verify_twist_unitary_trivial(double tol = 1e-15);  // D = 0, f = 1

}  // namespace codim1
