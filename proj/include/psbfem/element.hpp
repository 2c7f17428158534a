#pragma once

#include <Eigen/Dense>
#include <vector>

#include "psbfem/geometry.hpp"
#include "psbfem/model.hpp"

namespace psb {

// Polygonal S-element boundary in scaled coordinates: the scaling center is
// the area centroid (the ξ=0 point), vertices are stored relative to it in
// counter-clockwise order, and each straight edge i runs from vertex i to
// vertex i+1 (mod n).
struct ScaledBoundaryGeometry {
    Point center;
    std::vector<Point> rel;  // vertex - center
    std::vector<int> node_ids;
    double area = 0.0;
    double diameter = 0.0;

    int n() const { return static_cast<int>(rel.size()); }
    // Twice the area of the triangle (center, v_i, v_{i+1}); the per-edge
    // Jacobian is constant on straight edges and must stay positive.
    double edge_jacobian(int edge) const;
};

ScaledBoundaryGeometry make_sb_geometry(const std::vector<Point>& poly,
                                        const std::vector<int>& node_ids);

struct CoefficientMatrices {
    Eigen::MatrixXd E0, E1, E2, M0;
};

// Boundary-integral coefficient matrices with linear edge shape functions;
// 2-point Gauss per edge (exact: every integrand is quadratic in the edge
// coordinate when the edge Jacobian is constant).
CoefficientMatrices element_coefficients(const ScaledBoundaryGeometry& g, const Material& mat);

// 2n x 2n first-order system matrix
//   [ -E0^{-1} E1^T        E0^{-1}      ]
//   [ E2 - E1 E0^{-1} E1^T E1 E0^{-1}   ]
// whose eigenvalues occur in +/- pairs.
Eigen::MatrixXd build_hamiltonian(const CoefficientMatrices& c);

struct ModalData {
    Eigen::VectorXcd mu;     // radial exponents, Re(mu) >= 0, mu[zero_mode] = 0
    Eigen::MatrixXcd psi_h;  // head block of the selected eigenvectors (n x n)
    Eigen::MatrixXcd psi_q;  // flux block (n x n)
    double psi_h_condition = 0.0;
    int zero_mode = 0;  // column of the constant-head mode
    int n() const { return static_cast<int>(mu.size()); }
};

// Selects the branch that stays finite at the scaling center: the n
// eigenpairs whose exponent has a nonnegative real part. The defective
// double-zero eigenvalue is resolved by flux-norm tie-breaking and the
// winner is replaced by the exact constant-head/zero-flux eigenvector.
ModalData modal_decomposition(const Eigen::MatrixXd& Z);

// K = psi_q psi_h^{-1}, verified real and symmetric to tolerance, then
// symmetrized exactly.
Eigen::MatrixXd steady_stiffness(const ModalData& m);

// Low-frequency mass matrix: with Phi = psi_h and r = Phi^T M0 Phi (plain
// transpose), m_ij = r_ij / (2 + mu_i + mu_j), M = Phi^{-T} m Phi^{-1}.
Eigen::MatrixXd mass_matrix(const ModalData& m, const Eigen::MatrixXd& M0);

// Residual of the identity S^T M + M S + 2 M = M0 with
// S = E0^{-1} (K - E1^T), relative to ||M0|| (0 when M0 = 0); the a
// posteriori check on the mass recipe.
double mass_identity_residual(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M,
                              const CoefficientMatrices& c);

struct SElementOperator {
    ScaledBoundaryGeometry geometry;
    Material material;
    CoefficientMatrices coeff;
    ModalData modal;
    Eigen::MatrixXd K;
    Eigen::MatrixXd M;
    double mass_residual = 0.0;
};

// Full pipeline for one polygon: geometry -> coefficients -> modes -> K, M.
SElementOperator form_element(const std::vector<Point>& poly, const std::vector<int>& node_ids,
                              const Material& mat);

}  // namespace psb
