#include "psbfem/element.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include "psbfem/errors.hpp"

namespace psb {

namespace {

// The double-zero eigenvalue is defective, so roundoff splits it by
// O(sqrt(eps * rho)) — around 1e-7, orders above eps but far below the
// smallest genuine exponent of a valid element (O(1)). The detection ball
// must sit between those scales.
constexpr double kZeroModeRel = 1e-4;     // |lambda| below this x spectral radius = zero pair
constexpr double kRealityRel = 1e-8;      // allowed imaginary / asymmetry residue
constexpr double kConditionLimit = 1e12;  // psi_h condition number ceiling

}  // namespace

double ScaledBoundaryGeometry::edge_jacobian(int edge) const {
    const Point p1 = rel[edge];
    const Point p2 = rel[(edge + 1) % n()];
    return 0.5 * cross(p1, p2);
}

ScaledBoundaryGeometry make_sb_geometry(const std::vector<Point>& poly,
                                        const std::vector<int>& node_ids) {
    if (poly.size() < 3 || poly.size() != node_ids.size())
        throw Error(ErrorCode::geometry, "polygon and node id list must match, length >= 3");
    const AreaCentroid ac = polygon_area_centroid(poly);
    if (ac.area <= 0.0)
        throw Error(ErrorCode::geometry, "element polygon must be counter-clockwise");
    ScaledBoundaryGeometry g;
    g.center = ac.centroid;
    g.area = ac.area;
    g.diameter = polygon_diameter(poly);
    g.node_ids = node_ids;
    g.rel.reserve(poly.size());
    for (const Point& p : poly) g.rel.push_back(p - ac.centroid);
    const double jtol = kCoincidenceRel * g.diameter * g.diameter;
    for (int e = 0; e < g.n(); ++e)
        if (g.edge_jacobian(e) <= jtol)
            throw Error(ErrorCode::geometry,
                        "edge " + std::to_string(e) +
                            " is not star-visible from the scaling center (centroid)");
    return g;
}

CoefficientMatrices element_coefficients(const ScaledBoundaryGeometry& g, const Material& mat) {
    const int n = g.n();
    CoefficientMatrices c;
    c.E0 = Eigen::MatrixXd::Zero(n, n);
    c.E1 = Eigen::MatrixXd::Zero(n, n);
    c.E2 = Eigen::MatrixXd::Zero(n, n);
    c.M0 = Eigen::MatrixXd::Zero(n, n);

    const Eigen::Matrix2d k = Eigen::Vector2d(mat.kx, mat.ky).asDiagonal();
    const double gauss_eta[2] = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};

    for (int e = 0; e < n; ++e) {
        const int i = e, j = (e + 1) % n;
        const Point p1 = g.rel[i], p2 = g.rel[j];
        const double J = g.edge_jacobian(e);
        const double x_eta = 0.5 * (p2.x - p1.x);
        const double y_eta = 0.5 * (p2.y - p1.y);
        const Eigen::Vector2d b1(y_eta / J, -x_eta / J);

        Eigen::Matrix2d e0 = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d e1 = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d e2 = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d m0 = Eigen::Matrix2d::Zero();
        for (double eta : gauss_eta) {  // weight 1 each
            const Eigen::RowVector2d N(0.5 * (1.0 - eta), 0.5 * (1.0 + eta));
            const Eigen::RowVector2d dN(-0.5, 0.5);
            const double xb = N(0) * p1.x + N(1) * p2.x;
            const double yb = N(0) * p1.y + N(1) * p2.y;
            const Eigen::Vector2d b2(-yb / J, xb / J);
            const Eigen::Matrix2d B1 = b1 * N;
            const Eigen::Matrix2d B2 = b2 * dN;
            e0 += B1.transpose() * k * B1 * J;
            e1 += B2.transpose() * k * B1 * J;
            e2 += B2.transpose() * k * B2 * J;
            m0 += N.transpose() * (mat.Ss * J) * N;
        }
        const int idx[2] = {i, j};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                c.E0(idx[a], idx[b]) += e0(a, b);
                c.E1(idx[a], idx[b]) += e1(a, b);
                c.E2(idx[a], idx[b]) += e2(a, b);
                c.M0(idx[a], idx[b]) += m0(a, b);
            }
    }
    return c;
}

Eigen::MatrixXd build_hamiltonian(const CoefficientMatrices& c) {
    const int n = static_cast<int>(c.E0.rows());
    const Eigen::LLT<Eigen::MatrixXd> llt(c.E0);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::element, "E0 is not positive definite (ill-conditioned element)");
    const Eigen::MatrixXd A = llt.solve(c.E1.transpose());          // E0^{-1} E1^T
    const Eigen::MatrixXd B = llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd Z(2 * n, 2 * n);
    Z.topLeftCorner(n, n) = -A;
    Z.topRightCorner(n, n) = B;
    Z.bottomLeftCorner(n, n) = c.E2 - c.E1 * A;
    Z.bottomRightCorner(n, n) = A.transpose();
    return Z;
}

ModalData modal_decomposition(const Eigen::MatrixXd& Z) {
    const int n2 = static_cast<int>(Z.rows());
    const int n = n2 / 2;
    Eigen::EigenSolver<Eigen::MatrixXd> es(Z);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::element, "eigen-decomposition of the system matrix failed");
    const Eigen::VectorXcd lambda = es.eigenvalues();
    const Eigen::MatrixXcd V = es.eigenvectors();

    const double rho = lambda.cwiseAbs().maxCoeff();
    const double zero_tol = kZeroModeRel * rho;

    // The double zero (constant mode paired with a logarithmic mode) is
    // defective; pick the candidate whose flux block is smallest.
    std::vector<int> zero_cands, positive;
    for (int k = 0; k < n2; ++k) {
        if (std::abs(lambda(k)) < zero_tol)
            zero_cands.push_back(k);
        else if (lambda(k).real() > 0.0)
            positive.push_back(k);
    }
    if (zero_cands.empty())
        throw Error(ErrorCode::element, "no zero-exponent (constant) mode found");
    int zero_idx = zero_cands[0];
    double best = V.col(zero_idx).tail(n).norm();
    for (int k : zero_cands) {
        const double fn = V.col(k).tail(n).norm();
        if (fn < best) {
            best = fn;
            zero_idx = k;
        }
    }
    if (static_cast<int>(positive.size()) != n - 1)
        throw Error(ErrorCode::element,
                    "modal selection found " + std::to_string(positive.size() + 1) +
                        " bounded modes, expected " + std::to_string(n));

    // deterministic order: constant mode first, then by (Re, Im)
    std::sort(positive.begin(), positive.end(), [&](int a, int b) {
        if (lambda(a).real() != lambda(b).real()) return lambda(a).real() < lambda(b).real();
        return lambda(a).imag() < lambda(b).imag();
    });

    ModalData m;
    m.mu = Eigen::VectorXcd(n);
    m.psi_h = Eigen::MatrixXcd(n, n);
    m.psi_q = Eigen::MatrixXcd(n, n);
    m.zero_mode = 0;
    // The true eigenvector of the zero eigenvalue is the constant-head /
    // zero-flux mode; the numerically returned one carries O(sqrt(eps))
    // contamination from the defective pair's generalized vector, so store
    // the exact mode instead.
    m.mu(0) = 0.0;
    m.psi_h.col(0) = Eigen::VectorXcd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    m.psi_q.col(0).setZero();
    for (int c = 1; c <= static_cast<int>(positive.size()); ++c) {
        const int k = positive[c - 1];
        m.mu(c) = lambda(k);
        m.psi_h.col(c) = V.col(k).head(n);
        m.psi_q.col(c) = V.col(k).tail(n);
    }

    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m.psi_h);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    m.psi_h_condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(m.psi_h_condition < kConditionLimit))
        throw Error(ErrorCode::element, "head eigenvector block is numerically singular "
                                        "(condition " +
                                            std::to_string(m.psi_h_condition) + ")");
    return m;
}

namespace {

// Verifies the imaginary residue is negligible, drops it, symmetrizes.
Eigen::MatrixXd realize_symmetric(const Eigen::MatrixXcd& A, const char* what) {
    const double scale = A.cwiseAbs().maxCoeff();
    if (scale > 0.0) {
        const double im = A.imag().cwiseAbs().maxCoeff();
        if (im > kRealityRel * scale)
            throw Error(ErrorCode::element, std::string(what) + " has imaginary residue " +
                                                std::to_string(im / scale));
    }
    const Eigen::MatrixXd R = A.real();
    const double asym = (R - R.transpose()).cwiseAbs().maxCoeff();
    if (scale > 0.0 && asym > kRealityRel * scale)
        throw Error(ErrorCode::element,
                    std::string(what) + " asymmetry " + std::to_string(asym / scale));
    return 0.5 * (R + R.transpose());
}

}  // namespace

Eigen::MatrixXd steady_stiffness(const ModalData& m) {
    const Eigen::MatrixXcd K =
        m.psi_q * m.psi_h.partialPivLu().solve(Eigen::MatrixXcd::Identity(m.n(), m.n()));
    return realize_symmetric(K, "steady stiffness");
}

Eigen::MatrixXd mass_matrix(const ModalData& m, const Eigen::MatrixXd& M0) {
    const int n = m.n();
    const Eigen::MatrixXcd r = m.psi_h.transpose() * M0 * m.psi_h;
    Eigen::MatrixXcd small(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) small(i, j) = r(i, j) / (2.0 + m.mu(i) + m.mu(j));
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m.psi_h);
    const Eigen::MatrixXcd inv = lu.solve(Eigen::MatrixXcd::Identity(n, n));
    // plain transpose throughout: complex-pair modes recombine to real here
    return realize_symmetric(inv.transpose() * small * inv, "mass matrix");
}

double mass_identity_residual(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M,
                              const CoefficientMatrices& c) {
    const Eigen::LLT<Eigen::MatrixXd> llt(c.E0);
    const Eigen::MatrixXd S = llt.solve((K - c.E1.transpose()).eval());
    const Eigen::MatrixXd R = S.transpose() * M + M * S + 2.0 * M - c.M0;
    const double m0 = c.M0.norm();
    return m0 > 0.0 ? R.norm() / m0 : M.norm();
}

SElementOperator form_element(const std::vector<Point>& poly, const std::vector<int>& node_ids,
                              const Material& mat) {
    SElementOperator op;
    op.geometry = make_sb_geometry(poly, node_ids);
    op.material = mat;
    op.coeff = element_coefficients(op.geometry, mat);
    op.modal = modal_decomposition(build_hamiltonian(op.coeff));
    op.K = steady_stiffness(op.modal);
    op.M = mass_matrix(op.modal, op.coeff.M0);
    op.mass_residual = mass_identity_residual(op.K, op.M, op.coeff);
    if (op.mass_residual > 1e-8)
        throw Error(ErrorCode::element,
                    "mass identity residual " + std::to_string(op.mass_residual));
    return op;
}

}  // namespace psb
