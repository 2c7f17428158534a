#include "psbfem/fem_reference.hpp"

#include <array>
#include <cmath>

#include "psbfem/errors.hpp"

namespace psb {

namespace {

struct QuadGeom {
    std::array<Point, 4> p;
    std::array<int, 4> dofs;
};

struct ShapeEval {
    Eigen::RowVector4d N;
    Eigen::Matrix<double, 2, 4> dN_dx;  // cartesian gradients
    double detJ = 0.0;
    Point x;
};

ShapeEval eval_quad(const QuadGeom& q, double xi, double eta) {
    ShapeEval s;
    s.N << 0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta), 0.25 * (1 + xi) * (1 + eta),
        0.25 * (1 - xi) * (1 + eta);
    Eigen::Matrix<double, 2, 4> dN_dref;
    dN_dref << -0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta),
        -0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi);
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 4; ++a) {
        J(0, 0) += dN_dref(0, a) * q.p[a].x;
        J(0, 1) += dN_dref(0, a) * q.p[a].y;
        J(1, 0) += dN_dref(1, a) * q.p[a].x;
        J(1, 1) += dN_dref(1, a) * q.p[a].y;
    }
    s.detJ = J.determinant();
    if (s.detJ <= 0.0)
        throw Error(ErrorCode::geometry, "degenerate quadrilateral in the reference solver");
    s.dN_dx = J.inverse() * dN_dref;
    s.x = {0.0, 0.0};
    for (int a = 0; a < 4; ++a) {
        s.x.x += s.N(a) * q.p[a].x;
        s.x.y += s.N(a) * q.p[a].y;
    }
    return s;
}

constexpr double kG = 0.5773502691896257;  // 1/sqrt(3)
const double kGauss[4][2] = {{-kG, -kG}, {kG, -kG}, {kG, kG}, {-kG, kG}};

QuadGeom quad_geom(const SeepageModel& model, const GlobalSystem& sys, const PolygonElement& e) {
    QuadGeom q;
    for (int a = 0; a < 4; ++a) {
        q.p[a] = model.mesh.node(e.node_ids[a]).p;
        q.dofs[a] = sys.dof_of(e.node_ids[a]);
    }
    return q;
}

}  // namespace

GlobalSystem assemble_fem(const SeepageModel& model) {
    GlobalSystem sys;
    sys.dof_node_ids.reserve(model.mesh.nodes.size());
    for (const Node& n : model.mesh.nodes) sys.dof_node_ids.push_back(n.id);

    std::vector<Eigen::Triplet<double>> tk, tm;
    for (const auto& e : model.mesh.elements) {
        if (e.node_ids.size() != 4)
            throw Error(ErrorCode::model, "reference solver accepts 4-node quadrilaterals only "
                                          "(element " +
                                              std::to_string(e.id) + ")");
        const Material& mat = model.material(e.material_id);
        const Eigen::Matrix2d k = Eigen::Vector2d(mat.kx, mat.ky).asDiagonal();
        const QuadGeom q = quad_geom(model, sys, e);
        Eigen::Matrix4d Ke = Eigen::Matrix4d::Zero();
        Eigen::Matrix4d Me = Eigen::Matrix4d::Zero();
        for (const auto& gp : kGauss) {  // weight 1 each
            const ShapeEval s = eval_quad(q, gp[0], gp[1]);
            Ke += s.dN_dx.transpose() * k * s.dN_dx * s.detJ;
            Me += s.N.transpose() * (mat.Ss * s.detJ) * s.N;
        }
        Ke = 0.5 * (Ke + Ke.transpose());
        Me = 0.5 * (Me + Me.transpose());
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                tk.emplace_back(q.dofs[a], q.dofs[b], Ke(a, b));
                if (Me(a, b) != 0.0) tm.emplace_back(q.dofs[a], q.dofs[b], Me(a, b));
            }
    }
    const int nd = sys.n_dof();
    sys.K.resize(nd, nd);
    sys.K.setFromTriplets(tk.begin(), tk.end());
    sys.M.resize(nd, nd);
    sys.M.setFromTriplets(tm.begin(), tm.end());
    return sys;
}

SolutionField fem_solve_steady(const SeepageModel& model, const GlobalSystem& sys,
                               const LogSink& log) {
    return solve_steady(sys, resolve_bcs(model, sys, 0.0), log);
}

double fem_l2_relative_error(const SeepageModel& model, const GlobalSystem& sys,
                             const Eigen::VectorXd& h, const std::function<double(Point)>& ref) {
    // 3x3 Gauss: the squared interpolation error is locally quartic, and a
    // lower-order rule would bias the norm by a mesh-independent factor.
    constexpr double kG3 = 0.7745966692414834;  // sqrt(3/5)
    const double pts[3] = {-kG3, 0.0, kG3};
    const double wts[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double num = 0.0, den = 0.0;
    for (const auto& e : model.mesh.elements) {
        const QuadGeom q = quad_geom(model, sys, e);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const ShapeEval s = eval_quad(q, pts[i], pts[j]);
                double hq = 0.0;
                for (int a = 0; a < 4; ++a) hq += s.N(a) * h[q.dofs[a]];
                const double r = ref(s.x);
                const double w = wts[i] * wts[j] * s.detJ;
                num += w * (hq - r) * (hq - r);
                den += w * r * r;
            }
    }
    if (den <= 0.0) throw Error(ErrorCode::verify, "reference field has zero norm");
    return std::sqrt(num / den);
}

double fem_sample(const SeepageModel& model, const GlobalSystem& sys, const Eigen::VectorXd& h,
                  Point p) {
    const double tol = kCoincidenceRel * std::max(model.mesh.diameter(), 1.0);
    for (const auto& e : model.mesh.elements) {
        const QuadGeom q = quad_geom(model, sys, e);
        double x0 = q.p[0].x, x1 = q.p[0].x, y0 = q.p[0].y, y1 = q.p[0].y;
        for (int a = 1; a < 4; ++a) {
            x0 = std::min(x0, q.p[a].x);
            x1 = std::max(x1, q.p[a].x);
            y0 = std::min(y0, q.p[a].y);
            y1 = std::max(y1, q.p[a].y);
        }
        if (p.x < x0 - tol || p.x > x1 + tol || p.y < y0 - tol || p.y > y1 + tol) continue;
        // Newton inversion of the isoparametric map
        double xi = 0.0, eta = 0.0;
        bool ok = false;
        for (int it = 0; it < 30; ++it) {
            Eigen::RowVector4d N(0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                                 0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta));
            Point x{0.0, 0.0};
            for (int a = 0; a < 4; ++a) {
                x.x += N(a) * q.p[a].x;
                x.y += N(a) * q.p[a].y;
            }
            Eigen::Matrix<double, 2, 4> dN;
            dN << -0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta),
                -0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi);
            Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
            for (int a = 0; a < 4; ++a) {
                J(0, 0) += dN(0, a) * q.p[a].x;
                J(0, 1) += dN(0, a) * q.p[a].y;
                J(1, 0) += dN(1, a) * q.p[a].x;
                J(1, 1) += dN(1, a) * q.p[a].y;
            }
            const Eigen::Vector2d res(p.x - x.x, p.y - x.y);
            if (res.norm() <= tol) {
                ok = true;
                break;
            }
            const Eigen::Vector2d d = J.transpose().inverse() * res;
            xi += d[0];
            eta += d[1];
        }
        if (ok && xi >= -1.0 - 1e-9 && xi <= 1.0 + 1e-9 && eta >= -1.0 - 1e-9 && eta <= 1.0 + 1e-9) {
            const Eigen::RowVector4d N(0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                                       0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta));
            double v = 0.0;
            for (int a = 0; a < 4; ++a) v += N(a) * h[q.dofs[a]];
            return v;
        }
    }
    throw Error(ErrorCode::verify, "sample point lies outside every quadrilateral");
}

}  // namespace psb
