#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "psbfem/element.hpp"
#include "psbfem/errors.hpp"
#include "psbfem/fem_reference.hpp"
#include "psbfem/fixtures.hpp"
#include "psbfem/recovery.hpp"
#include "psbfem/solver.hpp"

using namespace psb;

namespace {

std::vector<Point> unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

std::vector<int> ids_upto(int n) {
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i + 1;
    return ids;
}

std::vector<Point> random_star_polygon(std::mt19937& rng) {
    std::uniform_int_distribution<int> count(3, 8);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
        const int n = count(rng);
        std::vector<double> ang(n);
        for (auto& a : ang) a = 2.0 * M_PI * uni(rng);
        std::sort(ang.begin(), ang.end());
        bool spaced = true;
        for (int i = 0; i < n; ++i) {
            const double gap = (i + 1 < n) ? ang[i + 1] - ang[i] : 2.0 * M_PI - ang[n - 1] + ang[0];
            if (gap < 0.3) spaced = false;
        }
        if (!spaced) continue;
        std::vector<Point> poly;
        for (double a : ang) {
            const double r = 0.6 + 0.9 * uni(rng);
            poly.push_back({r * std::cos(a), r * std::sin(a)});
        }
        const AreaCentroid ac = polygon_area_centroid(poly);
        if (polygon_star_convex(poly, ac.centroid)) return poly;
    }
    throw std::runtime_error("no star polygon found");
}

// Independent dense-quadrature evaluation of the boundary coefficient
// matrices (5-point Gauss per edge, rebuilt from the b-vector definitions).
CoefficientMatrices dense_coefficients(const ScaledBoundaryGeometry& g, const Material& mat) {
    const double gp[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                          0.9061798459386640};
    const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                          0.4786286704993665, 0.2369268850561891};
    const int n = g.n();
    CoefficientMatrices c;
    c.E0 = Eigen::MatrixXd::Zero(n, n);
    c.E1 = Eigen::MatrixXd::Zero(n, n);
    c.E2 = Eigen::MatrixXd::Zero(n, n);
    c.M0 = Eigen::MatrixXd::Zero(n, n);
    const Eigen::Matrix2d k = Eigen::Vector2d(mat.kx, mat.ky).asDiagonal();
    for (int e = 0; e < n; ++e) {
        const int i = e, j = (e + 1) % n;
        const Point p1 = g.rel[i], p2 = g.rel[j];
        const double J = 0.5 * cross(p1, p2);
        for (int q = 0; q < 5; ++q) {
            const double eta = gp[q], w = gw[q];
            const Eigen::RowVector2d N(0.5 * (1 - eta), 0.5 * (1 + eta));
            const Eigen::RowVector2d dN(-0.5, 0.5);
            const Point pb = N(0) * p1 + N(1) * p2;  // boundary point (relative)
            const Eigen::Vector2d b1(0.5 * (p2.y - p1.y) / J, -0.5 * (p2.x - p1.x) / J);
            const Eigen::Vector2d b2(-pb.y / J, pb.x / J);
            const Eigen::Matrix2d B1 = b1 * N, B2 = b2 * dN;
            const int idx[2] = {i, j};
            const Eigen::Matrix2d e0 = w * J * B1.transpose() * k * B1;
            const Eigen::Matrix2d e1 = w * J * B2.transpose() * k * B1;
            const Eigen::Matrix2d e2 = w * J * B2.transpose() * k * B2;
            const Eigen::Matrix2d m0 = w * J * mat.Ss * N.transpose() * N;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    c.E0(idx[a], idx[b]) += e0(a, b);
                    c.E1(idx[a], idx[b]) += e1(a, b);
                    c.E2(idx[a], idx[b]) += e2(a, b);
                    c.M0(idx[a], idx[b]) += m0(a, b);
                }
        }
    }
    return c;
}

// Bilinear 4-node stiffness of one rectangle via the independent reference
// assembler (exact for rectangles).
Eigen::MatrixXd fem_rect_stiffness(double w, double h, const Material& mat) {
    SeepageModel m;
    m.mesh.nodes = {{1, {0, 0}}, {2, {w, 0}}, {3, {w, h}}, {4, {0, h}}};
    m.mesh.elements = {{1, {1, 2, 3, 4}, 1}};
    m.materials[1] = mat;
    const GlobalSystem sys = assemble_fem(m);
    return Eigen::MatrixXd(sys.K);
}

}  // namespace

TEST_CASE("two-point edge quadrature already integrates every coefficient exactly") {
    std::mt19937 rng(40902);
    const Material mat{2.3, 0.7, 0.9};
    for (int trial = 0; trial < 25; ++trial) {
        const std::vector<Point> poly = random_star_polygon(rng);
        const ScaledBoundaryGeometry g =
            make_sb_geometry(poly, ids_upto(static_cast<int>(poly.size())));
        const CoefficientMatrices fast = element_coefficients(g, mat);
        const CoefficientMatrices dense = dense_coefficients(g, mat);
        CHECK((fast.E0 - dense.E0).norm() < 1e-12 * dense.E0.norm());
        CHECK((fast.E1 - dense.E1).norm() < 1e-12 * (dense.E1.norm() + 1.0));
        CHECK((fast.E2 - dense.E2).norm() < 1e-12 * dense.E2.norm());
        CHECK((fast.M0 - dense.M0).norm() < 1e-12 * dense.M0.norm());
    }
}

TEST_CASE("unit square exponents are 0, 1, 1, 2") {
    const SElementOperator op = form_element(unit_square(), ids_upto(4), {1.0, 1.0, 0.0});
    std::vector<double> re;
    for (int i = 0; i < op.modal.n(); ++i) {
        CHECK(std::abs(op.modal.mu[i].imag()) < 1e-7);
        re.push_back(op.modal.mu[i].real());
    }
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(re[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(re[2] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(re[3] == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("triangle exponents are 0, 1, 1") {
    const SElementOperator op =
        form_element({{0, 0}, {2, 0}, {0.5, 1.5}}, ids_upto(3), {1.0, 1.0, 0.0});
    std::vector<double> re;
    for (int i = 0; i < op.modal.n(); ++i) re.push_back(op.modal.mu[i].real());
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(re[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(re[2] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rectangle stiffness equals the bilinear element exactly") {
    // On rectangles the semi-analytic solution space coincides with the
    // bilinear space, so two entirely different pipelines must agree.
    std::mt19937 rng(11213);
    std::uniform_real_distribution<double> dim(0.3, 3.0), perm(0.2, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double w = dim(rng), h = dim(rng);
        const Material mat{perm(rng), perm(rng), 0.0};
        const SElementOperator op =
            form_element({{0, 0}, {w, 0}, {w, h}, {0, h}}, ids_upto(4), mat);
        const Eigen::MatrixXd K_fem = fem_rect_stiffness(w, h, mat);
        CHECK((op.K - K_fem).norm() < 1e-10 * K_fem.norm());
    }
}

TEST_CASE("stiffness invariants on a random polygon") {
    std::mt19937 rng(555);
    const std::vector<Point> poly = random_star_polygon(rng);
    const int n = static_cast<int>(poly.size());
    const SElementOperator op = form_element(poly, ids_upto(n), {1.4, 0.6, 0.0});

    CHECK((op.K - op.K.transpose()).norm() == 0.0);  // symmetrized exactly
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    CHECK((op.K * ones).norm() < 1e-10 * op.K.norm());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.K);
    CHECK(es.eigenvalues()(0) > -1e-12 * op.K.norm());  // PSD
    CHECK(es.eigenvalues()(1) > 1e-8 * op.K.norm());    // kernel is only span{1}
}

TEST_CASE("mass matrix satisfies its defining identity") {
    std::mt19937 rng(90125);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<Point> poly = random_star_polygon(rng);
        const int n = static_cast<int>(poly.size());
        const Material mat{1.0, 2.0, 0.7};
        const SElementOperator op = form_element(poly, ids_upto(n), mat);
        CHECK(op.mass_residual < 1e-8);
        CHECK((op.M - op.M.transpose()).norm() == 0.0);
        const double area = polygon_area_centroid(poly).area;
        CHECK(op.M.sum() == doctest::Approx(mat.Ss * area).epsilon(1e-10));
    }
}

TEST_CASE("zero storage gives a zero mass matrix") {
    const SElementOperator op = form_element(unit_square(), ids_upto(4), {1.0, 1.0, 0.0});
    CHECK(op.M.norm() == 0.0);
}

TEST_CASE("degenerate and non-star geometry is rejected") {
    CHECK_THROWS_AS(form_element({{0, 0}, {1, 0}, {2, 0}}, ids_upto(3), {1, 1, 0}), Error);
    // centroid of this hook-shaped polygon cannot see every edge
    const std::vector<Point> hook{{0, 0},   {4, 0},   {4, 0.4}, {0.6, 0.4},
                                  {0.6, 3}, {1.0, 3}, {1.0, 3.2}, {0, 3.2}};
    CHECK(polygon_is_simple(hook));
    CHECK_FALSE(polygon_star_convex(hook, polygon_area_centroid(hook).centroid));
    CHECK_THROWS_AS(form_element(hook, ids_upto(8), {1, 1, 0}), Error);
}

TEST_CASE("boundary trace reproduces nodal interpolation") {
    std::mt19937 rng(31415);
    const std::vector<Point> poly = random_star_polygon(rng);
    const int n = static_cast<int>(poly.size());
    const SElementOperator op = form_element(poly, ids_upto(n), {1.0, 1.0, 0.0});
    Eigen::VectorXd hb(n);
    for (int i = 0; i < n; ++i) hb[i] = std::sin(1.7 * i) + 0.3 * i;
    for (int e = 0; e < n; ++e)
        for (double eta : {-1.0, -0.3, 0.5, 1.0}) {
            const double want =
                0.5 * (1 - eta) * hb[e] + 0.5 * (1 + eta) * hb[(e + 1) % n];
            const InteriorSample s = recover_interior(op, hb, 1.0, e, eta);
            CHECK(s.head == doctest::Approx(want).epsilon(1e-10));
        }
}

TEST_CASE("linear fields are recovered exactly everywhere, including the center") {
    std::mt19937 rng(2718);
    const std::vector<Point> poly = random_star_polygon(rng);
    const int n = static_cast<int>(poly.size());
    const Material mat{2.0, 0.5, 0.0};
    const SElementOperator op = form_element(poly, ids_upto(n), mat);
    const double a = 0.7, b = -1.3, c = 2.1;  // h = a + b x + c y
    Eigen::VectorXd hb(n);
    for (int i = 0; i < n; ++i) hb[i] = a + b * poly[i].x + c * poly[i].y;

    std::uniform_real_distribution<double> uxi(0.05, 1.0), ueta(-1.0, 1.0);
    std::uniform_int_distribution<int> uedge(0, n - 1);
    for (int probe = 0; probe < 50; ++probe) {
        const double xi = uxi(rng), eta = ueta(rng);
        const int edge = uedge(rng);
        const Point p1 = op.geometry.rel[edge], p2 = op.geometry.rel[(edge + 1) % n];
        const Point p = op.geometry.center + xi * (0.5 * (1 - eta) * p1 + 0.5 * (1 + eta) * p2);
        const InteriorSample s = recover_interior(op, hb, xi, edge, eta);
        CHECK(s.head == doctest::Approx(a + b * p.x + c * p.y).epsilon(1e-10));
        CHECK(s.flux(0) == doctest::Approx(-mat.kx * b).epsilon(1e-9));
        CHECK(s.flux(1) == doctest::Approx(-mat.ky * c).epsilon(1e-9));
    }
    // the scaling-center limit keeps the head and flux of the linear field
    const InteriorSample center = recover_interior(op, hb, 0.0, 0, 0.0);
    CHECK(center.head == doctest::Approx(a + b * op.geometry.center.x +
                                         c * op.geometry.center.y)
                             .epsilon(1e-10));
    CHECK(center.flux(0) == doctest::Approx(-mat.kx * b).epsilon(1e-9));
    CHECK(center.flux(1) == doctest::Approx(-mat.ky * c).epsilon(1e-9));
}

TEST_CASE("locate_in_element inverts the radial map") {
    std::mt19937 rng(161803);
    const std::vector<Point> poly = random_star_polygon(rng);
    const int n = static_cast<int>(poly.size());
    const ScaledBoundaryGeometry g = make_sb_geometry(poly, ids_upto(n));
    std::uniform_real_distribution<double> uxi(0.01, 0.999), ueta(-0.99, 0.99);
    std::uniform_int_distribution<int> uedge(0, n - 1);
    for (int probe = 0; probe < 100; ++probe) {
        const double xi = uxi(rng), eta = ueta(rng);
        const int edge = uedge(rng);
        const Point p1 = g.rel[edge], p2 = g.rel[(edge + 1) % n];
        const Point p = g.center + xi * (0.5 * (1 - eta) * p1 + 0.5 * (1 + eta) * p2);
        const auto lc = locate_in_element(g, p);
        REQUIRE(lc.has_value());
        const Point q1 = g.rel[lc->edge], q2 = g.rel[(lc->edge + 1) % n];
        const Point back =
            g.center + lc->xi * (0.5 * (1 - lc->eta) * q1 + 0.5 * (1 + lc->eta) * q2);
        CHECK(distance(back, p) < 1e-12 * g.diameter);
        CHECK(lc->xi == doctest::Approx(xi).epsilon(1e-9));
    }
    // outside points return nothing
    CHECK_FALSE(locate_in_element(g, g.center + 10.0 * (poly[0] - g.center)).has_value());
}

TEST_CASE("scaling center query hits the constant mode value") {
    const SElementOperator op = form_element(unit_square(), ids_upto(4), {1.0, 1.0, 0.0});
    const ScaledBoundaryGeometry& g = op.geometry;
    const auto lc = locate_in_element(g, g.center);
    REQUIRE(lc.has_value());
    CHECK(lc->xi == doctest::Approx(0.0).epsilon(1e-12));
}
