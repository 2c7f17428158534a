#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psbfem/element.hpp"
#include "psbfem/solver.hpp"

namespace psb {

struct InteriorSample {
    double head = 0.0;
    Eigen::Vector2d flux = Eigen::Vector2d::Zero();  // Darcy flux q = -k grad(h)
};

// Semi-analytic interior solution of one S-element at radial xi on `edge` at
// edge coordinate eta: head = N(eta) psi_h xi^mu c with c = psi_h^{-1} h_b,
// flux from the analytic radial derivative. At xi = 0 the head is the
// constant-mode value and the flux keeps only the mu = 1 modes (the
// removable limit).
InteriorSample recover_interior(const SElementOperator& op, const Eigen::VectorXd& h_b, double xi,
                                int edge, double eta);

// Same with the participation vector c already computed (the per-element
// constant across many samples).
InteriorSample recover_with_participation(const SElementOperator& op, const Eigen::VectorXcd& c,
                                          double xi, int edge, double eta);

Eigen::VectorXcd modal_participation(const SElementOperator& op, const Eigen::VectorXd& h_b);

struct LocalCoords {
    int edge = 0;
    double xi = 0.0;
    double eta = 0.0;
};

// Inverts the centroid-ray map p = center + xi * (boundary point on `edge`).
// Empty when the point is not inside the element.
std::optional<LocalCoords> locate_in_element(const ScaledBoundaryGeometry& g, Point p);

// Samples a nodal solution anywhere in the mesh through the semi-analytic
// element interiors. Ties on shared edges resolve to the lowest element id
// (elements are scanned in stored order). Participation vectors are cached
// per element at construction.
class FieldSampler {
  public:
    FieldSampler(const PolygonMesh& mesh, const std::vector<SElementOperator>& ops,
                 const GlobalSystem& sys, Eigen::VectorXd field);

    double head(Point p) const;
    InteriorSample sample(Point p) const;
    std::pair<int, LocalCoords> locate(Point p) const;  // throws when outside

    int n_elements() const { return static_cast<int>(ops_->size()); }
    const SElementOperator& op(int e) const { return (*ops_)[e]; }
    const Eigen::VectorXcd& participation(int e) const { return c_[e]; }
    const Eigen::VectorXd& field() const { return field_; }
    Eigen::VectorXd element_heads(int e) const;

  private:
    const PolygonMesh* mesh_;
    const std::vector<SElementOperator>* ops_;
    const GlobalSystem* sys_;
    Eigen::VectorXd field_;
    std::vector<Eigen::VectorXcd> c_;
    struct ElemBox {
        double x0, y0, x1, y1;
    };
    std::vector<ElemBox> boxes_;
};

// Relative L2 distance between a solved field and a reference, integrated by
// a centroid-fan of triangles per element with a degree-4 rule, using the
// semi-analytic interior head. The denominator integrates the reference.
double l2_relative_error(const FieldSampler& field, const std::function<double(Point)>& reference);

// Same fan quadrature with the field supplied as a black box, so solutions
// of different discretizations can be measured by one common rule.
double l2_relative_error_fn(const PolygonMesh& mesh, const std::function<double(Point)>& field,
                            const std::function<double(Point)>& reference);

}  // namespace psb
