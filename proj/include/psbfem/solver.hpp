#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "psbfem/element.hpp"
#include "psbfem/model.hpp"

namespace psb {

// Global sparse operators. Dof k belongs to the k-th node of the mesh's
// id-sorted node list.
struct GlobalSystem {
    Eigen::SparseMatrix<double> K;
    Eigen::SparseMatrix<double> M;
    std::vector<int> dof_node_ids;  // dof index -> node id (ascending)

    int n_dof() const { return static_cast<int>(dof_node_ids.size()); }
    int dof_of(int node_id) const;  // throws on unknown id
};

GlobalSystem assemble_global(const PolygonMesh& mesh, const std::vector<SElementOperator>& ops);

// Boundary data resolved at one time instant.
struct BoundaryConditions {
    std::vector<std::pair<int, double>> dirichlet;  // (dof, head), sorted by dof
    Eigen::VectorXd q;                              // nodal source vector, length n_dof
};

struct SolutionField {
    Eigen::VectorXd h;          // nodal heads, length n_dof
    Eigen::VectorXd reactions;  // (K h - q) at constrained dofs, 0 elsewhere
    double residual = 0.0;      // relative residual of the reduced solve
};

struct SolutionHistory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> fields;
};

using LogSink = std::function<void(const std::string&)>;

// Dirichlet handling by elimination: rows/columns of constrained dofs are
// removed and their contributions moved to the right-hand side; reactions
// are recovered afterwards from the full operator.
SolutionField solve_steady(const GlobalSystem& sys, const BoundaryConditions& bc,
                           const LogSink& log = nullptr);

// One backward-difference step: (K + M/dt) h1 = q(t+dt) + (M/dt) h0. The
// factorization is reused while dt and the constrained dof set stay fixed.
class TransientStepper {
  public:
    explicit TransientStepper(const GlobalSystem& sys);
    Eigen::VectorXd step(double dt, const Eigen::VectorXd& h0, const BoundaryConditions& bc,
                         const LogSink& log = nullptr);

  private:
    struct Cache;
    const GlobalSystem& sys_;
    std::shared_ptr<Cache> cache_;
};

// Everything needed to run a model: formed elements plus the assembled system.
struct AssembledModel {
    std::vector<SElementOperator> elements;  // parallel to mesh.elements
    GlobalSystem system;
};

AssembledModel assemble_model(const SeepageModel& model);

// Dirichlet/flux sets evaluated at time t (schedules sampled, edge inflow
// lumped onto nodes by the trapezoidal rule).
BoundaryConditions resolve_bcs(const SeepageModel& model, const GlobalSystem& sys, double t);

// Marches t = dt, 2dt, ..., t_end from the model's initial field; history
// index 0 holds the initial state at t = 0. Works with any assembled system
// whose dofs follow the model's node ordering.
SolutionHistory run_transient(const SeepageModel& model, const GlobalSystem& sys,
                              const LogSink& log = nullptr);

}  // namespace psb
