#pragma once

#include <Eigen/Dense>
#include <functional>

#include "psbfem/model.hpp"
#include "psbfem/solver.hpp"

namespace psb {

// Minimal bilinear-quadrilateral reference solver used as the independent
// cross-check. Conductivity int(B^T k B) and consistent storage
// int(N^T Ss N), both with 2x2 Gauss. Boundary handling and time stepping
// are the shared solve_steady / TransientStepper code paths, so the two
// methods differ only in their element operators.
GlobalSystem assemble_fem(const SeepageModel& model);  // rejects non-quads

// Relative L2 error of a bilinear FEM field against a reference function,
// integrated with 3x3 Gauss per quad.
double fem_l2_relative_error(const SeepageModel& model, const GlobalSystem& sys,
                             const Eigen::VectorXd& h, const std::function<double(Point)>& ref);

// Bilinear interpolation of a nodal field at a point (Newton inversion of
// the isoparametric map; throws when the point is outside every quad).
double fem_sample(const SeepageModel& model, const GlobalSystem& sys, const Eigen::VectorXd& h,
                  Point p);

// Convenience drivers sharing the exact solver code paths.
SolutionField fem_solve_steady(const SeepageModel& model, const GlobalSystem& sys,
                               const LogSink& log = nullptr);

}  // namespace psb
