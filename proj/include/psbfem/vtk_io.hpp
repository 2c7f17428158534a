#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "psbfem/element.hpp"
#include "psbfem/mesh.hpp"
#include "psbfem/solver.hpp"

namespace psb {

// Legacy ASCII VTK (unstructured grid, polygons as cell type 7) with one
// SCALARS block per named nodal field. When ops/sys are given, the first
// field's Darcy flux is appended as cell-centered vectors (each element's
// edge-midpoint samples at xi = 0.5, averaged). Output is byte-stable for
// identical inputs; doubles print with %.17g.
void export_vtk(const PolygonMesh& mesh,
                const std::vector<std::pair<std::string, Eigen::VectorXd>>& nodal_fields,
                const std::string& path, const std::vector<SElementOperator>* ops = nullptr,
                const GlobalSystem* sys = nullptr);

// Monitor traces: header "t,<name>...", one row per time, %.17g values.
// values[i] holds the trace of monitor i (one entry per time).
std::string monitor_csv_text(const std::vector<std::string>& names,
                             const std::vector<double>& times,
                             const std::vector<std::vector<double>>& values);
void export_monitor_csv(const std::vector<std::string>& names, const std::vector<double>& times,
                        const std::vector<std::vector<double>>& values, const std::string& path);

// Verification-report table as CSV text (used by the CLI and tests).
std::string format_double(double v);  // shortest %.17g form

}  // namespace psb
