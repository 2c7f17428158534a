#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psbfem/mesh.hpp"

namespace psb {

struct Material {
    double kx = 1.0;  // permeability, length/time
    double ky = 1.0;
    double Ss = 0.0;  // specific storage, 1/length
};

// Piecewise-linear value vs time; constant extrapolation beyond the knots.
struct Schedule {
    std::vector<std::pair<double, double>> knots;  // (t, value), t strictly increasing
    double eval(double t) const;
    double rate(double t) const;  // right-continuous slope; 0 beyond the knots
};

struct DirichletSet {
    std::string name;
    std::vector<int> nodes;   // resolved node ids, sorted
    double head = 0.0;        // used when schedule_id is empty
    std::string schedule_id;  // non-empty: head follows the schedule
};

struct FluxSet {
    std::string name;
    std::vector<std::pair<int, int>> edges;  // boundary edges (node id pairs)
    double inflow = 0.0;                     // prescribed inflow per unit edge length
};

struct TransientSpec {
    double dt = 0.0;
    double t_end = 0.0;
    enum class Init { steady, constant, field };
    Init init = Init::steady;      // steady: solve the t=0 BCs for the start field
    double init_value = 0.0;       // constant
    std::vector<double> init_field;  // field: per node, in node-id order
    int output_stride = 1;         // keep every k-th step in the history
};

struct MonitorPoint {
    std::string name;
    Point p;
};

struct SeepageModel {
    PolygonMesh mesh;
    std::map<int, Material> materials;
    std::vector<DirichletSet> dirichlet;
    std::vector<FluxSet> flux;
    std::map<std::string, Schedule> schedules;
    std::optional<TransientSpec> transient;
    std::vector<MonitorPoint> monitors;
    std::string unit_note;

    const Material& material(int id) const;

    // Cross-reference and invariant checks (materials resolve, nodes exist,
    // schedules exist and are well-formed, dt > 0, ...). Throws model errors.
    void validate() const;
};

}  // namespace psb
