#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "psbfem/model.hpp"
#include "psbfem/solver.hpp"

namespace psb {

struct VerificationCheck {
    std::string name;
    double value = 0.0;  // measured quantity
    double limit = 0.0;  // pass threshold pinned by the suite
    bool pass = false;
};

struct StudyRow {
    double h = 0.0;  // characteristic mesh size
    int n_dof = 0;
    double error = 0.0;
    double rate = 0.0;  // NaN on the first row and for round-off ("exact") rows
};

struct VerificationReport {
    std::string suite;
    bool pass = false;
    std::vector<VerificationCheck> checks;
    std::vector<StudyRow> table;
    std::vector<std::string> notes;
    double seconds = 0.0;

    std::string to_text() const;
    // Table rows (h,n_dof,error,rate) when a study table exists, otherwise
    // check rows (name,value,limit,pass).
    std::string to_csv() const;
};

// ||a - b||_2 / ||b||_2 over plain sample vectors (e.g. monitor values).
double pointwise_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Boundary data for the dense reference integrator at one time instant.
struct OdeBcSample {
    Eigen::VectorXd q;          // nodal sources, length n_dof
    std::vector<double> value;  // prescribed heads, parallel to constrained dofs
    std::vector<double> rate;   // their time derivatives
};
using OdeBcFn = std::function<OdeBcSample(double)>;

// Classical 4th-order integration of M dh/dt + K h = q(t) with the
// constrained dofs substituted exactly (their rates enter through the
// mass coupling). Each output interval is cut into `substeps` stages;
// rates are sampled at substep midpoints so piecewise-constant schedule
// slopes never alias at their knots. Dense arithmetic — guarded to
// n_dof <= 500.
SolutionHistory ode_oracle(const GlobalSystem& sys, const std::vector<int>& constrained_dofs,
                           const Eigen::VectorXd& h0, double out_dt, double t_end,
                           const OdeBcFn& bc, int substeps = 1000);

// Model-driven wrapper: boundary data from the model's Dirichlet sets and
// schedules, initial state per its transient block, outputs every dt.
SolutionHistory ode_oracle(const SeepageModel& model, const GlobalSystem& sys,
                           int substeps = 1000);

// Solves each model and tabulates relative L2 errors against the reference
// plus observed rates log(e_i/e_{i+1})/log(h_i/h_{i+1}). Errors below
// round-off leave the rate NaN (the row is "exact"). Set `fem` to use the
// bilinear reference solver instead of the polygon solver.
std::vector<StudyRow> convergence_study(const std::vector<SeepageModel>& models,
                                        const std::vector<double>& sizes,
                                        const std::function<double(Point)>& reference,
                                        bool fem = false);

// Named verification suites mirroring the acceptance gate:
// patch, element, convergence, fem-compare, inclusion, transient-oracle,
// transient-fem, parser.
std::vector<std::string> suite_names();
VerificationReport run_suite(const std::string& name, const LogSink& log = nullptr);

}  // namespace psb
