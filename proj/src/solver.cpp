#include "psbfem/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <set>

#include "psbfem/errors.hpp"

namespace psb {

int GlobalSystem::dof_of(int node_id) const {
    auto it = std::lower_bound(dof_node_ids.begin(), dof_node_ids.end(), node_id);
    if (it == dof_node_ids.end() || *it != node_id)
        throw Error(ErrorCode::solver, "node id " + std::to_string(node_id) + " has no dof");
    return static_cast<int>(it - dof_node_ids.begin());
}

GlobalSystem assemble_global(const PolygonMesh& mesh, const std::vector<SElementOperator>& ops) {
    if (ops.size() != mesh.elements.size())
        throw Error(ErrorCode::solver, "one element operator required per mesh element");
    GlobalSystem sys;
    sys.dof_node_ids.reserve(mesh.nodes.size());
    for (const Node& n : mesh.nodes) sys.dof_node_ids.push_back(n.id);

    std::vector<Eigen::Triplet<double>> tk, tm;
    for (const auto& op : ops) {
        const int n = op.geometry.n();
        std::vector<int> dofs(n);
        for (int i = 0; i < n; ++i) dofs[i] = sys.dof_of(op.geometry.node_ids[i]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                tk.emplace_back(dofs[i], dofs[j], op.K(i, j));
                if (op.M.size() > 0 && op.M(i, j) != 0.0)
                    tm.emplace_back(dofs[i], dofs[j], op.M(i, j));
            }
    }
    const int nd = sys.n_dof();
    sys.K.resize(nd, nd);
    sys.K.setFromTriplets(tk.begin(), tk.end());
    sys.M.resize(nd, nd);
    sys.M.setFromTriplets(tm.begin(), tm.end());
    return sys;
}

namespace {

struct Eliminated {
    std::vector<int> free_of_dof;  // dof -> free index, -1 if constrained
    std::vector<int> dof_of_free;  // free index -> dof
    Eigen::VectorXd h_c;           // full-length vector with constrained values

    Eliminated(int n_dof, const std::vector<std::pair<int, double>>& dirichlet)
        : free_of_dof(n_dof, 0), h_c(Eigen::VectorXd::Zero(n_dof)) {
        for (const auto& [dof, value] : dirichlet) {
            if (dof < 0 || dof >= n_dof)
                throw Error(ErrorCode::solver, "dirichlet dof out of range");
            free_of_dof[dof] = -1;
            h_c[dof] = value;
        }
        for (int d = 0; d < n_dof; ++d)
            if (free_of_dof[d] == 0) {
                free_of_dof[d] = static_cast<int>(dof_of_free.size());
                dof_of_free.push_back(d);
            }
    }

    Eigen::SparseMatrix<double> reduce(const Eigen::SparseMatrix<double>& A) const {
        std::vector<Eigen::Triplet<double>> t;
        for (int col = 0; col < A.outerSize(); ++col) {
            if (free_of_dof[col] < 0) continue;
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
                if (free_of_dof[it.row()] >= 0)
                    t.emplace_back(free_of_dof[it.row()], free_of_dof[col], it.value());
        }
        Eigen::SparseMatrix<double> R(static_cast<int>(dof_of_free.size()),
                                      static_cast<int>(dof_of_free.size()));
        R.setFromTriplets(t.begin(), t.end());
        return R;
    }

    Eigen::VectorXd gather_free(const Eigen::VectorXd& full) const {
        Eigen::VectorXd v(dof_of_free.size());
        for (std::size_t i = 0; i < dof_of_free.size(); ++i) v[i] = full[dof_of_free[i]];
        return v;
    }

    Eigen::VectorXd expand(const Eigen::VectorXd& free_values) const {
        Eigen::VectorXd h = h_c;
        for (std::size_t i = 0; i < dof_of_free.size(); ++i) h[dof_of_free[i]] = free_values[i];
        return h;
    }
};

double relative_residual(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b) {
    const double nb = b.norm();
    const double r = (A * x - b).norm();
    return nb > 0.0 ? r / nb : r;
}

}  // namespace

SolutionField solve_steady(const GlobalSystem& sys, const BoundaryConditions& bc,
                           const LogSink& log) {
    if (bc.dirichlet.empty())
        throw Error(ErrorCode::solver, "steady solve needs at least one dirichlet node");
    const Eliminated el(sys.n_dof(), bc.dirichlet);
    SolutionField out;
    if (el.dof_of_free.empty()) {
        out.h = el.h_c;
        out.residual = 0.0;
    } else {
        const Eigen::SparseMatrix<double> Kff = el.reduce(sys.K);
        const Eigen::VectorXd rhs = el.gather_free(bc.q - sys.K * el.h_c);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kff);
        if (ldlt.info() != Eigen::Success)
            throw Error(ErrorCode::solver, "steady factorization failed (singular system)");
        const Eigen::VectorXd hf = ldlt.solve(rhs);
        out.residual = relative_residual(Kff, hf, rhs);
        if (!(out.residual < 1e-10))
            throw Error(ErrorCode::solver,
                        "steady solve residual " + std::to_string(out.residual));
        out.h = el.expand(hf);
    }
    out.reactions = Eigen::VectorXd::Zero(sys.n_dof());
    const Eigen::VectorXd full = sys.K * out.h - bc.q;
    for (const auto& [dof, value] : bc.dirichlet) out.reactions[dof] = full[dof];
    if (log)
        log("steady solve: " + std::to_string(el.dof_of_free.size()) + " free dofs, residual " +
            std::to_string(out.residual));
    return out;
}

struct TransientStepper::Cache {
    double dt = -1.0;
    std::vector<int> constrained;  // sorted constrained dofs the factorization assumes
    Eigen::SparseMatrix<double> A;  // K + M/dt (full)
    std::unique_ptr<Eliminated> el;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

TransientStepper::TransientStepper(const GlobalSystem& sys)
    : sys_(sys), cache_(std::make_shared<Cache>()) {}

Eigen::VectorXd TransientStepper::step(double dt, const Eigen::VectorXd& h0,
                                       const BoundaryConditions& bc, const LogSink& log) {
    if (!(dt > 0.0)) throw Error(ErrorCode::solver, "time step must be > 0");
    std::vector<int> constrained;
    constrained.reserve(bc.dirichlet.size());
    for (const auto& [dof, value] : bc.dirichlet) constrained.push_back(dof);
    std::sort(constrained.begin(), constrained.end());

    Cache& c = *cache_;
    const bool reuse = c.dt == dt && c.constrained == constrained;
    if (!reuse) {
        c.dt = dt;
        c.constrained = constrained;
        c.A = sys_.K + (sys_.M * (1.0 / dt));
        c.el = std::make_unique<Eliminated>(sys_.n_dof(), bc.dirichlet);
        const Eigen::SparseMatrix<double> Aff = c.el->reduce(c.A);
        c.ldlt.compute(Aff);
        if (c.ldlt.info() != Eigen::Success)
            throw Error(ErrorCode::solver, "transient factorization failed (singular system)");
    }
    if (log) log(std::string("transient step: factorization ") + (reuse ? "reused" : "computed"));

    // constrained entries of h_c must carry the *current* prescribed values
    Eliminated el(sys_.n_dof(), bc.dirichlet);
    const Eigen::VectorXd rhs_full = bc.q + sys_.M * (h0 / dt) - c.A * el.h_c;
    if (el.dof_of_free.empty()) return el.h_c;
    const Eigen::VectorXd hf = c.ldlt.solve(el.gather_free(rhs_full));
    return el.expand(hf);
}

AssembledModel assemble_model(const SeepageModel& model) {
    model.validate();
    AssembledModel am;
    am.elements.reserve(model.mesh.elements.size());
    for (const auto& e : model.mesh.elements)
        am.elements.push_back(form_element(model.mesh.element_polygon(e), e.node_ids,
                                           model.material(e.material_id)));
    am.system = assemble_global(model.mesh, am.elements);
    return am;
}

BoundaryConditions resolve_bcs(const SeepageModel& model, const GlobalSystem& sys, double t) {
    BoundaryConditions bc;
    bc.q = Eigen::VectorXd::Zero(sys.n_dof());
    std::vector<double> value(sys.n_dof(), 0.0);
    std::vector<bool> set(sys.n_dof(), false);
    for (const auto& ds : model.dirichlet) {
        const double head =
            ds.schedule_id.empty() ? ds.head : model.schedules.at(ds.schedule_id).eval(t);
        for (int id : ds.nodes) {
            const int dof = sys.dof_of(id);
            if (set[dof] && value[dof] != head)
                throw Error(ErrorCode::model,
                            "conflicting dirichlet heads at node " + std::to_string(id));
            set[dof] = true;
            value[dof] = head;
        }
    }
    for (int d = 0; d < sys.n_dof(); ++d)
        if (set[d]) bc.dirichlet.emplace_back(d, value[d]);
    for (const auto& fs : model.flux) {
        for (const auto& [a, b] : fs.edges) {
            const double len = distance(model.mesh.node(a).p, model.mesh.node(b).p);
            bc.q[sys.dof_of(a)] += 0.5 * fs.inflow * len;
            bc.q[sys.dof_of(b)] += 0.5 * fs.inflow * len;
        }
    }
    return bc;
}

SolutionHistory run_transient(const SeepageModel& model, const GlobalSystem& sys,
                              const LogSink& log) {
    if (!model.transient) throw Error(ErrorCode::model, "model has no transient block");
    const TransientSpec& ts = *model.transient;

    Eigen::VectorXd h0;
    switch (ts.init) {
        case TransientSpec::Init::steady:
            h0 = solve_steady(sys, resolve_bcs(model, sys, 0.0), log).h;
            break;
        case TransientSpec::Init::constant:
            h0 = Eigen::VectorXd::Constant(sys.n_dof(), ts.init_value);
            break;
        case TransientSpec::Init::field:
            h0 = Eigen::Map<const Eigen::VectorXd>(ts.init_field.data(),
                                                   static_cast<int>(ts.init_field.size()));
            break;
    }
    // prescribed heads hold exactly even for non-steady initial fields
    for (const auto& [dof, value] : resolve_bcs(model, sys, 0.0).dirichlet) h0[dof] = value;

    SolutionHistory hist;
    hist.times.push_back(0.0);
    hist.fields.push_back(h0);

    TransientStepper stepper(sys);
    Eigen::VectorXd h = h0;
    const long n_steps = std::lround(ts.t_end / ts.dt);
    if (!(n_steps >= 1) || std::abs(n_steps * ts.dt - ts.t_end) > 1e-9 * ts.t_end)
        throw Error(ErrorCode::model, "t_end must be an integer multiple of dt");
    for (long k = 1; k <= n_steps; ++k) {
        const double t = k * ts.dt;
        h = stepper.step(ts.dt, h, resolve_bcs(model, sys, t), log);
        if (k % ts.output_stride == 0 || k == n_steps) {
            hist.times.push_back(t);
            hist.fields.push_back(h);
        }
    }
    return hist;
}

}  // namespace psb
