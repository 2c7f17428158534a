#include "psbfem/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "psbfem/deck.hpp"
#include "psbfem/errors.hpp"
#include "psbfem/fem_reference.hpp"
#include "psbfem/fixtures.hpp"
#include "psbfem/model_io.hpp"
#include "psbfem/recovery.hpp"

namespace psb {

namespace {

constexpr double kRoundoffError = 1e-12;  // relative errors below this are "exact"

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void check_max(VerificationReport& rep, const std::string& name, double value, double limit) {
    rep.checks.push_back({name, value, limit, value <= limit});
}

void check_true(VerificationReport& rep, const std::string& name, bool ok, double value = 0.0) {
    rep.checks.push_back({name, value, 0.0, ok});
}

}  // namespace

std::string VerificationReport::to_text() const {
    std::ostringstream out;
    out << "suite " << suite << ": " << (pass ? "PASS" : "FAIL") << "  (" << fmt(seconds)
        << " s)\n";
    if (!table.empty()) {
        out << "  h            n_dof    error        rate\n";
        for (const auto& r : table) {
            out << "  " << fmt(r.h);
            for (std::size_t k = fmt(r.h).size(); k < 13; ++k) out << ' ';
            std::string nd = std::to_string(r.n_dof);
            out << nd;
            for (std::size_t k = nd.size(); k < 9; ++k) out << ' ';
            out << fmt(r.error);
            for (std::size_t k = fmt(r.error).size(); k < 13; ++k) out << ' ';
            if (std::isnan(r.rate))
                out << (r.error < kRoundoffError ? "exact" : "-");
            else
                out << fmt(r.rate);
            out << '\n';
        }
    }
    for (const auto& c : checks)
        out << "  [" << (c.pass ? "ok" : "FAIL") << "] " << c.name << ": " << fmt(c.value)
            << " (limit " << fmt(c.limit) << ")\n";
    for (const auto& n : notes) out << "  note: " << n << '\n';
    return out.str();
}

std::string VerificationReport::to_csv() const {
    std::ostringstream out;
    if (!table.empty()) {
        out << "h,n_dof,error,rate\n";
        for (const auto& r : table) {
            out << fmt(r.h) << ',' << r.n_dof << ',' << fmt(r.error) << ',';
            if (!std::isnan(r.rate)) out << fmt(r.rate);
            out << '\n';
        }
    } else {
        out << "check,value,limit,pass\n";
        for (const auto& c : checks)
            out << c.name << ',' << fmt(c.value) << ',' << fmt(c.limit) << ','
                << (c.pass ? 1 : 0) << '\n';
    }
    return out.str();
}

double pointwise_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::invalid_argument, "sample vectors differ in length");
    const double den = b.norm();
    if (den == 0.0) throw Error(ErrorCode::verify, "reference sample vector has zero norm");
    return (a - b).norm() / den;
}

SolutionHistory ode_oracle(const GlobalSystem& sys, const std::vector<int>& constrained_dofs,
                           const Eigen::VectorXd& h0, double out_dt, double t_end,
                           const OdeBcFn& bc, int substeps) {
    const int nd = sys.n_dof();
    if (nd > 500)
        throw Error(ErrorCode::verify,
                    "dense reference integrator is guarded to 500 dofs, got " +
                        std::to_string(nd));
    if (!(out_dt > 0.0) || !(t_end >= out_dt) || substeps < 1)
        throw Error(ErrorCode::invalid_argument, "bad oracle stepping parameters");
    const long n_out = std::lround(t_end / out_dt);
    if (std::abs(n_out * out_dt - t_end) > 1e-9 * t_end)
        throw Error(ErrorCode::invalid_argument, "t_end must be an integer multiple of out_dt");

    std::vector<bool> fixed(nd, false);
    for (int d : constrained_dofs) fixed[d] = true;
    std::vector<int> free_dofs;
    for (int d = 0; d < nd; ++d)
        if (!fixed[d]) free_dofs.push_back(d);
    const int nf = static_cast<int>(free_dofs.size());
    const int nc = static_cast<int>(constrained_dofs.size());

    const Eigen::MatrixXd K = Eigen::MatrixXd(sys.K);
    const Eigen::MatrixXd M = Eigen::MatrixXd(sys.M);
    Eigen::MatrixXd Kff(nf, nf), Kfc(nf, nc), Mff(nf, nf), Mfc(nf, nc);
    for (int i = 0; i < nf; ++i) {
        for (int j = 0; j < nf; ++j) {
            Kff(i, j) = K(free_dofs[i], free_dofs[j]);
            Mff(i, j) = M(free_dofs[i], free_dofs[j]);
        }
        for (int j = 0; j < nc; ++j) {
            Kfc(i, j) = K(free_dofs[i], constrained_dofs[j]);
            Mfc(i, j) = M(free_dofs[i], constrained_dofs[j]);
        }
    }
    Eigen::LLT<Eigen::MatrixXd> mll(Mff);
    if (mll.info() != Eigen::Success)
        throw Error(ErrorCode::verify,
                    "free-dof storage matrix is not positive definite; no ODE form");

    const auto rhs = [&](double t_value, const Eigen::VectorXd& hf, const OdeBcSample& at_value,
                         const std::vector<double>& mid_rate) {
        (void)t_value;
        Eigen::VectorXd qf(nf);
        for (int i = 0; i < nf; ++i) qf[i] = at_value.q[free_dofs[i]];
        Eigen::VectorXd hc(nc), dhc(nc);
        for (int j = 0; j < nc; ++j) {
            hc[j] = at_value.value[j];
            dhc[j] = mid_rate[j];
        }
        return mll.solve((qf - Kff * hf - Kfc * hc - Mfc * dhc).eval()).eval();
    };

    Eigen::VectorXd hf(nf);
    for (int i = 0; i < nf; ++i) hf[i] = h0[free_dofs[i]];

    SolutionHistory hist;
    const auto record = [&](double t) {
        const OdeBcSample s = bc(t);
        Eigen::VectorXd full = Eigen::VectorXd::Zero(nd);
        for (int i = 0; i < nf; ++i) full[free_dofs[i]] = hf[i];
        for (int j = 0; j < nc; ++j) full[constrained_dofs[j]] = s.value[j];
        hist.times.push_back(t);
        hist.fields.push_back(std::move(full));
    };
    record(0.0);

    const double delta = out_dt / substeps;
    for (long ko = 0; ko < n_out; ++ko) {
        const double t0 = ko * out_dt;
        for (int ks = 0; ks < substeps; ++ks) {
            const double a = t0 + ks * delta;
            // schedule slopes are piecewise constant; sampling them mid-step
            // keeps every stage consistent with the step's own segment
            const std::vector<double> rate = bc(a + 0.5 * delta).rate;
            const OdeBcSample s0 = bc(a);
            const OdeBcSample sm = bc(a + 0.5 * delta);
            const OdeBcSample s1 = bc(a + delta);
            const Eigen::VectorXd k1 = rhs(a, hf, s0, rate);
            const Eigen::VectorXd k2 = rhs(a, (hf + 0.5 * delta * k1).eval(), sm, rate);
            const Eigen::VectorXd k3 = rhs(a, (hf + 0.5 * delta * k2).eval(), sm, rate);
            const Eigen::VectorXd k4 = rhs(a, (hf + delta * k3).eval(), s1, rate);
            hf += (delta / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        record((ko + 1) * out_dt);
    }
    return hist;
}

SolutionHistory ode_oracle(const SeepageModel& model, const GlobalSystem& sys, int substeps) {
    if (!model.transient) throw Error(ErrorCode::model, "model has no transient block");
    const TransientSpec& ts = *model.transient;

    const BoundaryConditions bc0 = resolve_bcs(model, sys, 0.0);
    std::vector<int> constrained;
    for (const auto& [dof, value] : bc0.dirichlet) constrained.push_back(dof);

    const OdeBcFn bcfn = [&model, &sys, &constrained](double t) {
        OdeBcSample s;
        const BoundaryConditions bc = resolve_bcs(model, sys, t);
        s.q = bc.q;
        s.value.resize(constrained.size());
        s.rate.assign(constrained.size(), 0.0);
        for (std::size_t j = 0; j < constrained.size(); ++j) s.value[j] = bc.dirichlet[j].second;
        for (const auto& ds : model.dirichlet) {
            if (ds.schedule_id.empty()) continue;
            const double r = model.schedules.at(ds.schedule_id).rate(t);
            for (int id : ds.nodes) {
                const int dof = sys.dof_of(id);
                const auto it = std::lower_bound(constrained.begin(), constrained.end(), dof);
                if (it != constrained.end() && *it == dof) s.rate[it - constrained.begin()] = r;
            }
        }
        return s;
    };

    Eigen::VectorXd h0;
    switch (ts.init) {
        case TransientSpec::Init::steady: h0 = solve_steady(sys, bc0).h; break;
        case TransientSpec::Init::constant:
            h0 = Eigen::VectorXd::Constant(sys.n_dof(), ts.init_value);
            break;
        case TransientSpec::Init::field:
            h0 = Eigen::Map<const Eigen::VectorXd>(ts.init_field.data(),
                                                   static_cast<int>(ts.init_field.size()));
            break;
    }
    for (const auto& [dof, value] : bc0.dirichlet) h0[dof] = value;

    return ode_oracle(sys, constrained, h0, ts.dt, ts.t_end, bcfn, substeps);
}

std::vector<StudyRow> convergence_study(const std::vector<SeepageModel>& models,
                                        const std::vector<double>& sizes,
                                        const std::function<double(Point)>& reference,
                                        bool fem) {
    if (models.size() != sizes.size())
        throw Error(ErrorCode::invalid_argument, "one size per model required");
    std::vector<StudyRow> rows;
    for (std::size_t i = 0; i < models.size(); ++i) {
        StudyRow row;
        row.h = sizes[i];
        if (fem) {
            const GlobalSystem sys = assemble_fem(models[i]);
            const SolutionField sol = fem_solve_steady(models[i], sys);
            row.error = fem_l2_relative_error(models[i], sys, sol.h, reference);
            row.n_dof = sys.n_dof();
        } else {
            const AssembledModel am = assemble_model(models[i]);
            const SolutionField sol =
                solve_steady(am.system, resolve_bcs(models[i], am.system, 0.0));
            const FieldSampler sampler(models[i].mesh, am.elements, am.system, sol.h);
            row.error = l2_relative_error(sampler, reference);
            row.n_dof = am.system.n_dof();
        }
        row.rate = std::numeric_limits<double>::quiet_NaN();
        if (!rows.empty()) {
            const StudyRow& prev = rows.back();
            if (prev.error > kRoundoffError && row.error > kRoundoffError)
                row.rate = std::log(prev.error / row.error) / std::log(prev.h / row.h);
        }
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// suites

namespace {

SolutionField solve_model(const AssembledModel& am, const SeepageModel& model, double t = 0.0) {
    return solve_steady(am.system, resolve_bcs(model, am.system, t));
}

VerificationReport suite_patch() {
    VerificationReport rep;
    rep.suite = "patch";
    const std::vector<std::pair<std::string, PolygonMesh>> meshes = {
        {"uniform_quads_4x4", fixtures::rect_grid_mesh(4, 4, 1.0, 1.0)},
        {"mixed_tri_quad_pentagon", fixtures::figure4_mesh()},
        {"balanced_quadtree_hanging", fixtures::corner_refined_quadtree()},
        {"uniform_quadtree_d2", fixtures::unit_square_quadtree(2)},
        {"stretched_quads_5x3", fixtures::rect_grid_mesh(5, 3, 2.5, 1.2)},
    };
    for (const auto& [name, mesh] : meshes) {
        SeepageModel model = fixtures::patch_model(mesh);
        const AssembledModel am = assemble_model(model);
        const SolutionField sol = solve_model(am, model);

        double nodal = 0.0;
        for (int d = 0; d < am.system.n_dof(); ++d) {
            const Point p = model.mesh.node(am.system.dof_node_ids[d]).p;
            nodal = std::max(nodal, std::abs(sol.h[d] - fixtures::patch_field(p)));
        }
        const FieldSampler sampler(model.mesh, am.elements, am.system, sol.h);
        double sampled = 0.0;
        for (const auto& e : model.mesh.elements) {
            const std::vector<Point> poly = model.mesh.element_polygon(e);
            const AreaCentroid ac = polygon_area_centroid(poly);
            const auto probe = [&](Point p) {
                sampled = std::max(sampled,
                                   std::abs(sampler.head(p) - fixtures::patch_field(p)));
            };
            probe(ac.centroid);
            for (std::size_t v = 0; v < poly.size(); ++v) {
                probe(ac.centroid + 0.55 * (poly[v] - ac.centroid));
                const Point mid = 0.5 * (poly[v] + poly[(v + 1) % poly.size()]);
                probe(ac.centroid + 0.5 * (mid - ac.centroid));
            }
        }
        check_max(rep, name + "_nodal", nodal, 1e-10);
        check_max(rep, name + "_sampled", sampled, 1e-10);
    }
    return rep;
}

std::vector<Point> random_star_polygon(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> uang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> urad(0.5, 1.5);
    for (;;) {
        std::vector<double> ang(n);
        for (auto& a : ang) a = uang(rng);
        std::sort(ang.begin(), ang.end());
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            const double next = i + 1 < n ? ang[i + 1] : ang[0] + 2.0 * M_PI;
            if (next - ang[i] < 0.25) ok = false;
        }
        if (!ok) continue;
        std::vector<Point> poly;
        poly.reserve(n);
        for (int i = 0; i < n; ++i) {
            const double r = urad(rng);
            poly.push_back({2.0 + r * std::cos(ang[i]), 1.0 + r * std::sin(ang[i])});
        }
        return poly;
    }
}

VerificationReport suite_element() {
    VerificationReport rep;
    rep.suite = "element";
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> ulogk(-1.0, 1.0);
    std::uniform_real_distribution<double> uss(0.0, 1.0);
    std::uniform_int_distribution<int> uverts(3, 8);

    double worst_e0 = std::numeric_limits<double>::max();  // min eig of E0 (relative)
    double worst_e2 = 0.0;                                 // most negative eig of E2 (relative)
    double worst_pair = 0.0;                               // eigenvalue +- pairing defect
    double worst_kernel = 0.0;                             // |smallest eig of K| / ||K||
    double worst_k1 = std::numeric_limits<double>::max();  // 2nd eig of K (relative, must be > 0)
    double worst_kone = 0.0;                               // ||K 1|| / ||K||
    double worst_mass_id = 0.0;                            // low-frequency identity residual
    double worst_mass_sum = 0.0;                           // |sum M - Ss area| / (Ss area)
    int retries = 0;

    const int n_elements = 100;
    for (int trial = 0; trial < n_elements; ++trial) {
        const int n = uverts(rng);
        Material mat;
        mat.kx = std::pow(10.0, ulogk(rng));
        mat.ky = std::pow(10.0, ulogk(rng));
        mat.Ss = trial == 0 ? 0.0 : uss(rng);  // one explicit storage-free case

        SElementOperator op;
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 200)
                throw Error(ErrorCode::internal, "polygon sampler failed to converge");
            std::vector<Point> poly = random_star_polygon(rng, n);
            std::vector<int> ids(n);
            for (int i = 0; i < n; ++i) ids[i] = i;
            try {
                op = form_element(poly, ids, mat);
                break;
            } catch (const Error&) {
                ++retries;
            }
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(op.coeff.E0);
        worst_e0 = std::min(worst_e0, es0.eigenvalues()(0) / op.coeff.E0.norm());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(op.coeff.E2);
        worst_e2 = std::min(worst_e2, es2.eigenvalues()(0) / op.coeff.E2.norm());

        const Eigen::MatrixXd Z = build_hamiltonian(op.coeff);
        Eigen::EigenSolver<Eigen::MatrixXd> ez(Z, false);
        const Eigen::VectorXcd lam = ez.eigenvalues();
        const double rho = lam.cwiseAbs().maxCoeff();
        for (int i = 0; i < lam.size(); ++i) {
            double best = std::numeric_limits<double>::max();
            for (int j = 0; j < lam.size(); ++j)
                best = std::min(best, std::abs(lam(i) + lam(j)));
            worst_pair = std::max(worst_pair, best / rho);
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(op.K);
        const double knorm = op.K.norm();
        worst_kernel = std::max(worst_kernel, std::abs(ek.eigenvalues()(0)) / knorm);
        worst_k1 = std::min(worst_k1, ek.eigenvalues()(1) / knorm);
        worst_kone = std::max(
            worst_kone, (op.K * Eigen::VectorXd::Ones(n)).norm() / (knorm * std::sqrt(n)));

        worst_mass_id = std::max(worst_mass_id, op.mass_residual);

        const double target = mat.Ss * op.geometry.area;
        if (trial == 0) {
            worst_mass_sum = std::max(worst_mass_sum, op.M.norm());  // must vanish with Ss = 0
        } else {
            worst_mass_sum =
                std::max(worst_mass_sum, std::abs(op.M.sum() - target) / target);
        }
    }

    check_true(rep, "E0_positive_definite", worst_e0 > 0.0, worst_e0);
    check_max(rep, "E2_negative_part", -worst_e2, 1e-12);
    check_max(rep, "eigenvalue_pairing", worst_pair, 1e-8);
    check_max(rep, "K_kernel_constant_mode", worst_kernel, 1e-10);
    check_true(rep, "K_second_eigenvalue_positive", worst_k1 > 1e-12, worst_k1);
    check_max(rep, "K_times_ones", worst_kone, 1e-10);
    check_max(rep, "mass_identity_residual", worst_mass_id, 1e-8);
    check_max(rep, "mass_sum_vs_storage_area", worst_mass_sum, 1e-8);
    rep.notes.push_back(std::to_string(n_elements) + " random polygons, " +
                        std::to_string(retries) + " star-convexity resamples");
    return rep;
}

VerificationReport suite_convergence() {
    VerificationReport rep;
    rep.suite = "convergence";
    std::vector<SeepageModel> models;
    std::vector<double> sizes;
    for (int depth = 2; depth <= 5; ++depth) {
        models.push_back(fixtures::harmonic_model(fixtures::unit_square_quadtree(depth)));
        sizes.push_back(1.0 / (1 << depth));
    }
    rep.table = convergence_study(models, sizes, fixtures::harmonic_ref);
    const double final_rate = rep.table.back().rate;
    check_true(rep, "final_pair_rate_at_least_1.9", final_rate >= 1.9, final_rate);
    return rep;
}

VerificationReport suite_fem_compare() {
    VerificationReport rep;
    rep.suite = "fem-compare";
    // Both solutions are measured by the same quadrature (the common fan
    // rule); otherwise the ratio compares integration rules, not methods.
    // On rectangle meshes the polygon element's solution space coincides
    // with the bilinear space, so equality is the mathematically expected
    // outcome and the limit carries only roundoff headroom.
    for (int n : {4, 8, 16, 32}) {
        const SeepageModel model =
            fixtures::harmonic_model(fixtures::rect_grid_mesh(n, n, 1.0, 1.0));

        const AssembledModel am = assemble_model(model);
        const SolutionField sb = solve_model(am, model);
        const FieldSampler sampler(model.mesh, am.elements, am.system, sb.h);
        const double e_sb = l2_relative_error_fn(
            model.mesh, [&](Point p) { return sampler.head(p); }, fixtures::harmonic_ref);

        const GlobalSystem fem_sys = assemble_fem(model);
        const SolutionField fem = fem_solve_steady(model, fem_sys);
        const double e_fem = l2_relative_error_fn(
            model.mesh, [&](Point p) { return fem_sample(model, fem_sys, fem.h, p); },
            fixtures::harmonic_ref);

        check_max(rep, "error_ratio_n" + std::to_string(n), e_sb / e_fem, 1.0 + 1e-6);
        rep.notes.push_back("n=" + std::to_string(n) + ": polygon " + fmt(e_sb) +
                            ", bilinear " + fmt(e_fem));
    }
    return rep;
}

int node_at(const PolygonMesh& mesh, Point p) {
    for (const auto& n : mesh.nodes)
        if (std::abs(n.p.x - p.x) < 1e-9 && std::abs(n.p.y - p.y) < 1e-9) return n.id;
    throw Error(ErrorCode::verify,
                "no node at (" + fmt(p.x) + ", " + fmt(p.y) + ") for profile comparison");
}

VerificationReport suite_inclusion() {
    VerificationReport rep;
    rep.suite = "inclusion";
    const SeepageModel sb_model = fixtures::inclusion_sbfem_model();
    const SeepageModel fem_model = fixtures::inclusion_fem_model();

    const AssembledModel am = assemble_model(sb_model);
    const SolutionField sb = solve_model(am, sb_model);
    const GlobalSystem fem_sys = assemble_fem(fem_model);
    const SolutionField fem = fem_solve_steady(fem_model, fem_sys);

    for (const auto& [side, x] : {std::pair<std::string, double>{"left", 0.0}, {"right", 1.0}}) {
        Eigen::VectorXd prof_sb(17), prof_fem(17);
        for (int k = 0; k <= 16; ++k) {
            const Point p{x, k / 16.0};
            prof_sb[k] = sb.h[am.system.dof_of(node_at(sb_model.mesh, p))];
            prof_fem[k] = fem.h[fem_sys.dof_of(node_at(fem_model.mesh, p))];
        }
        check_max(rep, side + "_edge_profile_error", pointwise_relative_error(prof_sb, prof_fem),
                  0.005);
    }
    rep.notes.push_back("polygon dofs " + std::to_string(am.system.n_dof()) +
                        ", reference dofs " + std::to_string(fem_sys.n_dof()));
    return rep;
}

SeepageModel small_transient_model(bool ramp) {
    SeepageModel model;
    model.mesh = fixtures::rect_grid_mesh(3, 3, 1.0, 1.0);
    model.materials[1] = {1.0, 1.0, 1.0};
    DirichletSet left{"left", {}, 1.0, ""}, right{"right", {}, 0.0, ""};
    for (const auto& n : model.mesh.nodes) {
        if (n.p.x == 0.0) left.nodes.push_back(n.id);
        if (n.p.x == 1.0) right.nodes.push_back(n.id);
    }
    if (ramp) {
        model.schedules["ramp"] = {{{0.0, 1.0}, {0.25, 2.0}, {0.5, 2.0}}};
        left.schedule_id = "ramp";
    }
    model.dirichlet = {std::move(left), std::move(right)};
    TransientSpec ts;
    ts.dt = 0.05;
    ts.t_end = 0.5;
    ts.init = TransientSpec::Init::steady;
    model.transient = ts;
    model.validate();
    return model;
}

VerificationReport suite_transient_oracle() {
    VerificationReport rep;
    rep.suite = "transient-oracle";
    SeepageModel model = small_transient_model(true);
    const AssembledModel am = assemble_model(model);

    // reference at the end time; substeps chosen so the stage size equals
    // the finest backward-difference step divided by 1000
    SeepageModel oracle_model = model;
    oracle_model.transient->dt = 0.5;
    const SolutionHistory oracle = ode_oracle(oracle_model, am.system, 80000);
    const Eigen::VectorXd h_ref = oracle.fields.back();

    const SolutionHistory self_a = ode_oracle(oracle_model, am.system, 1000);
    const SolutionHistory self_b = ode_oracle(oracle_model, am.system, 2000);
    check_max(rep, "oracle_self_convergence",
              pointwise_relative_error(self_a.fields.back(), self_b.fields.back()), 1e-10);

    std::vector<double> dts = {0.05, 0.025, 0.0125, 0.00625};
    std::vector<double> errs;
    for (double dt : dts) {
        model.transient->dt = dt;
        const SolutionHistory hist = run_transient(model, am.system);
        errs.push_back(pointwise_relative_error(hist.fields.back(), h_ref));
    }
    // least-squares slope of log(e) vs log(dt) = observed order
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        const double x = std::log(dts[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double nlev = static_cast<double>(dts.size());
    const double order = (nlev * sxy - sx * sy) / (nlev * sxx - sx * sx);
    check_max(rep, "observed_order_deviation", std::abs(order - 1.0), 0.1);
    for (std::size_t i = 0; i + 1 < errs.size(); ++i)
        rep.notes.push_back("dt=" + fmt(dts[i]) + ": error " + fmt(errs[i]) + ", pair order " +
                            fmt(std::log2(errs[i] / errs[i + 1])));
    rep.notes.push_back("least-squares order " + fmt(order));

    // fixed steady boundary data must be a fixed point of the stepping
    SeepageModel fixed = small_transient_model(false);
    const AssembledModel am_fixed = assemble_model(fixed);
    const SolutionHistory hist = run_transient(fixed, am_fixed.system);
    double drift = 0.0;
    for (const auto& f : hist.fields)
        drift = std::max(drift, (f - hist.fields.front()).norm() / hist.fields.front().norm());
    check_max(rep, "steady_fixed_point_drift", drift, 1e-10);
    return rep;
}

VerificationReport suite_transient_fem() {
    VerificationReport rep;
    rep.suite = "transient-fem";
    const SeepageModel sb_model = fixtures::dam_sbfem_model();
    const SeepageModel fem_model = fixtures::dam_fem_model();
    const Point monitor = sb_model.monitors.at(0).p;

    const AssembledModel am = assemble_model(sb_model);
    const SolutionHistory sb_hist = run_transient(sb_model, am.system);
    const GlobalSystem fem_sys = assemble_fem(fem_model);
    const SolutionHistory fem_hist = run_transient(fem_model, fem_sys);

    if (sb_hist.times.size() != fem_hist.times.size())
        throw Error(ErrorCode::internal, "history lengths diverged");

    std::vector<double> disc(sb_hist.times.size(), 0.0);
    double worst = 0.0;
    for (std::size_t k = 1; k < sb_hist.times.size(); ++k) {
        const FieldSampler sampler(sb_model.mesh, am.elements, am.system, sb_hist.fields[k]);
        const double v_sb = sampler.head(monitor);
        const double v_fem = fem_sample(fem_model, fem_sys, fem_hist.fields[k], monitor);
        disc[k] = std::abs(v_sb - v_fem) / std::abs(v_fem);
        worst = std::max(worst, disc[k]);
    }
    check_max(rep, "monitor_discrepancy_all_times", worst, 0.023);

    double growth = -std::numeric_limits<double>::max();
    double prev = -1.0;
    for (double t : {500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0}) {
        const auto it = std::find(sb_hist.times.begin(), sb_hist.times.end(), t);
        if (it == sb_hist.times.end())
            throw Error(ErrorCode::internal, "expected output time missing");
        const double d = disc[it - sb_hist.times.begin()];
        if (prev >= 0.0) growth = std::max(growth, d - prev);
        rep.notes.push_back("t=" + fmt(t) + ": discrepancy " + fmt(d));
        prev = d;
    }
    check_max(rep, "discrepancy_growth_late_times", growth, 1e-4);

    const SolutionField steady_final =
        solve_steady(am.system, resolve_bcs(sb_model, am.system, 3000.0));
    const FieldSampler s_end(sb_model.mesh, am.elements, am.system, sb_hist.fields.back());
    const FieldSampler s_std(sb_model.mesh, am.elements, am.system, steady_final.h);
    const double v_end = s_end.head(monitor), v_std = s_std.head(monitor);
    check_max(rep, "final_vs_steady_of_final_bcs", std::abs(v_end - v_std) / std::abs(v_std),
              0.001);
    return rep;
}

std::uint64_t xorshift64(std::uint64_t& s) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
}

VerificationReport suite_parser() {
    VerificationReport rep;
    rep.suite = "parser";

    // golden: the canonical pentagon deck
    const DeckModel deck = parse_inp(fixtures::listing1_deck());
    bool golden = deck.diagnostics.empty() && deck.user_elements.size() == 1 &&
                  deck.nodes.empty() && deck.element_blocks.size() == 1 &&
                  deck.properties.size() == 1;
    if (golden) {
        const auto& ue = deck.user_elements[0];
        const auto& blk = deck.element_blocks[0];
        const auto& prop = deck.properties[0];
        golden = ue.type == "U5" && ue.nodes == 5 && ue.properties == 2 &&
                 ue.coordinates == 2 && ue.active_dofs == std::vector<int>{8} &&
                 blk.type == "U5" && blk.elset == "E5" && blk.elements.size() == 1 &&
                 blk.elements[0].id == 3 &&
                 blk.elements[0].node_ids == std::vector<int>{2, 3, 4, 8, 7} &&
                 prop.elset == "E5" && prop.values == std::vector<double>{0.003, 0.003};
    }
    check_true(rep, "pentagon_deck_golden", golden);

    // a complete deck builds a solvable model through the same path
    DeckOverlay overlay;
    overlay.Ss = 0.0;
    overlay.dirichlet = {{"inlet", {1}, 1.0, ""}, {"outlet", {5}, 0.0, ""}};
    bool solvable = false;
    double solve_residual = 0.0;
    try {
        const SeepageModel m = deck_to_model(parse_inp(fixtures::figure4_deck()), overlay);
        const AssembledModel am = assemble_model(m);
        const SolutionField sol = solve_model(am, m);
        solve_residual = sol.residual;
        solvable = sol.h.allFinite();
    } catch (const Error&) {
        solvable = false;
    }
    check_true(rep, "complete_deck_solvable", solvable, solve_residual);

    // native-format round trip: field identity and byte stability
    SeepageModel model = fixtures::dam_fem_model();
    FluxSet recharge{"recharge", {}, 2e-3};
    for (const auto& be : model.mesh.boundary_edges)
        if (be.tag == "top") recharge.edges.emplace_back(be.a, be.b);
    model.flux.push_back(std::move(recharge));
    const std::string text = serialize_model(model);
    const SeepageModel back = parse_native_model(text);
    check_true(rep, "native_round_trip_identical", model_identical(model, back));
    check_true(rep, "native_round_trip_bytes", serialize_model(back) == text);

    // fuzz: arbitrary bytes and mutated decks must never escape as crashes
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
    int crashes = 0;
    const std::string alphabet = "*,=\n\r\t EUN035.-eLSTPROY\"{}[]";
    for (int trial = 0; trial < 300; ++trial) {
        std::string text_fuzz;
        const int len = static_cast<int>(xorshift64(seed) % 400);
        for (int i = 0; i < len; ++i) {
            const std::uint64_t r = xorshift64(seed);
            if (r % 4 == 0)
                text_fuzz.push_back(static_cast<char>(r >> 8));  // arbitrary byte
            else
                text_fuzz.push_back(alphabet[(r >> 8) % alphabet.size()]);
        }
        try {
            const DeckModel d = parse_inp(text_fuzz);
            try {
                deck_to_model(d, {});
            } catch (const Error&) {
            }
        } catch (...) {
            ++crashes;
        }
    }
    const std::string base = fixtures::figure4_deck();
    for (int trial = 0; trial < 300; ++trial) {
        std::string mutated = base;
        const int edits = 1 + static_cast<int>(xorshift64(seed) % 8);
        for (int e = 0; e < edits; ++e) {
            const std::uint64_t r = xorshift64(seed);
            const std::size_t pos = r % mutated.size();
            switch ((r >> 32) % 3) {
                case 0: mutated[pos] = static_cast<char>(r >> 8); break;
                case 1: mutated.erase(pos, (r >> 8) % 5); break;
                default: mutated.insert(pos, 1, alphabet[(r >> 8) % alphabet.size()]);
            }
            if (mutated.empty()) mutated = "*";
        }
        try {
            const DeckModel d = parse_inp(mutated);
            try {
                deck_to_model(d, {});
            } catch (const Error&) {
            }
        } catch (...) {
            ++crashes;
        }
    }
    check_max(rep, "fuzz_crashes", crashes, 0.0);
    return rep;
}

}  // namespace

std::vector<std::string> suite_names() {
    return {"patch",     "element",          "convergence",   "fem-compare",
            "inclusion", "transient-oracle", "transient-fem", "parser"};
}

VerificationReport run_suite(const std::string& name, const LogSink& log) {
    const auto t0 = std::chrono::steady_clock::now();
    VerificationReport rep;
    if (name == "patch")
        rep = suite_patch();
    else if (name == "element")
        rep = suite_element();
    else if (name == "convergence")
        rep = suite_convergence();
    else if (name == "fem-compare")
        rep = suite_fem_compare();
    else if (name == "inclusion")
        rep = suite_inclusion();
    else if (name == "transient-oracle")
        rep = suite_transient_oracle();
    else if (name == "transient-fem")
        rep = suite_transient_fem();
    else if (name == "parser")
        rep = suite_parser();
    else
        throw Error(ErrorCode::invalid_argument, "unknown verification suite \"" + name + "\"");
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                           [](const VerificationCheck& c) { return c.pass; });
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) log(rep.to_text());
    return rep;
}

}  // namespace psb
