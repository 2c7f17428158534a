#include "psbfem.h"

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "psbfem/deck.hpp"
#include "psbfem/errors.hpp"
#include "psbfem/model.hpp"
#include "psbfem/model_io.hpp"
#include "psbfem/recovery.hpp"
#include "psbfem/solver.hpp"
#include "psbfem/verify.hpp"
#include "psbfem/vtk_io.hpp"

struct psb_model {
    psb::SeepageModel m;
};

struct psb_solution {
    psb::SeepageModel model;
    psb::AssembledModel am;
    psb::SolutionHistory hist;

    // Single-entry sampler cache: repeated point queries hit the same step
    // far more often than they hop between steps.
    mutable std::unique_ptr<psb::FieldSampler> sampler;
    mutable int sampler_step = -1;

    const psb::FieldSampler& sampler_for(int step) const {
        if (!sampler || sampler_step != step) {
            sampler = std::make_unique<psb::FieldSampler>(model.mesh, am.elements, am.system,
                                                          hist.fields[step]);
            sampler_step = step;
        }
        return *sampler;
    }
};

namespace {

using psb::Error;
using psb::ErrorCode;

thread_local std::string g_last_error;

psb_status to_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return PSB_ERR_INVALID_ARGUMENT;
        case ErrorCode::parse: return PSB_ERR_PARSE;
        case ErrorCode::model: return PSB_ERR_MODEL;
        case ErrorCode::geometry: return PSB_ERR_GEOMETRY;
        case ErrorCode::element: return PSB_ERR_ELEMENT;
        case ErrorCode::solver: return PSB_ERR_SOLVER;
        case ErrorCode::verify: return PSB_ERR_VERIFY;
        case ErrorCode::io: return PSB_ERR_IO;
        case ErrorCode::internal: return PSB_ERR_INTERNAL;
    }
    return PSB_ERR_INTERNAL;
}

psb_status fail_arg(const char* msg) {
    g_last_error = msg;
    return PSB_ERR_INVALID_ARGUMENT;
}

template <typename F>
psb_status guarded(F&& f) {
    try {
        f();
        return PSB_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return PSB_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PSB_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

std::string slurp(const char* path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, std::string("cannot open \"") + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad() || ss.bad())
        throw Error(ErrorCode::io, std::string("cannot read \"") + path + "\"");
    return ss.str();
}

// Warnings as "line N: message" rows; empty string when there are none.
std::string collect_warnings(const psb::DeckModel& deck) {
    std::string s;
    for (const auto& d : deck.diagnostics) {
        if (d.is_error) continue;
        if (!s.empty()) s += "\n";
        if (d.line >= 0) s += "line " + std::to_string(d.line) + ": ";
        s += d.message;
    }
    return s;
}

// The overlay is merged into the serialized base model and the result parsed
// again, so every overlay field goes through exactly the same validation as
// a native model file.
psb::SeepageModel apply_overlay(const psb::SeepageModel& base, const char* overlay_json) {
    nlohmann::json ov;
    try {
        ov = nlohmann::json::parse(overlay_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse, std::string("overlay: ") + e.what());
    }
    if (!ov.is_object()) throw Error(ErrorCode::invalid_argument, "overlay must be a JSON object");

    auto root = nlohmann::ordered_json::parse(psb::serialize_model(base));
    for (const auto& [key, value] : ov.items()) {
        if (key == "Ss") {
            if (!value.is_number())
                throw Error(ErrorCode::invalid_argument, "overlay Ss must be a number");
            for (auto& [id, jmat] : root["materials"].items()) jmat["Ss"] = value.get<double>();
        } else if (key == "boundary_conditions" || key == "schedules" || key == "transient" ||
                   key == "monitors" || key == "unit_note") {
            root[key] = value;
        } else {
            throw Error(ErrorCode::invalid_argument, "unknown overlay key \"" + key + "\"");
        }
    }
    return psb::parse_native_model(root.dump());
}

void check_step(const psb_solution* sol, int step) {
    if (step < 0 || step >= static_cast<int>(sol->hist.times.size()))
        throw Error(ErrorCode::invalid_argument,
                    "step " + std::to_string(step) + " out of range (0.." +
                        std::to_string(sol->hist.times.size() - 1) + ")");
}

}  // namespace

extern "C" {

const char* psb_version(void) { return PSBFEM_VERSION; }

const char* psb_last_error(void) { return g_last_error.c_str(); }

psb_status psb_model_parse(const char* text, psb_model** out) {
    if (!text || !out) return fail_arg("psb_model_parse: null argument");
    return guarded([&] {
        auto m = std::make_unique<psb_model>();
        m->m = psb::parse_native_model(text);
        *out = m.release();
    });
}

psb_status psb_model_parse_deck(const char* deck_text, const char* overlay_json, psb_model** out,
                                char** out_warnings) {
    if (!deck_text || !out) return fail_arg("psb_model_parse_deck: null argument");
    return guarded([&] {
        psb::DeckModel deck = psb::parse_inp(deck_text);
        psb::SeepageModel base = psb::deck_to_model(deck, {});
        auto m = std::make_unique<psb_model>();
        m->m = (overlay_json && *overlay_json) ? apply_overlay(base, overlay_json)
                                               : std::move(base);
        char* warnings = nullptr;
        if (out_warnings) {
            const std::string w = collect_warnings(deck);
            if (!w.empty()) warnings = dup_string(w);
        }
        if (out_warnings) *out_warnings = warnings;
        *out = m.release();
    });
}

psb_status psb_model_read_file(const char* path, psb_model** out) {
    if (!path || !out) return fail_arg("psb_model_read_file: null argument");
    return guarded([&] {
        const std::string text = slurp(path);
        std::string ext;
        const std::string p(path);
        if (auto dot = p.rfind('.'); dot != std::string::npos) ext = p.substr(dot);
        for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

        auto m = std::make_unique<psb_model>();
        if (ext == ".inp") {
            psb::DeckModel deck = psb::parse_inp(text);
            m->m = psb::deck_to_model(deck, {});
        } else {
            m->m = psb::parse_native_model(text);
        }
        *out = m.release();
    });
}

psb_status psb_model_serialize(const psb_model* model, char** out_text) {
    if (!model || !out_text) return fail_arg("psb_model_serialize: null argument");
    return guarded([&] { *out_text = dup_string(psb::serialize_model(model->m)); });
}

psb_status psb_model_info(const psb_model* model, int* n_nodes, int* n_elements,
                          int* has_transient, int* n_monitors) {
    if (!model) return fail_arg("psb_model_info: null model");
    if (n_nodes) *n_nodes = static_cast<int>(model->m.mesh.nodes.size());
    if (n_elements) *n_elements = static_cast<int>(model->m.mesh.elements.size());
    if (has_transient) *has_transient = model->m.transient.has_value() ? 1 : 0;
    if (n_monitors) *n_monitors = static_cast<int>(model->m.monitors.size());
    return PSB_OK;
}

psb_status psb_model_override_transient(psb_model* model, double dt, double t_end) {
    if (!model) return fail_arg("psb_model_override_transient: null model");
    return guarded([&] {
        if (!model->m.transient)
            throw Error(ErrorCode::model, "model has no transient block to override");
        psb::TransientSpec spec = *model->m.transient;
        if (dt > 0.0) spec.dt = dt;
        if (t_end > 0.0) spec.t_end = t_end;
        psb::SeepageModel probe = model->m;
        probe.transient = spec;
        probe.validate();
        model->m.transient = spec;
    });
}

psb_status psb_model_clear_monitors(psb_model* model) {
    if (!model) return fail_arg("psb_model_clear_monitors: null model");
    model->m.monitors.clear();
    return PSB_OK;
}

psb_status psb_model_add_monitor(psb_model* model, const char* name, double x, double y) {
    if (!model || !name) return fail_arg("psb_model_add_monitor: null argument");
    return guarded([&] {
        if (!*name) throw Error(ErrorCode::invalid_argument, "monitor name must not be empty");
        for (const auto& m : model->m.monitors)
            if (m.name == name)
                throw Error(ErrorCode::invalid_argument,
                            "monitor \"" + std::string(name) + "\" already exists");
        model->m.monitors.push_back({name, {x, y}});
    });
}

psb_status psb_model_export_vtk(const psb_model* model, const char* path) {
    if (!model || !path) return fail_arg("psb_model_export_vtk: null argument");
    return guarded([&] { psb::export_vtk(model->m.mesh, {}, path); });
}

void psb_model_free(psb_model* model) { delete model; }

psb_status psb_solve_steady(const psb_model* model, psb_solution** out) {
    if (!model || !out) return fail_arg("psb_solve_steady: null argument");
    return guarded([&] {
        auto sol = std::make_unique<psb_solution>();
        sol->model = model->m;
        sol->am = psb::assemble_model(sol->model);
        const psb::BoundaryConditions bc = psb::resolve_bcs(sol->model, sol->am.system, 0.0);
        psb::SolutionField field = psb::solve_steady(sol->am.system, bc);
        sol->hist.times = {0.0};
        sol->hist.fields = {std::move(field.h)};
        *out = sol.release();
    });
}

psb_status psb_solve_transient(const psb_model* model, psb_solution** out) {
    if (!model || !out) return fail_arg("psb_solve_transient: null argument");
    return guarded([&] {
        if (!model->m.transient)
            throw Error(ErrorCode::model, "model has no transient block; use psb_solve_steady");
        auto sol = std::make_unique<psb_solution>();
        sol->model = model->m;
        sol->am = psb::assemble_model(sol->model);
        sol->hist = psb::run_transient(sol->model, sol->am.system);
        *out = sol.release();
    });
}

psb_status psb_solution_n_steps(const psb_solution* sol, int* out) {
    if (!sol || !out) return fail_arg("psb_solution_n_steps: null argument");
    *out = static_cast<int>(sol->hist.times.size());
    return PSB_OK;
}

psb_status psb_solution_time(const psb_solution* sol, int step, double* out) {
    if (!sol || !out) return fail_arg("psb_solution_time: null argument");
    return guarded([&] {
        check_step(sol, step);
        *out = sol->hist.times[step];
    });
}

psb_status psb_solution_heads(const psb_solution* sol, int step, const double** data, int* len) {
    if (!sol || !data || !len) return fail_arg("psb_solution_heads: null argument");
    return guarded([&] {
        check_step(sol, step);
        *data = sol->hist.fields[step].data();
        *len = static_cast<int>(sol->hist.fields[step].size());
    });
}

psb_status psb_solution_sample(const psb_solution* sol, int step, double x, double y,
                               double* head) {
    if (!sol || !head) return fail_arg("psb_solution_sample: null argument");
    return guarded([&] {
        check_step(sol, step);
        *head = sol->sampler_for(step).head({x, y});
    });
}

psb_status psb_solution_export_vtk(const psb_solution* sol, int step, const char* path) {
    if (!sol || !path) return fail_arg("psb_solution_export_vtk: null argument");
    return guarded([&] {
        check_step(sol, step);
        psb::export_vtk(sol->model.mesh, {{"head", sol->hist.fields[step]}}, path,
                        &sol->am.elements, &sol->am.system);
    });
}

psb_status psb_solution_monitor_csv(const psb_solution* sol, char** out_csv) {
    if (!sol || !out_csv) return fail_arg("psb_solution_monitor_csv: null argument");
    return guarded([&] {
        std::vector<std::string> names;
        for (const auto& m : sol->model.monitors) names.push_back(m.name);
        const std::size_t n_steps = sol->hist.times.size();
        std::vector<std::vector<double>> traces(names.size(), std::vector<double>(n_steps));
        for (std::size_t s = 0; s < n_steps; ++s) {
            const psb::FieldSampler& fs = sol->sampler_for(static_cast<int>(s));
            for (std::size_t i = 0; i < names.size(); ++i)
                traces[i][s] = fs.head(sol->model.monitors[i].p);
        }
        *out_csv = dup_string(psb::monitor_csv_text(names, sol->hist.times, traces));
    });
}

psb_status psb_solution_save(const psb_solution* sol, char** out_json) {
    if (!sol || !out_json) return fail_arg("psb_solution_save: null argument");
    return guarded([&] {
        nlohmann::ordered_json j;
        j["times"] = sol->hist.times;
        auto heads = nlohmann::ordered_json::array();
        for (const auto& f : sol->hist.fields)
            heads.push_back(std::vector<double>(f.data(), f.data() + f.size()));
        j["heads"] = std::move(heads);
        *out_json = dup_string(j.dump());
    });
}

psb_status psb_solution_load(const psb_model* model, const char* json_text, psb_solution** out) {
    if (!model || !json_text || !out) return fail_arg("psb_solution_load: null argument");
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(json_text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::parse, std::string("solution: ") + e.what());
        }
        if (!j.is_object() || !j.contains("times") || !j.contains("heads") ||
            !j["times"].is_array() || !j["heads"].is_array())
            throw Error(ErrorCode::parse, "solution needs \"times\" and \"heads\" arrays");
        if (j["times"].size() != j["heads"].size() || j["times"].empty())
            throw Error(ErrorCode::parse, "solution times/heads lengths differ or are empty");

        auto sol = std::make_unique<psb_solution>();
        sol->model = model->m;
        sol->am = psb::assemble_model(sol->model);
        const int n = sol->am.system.n_dof();
        for (const auto& jt : j["times"]) {
            if (!jt.is_number()) throw Error(ErrorCode::parse, "solution times must be numbers");
            if (!sol->hist.times.empty() && !(jt.get<double>() > sol->hist.times.back()))
                throw Error(ErrorCode::parse, "solution times must increase");
            sol->hist.times.push_back(jt.get<double>());
        }
        for (const auto& jf : j["heads"]) {
            if (!jf.is_array() || static_cast<int>(jf.size()) != n)
                throw Error(ErrorCode::parse,
                            "each head field needs one value per node (" + std::to_string(n) +
                                ")");
            Eigen::VectorXd f(n);
            for (int i = 0; i < n; ++i) {
                if (!jf[i].is_number())
                    throw Error(ErrorCode::parse, "solution heads must be numbers");
                f[i] = jf[i].get<double>();
            }
            sol->hist.fields.push_back(std::move(f));
        }
        *out = sol.release();
    });
}

void psb_solution_free(psb_solution* sol) { delete sol; }

psb_status psb_run_suite(const char* name, int* pass, char** out_text, char** out_csv) {
    if (!name || !pass) return fail_arg("psb_run_suite: null argument");
    return guarded([&] {
        const psb::VerificationReport rep = psb::run_suite(name);
        char* text = out_text ? dup_string(rep.to_text()) : nullptr;
        char* csv = nullptr;
        if (out_csv) {
            try {
                csv = dup_string(rep.to_csv());
            } catch (...) {
                std::free(text);
                throw;
            }
        }
        *pass = rep.pass ? 1 : 0;
        if (out_text) *out_text = text;
        if (out_csv) *out_csv = csv;
    });
}

psb_status psb_suite_names(char** out) {
    if (!out) return fail_arg("psb_suite_names: null argument");
    return guarded([&] {
        std::string joined;
        for (const auto& n : psb::suite_names()) {
            if (!joined.empty()) joined += ",";
            joined += n;
        }
        *out = dup_string(joined);
    });
}

void psb_string_free(char* s) { std::free(s); }

}  // extern "C"
