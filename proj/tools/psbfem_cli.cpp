// psbfem — command-line front end. Talks to the solver exclusively through
// the C API in psbfem.h; everything else here is argument handling and file
// plumbing.
//
// Exit codes: 0 success, 1 usage, 2 bad model (parse/model/geometry),
// 3 computation or io failure, 4 verification failure.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psbfem.h"

namespace fs = std::filesystem;

namespace {

struct Fail {
    int code;
    std::string message;
};

int exit_code_for(psb_status st) {
    switch (st) {
        case PSB_OK: return 0;
        case PSB_ERR_INVALID_ARGUMENT: return 1;
        case PSB_ERR_PARSE:
        case PSB_ERR_MODEL:
        case PSB_ERR_GEOMETRY: return 2;
        case PSB_ERR_VERIFY: return 4;
        default: return 3;
    }
}

void check(psb_status st, const std::string& context) {
    if (st != PSB_OK) throw Fail{exit_code_for(st), context + ": " + psb_last_error()};
}

struct ModelDeleter {
    void operator()(psb_model* m) const { psb_model_free(m); }
};
struct SolutionDeleter {
    void operator()(psb_solution* s) const { psb_solution_free(s); }
};
struct StringDeleter {
    void operator()(char* s) const { psb_string_free(s); }
};
using ModelPtr = std::unique_ptr<psb_model, ModelDeleter>;
using SolutionPtr = std::unique_ptr<psb_solution, SolutionDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

// Collects everything a command writes; unless committed, the destructor
// removes it all so a failed run leaves no partial outputs behind.
class OutputTracker {
  public:
    explicit OutputTracker(fs::path dir) : dir_(std::move(dir)) {}
    ~OutputTracker() { rollback(); }

    const fs::path& dir() const { return dir_; }
    void track(const fs::path& p) { written_.push_back(p); }
    void commit() { committed_ = true; }

    void rollback() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
        written_.clear();
    }

  private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Fail{3, "cannot open \"" + path.string() + "\""};
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Fail{3, "cannot read \"" + path.string() + "\""};
    return ss.str();
}

void write_file(OutputTracker& out, const fs::path& path, const std::string& content) {
    out.track(path);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Fail{3, "cannot write \"" + path.string() + "\""};
    f << content;
    f.flush();
    if (!f) throw Fail{3, "cannot write \"" + path.string() + "\""};
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Fail{3, "cannot create output directory \"" + dir.string() + "\""};
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Fail{1, "cannot parse " + what + " \"" + s + "\""};
}

std::string trimmed(const std::string& s) {
    auto a = s.find_first_not_of(" \t");
    auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

struct MonitorSpec {
    std::string name;
    double x, y;
};

// Accepts name=(x,y) and name=x,y.
MonitorSpec parse_monitor(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw Fail{1, "monitor must look like name=(x,y): \"" + spec + "\""};
    MonitorSpec m;
    m.name = trimmed(spec.substr(0, eq));
    std::string rest = trimmed(spec.substr(eq + 1));
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')')
        rest = trimmed(rest.substr(1, rest.size() - 2));
    const auto comma = rest.find(',');
    if (m.name.empty() || comma == std::string::npos)
        throw Fail{1, "monitor must look like name=(x,y): \"" + spec + "\""};
    m.x = parse_number(trimmed(rest.substr(0, comma)), "monitor x");
    m.y = parse_number(trimmed(rest.substr(comma + 1)), "monitor y");
    return m;
}

bool has_inp_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".inp";
}

ModelPtr load_model(const fs::path& model_path, const std::string& overlay_path, bool verbose) {
    psb_model* raw = nullptr;
    if (has_inp_extension(model_path)) {
        const std::string deck = slurp(model_path);
        std::string overlay;
        if (!overlay_path.empty()) overlay = slurp(overlay_path);
        char* warnings = nullptr;
        check(psb_model_parse_deck(deck.c_str(), overlay.empty() ? nullptr : overlay.c_str(),
                                   &raw, &warnings),
              "parsing \"" + model_path.string() + "\"");
        if (warnings) {
            StringPtr holder(warnings);
            std::istringstream lines(warnings);
            for (std::string line; std::getline(lines, line);)
                std::cerr << "warning: " << line << "\n";
        }
    } else {
        if (!overlay_path.empty()) throw Fail{1, "--overlay only applies to .inp decks"};
        check(psb_model_read_file(model_path.string().c_str(), &raw),
              "reading \"" + model_path.string() + "\"");
    }
    ModelPtr model(raw);
    if (verbose) {
        int nn = 0, ne = 0, tr = 0, nm = 0;
        psb_model_info(model.get(), &nn, &ne, &tr, &nm);
        std::cerr << "model: " << nn << " nodes, " << ne << " elements, "
                  << (tr ? "transient" : "steady") << ", " << nm << " monitor(s)\n";
    }
    return model;
}

void apply_monitor_overrides(psb_model* model, const std::vector<std::string>& specs) {
    if (specs.empty()) return;
    check(psb_model_clear_monitors(model), "clearing monitors");
    for (const auto& s : specs) {
        const MonitorSpec m = parse_monitor(s);
        check(psb_model_add_monitor(model, m.name.c_str(), m.x, m.y),
              "adding monitor \"" + m.name + "\"");
    }
}

fs::path step_vtk_path(const fs::path& dir, int step) {
    char name[32];
    std::snprintf(name, sizeof(name), "heads_%04d.vtk", step);
    return dir / name;
}

void export_solution_vtk(OutputTracker& out, const psb_solution* sol, bool transient,
                         int vtk_stride) {
    int n_steps = 0;
    check(psb_solution_n_steps(sol, &n_steps), "counting steps");
    if (!transient) {
        const fs::path p = out.dir() / "heads.vtk";
        out.track(p);
        check(psb_solution_export_vtk(sol, 0, p.string().c_str()), "writing heads.vtk");
        return;
    }
    for (int s = 0; s < n_steps; ++s) {
        if (s % vtk_stride != 0 && s != n_steps - 1) continue;  // last step always written
        const fs::path p = step_vtk_path(out.dir(), s);
        out.track(p);
        check(psb_solution_export_vtk(sol, s, p.string().c_str()),
              "writing " + p.filename().string());
    }
}

void write_monitors_csv(OutputTracker& out, const psb_solution* sol) {
    char* csv = nullptr;
    check(psb_solution_monitor_csv(sol, &csv), "building monitors.csv");
    StringPtr holder(csv);
    write_file(out, out.dir() / "monitors.csv", csv);
}

void write_solution_json(OutputTracker& out, const psb_solution* sol) {
    char* json = nullptr;
    check(psb_solution_save(sol, &json), "saving solution.json");
    StringPtr holder(json);
    write_file(out, out.dir() / "solution.json", std::string(json) + "\n");
}

struct CommonArgs {
    std::string model_path;
    std::string overlay_path;
    std::string out_dir = ".";
    bool verbose = false;
};

int cmd_mesh(const CommonArgs& a) {
    ensure_dir(a.out_dir);
    OutputTracker out{a.out_dir};
    ModelPtr model = load_model(a.model_path, a.overlay_path, a.verbose);

    char* json = nullptr;
    check(psb_model_serialize(model.get(), &json), "serializing model");
    StringPtr holder(json);
    write_file(out, out.dir() / "mesh.json", json);

    const fs::path vtk = out.dir() / "mesh.vtk";
    out.track(vtk);
    check(psb_model_export_vtk(model.get(), vtk.string().c_str()), "writing mesh.vtk");

    int nn = 0, ne = 0;
    psb_model_info(model.get(), &nn, &ne, nullptr, nullptr);
    out.commit();
    std::cout << "wrote mesh.json and mesh.vtk (" << nn << " nodes, " << ne << " elements)\n";
    return 0;
}

struct SolveArgs : CommonArgs {
    double dt = 0.0;
    double t_end = 0.0;
    bool force_steady = false;
    std::vector<std::string> monitors;
    int vtk_stride = 1;
};

int cmd_solve(const SolveArgs& a) {
    ensure_dir(a.out_dir);
    OutputTracker out{a.out_dir};
    ModelPtr model = load_model(a.model_path, a.overlay_path, a.verbose);

    int has_transient = 0, n_monitors = 0;
    psb_model_info(model.get(), nullptr, nullptr, &has_transient, &n_monitors);
    const bool transient = has_transient && !a.force_steady;

    if ((a.dt > 0.0 || a.t_end > 0.0)) {
        if (!transient) throw Fail{1, "--dt/--t-end apply to transient runs only"};
        check(psb_model_override_transient(model.get(), a.dt, a.t_end), "overriding dt/t-end");
    }
    apply_monitor_overrides(model.get(), a.monitors);
    if (!a.monitors.empty()) n_monitors = static_cast<int>(a.monitors.size());
    if (a.vtk_stride < 1) throw Fail{1, "--vtk-stride must be >= 1"};

    psb_solution* raw = nullptr;
    if (transient)
        check(psb_solve_transient(model.get(), &raw), "transient solve");
    else
        check(psb_solve_steady(model.get(), &raw), "steady solve");
    SolutionPtr sol(raw);

    export_solution_vtk(out, sol.get(), transient, a.vtk_stride);
    if (n_monitors > 0) write_monitors_csv(out, sol.get());
    write_solution_json(out, sol.get());

    int n_steps = 0;
    psb_solution_n_steps(sol.get(), &n_steps);
    out.commit();
    if (transient) {
        double t_last = 0.0;
        psb_solution_time(sol.get(), n_steps - 1, &t_last);
        std::cout << "solved " << n_steps << " stored steps to t = " << t_last << "\n";
    } else {
        std::cout << "solved steady state\n";
    }
    return 0;
}

struct ExportArgs : CommonArgs {
    std::string solution_path;
    std::string format = "vtk";
    int step = -1;
};

int cmd_export(const ExportArgs& a) {
    ensure_dir(a.out_dir);
    OutputTracker out{a.out_dir};
    ModelPtr model = load_model(a.model_path, a.overlay_path, a.verbose);

    const std::string text = slurp(a.solution_path);
    psb_solution* raw = nullptr;
    check(psb_solution_load(model.get(), text.c_str(), &raw),
          "loading \"" + a.solution_path + "\"");
    SolutionPtr sol(raw);

    int n_steps = 0;
    psb_solution_n_steps(sol.get(), &n_steps);

    if (a.format == "vtk") {
        if (a.step >= 0) {
            if (a.step >= n_steps) throw Fail{1, "--step out of range"};
            const fs::path p = step_vtk_path(out.dir(), a.step);
            out.track(p);
            check(psb_solution_export_vtk(sol.get(), a.step, p.string().c_str()),
                  "writing " + p.filename().string());
        } else {
            export_solution_vtk(out, sol.get(), n_steps > 1, 1);
        }
    } else if (a.format == "csv") {
        int n_monitors = 0;
        psb_model_info(model.get(), nullptr, nullptr, nullptr, &n_monitors);
        if (n_monitors == 0) throw Fail{1, "model has no monitors to export as csv"};
        write_monitors_csv(out, sol.get());
    } else {
        throw Fail{1, "unknown --format \"" + a.format + "\" (vtk or csv)"};
    }
    out.commit();
    std::cout << "exported " << (a.format == "csv" ? 1 : (a.step >= 0 ? 1 : n_steps))
              << " file(s)\n";
    return 0;
}

struct VerifyArgs {
    std::vector<std::string> suites;
    std::string out_dir;
    bool quiet = false;
};

int cmd_verify(const VerifyArgs& a) {
    std::vector<std::string> suites = a.suites;
    if (suites.empty()) {
        char* names = nullptr;
        check(psb_suite_names(&names), "listing suites");
        StringPtr holder(names);
        std::istringstream ss(names);
        for (std::string n; std::getline(ss, n, ',');) suites.push_back(n);
    }
    if (!a.out_dir.empty()) ensure_dir(a.out_dir);

    std::vector<std::string> failed;
    for (const auto& name : suites) {
        int pass = 0;
        char *text = nullptr, *csv = nullptr;
        check(psb_run_suite(name.c_str(), &pass, &text, &csv), "suite \"" + name + "\"");
        StringPtr text_holder(text), csv_holder(csv);
        if (!a.quiet) std::cout << text << "\n";
        if (!a.out_dir.empty()) {
            // Reports are kept even when the suite fails; they are the point.
            std::ofstream t(fs::path(a.out_dir) / (name + ".txt"), std::ios::binary);
            t << text;
            std::ofstream c(fs::path(a.out_dir) / (name + ".csv"), std::ios::binary);
            c << csv;
            if (!t || !c) throw Fail{3, "cannot write reports to \"" + a.out_dir + "\""};
        }
        if (!pass) failed.push_back(name);
    }
    if (!failed.empty()) {
        std::string joined;
        for (const auto& f : failed) joined += (joined.empty() ? "" : ", ") + f;
        std::cerr << "verification failed: " << joined << "\n";
        return 4;
    }
    std::cout << "all " << suites.size() << " suite(s) passed\n";
    return 0;
}

// Commands throw Fail; the OutputTracker destructor has already removed any
// partial outputs by the time it is caught here.
int dispatch(const std::function<int()>& body, const std::string& out_dir) {
    try {
        return body();
    } catch (const Fail& f) {
        std::cerr << "error: " << f.message << "\n";
        if (!out_dir.empty() && fs::is_directory(out_dir)) {
            std::ofstream log(fs::path(out_dir) / "failure.log", std::ios::binary);
            log << f.message << "\n";
        }
        return f.code;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polygon scaled-boundary seepage solver"};
    app.set_version_flag("--version", psb_version());
    app.require_subcommand(1);

    SolveArgs solve_args;
    ExportArgs export_args;
    CommonArgs mesh_args;
    VerifyArgs verify_args;

    auto add_common = [](CLI::App* cmd, CommonArgs& a, bool with_out = true) {
        cmd->add_option("--model", a.model_path, "model file (.json native or .inp deck)")
            ->required();
        cmd->add_option("--overlay", a.overlay_path,
                        "JSON overlay for .inp decks (BCs, schedules, transient, monitors)");
        if (with_out) cmd->add_option("--out", a.out_dir, "output directory (default .)");
        cmd->add_flag("-v,--verbose", a.verbose, "report model details to stderr");
    };

    CLI::App* mesh = app.add_subcommand("mesh", "resolve a model; write mesh.json and mesh.vtk");
    add_common(mesh, mesh_args);

    CLI::App* solve = app.add_subcommand(
        "solve", "solve the model; write heads VTK, monitors.csv, solution.json");
    add_common(solve, solve_args);
    solve->add_option("--dt", solve_args.dt, "override transient step size");
    solve->add_option("--t-end", solve_args.t_end, "override transient end time");
    solve->add_flag("--steady", solve_args.force_steady,
                    "solve the steady problem even when the model has a transient block");
    solve->add_option("--monitor", solve_args.monitors,
                      "replace model monitors; repeatable, form name=(x,y)");
    solve->add_option("--vtk-stride", solve_args.vtk_stride,
                      "write every k-th stored step as VTK (default 1)");

    CLI::App* exp = app.add_subcommand("export", "re-export a saved solution.json");
    add_common(exp, export_args);
    exp->add_option("--solution", export_args.solution_path, "solution.json from a solve run")
        ->required();
    exp->add_option("--format", export_args.format, "vtk (default) or csv");
    exp->add_option("--step", export_args.step, "vtk only: export just this step index");

    CLI::App* verify = app.add_subcommand("verify", "run verification suites");
    verify->add_option("--suite", verify_args.suites,
                       "suite name; repeatable (default: all suites)");
    verify->add_option("--out", verify_args.out_dir, "also write <suite>.txt/.csv reports here");
    verify->add_flag("--quiet", verify_args.quiet, "suppress report text on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (mesh->parsed()) return dispatch([&] { return cmd_mesh(mesh_args); }, mesh_args.out_dir);
    if (solve->parsed())
        return dispatch([&] { return cmd_solve(solve_args); }, solve_args.out_dir);
    if (exp->parsed())
        return dispatch([&] { return cmd_export(export_args); }, export_args.out_dir);
    if (verify->parsed()) return dispatch([&] { return cmd_verify(verify_args); }, "");
    return 1;
}
