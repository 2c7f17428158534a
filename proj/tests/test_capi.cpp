#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "psbfem.h"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ModelGuard {
    psb_model* m = nullptr;
    ~ModelGuard() { psb_model_free(m); }
};
struct SolutionGuard {
    psb_solution* s = nullptr;
    ~SolutionGuard() { psb_solution_free(s); }
};
struct StringGuard {
    char* s = nullptr;
    ~StringGuard() { psb_string_free(s); }
};

}  // namespace

TEST_CASE("version and pristine error state") {
    CHECK(std::strcmp(psb_version(), PSBFEM_VERSION) == 0);
    CHECK(psb_last_error() != nullptr);
}

TEST_CASE("a native model solves through the C surface") {
    ModelGuard model;
    REQUIRE(psb_model_read_file(TEST_DATA_DIR "/column.json", &model.m) == PSB_OK);

    int n_nodes = 0, n_elements = 0, has_transient = -1, n_monitors = -1;
    REQUIRE(psb_model_info(model.m, &n_nodes, &n_elements, &has_transient, &n_monitors) ==
            PSB_OK);
    CHECK(n_nodes == 6);
    CHECK(n_elements == 2);
    CHECK(has_transient == 0);
    CHECK(n_monitors == 0);

    SolutionGuard sol;
    REQUIRE(psb_solve_steady(model.m, &sol.s) == PSB_OK);
    int steps = 0;
    REQUIRE(psb_solution_n_steps(sol.s, &steps) == PSB_OK);
    CHECK(steps == 1);
    double t = -1.0;
    REQUIRE(psb_solution_time(sol.s, 0, &t) == PSB_OK);
    CHECK(t == 0.0);

    const double* h = nullptr;
    int len = 0;
    REQUIRE(psb_solution_heads(sol.s, 0, &h, &len) == PSB_OK);
    REQUIRE(len == 6);
    CHECK(h[2] == doctest::Approx(5.0).epsilon(1e-12));  // node 3
    CHECK(h[3] == doctest::Approx(5.0).epsilon(1e-12));  // node 4
    CHECK(h[4] == doctest::Approx(10.0).epsilon(1e-12));

    double head = 0.0;
    REQUIRE(psb_solution_sample(sol.s, 0, 0.5, 0.6, &head) == PSB_OK);
    CHECK(head == doctest::Approx(3.0).epsilon(1e-10));  // h = 5 y
}

TEST_CASE("monitors flow into the csv trace") {
    ModelGuard model;
    REQUIRE(psb_model_read_file(TEST_DATA_DIR "/column.json", &model.m) == PSB_OK);
    REQUIRE(psb_model_add_monitor(model.m, "mid", 0.5, 1.0) == PSB_OK);

    SolutionGuard sol;
    REQUIRE(psb_solve_steady(model.m, &sol.s) == PSB_OK);
    StringGuard csv;
    REQUIRE(psb_solution_monitor_csv(sol.s, &csv.s) == PSB_OK);
    const std::string text(csv.s);
    REQUIRE(text.rfind("t,mid\n0,", 0) == 0);
    const double traced = std::strtod(text.c_str() + 8, nullptr);
    CHECK(traced == doctest::Approx(5.0).epsilon(1e-12));  // h = 5 y at y = 1

    // with no monitors the trace degenerates to the bare time column
    REQUIRE(psb_model_clear_monitors(model.m) == PSB_OK);
    SolutionGuard again;
    REQUIRE(psb_solve_steady(model.m, &again.s) == PSB_OK);
    StringGuard empty;
    REQUIRE(psb_solution_monitor_csv(again.s, &empty.s) == PSB_OK);
    CHECK(std::string(empty.s) == "t\n0\n");
}

TEST_CASE("transient run, snapshot and reload agree bit for bit") {
    ModelGuard model;
    REQUIRE(psb_model_read_file(TEST_DATA_DIR "/dam_analog.json", &model.m) == PSB_OK);
    REQUIRE(psb_model_override_transient(model.m, 100.0, 1000.0) == PSB_OK);

    SolutionGuard sol;
    REQUIRE(psb_solve_transient(model.m, &sol.s) == PSB_OK);
    int steps = 0;
    REQUIRE(psb_solution_n_steps(sol.s, &steps) == PSB_OK);
    CHECK(steps == 11);
    double t_last = 0.0;
    REQUIRE(psb_solution_time(sol.s, steps - 1, &t_last) == PSB_OK);
    CHECK(t_last == 1000.0);

    StringGuard snap;
    REQUIRE(psb_solution_save(sol.s, &snap.s) == PSB_OK);
    SolutionGuard back;
    REQUIRE(psb_solution_load(model.m, snap.s, &back.s) == PSB_OK);

    int back_steps = 0;
    REQUIRE(psb_solution_n_steps(back.s, &back_steps) == PSB_OK);
    REQUIRE(back_steps == steps);
    for (int s = 0; s < steps; ++s) {
        const double *a = nullptr, *b = nullptr;
        int la = 0, lb = 0;
        REQUIRE(psb_solution_heads(sol.s, s, &a, &la) == PSB_OK);
        REQUIRE(psb_solution_heads(back.s, s, &b, &lb) == PSB_OK);
        REQUIRE(la == lb);
        CHECK(std::memcmp(a, b, sizeof(double) * la) == 0);
    }

    StringGuard csv1, csv2;
    REQUIRE(psb_solution_monitor_csv(sol.s, &csv1.s) == PSB_OK);
    REQUIRE(psb_solution_monitor_csv(back.s, &csv2.s) == PSB_OK);
    CHECK(std::string(csv1.s) == std::string(csv2.s));
    CHECK(std::string(csv1.s).rfind("t,P\n", 0) == 0);
}

TEST_CASE("deck parsing with an overlay builds the full model") {
    const std::string deck = slurp(TEST_DATA_DIR "/figure4.inp");
    const std::string overlay = slurp(TEST_DATA_DIR "/figure4_overlay.json");

    ModelGuard model;
    char* warnings = reinterpret_cast<char*>(1);  // poison: must be nulled
    REQUIRE(psb_model_parse_deck(deck.c_str(), overlay.c_str(), &model.m, &warnings) == PSB_OK);
    CHECK(warnings == nullptr);

    int n_nodes = 0, n_elements = 0, has_transient = -1, n_monitors = -1;
    REQUIRE(psb_model_info(model.m, &n_nodes, &n_elements, &has_transient, &n_monitors) ==
            PSB_OK);
    CHECK(n_nodes == 8);
    CHECK(n_elements == 4);

    SolutionGuard sol;
    REQUIRE(psb_solve_steady(model.m, &sol.s) == PSB_OK);
    const double* h = nullptr;
    int len = 0;
    REQUIRE(psb_solution_heads(sol.s, 0, &h, &len) == PSB_OK);
    REQUIRE(len == 8);
    CHECK(h[0] == doctest::Approx(1.0).epsilon(1e-12));  // inlet node 1
    CHECK(h[4] == doctest::Approx(0.0).scale(1.0));      // outlet node 5
}

TEST_CASE("deck warnings come back one per line") {
    ModelGuard model;
    StringGuard warnings;
    const char* deck =
        "*NODE\n1, 0, 0\n2, 1, 0\n3, 1, 1\n4, 0, 1\n"
        "*ELEMENT, TYPE=U4, ELSET=E\n1, 1, 2, 3, 4\n"
        "*UEL PROPERTY, ELSET=E\n1, 1\n";
    REQUIRE(psb_model_parse_deck(deck, nullptr, &model.m, &warnings.s) == PSB_OK);
    REQUIRE(warnings.s != nullptr);
    CHECK(std::string(warnings.s).find("line 6: element type U4 used without *USER ELEMENT") !=
          std::string::npos);
}

TEST_CASE("serialization round-trips through the C surface") {
    ModelGuard model;
    REQUIRE(psb_model_read_file(TEST_DATA_DIR "/column.json", &model.m) == PSB_OK);
    StringGuard s1;
    REQUIRE(psb_model_serialize(model.m, &s1.s) == PSB_OK);

    ModelGuard back;
    REQUIRE(psb_model_parse(s1.s, &back.m) == PSB_OK);
    StringGuard s2;
    REQUIRE(psb_model_serialize(back.m, &s2.s) == PSB_OK);
    CHECK(std::string(s1.s) == std::string(s2.s));
}

TEST_CASE("vtk exports land on disk") {
    ModelGuard model;
    REQUIRE(psb_model_read_file(TEST_DATA_DIR "/column.json", &model.m) == PSB_OK);
    const char* preview = "/tmp/psbfem_capi_mesh.vtk";
    REQUIRE(psb_model_export_vtk(model.m, preview) == PSB_OK);
    CHECK(slurp(preview).rfind("# vtk DataFile Version 3.0\n", 0) == 0);
    std::remove(preview);

    SolutionGuard sol;
    REQUIRE(psb_solve_steady(model.m, &sol.s) == PSB_OK);
    const char* out = "/tmp/psbfem_capi_step.vtk";
    REQUIRE(psb_solution_export_vtk(sol.s, 0, out) == PSB_OK);
    CHECK(slurp(out).find("SCALARS head double 1") != std::string::npos);
    std::remove(out);
    CHECK(psb_solution_export_vtk(sol.s, 7, out) == PSB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("failures set status codes and a readable message") {
    psb_model* out = nullptr;
    CHECK(psb_model_parse(nullptr, &out) == PSB_ERR_INVALID_ARGUMENT);
    CHECK(out == nullptr);
    CHECK(psb_last_error()[0] != '\0');

    CHECK(psb_model_parse("{", &out) == PSB_ERR_PARSE);
    CHECK(psb_model_parse("{\"format_version\": 1}", &out) == PSB_ERR_PARSE);
    CHECK(std::string(psb_last_error()).find("mesh") != std::string::npos);

    CHECK(psb_model_read_file("/does/not/exist.json", &out) == PSB_ERR_IO);

    ModelGuard model;
    REQUIRE(psb_model_read_file(TEST_DATA_DIR "/column.json", &model.m) == PSB_OK);
    CHECK(psb_model_override_transient(model.m, 1.0, 10.0) == PSB_ERR_MODEL);  // no block
    psb_solution* sol = nullptr;
    CHECK(psb_solve_transient(model.m, &sol) == PSB_ERR_MODEL);
    CHECK(sol == nullptr);

    const std::string deck = slurp(TEST_DATA_DIR "/figure4.inp");
    CHECK(psb_model_parse_deck(deck.c_str(), "not json", &out, nullptr) == PSB_ERR_PARSE);
    CHECK(psb_model_parse_deck(deck.c_str(), "{\"bogus\": 1}", &out, nullptr) ==
          PSB_ERR_INVALID_ARGUMENT);
    CHECK(std::string(psb_last_error()).find("bogus") != std::string::npos);
}

TEST_CASE("bad solution snapshots are rejected") {
    ModelGuard model;
    REQUIRE(psb_model_read_file(TEST_DATA_DIR "/column.json", &model.m) == PSB_OK);
    psb_solution* out = nullptr;
    CHECK(psb_solution_load(model.m, "{", &out) == PSB_ERR_PARSE);
    CHECK(psb_solution_load(model.m, "{\"times\": [0], \"heads\": [[1, 2]]}", &out) ==
          PSB_ERR_PARSE);  // field length != dof count
    CHECK(psb_solution_load(model.m, "{\"times\": [1, 0], \"heads\": [[0,0,0,0,0,0], [0,0,0,0,0,0]]}",
                            &out) == PSB_ERR_PARSE);  // non-increasing times
    CHECK(out == nullptr);
}

TEST_CASE("verification suites are reachable and the patch gate passes") {
    StringGuard names;
    REQUIRE(psb_suite_names(&names.s) == PSB_OK);
    const std::string list(names.s);
    CHECK(list.find("patch") != std::string::npos);
    CHECK(list.find("fem-compare") != std::string::npos);

    int pass = 0;
    StringGuard text, csv;
    REQUIRE(psb_run_suite("patch", &pass, &text.s, &csv.s) == PSB_OK);
    CHECK(pass == 1);
    CHECK(std::string(text.s).find("patch") != std::string::npos);
    CHECK(csv.s != nullptr);

    CHECK(psb_run_suite("no-such-suite", &pass, nullptr, nullptr) == PSB_ERR_INVALID_ARGUMENT);
    CHECK(std::string(psb_last_error()).find("no-such-suite") != std::string::npos);
}
