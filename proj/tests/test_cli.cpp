#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fresh working directory per call; spawns the real binary through the shell.
RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path cap = fs::path("/tmp") / ("psbfem_cli_cap_" + std::to_string(getpid()) + "_" +
                                             std::to_string(++counter));
    fs::create_directories(cap);
    const std::string cmd = std::string(CLI_PATH) + " " + args + " > " + (cap / "out").string() +
                            " 2> " + (cap / "err").string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(cap / "out");
    r.err = slurp(cap / "err");
    fs::remove_all(cap);
    return r;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::path("/tmp") / ("psbfem_cli_" + tag + "_" + std::to_string(getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
    std::set<std::string> entries() const {
        std::set<std::string> names;
        for (const auto& e : fs::directory_iterator(path)) names.insert(e.path().filename());
        return names;
    }
};

const std::string kColumn = std::string(TEST_DATA_DIR) + "/column.json";
const std::string kDam = std::string(TEST_DATA_DIR) + "/dam_analog.json";
const std::string kDeck = std::string(TEST_DATA_DIR) + "/figure4.inp";
const std::string kOverlay = std::string(TEST_DATA_DIR) + "/figure4_overlay.json";

}  // namespace

TEST_CASE("version and help exit cleanly") {
    const RunResult v = run_cli("--version");
    CHECK(v.code == 0);
    CHECK(v.out.find("1.0.0") != std::string::npos);
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("solve --help").code == 0);
}

TEST_CASE("steady solves are reproducible byte for byte") {
    TempDir d1("steady1"), d2("steady2");
    const RunResult r1 = run_cli("solve --model " + kColumn + " --out " + d1.str());
    const RunResult r2 = run_cli("solve --model " + kColumn + " --out " + d2.str());
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(d1.entries() == std::set<std::string>{"heads.vtk", "solution.json"});
    CHECK(slurp(d1.path / "heads.vtk") == slurp(d2.path / "heads.vtk"));
    CHECK(slurp(d1.path / "solution.json") == slurp(d2.path / "solution.json"));
    CHECK(slurp(d1.path / "heads.vtk").find("SCALARS head double 1") != std::string::npos);
}

TEST_CASE("transient solve writes history, monitor trace and snapshot") {
    TempDir dir("transient");
    const RunResult r = run_cli("solve --model " + kDam + " --dt 250 --t-end 1000 --out " +
                                dir.str());
    REQUIRE(r.code == 0);
    CHECK(dir.entries() == std::set<std::string>{"heads_0000.vtk", "heads_0001.vtk",
                                                 "heads_0002.vtk", "heads_0003.vtk",
                                                 "heads_0004.vtk", "monitors.csv",
                                                 "solution.json"});
    const std::string csv = slurp(dir.path / "monitors.csv");
    CHECK(csv.rfind("t,P\n0,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 states
}

TEST_CASE("vtk stride thins the exports but keeps the last step") {
    TempDir dir("stride");
    const RunResult r = run_cli("solve --model " + kDam +
                                " --dt 250 --t-end 1250 --vtk-stride 2 --out " + dir.str());
    REQUIRE(r.code == 0);
    const auto files = dir.entries();
    CHECK(files.count("heads_0000.vtk") == 1);
    CHECK(files.count("heads_0001.vtk") == 0);
    CHECK(files.count("heads_0002.vtk") == 1);
    CHECK(files.count("heads_0004.vtk") == 1);
    CHECK(files.count("heads_0005.vtk") == 1);  // final state always lands
}

TEST_CASE("a forced steady solve ignores the transient block") {
    TempDir dir("forced");
    const RunResult r = run_cli("solve --model " + kDam + " --steady --out " + dir.str());
    REQUIRE(r.code == 0);
    const auto files = dir.entries();
    CHECK(files.count("heads.vtk") == 1);
    CHECK(files.count("heads_0000.vtk") == 0);
}

TEST_CASE("export reproduces solve outputs from the snapshot alone") {
    TempDir solve_dir("exp_solve"), csv_dir("exp_csv"), vtk_dir("exp_vtk");
    REQUIRE(run_cli("solve --model " + kDam + " --dt 250 --t-end 1000 --out " +
                    solve_dir.str())
                .code == 0);
    const std::string snapshot = (solve_dir.path / "solution.json").string();

    REQUIRE(run_cli("export --model " + kDam + " --solution " + snapshot +
                    " --format csv --out " + csv_dir.str())
                .code == 0);
    CHECK(slurp(csv_dir.path / "monitors.csv") == slurp(solve_dir.path / "monitors.csv"));

    REQUIRE(run_cli("export --model " + kDam + " --solution " + snapshot +
                    " --format vtk --step 2 --out " + vtk_dir.str())
                .code == 0);
    CHECK(vtk_dir.entries() == std::set<std::string>{"heads_0002.vtk"});
    CHECK(slurp(vtk_dir.path / "heads_0002.vtk") == slurp(solve_dir.path / "heads_0002.vtk"));
}

TEST_CASE("mesh subcommand resolves native and deck inputs") {
    TempDir native("mesh_native"), deck("mesh_deck");
    REQUIRE(run_cli("mesh --model " + kDam + " --out " + native.str()).code == 0);
    CHECK(native.entries() == std::set<std::string>{"mesh.json", "mesh.vtk"});
    CHECK(slurp(native.path / "mesh.json").find("\"format_version\"") != std::string::npos);
    CHECK(slurp(native.path / "mesh.vtk").rfind("# vtk DataFile", 0) == 0);

    REQUIRE(run_cli("mesh --model " + kDeck + " --overlay " + kOverlay + " --out " +
                    deck.str())
                .code == 0);
    CHECK(deck.entries() == std::set<std::string>{"mesh.json", "mesh.vtk"});
}

TEST_CASE("deck models solve end to end") {
    TempDir dir("deck_solve");
    const RunResult r = run_cli("solve --model " + kDeck + " --overlay " + kOverlay +
                                " --out " + dir.str());
    REQUIRE(r.code == 0);
    CHECK(dir.entries() == std::set<std::string>{"heads.vtk", "solution.json"});
}

TEST_CASE("verify runs a named suite and writes reports on request") {
    TempDir dir("verify");
    const RunResult r = run_cli("verify --suite patch --out " + dir.str());
    CHECK(r.code == 0);
    CHECK(r.out.find("patch") != std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
    CHECK(dir.entries() == std::set<std::string>{"patch.csv", "patch.txt"});

    CHECK(run_cli("verify --suite no-such-suite").code == 1);
}

TEST_CASE("broken models exit 2 and leave only the failure log") {
    TempDir dir("broken");
    const fs::path bad = dir.path / "bad.json";
    std::ofstream(bad) << "{\"format_version\": 1}";
    TempDir out("broken_out");
    const RunResult r = run_cli("solve --model " + bad.string() + " --out " + out.str());
    CHECK(r.code == 2);
    CHECK(r.err.find("error") != std::string::npos);
    CHECK(out.entries() == std::set<std::string>{"failure.log"});
    CHECK(slurp(out.path / "failure.log").find("mesh") != std::string::npos);
}

TEST_CASE("mid-run failures roll every artifact back") {
    TempDir dir("rollback");
    // the monitor override points far outside the mesh: the model rejects it
    const RunResult r = run_cli("solve --model " + kDam + " --dt 250 --t-end 1000 " +
                                "--monitor \"far=(9999,9999)\" --out " + dir.str());
    CHECK(r.code == 2);
    CHECK(dir.entries() == std::set<std::string>{"failure.log"});
    CHECK(slurp(dir.path / "failure.log").find("outside the mesh") != std::string::npos);
}

TEST_CASE("usage errors exit 1 before touching any output") {
    TempDir dir("usage");
    CHECK(run_cli("solve").code == 1);                       // missing --model
    CHECK(run_cli("solve --model " + kColumn + " --bogus").code == 1);
    CHECK(run_cli("frobnicate").code == 1);                  // unknown subcommand
    // an overlay next to a native model is a usage contradiction
    const RunResult r = run_cli("solve --model " + kColumn + " --overlay " + kOverlay +
                                " --out " + dir.str());
    CHECK(r.code == 1);
    CHECK(dir.entries() == std::set<std::string>{"failure.log"});
}
