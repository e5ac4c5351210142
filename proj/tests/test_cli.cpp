#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// End-to-end checks of the installed command line: verbs, flag precedence,
// and the exit-code contract (0 valid, 1 I/O or config error, 2 hypothesis
// failure). SHADOWLAB_CLI_PATH is injected by the build.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
    const std::string command =
        std::string(SHADOWLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "shadowlab_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("shadow verb succeeds on the radial preset") {
    const auto out = fresh_dir("ok");
    const int code = run_cli("shadow --preset radial --d 1e-5 --seed 3 --out " +
                             out.string());
    CHECK(code == 0);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "orbit.csv"));
    CHECK(fs::exists(out / "shadow.csv"));
}

TEST_CASE("oversized defect exits with code 2") {
    const auto out = fresh_dir("too_big");
    const int code = run_cli("shadow --preset radial --d 0.45 --out " + out.string());
    CHECK(code == 2);
}

TEST_CASE("malformed orbit CSV exits with code 1") {
    const auto out = fresh_dir("bad_csv");
    {
        std::ofstream csv(out / "orbit_in.csv");
        csv << "k,x0\n0,0x1p+1\n1,not_a_number\n";
    }
    {
        std::ofstream cfg(out / "config.json");
        cfg << R"({"system": {"preset": "radial", "dimension": 1},)"
            << R"("orbit_source": "load_csv", "csv_path": ")"
            << (out / "orbit_in.csv").string() << R"("})";
    }
    const int code = run_cli("shadow --config " + (out / "config.json").string() +
                             " --out " + out.string());
    CHECK(code == 1);
}

TEST_CASE("unknown config path exits with code 1") {
    CHECK(run_cli("shadow --config /nonexistent/config.json") == 1);
}

TEST_CASE("bounds verb evaluates explicit constants") {
    const auto out = fresh_dir("bounds");
    {
        std::ofstream cfg(out / "config.json");
        cfg << R"({"bounds": {"C": 2.0, "gamma": 0.6931471805599453, "L1": 2.0},)"
            << R"("noise_level": 1e-4})";
    }
    const int code = run_cli("bounds --config " + (out / "config.json").string() +
                             " --out " + out.string());
    CHECK(code == 0);
    CHECK(fs::exists(out / "bounds.json"));
}

TEST_CASE("sweep verb writes the plot CSV") {
    const auto out = fresh_dir("sweep");
    const int code =
        run_cli("sweep --preset radial --seed 5 --d-values 1e-4 1e-5 1e-6 --out " +
                out.string());
    CHECK(code == 0);
    CHECK(fs::exists(out / "sweep.csv"));
}

TEST_CASE("inspect-splitting verb writes the frame") {
    const auto out = fresh_dir("inspect");
    {
        std::ofstream cfg(out / "config.json");
        cfg << R"({"system": {"preset": "linear_diag", "dimension": 2,)"
            << R"("diag": [0.5, 2.0]}, "noise_level": 1e-6, "window": 60,)"
            << R"("unstable_dim": 1, "start": [0.0, 0.0]})";
    }
    const int code = run_cli("inspect-splitting --config " +
                             (out / "config.json").string() + " --out " +
                             out.string());
    CHECK(code == 0);
    CHECK(fs::exists(out / "splitting.json"));
}

TEST_CASE("perturb verb certifies a shifted system's orbit") {
    const auto out = fresh_dir("perturb");
    {
        std::ofstream cfg(out / "config.json");
        cfg << R"({"system": {"preset": "double_well_gradient", "dimension": 1,)"
            << R"("h": 1.0, "integrator_tolerance": 1e-12},)"
            << R"("window": 150, "seed": 3, "start": [0.5], "mu": 0.2,)"
            << R"("perturbation": {"kind": "tilt", "epsilon": 1e-5}})";
    }
    const int code = run_cli("perturb --config " + (out / "config.json").string() +
                             " --out " + out.string());
    CHECK(code == 0);
}
