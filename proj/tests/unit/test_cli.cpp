#include <doctest.h>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "driftlab/config.hpp"
#include "driftlab/csv.hpp"
#include "driftlab/measures.hpp"

using namespace driftlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("driftlab_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// returns the exit code; stdout and stderr are captured into out_file
int run_cli(const std::string& args, const fs::path& out_file) {
    const std::string cmd =
        std::string(DRIFTLAB_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

const std::string kSimulateConfig = R"({
  "experiment": "simulate",
  "field": {"drift": "ou_linear", "params": {"c": 1.0},
            "diffusion": "constant_isotropic_diffusion", "diffusion_params": {"omega": 0.4}},
  "initial": {"kind": "point", "center": [1.0, -1.0]},
  "numerics": {"dt": 0.01, "T": 2.0, "N": 200, "seed": 5}
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("configs survive a save/load round trip unchanged") {
    config::ExperimentConfig cfg = config::load_config_string(kSimulateConfig);
    const std::string saved = config::save_config(cfg);
    CHECK(config::load_config_string(saved) == cfg);

    // a fuller config with optional blocks present
    config::ExperimentConfig full = cfg;
    full.experiment = config::ExperimentKind::verify;
    full.claim = "thm1_decay";
    full.field_b = config::FieldConfig{"", {}, "constant_isotropic_diffusion", {{"omega", 0.2}}};
    full.initial_b = cfg.initial;
    full.grid = config::GridConfig{-3, 3, -3, 3, 48, 48};
    full.numerics.seed = 123456789012345ull;
    full.equilibrium = {1.0, 0.0};
    full.output_dir = "elsewhere";
    CHECK(config::load_config_string(config::save_config(full)) == full);
}

TEST_CASE("config errors name the offending key or value") {
    const std::string unknown_key = R"({"experiment": "simulate", "bogus_knob": 1,
        "field": {"drift": "ou_linear", "params": {"c": 1.0}},
        "initial": {"kind": "point", "center": [0.0, 0.0]}})";
    CHECK_THROWS_WITH_AS(config::load_config_string(unknown_key),
                         doctest::Contains("bogus_knob"), std::invalid_argument);

    const std::string bad_drift = R"({"experiment": "simulate",
        "field": {"drift": "no_such_field"},
        "initial": {"kind": "point", "center": [0.0, 0.0]}})";
    CHECK_THROWS_WITH_AS(config::load_config_string(bad_drift),
                         doctest::Contains("no_such_field"), std::invalid_argument);

    const std::string bad_claim = R"({"experiment": "verify", "claim": "thm9",
        "field": {"drift": "ou_linear", "params": {"c": 1.0}},
        "initial": {"kind": "point", "center": [0.0, 0.0]}})";
    CHECK_THROWS_WITH_AS(config::load_config_string(bad_claim), doctest::Contains("thm9"),
                         std::invalid_argument);

    CHECK_THROWS_AS(config::load_config_string("{not json"), std::runtime_error);
}

TEST_CASE("grid and series csv files round trip at full precision") {
    TempDir tmp;
    const measures::GridSpec spec(-1.25, 2.5, 0.0, 1.0, 6, 4);
    measures::GridDensity d(spec);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) d.values(i, j) = std::sin(1.0 + i) * std::cos(2.0 + j) / 3.0;

    const fs::path gp = tmp.path / "grid.csv";
    csv::write_grid(gp.string(), d);
    const auto back = csv::read_grid(gp.string());
    CHECK(back.grid.same_as(spec));
    CHECK((back.values - d.values).cwiseAbs().maxCoeff() < 1e-12);

    harness::Series s;
    s.name = "w2";
    s.columns = {"t", "w2"};
    s.rows = {{0.0, 1.0 / 3.0}, {0.5, 1e-17}, {1.0, 123456.789}};
    const fs::path sp = tmp.path / "series.csv";
    csv::write_series(sp.string(), s);
    const auto s2 = csv::read_series(sp.string());
    CHECK(s2.columns == s.columns);
    REQUIRE(s2.rows.size() == 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c)
            CHECK(s2.rows[r][c] == doctest::Approx(s.rows[r][c]).epsilon(1e-15));

    write_file(tmp.path, "ragged.csv", "t,x\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(csv::read_series((tmp.path / "ragged.csv").string()),
                         doctest::Contains("ragged.csv"), std::runtime_error);
}

TEST_CASE("run executes a simulation and writes the documented layout") {
    TempDir tmp;
    const fs::path cfg = write_file(tmp.path, "sim.json", kSimulateConfig);
    const fs::path out = tmp.path / "out";
    const int code =
        run_cli("run " + cfg.string() + " --output-dir " + out.string(), tmp.path / "log.txt");
    CHECK(code == 0);

    CHECK(fs::exists(out / "meta.txt"));
    CHECK(fs::exists(out / "report.txt"));
    CHECK(fs::exists(out / "series_path.csv"));
    CHECK(fs::exists(out / "series_ensemble.csv"));

    const std::string meta = slurp(out / "meta.txt");
    CHECK(meta.find("seed = 5") != std::string::npos);
    CHECK(meta.find("experiment = simulate") != std::string::npos);
    CHECK(meta.find("drift = ou_linear") != std::string::npos);

    const std::string report = slurp(out / "report.txt");
    CHECK(report.find("status") != std::string::npos);
}

TEST_CASE("the output directory env var is honored when no flag is given") {
    TempDir tmp;
    const fs::path cfg = write_file(tmp.path, "sim.json", kSimulateConfig);
    const fs::path out = tmp.path / "env_out";
    const std::string cmd = "DRIFTLAB_OUTPUT_DIR=" + out.string() + " " +
                            std::string(DRIFTLAB_CLI_PATH) + " run " + cfg.string() + " > " +
                            (tmp.path / "log.txt").string() + " 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(out / "meta.txt"));
}

TEST_CASE("config problems surface as exit code 3 with a named cause") {
    TempDir tmp;
    const fs::path bad = write_file(tmp.path, "bad.json", R"({
        "experiment": "simulate", "surprise": true,
        "field": {"drift": "ou_linear", "params": {"c": 1.0}},
        "initial": {"kind": "point", "center": [0.0, 0.0]}})");
    const fs::path log = tmp.path / "log.txt";
    CHECK(run_cli("run " + bad.string(), log) == 3);
    CHECK(slurp(log).find("surprise") != std::string::npos);

    const fs::path missing = tmp.path / "absent.json";
    CHECK(run_cli("run " + missing.string(), log) == 3);

    const fs::path badfield = write_file(tmp.path, "badfield.json", R"({
        "experiment": "simulate",
        "field": {"drift": "warp_field"},
        "initial": {"kind": "point", "center": [0.0, 0.0]}})");
    CHECK(run_cli("run " + badfield.string(), log) == 3);
    CHECK(slurp(log).find("warp_field") != std::string::npos);
}

TEST_CASE("check prints the normalized config without running anything") {
    TempDir tmp;
    const fs::path cfg = write_file(tmp.path, "sim.json", kSimulateConfig);
    const fs::path log = tmp.path / "log.txt";
    CHECK(run_cli("check " + cfg.string(), log) == 0);
    const std::string printed = slurp(log);
    CHECK(printed.find("\"experiment\": \"simulate\"") != std::string::npos);
    CHECK(printed.find("\"seed\": 5") != std::string::npos);
    // nothing was executed, so no output directory appeared
    CHECK_FALSE(fs::exists(tmp.path / "out"));
}

TEST_CASE("a two-measure distance run reports and exits cleanly") {
    TempDir tmp;
    const std::string cfg_text = R"({
      "experiment": "wasserstein",
      "field": {"drift": "ou_linear", "params": {"c": 1.0},
                "diffusion": "constant_isotropic_diffusion", "diffusion_params": {"omega": 0.4}},
      "field_b": {"drift": "ou_linear", "params": {"c": 1.0},
                  "diffusion": "constant_isotropic_diffusion", "diffusion_params": {"omega": 0.2}},
      "initial": {"kind": "point", "center": [0.0, 0.0]},
      "numerics": {"dt": 0.01, "T": 1.0, "N": 300, "seed": 6},
      "w2": {"method": "exact"}
    })";
    const fs::path cfg = write_file(tmp.path, "w2.json", cfg_text);
    const fs::path out = tmp.path / "out";
    CHECK(run_cli("run " + cfg.string() + " --output-dir " + out.string(),
                  tmp.path / "log.txt") == 0);
    CHECK(fs::exists(out / "series_ensemble_a.csv"));
    CHECK(fs::exists(out / "series_ensemble_b.csv"));
    const std::string report = slurp(out / "report.txt");
    CHECK(report.find("w2") != std::string::npos);
}

}  // TEST_SUITE
