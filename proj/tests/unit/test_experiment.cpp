// test_experiment.cpp: config parsing, provenance and file-driven runs
#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qbm/errors.hpp"
#include "qbm/experiment.hpp"
#include "qbm/units.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

const std::string kBase = R"([reservoir]
frequency_units = rad/s
omega0 = 2.0
alpha = 0.1
r = 5
temperature_units = hbar_omega0
temperature = 3

[run]
experiment = heating
t_max = 6.0
n_steps = 200
)";

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("qbm_unit_" + name);
    fs::remove_all(d);
    return d;
}

std::string config_error(const std::string& text) {
    try {
        qbm::parse_config(text);
    } catch (const qbm::ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("experiment names round-trip", "[experiment]") {
    for (const char* name : {"coefficients", "heating", "qcf", "mcwf", "regimes", "rwa-compare"}) {
        auto kind = qbm::parse_experiment_kind(name);
        REQUIRE(kind.has_value());
        CHECK(qbm::to_string(*kind) == name);
    }
    CHECK_FALSE(qbm::parse_experiment_kind("plot").has_value());
}

TEST_CASE("a valid config is ingested in internal units", "[experiment]") {
    auto cfg = qbm::parse_config(kBase);
    CHECK(cfg.experiment == qbm::ExperimentKind::Heating);
    CHECK(cfg.omega0 == 2.0);
    CHECK(cfg.omega_c == 10.0);
    CHECK(cfg.kt == 6.0);
    CHECK(cfg.t_max == 6.0);
    CHECK(cfg.n_steps == 200);
    CHECK(cfg.initial.kind == qbm::InitialStateConfig::Kind::Vacuum);
    CHECK(cfg.source_text == kBase);
    auto spec = cfg.reservoir();
    CHECK(spec.ratio() == 5.0);
}

TEST_CASE("hertz and kelvin are converted once", "[experiment]") {
    std::string text = kBase;
    text.replace(text.find("rad/s"), 5, "Hz");
    text.replace(text.find("hbar_omega0"), 11, "K");
    text.replace(text.find("r = 5"), 5, "omega_c = 3");
    text.replace(text.find("t_max = 6.0"), 11, "t_max_periods = 2");
    auto cfg = qbm::parse_config(text);
    CHECK_THAT(cfg.omega0, WithinRel(4.0 * std::numbers::pi, 1e-15));
    CHECK_THAT(cfg.omega_c, WithinRel(6.0 * std::numbers::pi, 1e-15));
    CHECK_THAT(cfg.kt, WithinRel(qbm::units::kelvin_to_rad_per_s(3.0), 1e-15));
    CHECK_THAT(cfg.t_max, WithinRel(2.0 * 2.0 * std::numbers::pi / cfg.omega0, 1e-15));
}

TEST_CASE("every violation is reported with its field path", "[experiment]") {
    const std::string text = R"([reservoir]
omega0 = -1
alpha = abc
r = 2
omega_c = 3
temperature = 1

[run]
experiment = heating
t_max = 1
n_steps = 4
colour = blue
)";
    const std::string msg = config_error(text);
    CHECK_THAT(msg, ContainsSubstring("reservoir.frequency_units"));
    CHECK_THAT(msg, ContainsSubstring("reservoir.omega0: must be positive"));
    CHECK_THAT(msg, ContainsSubstring("reservoir.alpha"));
    CHECK_THAT(msg, ContainsSubstring("exactly one of omega_c or r"));
    CHECK_THAT(msg, ContainsSubstring("reservoir.temperature_units"));
    CHECK_THAT(msg, ContainsSubstring("run.n_steps"));
    CHECK_THAT(msg, ContainsSubstring("run.colour: unknown key"));
}

TEST_CASE("experiment-specific requirements are checked before running", "[experiment]") {
    std::string mcwf = kBase + "\n[initial_state]\nkind = thermal\nnbar = 1\n";
    mcwf.replace(mcwf.find("experiment = heating"), 20, "experiment = mcwf");
    CHECK_THAT(config_error(mcwf), ContainsSubstring("mcwf needs a pure initial state"));

    std::string gauss = kBase + "\n[initial_state]\nkind = gaussian\ncov_xx = 0.1\ncov_xp = 0\ncov_pp = 0.1\n";
    CHECK_THAT(config_error(gauss), ContainsSubstring("det(cov) >= 1/4"));

    CHECK_THROWS_AS(qbm::parse_config(kBase, qbm::ExperimentKind::Mcwf), qbm::ConfigError);
    CHECK_NOTHROW(qbm::parse_config(kBase, qbm::ExperimentKind::Heating));
    CHECK_THROWS_AS(qbm::load_config("/nonexistent/qbm.ini"), qbm::ConfigError);
}

TEST_CASE("sha256 matches the standard test vectors", "[experiment]") {
    CHECK(qbm::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(qbm::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("zero coupling heating run writes a flat series", "[experiment]") {
    std::string text = kBase;
    text.replace(text.find("alpha = 0.1"), 11, "alpha = 0");
    auto cfg = qbm::parse_config(text);
    const auto dir = fresh_dir("flat");
    auto result = qbm::run_experiment(cfg, dir, {.threads = 1});
    CHECK(fs::exists(dir / "heating.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "plot.gp"));
    CHECK(result.files.size() == 3);

    std::istringstream csv(read_file(dir / "heating.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,n_mean");
    int rows = 0;
    while (std::getline(csv, line)) {
        CHECK_THAT(std::stod(line.substr(line.find(',') + 1)), Catch::Matchers::WithinAbs(0.0, 1e-14));
        ++rows;
    }
    CHECK(rows == 201);

    auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
    CHECK(summary["provenance"]["config_sha256"] == qbm::sha256_hex(text));
    CHECK(summary["heating"]["monotone_non_decreasing"] == true);
    fs::remove_all(dir);
}

TEST_CASE("repeated runs are byte-identical across thread counts", "[experiment]") {
    std::string text = kBase;
    text.replace(text.find("experiment = heating"), 20, "experiment = mcwf");
    text += "\n[mcwf]\nn_traj = 600\nmaster_seed = 77\nkeep_jump_logs = 3\n";
    auto cfg = qbm::parse_config(text);
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    qbm::run_experiment(cfg, a, {.threads = 1});
    qbm::run_experiment(cfg, b, {.threads = 8});
    for (const char* f : {"mcwf.csv", "jumps.csv", "summary.json", "plot.gp"}) {
        CAPTURE(f);
        CHECK(read_file(a / f) == read_file(b / f));
    }
    auto summary = nlohmann::json::parse(read_file(a / "summary.json"));
    CHECK(summary["provenance"]["master_seed"] == 77);
    CHECK(summary["mcwf"]["n_traj"] == 600);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("regime sweep marks the slow cutoff as non-Lindblad", "[experiment]") {
    const std::string text = R"([reservoir]
frequency_units = rad/s
omega0 = 1e7
r = 1
alpha = 1e-8
temperature_units = K
temperature = 300

[run]
experiment = regimes
t_max_periods = 2
n_steps = 400

[regimes]
r_values = 0.1, 10

[output]
gnuplot = false
)";
    auto cfg = qbm::parse_config(text);
    const auto dir = fresh_dir("regimes");
    qbm::run_experiment(cfg, dir);
    CHECK_FALSE(fs::exists(dir / "plot.gp"));
    auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
    REQUIRE(summary["regimes"].size() == 2);
    CHECK(summary["regimes"][0]["classification"] == "NonLindbladType");
    CHECK(summary["regimes"][0]["r"] == 0.1);
    CHECK(summary["regimes"][1]["classification"] == "LindbladType");
    fs::remove_all(dir);
}
