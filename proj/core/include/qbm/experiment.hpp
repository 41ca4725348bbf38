// experiment.hpp: file-driven experiment configuration and runner

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbm/spectral.hpp"

namespace qbm {

enum class ExperimentKind { Coefficients, Heating, Qcf, Mcwf, Regimes, RwaCompare };

/// "coefficients", "heating", "qcf", "mcwf", "regimes", "rwa-compare"
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

struct InitialStateConfig {
    enum class Kind { Vacuum, Coherent, Fock, Thermal, Gaussian };
    Kind kind = Kind::Vacuum;
    double mean_x = 0.0, mean_p = 0.0;
    int fock_k = 0;
    double nbar = 0.0;
    /// QCF covariance entries (cov_xx, cov_xp, cov_pp) for Kind::Gaussian.
    std::array<double, 3> cov{0.5, 0.0, 0.5};
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Coefficients;

    // [reservoir]; frequencies stored in rad/s, kT in rad/s after ingestion.
    double omega0 = 0.0;
    double alpha = 0.0;
    double omega_c = 0.0;
    double kt = 0.0;

    // [run]
    double t_max = 0.0;
    int n_steps = 0;
    std::string solver = "qcf";

    InitialStateConfig initial;

    // [mcwf]
    std::size_t n_traj = 1000;
    std::uint64_t master_seed = 1;
    std::size_t keep_jump_logs = 0;

    // [fock]
    std::optional<int> fock_dim;
    double spill_threshold = 1e-6;

    // [output]
    std::string output_directory = "out";
    bool write_gnuplot = true;

    // [regimes]
    std::vector<double> r_values{0.1, 0.3, 1.0, 3.0, 10.0};

    /// Raw config bytes, hashed into the provenance block.
    std::string source_text;

    ReservoirSpec reservoir() const;
};

/// Parses an INI config. Every violation is collected and reported together in one
/// ConfigError, each prefixed by its field path (e.g. "reservoir.omega0: must be positive").
/// `experiment_override` (the CLI subcommand) must agree with run.experiment when both are set.
ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentKind> experiment_override = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<ExperimentKind> experiment_override = {});

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

struct ExperimentResult {
    std::vector<std::filesystem::path> files;
};

struct RunOptions {
    unsigned threads = 0;
};

/// Runs the configured experiment and writes CSV series, summary.json and plot.gp into
/// `out_dir`. Outputs depend only on the config (never on thread count or wall time).
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                const RunOptions& opts = {});

}  // namespace qbm
