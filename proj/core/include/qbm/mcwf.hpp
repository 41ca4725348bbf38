// mcwf.hpp: Monte Carlo wave-function unraveling of the secular master equation

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "qbm/coefficients.hpp"

namespace qbm {

enum class JumpChannel { Down, Up };

struct JumpRecord {
    double t = 0.0;
    JumpChannel channel = JumpChannel::Down;
};

struct Trajectory {
    std::uint64_t seed = 0;
    std::vector<JumpRecord> jump_log;
    Eigen::VectorXcd final_state;
    /// <n> of the normalized state at each grid time.
    std::vector<double> n_samples;
};

struct EnsembleEstimate {
    std::vector<double> t_grid;
    std::vector<double> n_mean;
    std::vector<double> std_err;
    std::vector<double> down_jumps_mean, down_jumps_std_err;
    std::vector<double> up_jumps_mean, up_jumps_std_err;
    std::size_t n_traj = 0;
    std::uint64_t master_seed = 0;
};

struct McwfOptions {
    unsigned threads = 0;
    /// Keep per-trajectory jump logs (first `keep_trajectories` trajectories only).
    std::size_t keep_trajectories = 0;
    /// Relative tolerance of the jump-time root finding.
    double time_tol = 1e-12;
};

/// Seed of trajectory `index`: SplitMix64 finalizer of master_seed and index.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

/// One trajectory on t_grid (ascending, within the table). Jump operators a at rate
/// Delta + gamma and a^+ at rate Delta - gamma. The no-jump evolution is diagonal in the
/// number basis and integrated exactly; jump times come from inverting the norm decay.
/// Throws RegimeError if a rate is negative anywhere on [0, t_grid.back()].
Trajectory run_trajectory(const Eigen::VectorXcd& psi0, const CoefficientTable& table,
                          const std::vector<double>& t_grid, std::uint64_t seed);

/// Ensemble average over n_traj trajectories. Bit-identical for fixed inputs regardless of
/// the thread count: trajectories are reduced in fixed-size chunks merged in index order.
EnsembleEstimate run_ensemble(const Eigen::VectorXcd& psi0, const CoefficientTable& table,
                              const std::vector<double>& t_grid, std::size_t n_traj, std::uint64_t master_seed,
                              const McwfOptions& opts = {}, std::vector<Trajectory>* kept = nullptr);

/// Header `t,n_mean,std_err`.
void write_ensemble_csv(std::ostream& os, const EnsembleEstimate& est);
/// Header `trajectory,seed,t,channel`.
void write_jump_log_csv(std::ostream& os, const std::vector<Trajectory>& trajectories);

}  // namespace qbm
