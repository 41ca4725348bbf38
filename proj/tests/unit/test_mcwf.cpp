// test_mcwf.cpp: quantum-jump unraveling against deterministic oracles
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"
#include "qbm/fock.hpp"
#include "qbm/mcwf.hpp"

using Catch::Matchers::WithinAbs;
using qbm::ReservoirSpec;
using std::numbers::pi;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * i / n;
    return v;
}

Eigen::VectorXcd basis(int dim, int k) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(k) = 1.0;
    return v;
}

// Rates Delta +- gamma given directly: down = Delta + gamma, up = Delta - gamma.
qbm::CoefficientTable rate_table(double t_max, double down, double up, int n = 200) {
    return qbm::CoefficientTable::from_rates(ReservoirSpec(1.0, 0.1, 1.0, 1.0), t_max,
                                             std::vector<double>(n + 1, 0.5 * (down + up)),
                                             std::vector<double>(n + 1, 0.5 * (down - up)));
}

const qbm::CoefficientTable& lindblad_table() {
    static const auto table = qbm::build_coefficient_table(ReservoirSpec::scaled(1.0, 0.05, 10.0, 10.0), 4.0 * pi, 4000);
    return table;
}

}  // namespace

TEST_CASE("trajectory seeds are distinct and keyed by master seed", "[mcwf]") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100000; ++i) seen.insert(qbm::trajectory_seed(42, i));
    CHECK(seen.size() == 100000);
    CHECK(qbm::trajectory_seed(1, 0) != qbm::trajectory_seed(2, 0));
    CHECK(qbm::trajectory_seed(7, 3) == qbm::trajectory_seed(7, 3));
}

TEST_CASE("zero rates never jump", "[mcwf]") {
    auto table = rate_table(5.0, 0.0, 0.0);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
    psi(1) = 0.6;
    psi(3) = std::complex<double>(0.0, 0.8);
    std::vector<qbm::Trajectory> kept;
    auto est = qbm::run_ensemble(psi, table, linspace(0.0, 5.0, 10), 500, 3, {.keep_trajectories = 500}, &kept);
    for (std::size_t i = 0; i < est.t_grid.size(); ++i) {
        CHECK(est.n_mean[i] == Catch::Approx(0.36 + 3.0 * 0.64).epsilon(1e-14));
        CHECK(est.std_err[i] == Catch::Approx(0.0).margin(1e-12));
        CHECK(est.down_jumps_mean[i] == 0.0);
        CHECK(est.up_jumps_mean[i] == 0.0);
    }
    REQUIRE(kept.size() == 500);
    for (const auto& tr : kept) CHECK(tr.jump_log.empty());
}

TEST_CASE("pure heating matches the scalar rate equation", "[mcwf]") {
    // dn/dt = g (n + 1) from vacuum: n(t) = e^{g t} - 1
    const double g = 0.5;
    auto table = rate_table(2.0, 0.0, g);
    auto grid = linspace(0.0, 2.0, 10);
    auto est = qbm::run_ensemble(basis(60, 0), table, grid, 10000, 11);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exact = std::expm1(g * grid[i]);
        CAPTURE(grid[i]);
        CHECK(std::abs(est.n_mean[i] - exact) <= 3.0 * est.std_err[i] + 1e-14);
        CHECK(est.down_jumps_mean[i] == 0.0);
        // every up-jump adds one quantum
        CHECK(est.up_jumps_mean[i] == Catch::Approx(est.n_mean[i]).epsilon(1e-12));
    }
}

TEST_CASE("ensemble mean agrees with the number-basis solution", "[mcwf]") {
    const auto& table = lindblad_table();
    REQUIRE(qbm::classify_regime(table).classification == qbm::RegimeClass::LindbladType);
    auto grid = linspace(0.0, 4.0 * pi, 20);
    auto fock = qbm::integrate_secular(qbm::FockDensityMatrix::vacuum(80), table, grid);
    auto n_ref = qbm::heating_function(fock.states);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto est = qbm::run_ensemble(basis(80, 0), table, grid, 20000, seed);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            CAPTURE(seed, grid[i]);
            CHECK(std::abs(est.n_mean[i] - n_ref[i]) <= 3.0 * est.std_err[i]);
        }
    }
}

TEST_CASE("jump counts match the integrated jump rates", "[mcwf]") {
    const auto& table = lindblad_table();
    const int fine = 400;
    auto fgrid = linspace(0.0, 4.0 * pi, fine);
    auto fock = qbm::integrate_secular(qbm::FockDensityMatrix::vacuum(80), table, fgrid);
    auto n = qbm::heating_function(fock.states);
    // trapezoid of (Delta + gamma) <n> and (Delta - gamma)(<n> + 1)
    double down = 0.0, up = 0.0;
    for (int i = 0; i < fine; ++i) {
        auto a = table.at(fgrid[i]), b = table.at(fgrid[i + 1]);
        const double h = fgrid[i + 1] - fgrid[i];
        down += 0.5 * h * ((a.delta + a.gamma) * n[i] + (b.delta + b.gamma) * n[i + 1]);
        up += 0.5 * h * ((a.delta - a.gamma) * (n[i] + 1.0) + (b.delta - b.gamma) * (n[i + 1] + 1.0));
    }
    auto est = qbm::run_ensemble(basis(80, 0), table, {0.0, 4.0 * pi}, 20000, 5);
    CHECK(std::abs(est.down_jumps_mean.back() - down) <= 3.0 * est.down_jumps_std_err.back());
    CHECK(std::abs(est.up_jumps_mean.back() - up) <= 3.0 * est.up_jumps_std_err.back());
}

TEST_CASE("ensemble results are bit-identical across runs and thread counts", "[mcwf]") {
    const auto& table = lindblad_table();
    auto grid = linspace(0.0, 4.0 * pi, 10);
    auto csv = [&](unsigned threads) {
        auto est = qbm::run_ensemble(basis(80, 0), table, grid, 3000, 99, {.threads = threads});
        std::ostringstream os;
        qbm::write_ensemble_csv(os, est);
        return os.str();
    };
    const std::string one = csv(1);
    CHECK(one == csv(1));
    CHECK(one == csv(4));
    CHECK(one == csv(8));
    CHECK(one.rfind("t,n_mean,std_err\n", 0) == 0);
}

TEST_CASE("standard error is the sample deviation over the root count", "[mcwf]") {
    const auto& table = lindblad_table();
    auto grid = linspace(0.0, 4.0 * pi, 4);
    std::vector<qbm::Trajectory> kept;
    const std::size_t n = 700;
    auto est = qbm::run_ensemble(basis(80, 0), table, grid, n, 8, {.keep_trajectories = n}, &kept);
    REQUIRE(kept.size() == n);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double mean = 0.0, m2 = 0.0;
        for (const auto& tr : kept) mean += tr.n_samples[i] / n;
        for (const auto& tr : kept) m2 += (tr.n_samples[i] - mean) * (tr.n_samples[i] - mean);
        CHECK_THAT(est.n_mean[i], WithinAbs(mean, 1e-12));
        CHECK_THAT(est.std_err[i], WithinAbs(std::sqrt(m2 / (n - 1) / n), 1e-12));
    }
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(kept[k].seed == qbm::trajectory_seed(8, k));
        CHECK_THAT(kept[k].final_state.norm(), WithinAbs(1.0, 1e-10));
        for (std::size_t j = 1; j < kept[k].jump_log.size(); ++j)
            CHECK(kept[k].jump_log[j].t >= kept[k].jump_log[j - 1].t);
    }
    // a single trajectory reproduces its ensemble slot
    auto solo = qbm::run_trajectory(basis(80, 0), table, grid, qbm::trajectory_seed(8, 17));
    CHECK(solo.n_samples == kept[17].n_samples);

    std::ostringstream os;
    qbm::write_jump_log_csv(os, kept);
    CHECK(os.str().rfind("trajectory,seed,t,channel\n", 0) == 0);
}

TEST_CASE("negative rates are rejected", "[mcwf]") {
    auto table = qbm::build_coefficient_table(ReservoirSpec::scaled(1.0, 0.1, 0.1, 10.0), 4.0 * pi, 800);
    REQUIRE(qbm::classify_regime(table).classification == qbm::RegimeClass::NonLindbladType);
    CHECK_THROWS_AS(qbm::run_ensemble(basis(40, 0), table, linspace(0.0, 4.0 * pi, 10), 10, 1), qbm::RegimeError);
    auto negative = rate_table(1.0, 0.2, -0.1);
    CHECK_THROWS_AS(qbm::run_trajectory(basis(10, 0), negative, {0.0, 1.0}, 1), qbm::RegimeError);
}
