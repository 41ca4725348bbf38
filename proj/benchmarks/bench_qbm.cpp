// bench_qbm.cpp: throughput of the main numerical kernels

#include <benchmark/benchmark.h>

#include "qbm/coefficients.hpp"
#include "qbm/fock.hpp"
#include "qbm/gaussian_qcf.hpp"
#include "qbm/mcwf.hpp"
#include "qbm/spectral.hpp"
#include "qbm/units.hpp"

namespace {

qbm::ReservoirSpec lindblad_spec() { return qbm::ReservoirSpec(1.0, 0.05, 10.0, 10.0); }

void BM_NoiseKernelQuadrature(benchmark::State& state) {
    const auto spec = qbm::ReservoirSpec(1.0, 0.1, 0.5, 2.0);
    double tau = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qbm::noise_kernel(spec, tau));
        tau += 1e-3;
    }
}
BENCHMARK(BM_NoiseKernelQuadrature);

void BM_CoefficientTable(benchmark::State& state) {
    const auto spec = qbm::ReservoirSpec::from_kelvin(1e7, 1e-8, 1e6, 300.0);
    const double t_max = 4.0 * 3.141592653589793 / 1e7;
    for (auto _ : state) benchmark::DoNotOptimize(qbm::build_coefficient_table(spec, t_max, state.range(0), {1}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CoefficientTable)->Arg(400)->Arg(1600);

void BM_VacuumCoefficientTable(benchmark::State& state) {
    const auto spec = qbm::ReservoirSpec(1.0, 0.1, 0.5, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(qbm::build_coefficient_table(spec, 10.0, 200, {1}));
}
BENCHMARK(BM_VacuumCoefficientTable);

void BM_QcfFullPropagation(benchmark::State& state) {
    const qbm::PropagatorBundle bundle(qbm::build_coefficient_table(lindblad_spec(), 10.0, 2000, {1}));
    const auto s0 = qbm::GaussianQcfState::squeezed(0.5);
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qbm::propagate_full(s0, bundle, t));
        t = t > 9.9 ? 0.0 : t + 0.01;
    }
}
BENCHMARK(BM_QcfFullPropagation);

void BM_FockIntegration(benchmark::State& state) {
    const auto table = qbm::build_coefficient_table(lindblad_spec(), 10.0, 2000, {1});
    const int dim = static_cast<int>(state.range(0));
    const std::vector<double> grid{2.5, 5.0, 7.5, 10.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(qbm::integrate_secular(qbm::FockDensityMatrix::vacuum(dim), table, grid));
}
BENCHMARK(BM_FockIntegration)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_McwfEnsemble(benchmark::State& state) {
    const auto table = qbm::build_coefficient_table(lindblad_spec(), 10.0, 2000, {1});
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(20);
    psi(0) = 1.0;
    std::vector<double> grid;
    for (int i = 1; i <= 50; ++i) grid.push_back(0.2 * i);
    qbm::McwfOptions opts;
    opts.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(qbm::run_ensemble(psi, table, grid, 4096, 1, opts));
    state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_McwfEnsemble)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
