#include "qbm/mcwf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"
#include "qbm/parallel.hpp"

namespace qbm {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() { return mix64(state_ += kGolden); }
    /// Uniform in the open interval (0, 1).
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Cumulative integrals of the jump rates Delta +- gamma. The coefficient splines are cubic
// between grid points, so 5-point Gauss-Legendre per interval integrates them exactly.
class RateIntegrals {
public:
    explicit RateIntegrals(const CoefficientTable& table) : table_(table) {
        const auto& g = table.grid();
        down_.assign(g.size(), 0.0);
        up_.assign(g.size(), 0.0);
        for (std::size_t i = 1; i < g.size(); ++i) {
            const auto [d, u] = partial(g[i - 1], g[i]);
            down_[i] = down_[i - 1] + d;
            up_[i] = up_[i - 1] + u;
        }
    }

    /// (Int_0^t (Delta+gamma), Int_0^t (Delta-gamma))
    std::pair<double, double> at(double t) const {
        const double h = table_.step();
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t / h), down_.size() - 1);
        while (i > 0 && table_.grid()[i] > t) --i;
        const auto [d, u] = partial(table_.grid()[i], t);
        return {down_[i] + d, up_[i] + u};
    }

    std::pair<double, double> rates(double t) const {
        const auto c = table_.at(t);
        return {c.delta + c.gamma, c.delta - c.gamma};
    }

private:
    std::pair<double, double> partial(double a, double b) const {
        if (b <= a) return {0.0, 0.0};
        using GL = boost::math::quadrature::gauss<double, 5>;
        const auto& x = GL::abscissa();
        const auto& w = GL::weights();
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double d = 0.0, u = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            for (double sign : {1.0, -1.0}) {
                if (x[j] == 0.0 && sign < 0.0) continue;
                const auto c = table_.at(mid + sign * half * x[j]);
                d += w[j] * (c.delta + c.gamma);
                u += w[j] * (c.delta - c.gamma);
            }
        }
        return {half * d, half * u};
    }

    const CoefficientTable& table_;
    std::vector<double> down_, up_;
};

void check_rates(const CoefficientTable& table, double t_end) {
    const auto rep = classify_regime(table);
    for (std::size_t i = 0; i < table.size() && table.grid()[i] <= t_end; ++i) {
        const double m = std::min(table.delta()[i] - table.gamma()[i], table.delta()[i] + table.gamma()[i]);
        if (m < -rep.tol)
            throw RegimeError("negative jump rate " + std::to_string(m) + " at t = " + std::to_string(table.grid()[i]) +
                              "; the standard MCWF unraveling needs Lindblad-type rates, use the fock integrator");
    }
}

double aad(int k, int n) { return k + 1 < n ? double(k + 1) : 0.0; }

struct TrajectoryWork {
    std::vector<double> n_samples;
    std::vector<int> down_counts, up_counts;  // cumulative at each grid time
    std::vector<JumpRecord> log;
    Eigen::VectorXcd final_state;
};

TrajectoryWork simulate(const Eigen::VectorXcd& psi0, const RateIntegrals& ri, const std::vector<double>& t_grid,
                        std::uint64_t seed, bool keep_log, double time_tol) {
    const int n = static_cast<int>(psi0.size());
    SplitMix64 rng(seed);
    TrajectoryWork w;
    w.n_samples.reserve(t_grid.size());

    Eigen::VectorXcd psi = psi0.normalized();
    double t_event = 0.0;
    auto i_event = ri.at(0.0);
    double log_r = std::log(rng.uniform());
    int downs = 0, ups = 0;

    // Populations and log of the unnormalized norm at time t since the last event.
    Eigen::VectorXd pop(n);
    auto decay = [&](double t) {
        const auto it = ri.at(t);
        const double dd = it.first - i_event.first, du = it.second - i_event.second;
        for (int k = 0; k < n; ++k) pop(k) = std::norm(psi(k)) * std::exp(-(k * dd + aad(k, n) * du));
        return std::log(pop.sum());
    };

    double t_prev = 0.0;
    for (double tb : t_grid) {
        double ta = std::max(t_prev, t_event);
        while (decay(tb) <= log_r) {
            // Jump in (ta, tb]: the norm decays monotonically for non-negative rates.
            auto f = [&](double t) { return decay(t) - log_r; };
            double tj;
            if (f(ta) <= 0.0) {
                tj = ta;
            } else {
                std::uintmax_t iters = 200;
                const double scale = std::max(tb, 1e-300);
                auto tol = [&](double lo, double hi) { return hi - lo <= time_tol * scale; };
                const auto bracket = boost::math::tools::toms748_solve(f, ta, tb, f(ta), f(tb), tol, iters);
                tj = bracket.second;
            }
            decay(tj);
            const auto [rd, ru] = ri.rates(tj);
            double wd = 0.0, wu = 0.0;
            for (int k = 0; k < n; ++k) {
                wd += k * pop(k);
                wu += aad(k, n) * pop(k);
            }
            wd *= std::max(rd, 0.0);
            wu *= std::max(ru, 0.0);
            const auto it = ri.at(tj);
            const double dd = it.first - i_event.first, du = it.second - i_event.second;
            for (int k = 0; k < n; ++k) psi(k) *= std::exp(-0.5 * (k * dd + aad(k, n) * du));
            Eigen::VectorXcd next = Eigen::VectorXcd::Zero(n);
            JumpChannel ch;
            if (wd + wu <= 0.0) throw NumericalError("MCWF jump with vanishing total rate");
            if (rng.uniform() * (wd + wu) < wd) {
                ch = JumpChannel::Down;
                for (int k = 1; k < n; ++k) next(k - 1) = std::sqrt(double(k)) * psi(k);
                ++downs;
            } else {
                ch = JumpChannel::Up;
                for (int k = 0; k + 1 < n; ++k) next(k + 1) = std::sqrt(double(k + 1)) * psi(k);
                ++ups;
            }
            psi = next.normalized();
            if (keep_log) w.log.push_back({tj, ch});
            t_event = tj;
            i_event = it;
            ta = tj;
            log_r = std::log(rng.uniform());
        }
        decay(tb);
        const double norm = pop.sum();
        double nm = 0.0;
        for (int k = 0; k < n; ++k) nm += k * pop(k);
        w.n_samples.push_back(nm / norm);
        w.down_counts.push_back(downs);
        w.up_counts.push_back(ups);
        t_prev = tb;
    }
    // Bring the state to the last grid time.
    const auto it = ri.at(t_grid.empty() ? 0.0 : t_grid.back());
    for (int k = 0; k < n; ++k)
        psi(k) *= std::exp(-0.5 * (k * (it.first - i_event.first) + aad(k, n) * (it.second - i_event.second)));
    w.final_state = psi.normalized();
    return w;
}

void check_inputs(const Eigen::VectorXcd& psi0, const CoefficientTable& table, const std::vector<double>& t_grid) {
    if (psi0.size() < 2) throw std::invalid_argument("state vector needs at least 2 levels");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("initial state must be normalized");
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (t_grid[i] < 0.0 || (i > 0 && t_grid[i] <= t_grid[i - 1]))
            throw std::invalid_argument("t_grid must be non-negative and strictly increasing");
    if (!t_grid.empty() && t_grid.back() > table.t_max() * (1.0 + 1e-12))
        throw RangeError("t_grid extends beyond the coefficient table");
    if (!t_grid.empty()) check_rates(table, t_grid.back());
}

struct Welford {
    double count = 0.0, mean = 0.0, m2 = 0.0;
    void add(double x) {
        count += 1.0;
        const double d = x - mean;
        mean += d / count;
        m2 += d * (x - mean);
    }
    void merge(const Welford& o) {
        if (o.count == 0.0) return;
        const double total = count + o.count;
        const double d = o.mean - mean;
        mean += d * o.count / total;
        m2 += o.m2 + d * d * count * o.count / total;
        count = total;
    }
    double std_err() const { return count > 1.0 ? std::sqrt(m2 / (count - 1.0) / count) : 0.0; }
};

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(mix64(master_seed) + (index + 1) * kGolden);
}

Trajectory run_trajectory(const Eigen::VectorXcd& psi0, const CoefficientTable& table,
                          const std::vector<double>& t_grid, std::uint64_t seed) {
    check_inputs(psi0, table, t_grid);
    const RateIntegrals ri(table);
    auto w = simulate(psi0, ri, t_grid, seed, true, 1e-12);
    return {seed, std::move(w.log), std::move(w.final_state), std::move(w.n_samples)};
}

EnsembleEstimate run_ensemble(const Eigen::VectorXcd& psi0, const CoefficientTable& table,
                              const std::vector<double>& t_grid, std::size_t n_traj, std::uint64_t master_seed,
                              const McwfOptions& opts, std::vector<Trajectory>* kept) {
    check_inputs(psi0, table, t_grid);
    if (n_traj == 0) throw std::invalid_argument("n_traj must be positive");
    const RateIntegrals ri(table);
    const std::size_t m = t_grid.size();
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (n_traj + kChunk - 1) / kChunk;

    struct ChunkStats {
        std::vector<Welford> n, down, up;
    };
    std::vector<ChunkStats> stats(chunks);
    std::vector<Trajectory> keep(std::min(opts.keep_trajectories, n_traj));

    parallel_for(chunks, resolve_thread_count(opts.threads), [&](std::size_t c) {
        ChunkStats& s = stats[c];
        s.n.assign(m, {});
        s.down.assign(m, {});
        s.up.assign(m, {});
        const std::size_t end = std::min(n_traj, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            const std::uint64_t seed = trajectory_seed(master_seed, i);
            const bool keep_this = i < keep.size();
            auto w = simulate(psi0, ri, t_grid, seed, keep_this, opts.time_tol);
            for (std::size_t j = 0; j < m; ++j) {
                s.n[j].add(w.n_samples[j]);
                s.down[j].add(w.down_counts[j]);
                s.up[j].add(w.up_counts[j]);
            }
            if (keep_this) keep[i] = {seed, std::move(w.log), std::move(w.final_state), std::move(w.n_samples)};
        }
    });

    std::vector<Welford> n(m), down(m), up(m);
    for (const auto& s : stats)
        for (std::size_t j = 0; j < m; ++j) {
            n[j].merge(s.n[j]);
            down[j].merge(s.down[j]);
            up[j].merge(s.up[j]);
        }

    EnsembleEstimate est;
    est.t_grid = t_grid;
    est.n_traj = n_traj;
    est.master_seed = master_seed;
    for (std::size_t j = 0; j < m; ++j) {
        est.n_mean.push_back(n[j].mean);
        est.std_err.push_back(n[j].std_err());
        est.down_jumps_mean.push_back(down[j].mean);
        est.down_jumps_std_err.push_back(down[j].std_err());
        est.up_jumps_mean.push_back(up[j].mean);
        est.up_jumps_std_err.push_back(up[j].std_err());
    }
    if (kept) *kept = std::move(keep);
    return est;
}

void write_ensemble_csv(std::ostream& os, const EnsembleEstimate& est) {
    csv::write_header(os, {"t", "n_mean", "std_err"});
    for (std::size_t j = 0; j < est.t_grid.size(); ++j) csv::write_row(os, {est.t_grid[j], est.n_mean[j], est.std_err[j]});
}

void write_jump_log_csv(std::ostream& os, const std::vector<Trajectory>& trajectories) {
    os << "trajectory,seed,t,channel\n";
    for (std::size_t i = 0; i < trajectories.size(); ++i)
        for (const auto& j : trajectories[i].jump_log)
            os << i << ',' << trajectories[i].seed << ',' << csv::format(j.t) << ','
               << (j.channel == JumpChannel::Down ? "down" : "up") << '\n';
}

}  // namespace qbm
