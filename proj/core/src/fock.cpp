#include "qbm/fock.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"

namespace qbm {

using cplx = std::complex<double>;

FockDensityMatrix FockDensityMatrix::vacuum(int dim) { return number_state(dim, 0); }

FockDensityMatrix FockDensityMatrix::number_state(int dim, int k) {
    if (dim < 1 || k < 0 || k >= dim) throw std::invalid_argument("number state outside the truncated basis");
    FockDensityMatrix s;
    s.rho = Eigen::MatrixXcd::Zero(dim, dim);
    s.rho(k, k) = 1.0;
    return s;
}

FockDensityMatrix FockDensityMatrix::thermal(int dim, double nbar) {
    if (dim < 1 || !(nbar >= 0.0)) throw std::invalid_argument("invalid thermal state parameters");
    FockDensityMatrix s;
    s.rho = Eigen::MatrixXcd::Zero(dim, dim);
    const double q = nbar / (nbar + 1.0);
    double p = 1.0 / (nbar + 1.0), total = 0.0;
    for (int k = 0; k < dim; ++k, p *= q) {
        s.rho(k, k) = p;
        total += p;
    }
    s.rho /= total;
    return s;
}

FockDensityMatrix FockDensityMatrix::pure(const Eigen::VectorXcd& psi) {
    const double norm = psi.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("zero state vector");
    FockDensityMatrix s;
    const Eigen::VectorXcd v = psi / norm;
    s.rho = v * v.adjoint();
    return s;
}

double FockDensityMatrix::mean_n() const {
    double n = 0.0;
    for (int k = 0; k < dim(); ++k) n += k * rho(k, k).real();
    return n;
}

cplx FockDensityMatrix::mean_a() const {
    // tr(rho a) = sum_m sqrt(m) rho(m, m-1)
    cplx s = 0.0;
    for (int m = 1; m < dim(); ++m) s += std::sqrt(double(m)) * rho(m, m - 1);
    return s;
}

cplx FockDensityMatrix::mean_a2() const {
    cplx s = 0.0;
    for (int m = 2; m < dim(); ++m) s += std::sqrt(double(m) * (m - 1)) * rho(m, m - 2);
    return s;
}

void FockDensityMatrix::validate() const {
    if (rho.rows() != rho.cols() || rho.rows() == 0) throw std::invalid_argument("density matrix must be square");
    if (!rho.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("density matrix not Hermitian");
    if (std::abs(trace() - 1.0) > 1e-8) throw std::invalid_argument("density matrix trace differs from 1");
}

namespace {

using State = std::vector<double>;

struct SecularGenerator {
    const CoefficientTable& table;
    int n;
    std::vector<double> sq;  // sqrt(k)

    void operator()(const State& x, State& dxdt, double t) const {
        const auto c = table.at(t);
        const double down = c.delta + c.gamma;  // jump a
        const double up = c.delta - c.gamma;    // jump a^+
        const auto* r = reinterpret_cast<const cplx*>(x.data());
        auto* d = reinterpret_cast<cplx*>(dxdt.data());
        auto aad = [&](int m) { return m + 1 < n ? double(m + 1) : 0.0; };  // (a a^+)_mm, truncated
        for (int m = 0; m < n; ++m) {
            for (int k = 0; k < n; ++k) {
                const cplx v = r[m * n + k];
                cplx out = -0.5 * (down * (m + k) + up * (aad(m) + aad(k))) * v;
                if (m + 1 < n && k + 1 < n) out += down * sq[m + 1] * sq[k + 1] * r[(m + 1) * n + k + 1];
                if (m > 0 && k > 0) out += up * sq[m] * sq[k] * r[(m - 1) * n + k - 1];
                d[m * n + k] = out;
            }
        }
    }
};

FockDensityMatrix unpack(const State& x, int n, double t) {
    FockDensityMatrix s;
    s.t = t;
    s.rho.resize(n, n);
    const auto* r = reinterpret_cast<const cplx*>(x.data());
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) s.rho(m, k) = r[m * n + k];
    return s;
}

}  // namespace

FockRun integrate_secular(const FockDensityMatrix& rho0, const CoefficientTable& table,
                          const std::vector<double>& t_grid, const FockOptions& opts) {
    rho0.validate();
    if (t_grid.empty()) return {};
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < rho0.t || (i > 0 && t_grid[i] <= t_grid[i - 1]))
            throw std::invalid_argument("t_grid must be strictly increasing and start at or after rho0.t");
    }
    if (t_grid.back() > table.t_max() * (1.0 + 1e-12)) throw RangeError("t_grid extends beyond the coefficient table");

    const int n = rho0.dim();
    SecularGenerator gen{table, n, {}};
    gen.sq.resize(n + 1);
    for (int k = 0; k <= n; ++k) gen.sq[k] = std::sqrt(double(k));

    State x(2 * std::size_t(n) * n);
    auto* r = reinterpret_cast<cplx*>(x.data());
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) r[m * n + k] = rho0.rho(m, k);

    std::vector<double> times;
    const bool skip_first = t_grid.front() > rho0.t;
    if (skip_first) times.push_back(rho0.t);
    times.insert(times.end(), t_grid.begin(), t_grid.end());

    FockRun run;
    bool pending_skip = skip_first;
    auto observe = [&](const State& s, double t) {
        if (pending_skip) {
            pending_skip = false;
            return;
        }
        auto st = unpack(s, n, t);
        const double tail = st.rho(n - 1, n - 1).real();
        if (tail > opts.spill_threshold)
            throw TruncationError("Fock truncation N=" + std::to_string(n) + " spilled (rho_N-1,N-1 = " +
                                      std::to_string(tail) + ") at t = " + std::to_string(t),
                                  t);
        run.audits.push_back(audit_positivity(st));
        run.states.push_back(std::move(st));
    };

    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
    const double span = times.back() - times.front();
    double dt0 = times.size() > 1 ? (times[1] - times[0]) * 0.1 : 1.0;
    if (span > 0.0) dt0 = std::min(dt0, span * 1e-3);
    try {
        if (times.size() == 1) {
            observe(x, times.front());
        } else {
            odeint::integrate_times(stepper, std::cref(gen), x, times.begin(), times.end(), dt0, observe,
                                    odeint::max_step_checker(opts.max_steps_per_interval));
        }
    } catch (const odeint::step_adjustment_error& e) {
        throw IntegratorError(std::string("Fock integration failed: ") + e.what());
    } catch (const odeint::no_progress_error& e) {
        throw IntegratorError(std::string("Fock integration made no progress: ") + e.what());
    }
    return run;
}

PositivityAudit audit_positivity(const FockDensityMatrix& state) {
    PositivityAudit a;
    a.t = state.t;
    a.hermiticity_error = (state.rho - state.rho.adjoint()).cwiseAbs().maxCoeff();
    a.trace_error = std::abs(state.trace() - 1.0);
    const Eigen::MatrixXcd h = 0.5 * (state.rho + state.rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    a.min_eigenvalue = es.eigenvalues().minCoeff();
    return a;
}

std::vector<PositivityAudit> audit_positivity(const std::vector<FockDensityMatrix>& states) {
    std::vector<PositivityAudit> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(audit_positivity(s));
    return out;
}

std::vector<double> heating_function(const std::vector<FockDensityMatrix>& states) {
    std::vector<double> n;
    n.reserve(states.size());
    for (const auto& s : states) n.push_back(s.mean_n());
    return n;
}

FockDensityMatrix rotate_to_lab(const FockDensityMatrix& state, double omega0) {
    FockDensityMatrix out = state;
    for (int m = 0; m < state.dim(); ++m)
        for (int k = 0; k < state.dim(); ++k) out.rho(m, k) *= std::polar(1.0, omega0 * state.t * (m - k));
    return out;
}

int thermal_truncation(double nbar, double tail) {
    if (!(nbar >= 0.0) || !(tail > 0.0 && tail < 1.0)) throw std::invalid_argument("invalid truncation request");
    if (nbar == 0.0) return 2;
    const double q = nbar / (nbar + 1.0);
    return std::max(2, static_cast<int>(std::ceil(std::log(tail) / std::log(q))));
}

void write_fock_csv(std::ostream& os, const std::vector<FockDensityMatrix>& states) {
    if (states.empty()) return;
    const int n = states.front().dim();
    os << "t,N";
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) os << ",re_" << m << '_' << k << ",im_" << m << '_' << k;
    os << '\n';
    std::vector<double> row;
    for (const auto& s : states) {
        row.assign({s.t, double(n)});
        for (int m = 0; m < n; ++m)
            for (int k = 0; k < n; ++k) {
                row.push_back(s.rho(m, k).real());
                row.push_back(s.rho(m, k).imag());
            }
        csv::write_row(os, row);
    }
}

void write_audit_csv(std::ostream& os, const std::vector<PositivityAudit>& audits) {
    csv::write_header(os, {"t", "min_eig", "trace_err", "herm_err"});
    for (const auto& a : audits) csv::write_row(os, {a.t, a.min_eigenvalue, a.trace_error, a.hermiticity_error});
}

}  // namespace qbm
