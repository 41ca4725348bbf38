#include "qbm/gaussian_qcf.hpp"

#include <cmath>
#include <complex>
#include <ostream>
#include <stdexcept>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"

namespace qbm {

GaussianQcfState GaussianQcfState::vacuum() { return {}; }

GaussianQcfState GaussianQcfState::coherent(double mean_x, double mean_p) {
    GaussianQcfState s;
    s.mean = {mean_x, mean_p};
    return s;
}

GaussianQcfState GaussianQcfState::thermal(double nbar) {
    if (!(nbar >= 0.0)) throw std::invalid_argument("thermal occupation must be non-negative");
    GaussianQcfState s;
    s.cov = (nbar + 0.5) * Eigen::Matrix2d::Identity();
    return s;
}

GaussianQcfState GaussianQcfState::squeezed(double r, double phi, Eigen::Vector2d mean) {
    Eigen::Matrix2d rot;
    rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    Eigen::Matrix2d v = Eigen::Vector2d(0.5 * std::exp(-2.0 * r), 0.5 * std::exp(2.0 * r)).asDiagonal();
    return from_quadratures(mean, rot * v * rot.transpose());
}

GaussianQcfState GaussianQcfState::from_quadratures(const Eigen::Vector2d& mean, const Eigen::Matrix2d& q) {
    GaussianQcfState s;
    s.mean = mean;
    const double c = 0.5 * (q(0, 1) + q(1, 0));
    s.cov << q(1, 1), -c, -c, q(0, 0);
    s.validate();
    return s;
}

Eigen::Matrix2d GaussianQcfState::quadrature_covariance() const {
    Eigen::Matrix2d q;
    q << cov(1, 1), -cov(0, 1), -cov(0, 1), cov(0, 0);
    return q;
}

double GaussianQcfState::mean_n() const { return 0.5 * (cov.trace() - 1.0) + 0.5 * mean.squaredNorm(); }

double GaussianQcfState::heisenberg_margin() const { return cov.determinant() - 0.25; }

void GaussianQcfState::validate(double tol) const {
    if (!mean.allFinite() || !cov.allFinite()) throw std::invalid_argument("Gaussian state has non-finite entries");
    if (std::abs(cov(0, 1) - cov(1, 0)) > tol * (1.0 + cov.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("QCF covariance is not symmetric");
    if (cov(0, 0) < 0.0 || cov(1, 1) < 0.0 || heisenberg_margin() < -tol)
        throw std::invalid_argument("QCF covariance violates the uncertainty bound det(cov) >= 1/4");
}

Eigen::Matrix2d phase_rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix2d r;
    r << c, s, -s, c;
    return r;
}

Eigen::Matrix2d rotated_diffusion(double delta, double pi, double angle) {
    Eigen::Matrix2d m;
    m << delta, -0.5 * pi, -0.5 * pi, 0.0;
    const Eigen::Matrix2d r = phase_rotation(angle);
    return r.transpose() * m * r;
}

PropagatorBundle::PropagatorBundle(CoefficientTable table) : table_(std::move(table)) {}

Eigen::Matrix2d PropagatorBundle::a_matrix(double t) const {
    const auto p = table_.at(t);
    if (t == 0.0) return Eigen::Matrix2d::Zero();
    const std::complex<double> w = table_.anisotropy_at(t);
    Eigen::Matrix2d a;
    a << 0.5 * p.delta_gamma_int + w.real(), w.imag(), w.imag(), 0.5 * p.delta_gamma_int - w.real();
    return a;
}

Eigen::Matrix2d PropagatorBundle::secular_a_matrix(double t) const {
    return 0.5 * table_.at(t).delta_gamma_int * Eigen::Matrix2d::Identity();
}

namespace {

GaussianQcfState propagate(const GaussianQcfState& s0, double omega0, double big_gamma, const Eigen::Matrix2d& a,
                           double t) {
    // chi_t(v) = e^{-v^T A v} chi_0(e^{-Gamma/2} S v), S = phase_rotation(w0 t)
    const Eigen::Matrix2d s = phase_rotation(omega0 * t);
    GaussianQcfState out;
    out.t = t;
    out.mean = std::exp(-0.5 * big_gamma) * s.transpose() * s0.mean;
    out.cov = std::exp(-big_gamma) * s.transpose() * s0.cov * s + 2.0 * a;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    if (!out.mean.allFinite() || !out.cov.allFinite()) throw NumericalError("non-finite Gaussian state after propagation");
    return out;
}

}  // namespace

GaussianQcfState propagate_full(const GaussianQcfState& state0, const PropagatorBundle& bundle, double t) {
    const auto& table = bundle.table();
    return propagate(state0, table.spec().omega0(), table.at(t).big_gamma, bundle.a_matrix(t), t);
}

GaussianQcfState propagate_secular(const GaussianQcfState& state0, const CoefficientTable& table, double t) {
    const auto p = table.at(t);
    return propagate(state0, table.spec().omega0(), p.big_gamma,
                     0.5 * p.delta_gamma_int * Eigen::Matrix2d::Identity(), t);
}

namespace {

// E[Y_{i1} ... Y_{ik}] for centred Gaussian Y by summing over pair partitions.
double isserlis(std::vector<int>& idx, const Eigen::Matrix2d& v) {
    if (idx.empty()) return 1.0;
    if (idx.size() % 2 == 1) return 0.0;
    const int first = idx.front();
    double total = 0.0;
    for (std::size_t j = 1; j < idx.size(); ++j) {
        std::vector<int> rest;
        for (std::size_t k = 1; k < idx.size(); ++k)
            if (k != j) rest.push_back(idx[k]);
        total += v(first, idx[j]) * isserlis(rest, v);
    }
    return total;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

std::vector<double> moments(const GaussianQcfState& state, const std::vector<std::pair<int, int>>& orders) {
    // Weyl-ordered moments are the moments of the Wigner function, a classical Gaussian.
    const Eigen::Matrix2d v = state.quadrature_covariance();
    std::vector<double> out;
    out.reserve(orders.size());
    for (auto [nx, np] : orders) {
        if (nx < 0 || np < 0 || nx + np > 4)
            throw CapabilityError("moments support nx + np <= 4, got (" + std::to_string(nx) + ", " +
                                  std::to_string(np) + ")");
        double total = 0.0;
        for (int i = 0; i <= nx; ++i)
            for (int j = 0; j <= np; ++j) {
                std::vector<int> idx(static_cast<std::size_t>(i), 0);
                idx.insert(idx.end(), static_cast<std::size_t>(j), 1);
                total += binomial(nx, i) * binomial(np, j) * std::pow(state.mean(0), nx - i) *
                         std::pow(state.mean(1), np - j) * isserlis(idx, v);
            }
        out.push_back(total);
    }
    return out;
}

SecularCheck secular_observable_check(const GaussianQcfState& state0, const PropagatorBundle& bundle,
                                      const std::vector<double>& t_grid) {
    SecularCheck out;
    out.times = t_grid;
    for (double t : t_grid) {
        const auto full = propagate_full(state0, bundle, t);
        const auto sec = propagate_secular(state0, bundle.table(), t);
        const auto mf = moments(full, {{2, 0}, {0, 2}});
        const auto ms = moments(sec, {{2, 0}, {0, 2}});
        out.n_full.push_back(full.mean_n());
        out.n_secular.push_back(sec.mean_n());
        out.anisotropy_full.push_back(mf[0] - mf[1]);
        out.anisotropy_secular.push_back(ms[0] - ms[1]);
        out.max_n_discrepancy = std::max(out.max_n_discrepancy, std::abs(out.n_full.back() - out.n_secular.back()));
        out.max_anisotropy_discrepancy = std::max(
            out.max_anisotropy_discrepancy, std::abs(out.anisotropy_full.back() - out.anisotropy_secular.back()));
    }
    return out;
}

void write_qcf_csv(std::ostream& os, const std::vector<GaussianQcfState>& states) {
    csv::write_header(os, {"t", "mean_x", "mean_p", "cov_xx", "cov_xp", "cov_pp", "n_mean"});
    for (const auto& s : states)
        csv::write_row(os, {s.t, s.mean(0), s.mean(1), s.cov(0, 0), s.cov(0, 1), s.cov(1, 1), s.mean_n()});
}

}  // namespace qbm
