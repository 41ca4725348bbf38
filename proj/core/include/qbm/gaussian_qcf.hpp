// gaussian_qcf.hpp: closed-form propagation of Gaussian quantum characteristic functions

#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qbm/coefficients.hpp"

namespace qbm {

/// Gaussian QCF chi(x, p) = exp(i(p <X> - x <P>) - v^T cov v / 2), v = (x, p).
/// With this convention cov = [[Var P, -Cov(X,P)], [-Cov(X,P), Var X]]; vacuum is I/2.
/// X = (a + a^dagger)/sqrt(2), P = (a - a^dagger)/(i sqrt(2)).
struct GaussianQcfState {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = 0.5 * Eigen::Matrix2d::Identity();
    double t = 0.0;

    static GaussianQcfState vacuum();
    static GaussianQcfState coherent(double mean_x, double mean_p);
    static GaussianQcfState thermal(double nbar);
    /// Squeezed state with Var X = e^{-2r}/2 rotated by phi in phase space, displaced to mean.
    static GaussianQcfState squeezed(double r, double phi = 0.0, Eigen::Vector2d mean = Eigen::Vector2d::Zero());
    /// From the symmetrized quadrature covariance [[Var X, Cov], [Cov, Var P]].
    static GaussianQcfState from_quadratures(const Eigen::Vector2d& mean, const Eigen::Matrix2d& quadrature_cov);

    Eigen::Matrix2d quadrature_covariance() const;
    /// <a^dagger a> = (<X^2> + <P^2>)/2 - 1/2.
    double mean_n() const;
    /// det(cov) - 1/4; non-negative for physical states.
    double heisenberg_margin() const;
    /// Throws std::invalid_argument unless cov is finite, symmetric and det(cov) >= 1/4 - tol.
    void validate(double tol = 1e-9) const;
};

/// Planar rotation [[cos, sin], [-sin, cos]] mapping (x, p) to (x~, p~).
Eigen::Matrix2d phase_rotation(double angle);

/// R^T M R for M = [[Delta, -Pi/2], [-Pi/2, 0]] and R = phase_rotation(angle).
Eigen::Matrix2d rotated_diffusion(double delta, double pi, double angle);

/// Coefficient table plus the quadratic form A(t) = e^{-Gamma} Int e^{Gamma(s)} R^T(t-s) M(s) R(t-s) ds.
class PropagatorBundle {
public:
    explicit PropagatorBundle(CoefficientTable table);

    const CoefficientTable& table() const { return table_; }
    Eigen::Matrix2d a_matrix(double t) const;
    /// (Delta_Gamma(t)/2) I
    Eigen::Matrix2d secular_a_matrix(double t) const;
    double rotation_angle(double t) const { return table_.spec().omega0() * t; }

private:
    CoefficientTable table_;
};

/// State at time t from state0 given at time 0. Throws RangeError outside the table.
GaussianQcfState propagate_full(const GaussianQcfState& state0, const PropagatorBundle& bundle, double t);
GaussianQcfState propagate_secular(const GaussianQcfState& state0, const CoefficientTable& table, double t);

/// Weyl-symmetrized moments <{X^nx P^np}> for nx + np <= 4 (CapabilityError otherwise).
std::vector<double> moments(const GaussianQcfState& state, const std::vector<std::pair<int, int>>& orders);

struct SecularCheck {
    std::vector<double> times;
    std::vector<double> n_full, n_secular;
    /// <X^2 - P^2>
    std::vector<double> anisotropy_full, anisotropy_secular;
    double max_n_discrepancy = 0.0;
    double max_anisotropy_discrepancy = 0.0;
};

SecularCheck secular_observable_check(const GaussianQcfState& state0, const PropagatorBundle& bundle,
                                      const std::vector<double>& t_grid);

/// Header `t,mean_x,mean_p,cov_xx,cov_xp,cov_pp,n_mean`.
void write_qcf_csv(std::ostream& os, const std::vector<GaussianQcfState>& states);

}  // namespace qbm
