#include "qbm/states.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "qbm/errors.hpp"

namespace qbm {

using cplx = std::complex<double>;

Eigen::VectorXcd coherent_amplitudes(int dim, cplx beta) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    Eigen::VectorXcd v(dim);
    cplx c = std::exp(-0.5 * std::norm(beta));
    for (int k = 0; k < dim; ++k) {
        v(k) = c;
        c *= beta / std::sqrt(double(k + 1));
    }
    return v;
}

namespace {

Eigen::MatrixXcd lowering(int m) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, m);
    for (int k = 1; k < m; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

int working_dimension(const GaussianQcfState& s, int dim) {
    const double n = std::max(0.0, s.mean_n());
    return std::max({2 * dim, dim + 60, static_cast<int>(std::ceil(12.0 * (n + 1.0))) + 60});
}

Eigen::MatrixXcd build(const GaussianQcfState& s, int m) {
    s.validate();
    const Eigen::Matrix2d v = s.quadrature_covariance();
    const double nu = std::sqrt(std::max(v.determinant(), 0.25));
    const double nth = nu - 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(v / (2.0 * nu));
    const double lmin = std::min(es.eigenvalues()(0), 0.5);
    const double r = -0.5 * std::log(2.0 * lmin);
    const Eigen::Vector2d e = es.eigenvectors().col(0);
    const double phi = std::atan2(e(1), e(0));  // squeezed quadrature X cos(phi) + P sin(phi)

    const Eigen::MatrixXcd a = lowering(m);
    const Eigen::MatrixXcd ad = a.adjoint();
    const cplx xi = std::polar(r, 2.0 * phi);
    const Eigen::MatrixXcd sq_gen = 0.5 * (std::conj(xi) * a * a - xi * ad * ad);
    const cplx beta(s.mean(0) / std::sqrt(2.0), s.mean(1) / std::sqrt(2.0));
    const Eigen::MatrixXcd disp_gen = beta * ad - std::conj(beta) * a;
    const Eigen::MatrixXcd u = disp_gen.exp() * sq_gen.exp();

    Eigen::VectorXd p(m);
    const double q = nth / (nth + 1.0);
    double pk = 1.0 / (nth + 1.0);
    for (int k = 0; k < m; ++k, pk *= q) p(k) = pk;
    return u * p.cast<cplx>().asDiagonal() * u.adjoint();
}

}  // namespace

FockDensityMatrix gaussian_to_fock(const GaussianQcfState& state, int dim, double max_loss) {
    if (dim < 2) throw std::invalid_argument("dimension must be at least 2");
    const int m = working_dimension(state, dim);
    const Eigen::MatrixXcd big = build(state, m);
    FockDensityMatrix out;
    out.t = state.t;
    out.rho = big.topLeftCorner(dim, dim);
    const double kept = out.rho.trace().real();
    if (1.0 - kept > max_loss)
        throw TruncationError("initial state does not fit in N=" + std::to_string(dim) + " (lost population " +
                                  std::to_string(1.0 - kept) + ")",
                              state.t);
    out.rho /= kept;
    out.rho = (0.5 * (out.rho + out.rho.adjoint())).eval();
    return out;
}

int gaussian_support(const GaussianQcfState& state, double tail) {
    const int m = working_dimension(state, 16);
    const Eigen::MatrixXcd big = build(state, m);
    double cum = 0.0;
    for (int k = 0; k < m; ++k) {
        cum += big(k, k).real();
        if (1.0 - cum < tail) return k + 1;
    }
    throw TruncationError("Gaussian state support exceeds the working basis", state.t);
}

}  // namespace qbm
