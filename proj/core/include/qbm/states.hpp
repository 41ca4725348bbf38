// states.hpp: number-basis representations of Gaussian states

#pragma once

#include <complex>

#include <Eigen/Dense>

#include "qbm/fock.hpp"
#include "qbm/gaussian_qcf.hpp"

namespace qbm {

/// Coherent state amplitudes e^{-|beta|^2/2} beta^k / sqrt(k!), k < dim (not renormalized).
Eigen::VectorXcd coherent_amplitudes(int dim, std::complex<double> beta);

/// Displaced squeezed thermal state D(beta) S(xi) rho_th S^+ D^+ matching the Gaussian's
/// mean and covariance, built in an enlarged basis and truncated to `dim`. Throws
/// TruncationError if more than `max_loss` of the population falls outside.
FockDensityMatrix gaussian_to_fock(const GaussianQcfState& state, int dim, double max_loss = 1e-10);

/// Smallest dimension holding all but `tail` of the state's population.
int gaussian_support(const GaussianQcfState& state, double tail = 1e-12);

}  // namespace qbm
