// quadrature.hpp: globally adaptive Gauss-Kronrod (21-point) integration

#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qbm::quad {

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_intervals = 200000;
    /// Throw QuadratureError when the tolerance is not met; otherwise return the estimate.
    bool throw_on_failure = true;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
    bool converged = true;
};

using Integrand = std::function<double(double)>;

/// Integrates f over [a, b].
Result integrate(const Integrand& f, double a, double b, const Options& opts = {});

/// Integrates f over [bp[0], bp.back()], starting the bisection from the given
/// breakpoints. Use this to seed panels at known features or oscillation scales.
Result integrate(const Integrand& f, std::span<const double> breakpoints, const Options& opts = {});

/// Breakpoints on [a, b] that resolve an oscillation of angular frequency `freq` with
/// at most `per_period` panels per period (and at least `min_panels` panels).
std::vector<double> oscillation_panels(double a, double b, double freq, int min_panels = 1,
                                       double per_period = 2.0);

}  // namespace qbm::quad
