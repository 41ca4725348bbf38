// analysis.hpp: small series diagnostics (power-law fits, extrema, sign changes)

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qbm::analysis {

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    /// Coefficient of determination of the log-log regression.
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of y = c t^p on log-log axes using points with t > 0 and y > 0.
/// Throws std::invalid_argument with fewer than two usable points.
PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> y);

/// Interior strict local extrema (plateaus are skipped over).
std::vector<std::size_t> local_maxima(std::span<const double> y);
std::vector<std::size_t> local_minima(std::span<const double> y);

/// Number of sign changes, ignoring samples with |y| <= tol.
int sign_changes(std::span<const double> y, double tol = 0.0);

/// True if y[i+1] >= y[i] - tol for all i.
bool monotone_non_decreasing(std::span<const double> y, double tol = 0.0);

/// First local maximum followed by a later local minimum with a lower value:
/// returns (max index, min index).
std::optional<std::pair<std::size_t, std::size_t>> max_then_lower_min(std::span<const double> y);

}  // namespace qbm::analysis
