#include "qbm/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace qbm::analysis {

PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(t[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("fit_power_law: need at least two positive points");
    const double dn = static_cast<double>(n);
    const double vx = sxx - sx * sx / dn, vy = syy - sy * sy / dn, cxy = sxy - sx * sy / dn;
    if (!(vx > 0.0)) throw std::invalid_argument("fit_power_law: degenerate abscissae");
    PowerLawFit f;
    f.exponent = cxy / vx;
    f.prefactor = std::exp((sy - f.exponent * sx) / dn);
    f.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    f.points = n;
    return f;
}

namespace {

template <class Cmp>
std::vector<std::size_t> extrema(std::span<const double> y, Cmp better) {
    std::vector<std::size_t> out;
    std::size_t i = 1;
    while (i + 1 < y.size()) {
        if (better(y[i], y[i - 1])) {
            std::size_t j = i;
            while (j + 1 < y.size() && y[j + 1] == y[i]) ++j;
            if (j + 1 < y.size() && better(y[i], y[j + 1])) out.push_back(i);
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

}  // namespace

std::vector<std::size_t> local_maxima(std::span<const double> y) {
    return extrema(y, [](double a, double b) { return a > b; });
}

std::vector<std::size_t> local_minima(std::span<const double> y) {
    return extrema(y, [](double a, double b) { return a < b; });
}

int sign_changes(std::span<const double> y, double tol) {
    int changes = 0, last = 0;
    for (double v : y) {
        if (std::abs(v) <= tol) continue;
        const int s = v > 0.0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

bool monotone_non_decreasing(std::span<const double> y, double tol) {
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] < y[i - 1] - tol) return false;
    return true;
}

std::optional<std::pair<std::size_t, std::size_t>> max_then_lower_min(std::span<const double> y) {
    const auto maxima = local_maxima(y);
    const auto minima = local_minima(y);
    for (std::size_t i : maxima)
        for (std::size_t j : minima)
            if (j > i && y[j] < y[i]) return std::make_pair(i, j);
    return std::nullopt;
}

}  // namespace qbm::analysis
