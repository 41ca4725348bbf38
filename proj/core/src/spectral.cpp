#include "qbm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbm/errors.hpp"
#include "qbm/quadrature.hpp"
#include "qbm/special_functions.hpp"
#include "qbm/units.hpp"

namespace qbm {

using std::numbers::pi;

ReservoirSpec::ReservoirSpec(double omega0, double alpha, double omega_c, double kt, SpectralFamily family)
    : omega0_(omega0), alpha_(alpha), omega_c_(omega_c), kt_(kt), family_(family) {
    if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw std::invalid_argument("omega0 must be > 0");
    if (!(omega_c > 0.0) || !std::isfinite(omega_c)) throw std::invalid_argument("omega_c must be > 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
    if (!(kt >= 0.0) || !std::isfinite(kt)) throw std::invalid_argument("temperature must be >= 0");
}

ReservoirSpec ReservoirSpec::from_kelvin(double omega0, double alpha, double omega_c, double kelvin) {
    if (!(kelvin >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    return {omega0, alpha, omega_c, units::kelvin_to_rad_per_s(kelvin)};
}

ReservoirSpec ReservoirSpec::scaled(double omega0, double alpha, double r, double kt_over_omega0) {
    return {omega0, alpha, r * omega0, kt_over_omega0 * omega0};
}

double ReservoirSpec::kelvin() const { return units::rad_per_s_to_kelvin(kt_); }

double ReservoirSpec::omega_max() const { return 50.0 * std::max(omega_c_, kt_); }

ReservoirSpec ReservoirSpec::with_alpha(double alpha) const { return {omega0_, alpha, omega_c_, kt_, family_}; }

ReservoirSpec ReservoirSpec::with_kt(double kt) const { return {omega0_, alpha_, omega_c_, kt, family_}; }

double eval_spectral_density(const ReservoirSpec& spec, double omega) {
    if (!(omega >= 0.0)) throw std::domain_error("spectral density requires omega >= 0");
    const double wc = spec.omega_c();
    return omega * (2.0 / pi) * wc * wc / (wc * wc + omega * omega);
}

double thermal_occupation(const ReservoirSpec& spec, double omega) {
    if (!(omega > 0.0)) throw std::domain_error("thermal occupation requires omega > 0");
    if (spec.kt() == 0.0) return 0.0;
    return 1.0 / std::expm1(omega / spec.kt());
}

namespace {

// (2/pi) wc^2/(wc^2+w^2) * w coth(w / 2kT), i.e. J(w)(2n+1); finite at w = 0.
double thermal_weighted_density(const ReservoirSpec& spec, double omega) {
    const double wc = spec.omega_c();
    const double lorentz = (2.0 / pi) * wc * wc / (wc * wc + omega * omega);
    if (spec.kt() == 0.0) return lorentz * omega;
    const double x = omega / (2.0 * spec.kt());
    return lorentz * 2.0 * spec.kt() * special::x_coth_x(x);
}

// Breakpoints on [0, omega_max]: geometric around the feature scales, refined so that
// no panel spans more than half an oscillation period of cos(w tau).
std::vector<double> kernel_breakpoints(const ReservoirSpec& spec, double tau) {
    const double wmax = spec.omega_max();
    double lo = spec.omega_c();
    if (spec.kt() > 0.0) lo = std::min(lo, spec.kt());
    lo *= 0.01;
    std::vector<double> coarse{0.0};
    for (double w = lo; w < wmax; w *= 2.0) coarse.push_back(w);
    coarse.push_back(wmax);

    const double freq = std::abs(tau);
    const double panels = freq * wmax / pi;
    if (panels > 2.0e6)
        throw QuadratureError("kernel quadrature: oscillation count too large at tau=" + std::to_string(tau),
                              panels, 2.0e6);
    std::vector<double> bp{0.0};
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
        auto sub = quad::oscillation_panels(coarse[i], coarse[i + 1], freq, 1, 2.0);
        bp.insert(bp.end(), sub.begin() + 1, sub.end());
    }
    return bp;
}

double kernel_scale(const ReservoirSpec& spec) {
    const double a2 = spec.alpha() * spec.alpha();
    const double wc = spec.omega_c();
    return a2 * std::max(2.0 * spec.kt() * wc, (2.0 / pi) * wc * wc * (1.0 + std::log1p(spec.omega_max() / wc)));
}

// Int_W^inf cos(w t)/w dw and Int_W^inf cos(w t)/w^3 dw, t > 0.
struct CosTail {
    double i0, i1;
};
CosTail cos_tail(double wmax, double t) {
    const auto sc = special::sine_cosine_integral(wmax * t);
    const double i0 = -sc.ci;
    const double sin_over_w2 = std::sin(wmax * t) / wmax + t * i0;
    const double i1 = std::cos(wmax * t) / (2.0 * wmax * wmax) - 0.5 * t * sin_over_w2;
    return {i0, i1};
}

// Int_W^inf sin(w t)/w dw and Int_W^inf sin(w t)/w^3 dw, t > 0.
CosTail sin_tail(double wmax, double t) {
    const auto sc = special::sine_cosine_integral(wmax * t);
    const double s0 = 0.5 * pi - sc.si;
    const double cos_over_w2 = std::cos(wmax * t) / wmax - t * s0;
    const double s1 = std::sin(wmax * t) / (2.0 * wmax * wmax) + 0.5 * t * cos_over_w2;
    return {s0, s1};
}

}  // namespace

double noise_density(const ReservoirSpec& spec, double omega) {
    return spec.alpha() * spec.alpha() * thermal_weighted_density(spec, omega);
}

double noise_kernel(const ReservoirSpec& spec, double tau, const KernelOptions& opts) {
    if (spec.alpha() == 0.0) return 0.0;
    const double a2 = spec.alpha() * spec.alpha();
    const double t = std::abs(tau);
    const auto bp = kernel_breakpoints(spec, t);
    quad::Options q;
    q.rel_tol = opts.rel_tol;
    q.abs_tol = 1e-3 * opts.rel_tol * kernel_scale(spec);
    q.max_intervals = static_cast<int>(bp.size()) * 64 + 10000;
    const auto res = quad::integrate(
        [&](double w) { return thermal_weighted_density(spec, w) * std::cos(w * t); }, bp, q);
    double value = a2 * res.value;
    if (opts.include_tail && t > 0.0) {
        const double wc = spec.omega_c();
        const auto tail = cos_tail(spec.omega_max(), t);
        value += a2 * (2.0 / pi) * wc * wc * (tail.i0 - wc * wc * tail.i1);
    }
    return value;
}

double dissipation_kernel(const ReservoirSpec& spec, double tau, const KernelOptions& opts) {
    if (spec.alpha() == 0.0 || tau == 0.0) return 0.0;
    const double a2 = spec.alpha() * spec.alpha();
    const double t = std::abs(tau);
    const double sign = tau < 0.0 ? -1.0 : 1.0;
    const auto bp = kernel_breakpoints(spec, t);
    quad::Options q;
    q.rel_tol = opts.rel_tol;
    q.abs_tol = 1e-3 * opts.rel_tol * kernel_scale(spec);
    q.max_intervals = static_cast<int>(bp.size()) * 64 + 10000;
    const auto res = quad::integrate(
        [&](double w) { return eval_spectral_density(spec, w) * std::sin(w * t); }, bp, q);
    double value = a2 * res.value;
    if (opts.include_tail) {
        const double wc = spec.omega_c();
        const auto tail = sin_tail(spec.omega_max(), t);
        value += a2 * (2.0 / pi) * wc * wc * (tail.i0 - wc * wc * tail.i1);
    }
    return sign * value;
}

KernelSample kernel_sample(const ReservoirSpec& spec, double tau, const KernelOptions& opts) {
    return {tau, noise_kernel(spec, tau, opts), dissipation_kernel(spec, tau, opts)};
}

double heating_constant(const ReservoirSpec& spec) { return noise_kernel(spec, 0.0); }

}  // namespace qbm
