#include "qbm/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"
#include "qbm/parallel.hpp"
#include "qbm/quadrature.hpp"
#include "qbm/special_functions.hpp"

namespace qbm {

using std::numbers::pi;
using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

struct CoefficientTable::Splines {
    Spline delta, gamma, pi, r_shift, big_gamma, delta_gamma_int, w_re, w_im;
};

namespace {

Spline make_spline(const std::vector<double>& y, double h) { return Spline(y.begin(), y.end(), 0.0, h); }

void check_series(const std::vector<double>& v, std::size_t n, const char* name) {
    if (v.size() != n) throw std::invalid_argument(std::string("coefficient series '") + name + "' has wrong length");
    for (double x : v)
        if (!std::isfinite(x)) throw NumericalError(std::string("non-finite value in coefficient series '") + name + "'");
}

using cplx = std::complex<double>;

// Anisotropy from linear-per-interval Delta, Pi, gamma: dW/dt = -(2 gamma - 2i w0) W + (Delta - i Pi)/2.
std::vector<cplx> anisotropy_from_rates(double w0, double h, const std::vector<double>& delta,
                                        const std::vector<double>& gamma, const std::vector<double>& pi_v) {
    std::vector<cplx> decay(delta.size()), source(delta.size());
    for (std::size_t i = 0; i < delta.size(); ++i) {
        decay[i] = cplx(2.0 * gamma[i], -2.0 * w0);
        source[i] = 0.5 * cplx(delta[i], -pi_v[i]);
    }
    return integrate_relaxation(h, decay, source);
}

}  // namespace

CoefficientTable::CoefficientTable(ReservoirSpec spec, double t_max, std::vector<double> delta,
                                   std::vector<double> gamma, std::vector<double> pi_v, std::vector<double> r_shift,
                                   std::vector<double> big_gamma, std::vector<double> delta_gamma_int,
                                   std::vector<cplx> anisotropy)
    : spec_(spec),
      step_(0.0),
      delta_(std::move(delta)),
      gamma_(std::move(gamma)),
      pi_(std::move(pi_v)),
      r_shift_(std::move(r_shift)),
      big_gamma_(std::move(big_gamma)),
      delta_gamma_int_(std::move(delta_gamma_int)),
      anisotropy_(std::move(anisotropy)) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be positive and finite");
    const std::size_t n = delta_.size();
    if (n < 5) throw std::invalid_argument("coefficient table needs at least 5 grid points");
    check_series(delta_, n, "delta");
    check_series(gamma_, n, "gamma");
    check_series(pi_, n, "pi");
    check_series(r_shift_, n, "r_shift");
    check_series(big_gamma_, n, "big_gamma");
    check_series(delta_gamma_int_, n, "delta_gamma_int");
    step_ = t_max / static_cast<double>(n - 1);
    grid_.resize(n);
    for (std::size_t i = 0; i < n; ++i) grid_[i] = step_ * static_cast<double>(i);
    grid_.back() = t_max;
    if (anisotropy_.empty()) anisotropy_ = anisotropy_from_rates(spec_.omega0(), step_, delta_, gamma_, pi_);
    if (anisotropy_.size() != n) throw std::invalid_argument("anisotropy series has wrong length");
    // Interpolate W in the co-rotating frame, where it varies on the coefficient time scales.
    std::vector<double> w_re(n), w_im(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx w = anisotropy_[i] * std::exp(cplx(0.0, -2.0 * spec_.omega0() * grid_[i]));
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) throw NumericalError("non-finite anisotropy");
        w_re[i] = w.real();
        w_im[i] = w.imag();
    }
    splines_ = std::make_shared<const Splines>(Splines{make_spline(delta_, step_), make_spline(gamma_, step_),
                                                       make_spline(pi_, step_), make_spline(r_shift_, step_),
                                                       make_spline(big_gamma_, step_),
                                                       make_spline(delta_gamma_int_, step_), make_spline(w_re, step_),
                                                       make_spline(w_im, step_)});
}

CoefficientTable CoefficientTable::from_rates(const ReservoirSpec& spec, double t_max, std::vector<double> delta,
                                              std::vector<double> gamma, std::vector<double> pi_v) {
    const std::size_t n = delta.size();
    if (gamma.size() != n) throw std::invalid_argument("delta and gamma must have equal length");
    if (pi_v.empty()) pi_v.assign(n, 0.0);
    if (n < 5) throw std::invalid_argument("coefficient table needs at least 5 grid points");
    const double h = t_max / static_cast<double>(n - 1);
    std::vector<double> big_gamma(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) big_gamma[i] = big_gamma[i - 1] + h * (gamma[i - 1] + gamma[i]);
    std::vector<double> decay(n);
    for (std::size_t i = 0; i < n; ++i) decay[i] = 2.0 * gamma[i];
    auto dgi = integrate_relaxation(h, decay, delta);
    std::vector<double> r_shift(n, 0.0);
    return CoefficientTable(spec, t_max, std::move(delta), std::move(gamma), std::move(pi_v), std::move(r_shift),
                            std::move(big_gamma), std::move(dgi));
}

CoefficientPoint CoefficientTable::at(double t) const {
    const double tm = t_max();
    if (!(t >= 0.0) || t > tm * (1.0 + 1e-12)) throw RangeError("time " + std::to_string(t) + " outside table range");
    t = std::min(t, tm);
    const Splines& s = *splines_;
    return {s.delta(t), s.gamma(t), s.pi(t), s.r_shift(t), s.big_gamma(t), s.delta_gamma_int(t)};
}

cplx CoefficientTable::anisotropy_at(double t) const {
    const double tm = t_max();
    if (!(t >= 0.0) || t > tm * (1.0 + 1e-12)) throw RangeError("time " + std::to_string(t) + " outside table range");
    t = std::min(t, tm);
    return cplx(splines_->w_re(t), splines_->w_im(t)) * std::exp(cplx(0.0, 2.0 * spec_.omega0() * t));
}

void CoefficientTable::write_csv(std::ostream& os) const {
    csv::write_header(os, {"t", "delta", "gamma", "pi", "r_shift", "big_gamma", "delta_gamma_int"});
    for (std::size_t i = 0; i < grid_.size(); ++i)
        csv::write_row(os, {grid_[i], delta_[i], gamma_[i], pi_[i], r_shift_[i], big_gamma_[i], delta_gamma_int_[i]});
}

std::vector<double> integrate_relaxation(double step, const std::vector<double>& decay,
                                         const std::vector<double>& source) {
    if (decay.size() != source.size()) throw std::invalid_argument("decay and source must have equal length");
    std::vector<cplx> k(decay.begin(), decay.end()), s(source.begin(), source.end());
    const auto y = integrate_relaxation(step, k, s);
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i].real();
    return out;
}

std::vector<cplx> integrate_relaxation(double step, const std::vector<cplx>& decay, const std::vector<cplx>& source) {
    if (decay.size() != source.size()) throw std::invalid_argument("decay and source must have equal length");
    std::vector<cplx> y(source.size(), 0.0);
    for (std::size_t i = 1; i < y.size(); ++i) {
        const cplx x = 0.5 * step * (decay[i - 1] + decay[i]);
        y[i] = std::exp(-x) * y[i - 1] + step * (source[i - 1] * special::phi2(x) + source[i] * special::psi(x));
    }
    return y;
}

CoefficientTable build_coefficient_table(const ReservoirSpec& spec, double t_max, int n_steps,
                                         const BuildOptions& opts) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be positive and finite");
    if (n_steps < 16) throw ResolutionError("n_steps must be at least 16");
    const double periods = spec.omega0() * t_max / (2.0 * pi);
    if (static_cast<double>(n_steps) < 20.0 * periods)
        throw ResolutionError("grid has fewer than 20 points per oscillator period (n_steps=" +
                              std::to_string(n_steps) + ", periods=" + std::to_string(periods) + ")");

    const std::size_t n = static_cast<std::size_t>(n_steps);
    const double h = t_max / static_cast<double>(n);
    std::vector<double> half(2 * n + 1);
    for (std::size_t j = 0; j <= 2 * n; ++j) half[j] = 0.5 * h * static_cast<double>(j);
    half.back() = t_max;

    const LorentzDrudeModel model(spec);
    const auto values = model.evaluate(half, resolve_thread_count(opts.threads));

    std::vector<double> delta(n + 1), gamma(n + 1), pi_v(n + 1), r(n + 1), big(n + 1), dgi(n + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
        const auto& v = values[2 * i];
        delta[i] = v.delta;
        gamma[i] = v.gamma;
        pi_v[i] = v.pi;
        r[i] = v.r_shift;
        big[i] = v.big_gamma;
    }
    // Delta_Gamma(t_{i+1}) = e^{-dG} Delta_Gamma(t_i) + Int e^{G(s)-G_{i+1}} Delta(s) ds and likewise for the
    // co-rotating anisotropy. The weight is split as 1 + (e^{G(s)-G_{i+1}} - 1): the first part uses the exact
    // cumulative integrals, the small remainder (vanishing at t_{i+1}) uses Simpson.
    std::vector<cplx> aniso(n + 1, 0.0);
    const double w0 = spec.omega0();
    cplx w_rot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = values[2 * i];
        const auto& m = values[2 * i + 1];
        const auto& b = values[2 * i + 2];
        const double ea = std::exp(a.big_gamma - b.big_gamma);
        const double em = std::expm1(m.big_gamma - b.big_gamma);
        const double ea1 = std::expm1(a.big_gamma - b.big_gamma);
        dgi[i + 1] = ea * dgi[i] + (b.delta_integral - a.delta_integral) + h / 6.0 * (ea1 * a.delta + 4.0 * em * m.delta);
        auto f = [&](const CoefficientValues& v, double s) {
            return std::exp(cplx(0.0, -2.0 * w0 * s)) * 0.5 * cplx(v.delta, -v.pi);
        };
        w_rot = ea * w_rot + (b.drive - a.drive) + h / 6.0 * (ea1 * f(a, half[2 * i]) + 4.0 * em * f(m, half[2 * i + 1]));
        aniso[i + 1] = w_rot * std::exp(cplx(0.0, 2.0 * w0 * half[2 * i + 2]));
    }
    return CoefficientTable(spec, t_max, std::move(delta), std::move(gamma), std::move(pi_v), std::move(r),
                            std::move(big), std::move(dgi), std::move(aniso));
}

std::pair<double, double> stationary_rates(const ReservoirSpec& spec, const StationaryOptions& opts) {
    if (spec.alpha() == 0.0) {
        if (opts.allow_zero_coupling) return {0.0, 0.0};
        throw std::domain_error("stationary rates are undefined at zero coupling");
    }
    const LorentzDrudeModel model(spec);
    double horizon = 20.0 / spec.omega_c();
    constexpr int kMaxDoublings = 8;
    for (int attempt = 0; attempt <= kMaxDoublings; ++attempt, horizon *= 2.0) {
        const double periods = spec.omega0() * horizon / (2.0 * pi);
        const int steps = std::max(200, static_cast<int>(std::ceil(40.0 * periods)));
        const int first = static_cast<int>(std::floor(0.9 * steps));
        // Cap the window sampling; the drift test only needs the oscillation resolved.
        const int stride = std::max(1, (steps - first) / 4000);
        std::vector<double> times;
        for (int i = first; i <= steps; i += stride) times.push_back(horizon * i / steps);
        if (times.back() != horizon) times.push_back(horizon);
        const auto values = model.evaluate(times, resolve_thread_count(0));

        auto drift = [&](auto get) {
            double lo = get(values.front()), hi = lo;
            for (const auto& v : values) {
                lo = std::min(lo, get(v));
                hi = std::max(hi, get(v));
            }
            const double ref = std::abs(get(values.back()));
            return ref > 0.0 ? (hi - lo) / ref : std::numeric_limits<double>::infinity();
        };
        const double dd = drift([](const CoefficientValues& v) { return v.delta; });
        const double dg = drift([](const CoefficientValues& v) { return v.gamma; });
        if (dd < 1e-3 && dg < 1e-3) return {values.back().delta, values.back().gamma};
    }
    throw ConvergenceError("no plateau of the coefficients found up to t = " + std::to_string(horizon / 2.0));
}

RegimeReport classify_regime(const CoefficientTable& table, std::optional<double> tol) {
    if (table.size() == 0) throw std::invalid_argument("empty coefficient table");
    const auto& d = table.delta();
    const auto& g = table.gamma();
    RegimeReport rep;
    if (tol) {
        if (*tol < 0.0) throw std::invalid_argument("tolerance must be non-negative");
        rep.tol = *tol;
    } else {
        double mx = 0.0;
        for (double x : d) mx = std::max(mx, std::abs(x));
        rep.tol = 1e-6 * mx;
    }
    rep.min_rate_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double m = std::min(d[i] - g[i], d[i] + g[i]);
        rep.min_rate_value = std::min(rep.min_rate_value, m);
        if (m < -rep.tol && !rep.first_violation_time) rep.first_violation_time = table.grid()[i];
    }
    rep.classification = rep.first_violation_time ? RegimeClass::NonLindbladType : RegimeClass::LindbladType;
    return rep;
}

namespace {

// alpha^2 Int_0^inf J(w) n(w) sin((w - w0) t)/(w - w0) dw
double rwa_thermal_rate(const ReservoirSpec& spec, double t) {
    if (t <= 0.0 || spec.kt() <= 0.0 || spec.alpha() == 0.0) return 0.0;
    const double w0 = spec.omega0();
    const double upper = std::max(50.0 * spec.kt(), 50.0 * spec.omega_c()) + w0;
    auto f = [&](double w) {
        if (w <= 0.0) return spec.alpha() * spec.alpha() * (2.0 / pi) * spec.kt() * std::sin(w0 * t) / w0;
        const double x = (w - w0) * t;
        const double sinc = std::abs(x) < 1e-8 ? t : std::sin(x) / (w - w0);
        return spec.alpha() * spec.alpha() * eval_spectral_density(spec, w) * thermal_occupation(spec, w) * sinc;
    };
    auto bp = quad::oscillation_panels(0.0, upper, t, 16, 2.0);
    bp.push_back(w0);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    quad::Options q;
    q.rel_tol = 1e-10;
    q.abs_tol = 1e-13 * spec.alpha() * spec.alpha() * spec.omega_c() * spec.kt() * t;
    return quad::integrate(f, bp, q).value;
}

}  // namespace

RwaRates rwa_rates(const ReservoirSpec& spec, double t_max, int n_steps, const BuildOptions& opts) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be positive and finite");
    if (n_steps < 16) throw ResolutionError("n_steps must be at least 16");
    if (static_cast<double>(n_steps) < 20.0 * spec.omega0() * t_max / (2.0 * pi))
        throw ResolutionError("grid has fewer than 20 points per oscillator period");
    const std::size_t n = static_cast<std::size_t>(n_steps);
    RwaRates out;
    out.grid.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.grid[i] = t_max * static_cast<double>(i) / static_cast<double>(n);
    out.gamma_up.assign(n + 1, 0.0);
    out.gamma_down.assign(n + 1, 0.0);
    if (spec.alpha() == 0.0) return out;

    const unsigned threads = resolve_thread_count(opts.threads);
    parallel_for(n + 1, threads, [&](std::size_t i) { out.gamma_up[i] = rwa_thermal_rate(spec, out.grid[i]); });
    // The vacuum part alpha^2 Int ds Int J cos((w - w0)s) equals Delta(t)|_{T=0} + gamma(t).
    const LorentzDrudeModel vacuum(spec.with_kt(0.0));
    const auto v = vacuum.evaluate(out.grid, threads);
    for (std::size_t i = 0; i <= n; ++i) out.gamma_down[i] = out.gamma_up[i] + v[i].delta + v[i].gamma;
    return out;
}

std::vector<double> RwaRates::heating() const {
    if (grid.size() < 2) return std::vector<double>(grid.size(), 0.0);
    std::vector<double> decay(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) decay[i] = gamma_down[i] - gamma_up[i];
    return integrate_relaxation(grid[1] - grid[0], decay, gamma_up);
}

std::vector<double> secular_heating(const CoefficientTable& table) {
    std::vector<double> n(table.size());
    for (std::size_t i = 0; i < n.size(); ++i)
        n[i] = 0.5 * std::expm1(-table.big_gamma()[i]) + table.delta_gamma_int()[i];
    return n;
}

}  // namespace qbm
