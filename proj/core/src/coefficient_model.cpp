#include "qbm/coefficient_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "qbm/parallel.hpp"
#include "qbm/quadrature.hpp"
#include "qbm/special_functions.hpp"

namespace qbm {

using std::numbers::pi;
using cplx = std::complex<double>;

namespace {

constexpr int kMinTerms = 200;
constexpr int kMaxTerms = 200000;
// e^{-36} ~ 2e-16: beyond this the Matsubara exponentials are dropped in the tail.
constexpr double kNegligibleExponent = 36.0;

}  // namespace

LorentzDrudeModel::LorentzDrudeModel(const ReservoirSpec& spec) : spec_(spec) {
    const double kt = spec_.kt();
    if (kt <= 0.0) return;
    const double a = 2.0 * pi * kt;
    const double needed = 20.0 * std::max(spec_.omega_c(), spec_.omega0()) / a;
    if (needed > kMaxTerms) return;  // thermal corrections below double precision relevance
    matsubara_ = true;
    terms_ = std::max(kMinTerms, static_cast<int>(std::ceil(needed)));

    // cot(wc/2kT) is singular when wc hits a Matsubara frequency; the pole cancels
    // against that Matsubara term, so move kT off resonance by a relative 1e-7.
    double x = spec_.omega_c() / (2.0 * kt);
    const double m = std::round(x / pi);
    if (m >= 1.0 && std::abs(x - m * pi) < 1e-9 * x) {
        spec_ = spec_.with_kt(kt * (1.0 + 1e-7));
        x = spec_.omega_c() / (2.0 * spec_.kt());
    }
    const double wc = spec_.omega_c();
    cot_coefficient_ = spec_.alpha() * spec_.alpha() * wc * wc / std::tan(x);
}

namespace {

// Per-term integrals for a kernel term e^{-z s}:
//   e1 = Int_0^t e^{-z s} ds, e2 = Int_0^t Int_0^s e^{-z u} du ds,
//   e3 = Int_0^t e^{2i w0 s} Int_0^s e^{-z u} du ds.
struct TermIntegrals {
    cplx e1, e2, e3;
};

// [phi1(a) - phi1(a + b)] / b = Int_0^1 phi2(a + u b) du, Gauss-Legendre for small |b|.
cplx phi1_divided_difference(cplx a, cplx b) {
    if (std::abs(b) >= 1.0) return (special::phi1(a) - special::phi1(a + b)) / b;
    using GL = boost::math::quadrature::gauss<double, 10>;
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    cplx sum = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        // Even order: no node at the origin, abscissae come in +- pairs.
        sum += 0.5 * w[j] * (special::phi2(a + 0.5 * (1.0 + x[j]) * b) + special::phi2(a + 0.5 * (1.0 - x[j]) * b));
    }
    return sum;
}

TermIntegrals term_integrals(cplx z, double w0, double t) {
    const cplx zt = z * t;
    const cplx beta(0.0, -2.0 * w0 * t);  // e^{2i w0 s} = e^{-beta s / t}
    return {t * special::phi1(zt), t * t * special::psi(zt), t * t * phi1_divided_difference(beta, zt)};
}

}  // namespace

LorentzDrudeModel::Partial LorentzDrudeModel::matsubara_part(double t) const {
    const double a2 = spec_.alpha() * spec_.alpha();
    const double wc = spec_.omega_c();
    const double w0 = spec_.omega0();
    const double kt = spec_.kt();
    const double a = 2.0 * pi * kt;
    const double prefactor = 4.0 * a2 * wc * wc * kt;

    cplx s1 = 0.0, s2 = 0.0, s3 = 0.0;
    // Sum the smallest terms first.
    for (int k = terms_; k >= 1; --k) {
        const double nu = a * k;
        const double c = prefactor * nu / ((nu - wc) * (nu + wc));
        const auto e = term_integrals(cplx(nu, -w0), w0, t);
        s1 += c * e.e1;
        s2 += c * e.e2;
        s3 += c * e.e3;
    }
    {
        const auto e = term_integrals(cplx(wc, -w0), w0, t);
        s1 += cot_coefficient_ * e.e1;
        s2 += cot_coefficient_ * e.e2;
        s3 += cot_coefficient_ * e.e3;
    }

    // Remaining terms k > K via the midpoint (Euler-Maclaurin) integral over k,
    // mapped to u = (K + 1/2)/k in (0, 1].
    const double k0 = terms_ + 0.5;
    quad::Options q;
    q.rel_tol = 1e-10;
    q.abs_tol = 1e-300;
    q.throw_on_failure = false;
    auto tail = [&](auto pick) {
        return quad::integrate(
                   [&](double u) {
                       if (u <= 0.0) return 0.0;
                       const double k = k0 / u;
                       const double nu = a * k;
                       const double c = prefactor * nu / ((nu - wc) * (nu + wc));
                       return c * pick(term_integrals(cplx(nu, -w0), w0, t)) * k0 / (u * u);
                   },
                   0.0, 1.0, q)
            .value;
    };
    const double nu_star = a * k0;
    if (nu_star * t >= kNegligibleExponent) {
        const double denom = wc * wc + w0 * w0;
        const double tail_minus = std::atanh(wc / nu_star) / (a * wc);  // sum 1/(nu^2 - wc^2)
        const double tail_plus = std::atan(w0 / nu_star) / (a * w0);    // sum 1/(nu^2 + w0^2)
        const double log_ratio =
            std::log1p(w0 * w0 / (nu_star * nu_star)) - std::log1p(-wc * wc / (nu_star * nu_star));
        s1 += cplx(prefactor * (wc * wc * tail_minus + w0 * w0 * tail_plus) / denom,
                   prefactor * w0 / denom * log_ratio / (2.0 * a));
    } else {
        s1 += cplx(tail([](const TermIntegrals& e) { return e.e1.real(); }),
                   tail([](const TermIntegrals& e) { return e.e1.imag(); }));
    }
    s2 += tail([](const TermIntegrals& e) { return e.e2.real(); });
    s3 += cplx(tail([](const TermIntegrals& e) { return e.e3.real(); }),
               tail([](const TermIntegrals& e) { return e.e3.imag(); }));

    Partial out;
    out.delta = s1.real();
    out.pi = s1.imag();
    out.delta_integral = s2.real();
    out.drive = 0.5 * std::conj(s3);
    return out;
}

double LorentzDrudeModel::vacuum_kernel(double tau) const {
    const double wc = spec_.omega_c();
    return spec_.alpha() * spec_.alpha() * (2.0 / pi) * wc * wc * special::lorentz_cosine_transform(wc, tau);
}

// Integrals of kappa(s) times cos(w0 s), sin(w0 s), s cos(w0 s) and e^{-3i w0 s} over [t0, t1].
struct LorentzDrudeModel::VacuumMoments {
    double c = 0.0, s = 0.0, tc = 0.0;
    cplx e3 = 0.0;
};

LorentzDrudeModel::VacuumMoments LorentzDrudeModel::vacuum_moments(double t0, double t1) const {
    VacuumMoments out;
    if (t1 <= t0) return out;
    const double w0 = spec_.omega0();
    const double wc = spec_.omega_c();
    const double fmax = std::max(3.0 * w0, wc);
    // Log singularity at s = 0: geometric breakpoints towards the origin.
    std::vector<double> bp;
    if (t0 == 0.0) {
        bp.push_back(0.0);
        const double first = std::min(t1, 1e-3 / fmax);
        for (double s = first * 1e-12; s < first; s *= 10.0) bp.push_back(s);
        bp.push_back(first);
        if (first < t1) {
            auto rest = quad::oscillation_panels(first, t1, fmax, 1, 4.0);
            bp.insert(bp.end(), rest.begin() + 1, rest.end());
        }
    } else {
        bp = quad::oscillation_panels(t0, t1, fmax, 1, 4.0);
    }
    quad::Options q;
    q.rel_tol = 1e-11;
    q.abs_tol = 1e-14 * spec_.alpha() * spec_.alpha() * wc * wc * (t1 - t0 + 1.0 / wc);
    q.throw_on_failure = false;
    auto integral = [&](auto weight) {
        return quad::integrate([&](double s) { return s > 0.0 ? vacuum_kernel(s) * weight(s) : 0.0; }, bp, q).value;
    };
    out.c = integral([&](double s) { return std::cos(w0 * s); });
    out.s = integral([&](double s) { return std::sin(w0 * s); });
    out.tc = integral([&](double s) { return s * std::cos(w0 * s); });
    out.e3 = cplx(integral([&](double s) { return std::cos(3.0 * w0 * s); }),
                  -integral([&](double s) { return std::sin(3.0 * w0 * s); }));
    return out;
}

CoefficientValues LorentzDrudeModel::assemble(double t, const Partial& p) const {
    CoefficientValues v;
    if (spec_.alpha() == 0.0 || t <= 0.0) return v;
    const double a2 = spec_.alpha() * spec_.alpha();
    const double wc = spec_.omega_c();
    const cplx z(wc, -spec_.omega0());
    const cplx e = t * special::phi1(z * t);
    v.gamma = a2 * wc * wc * e.imag();
    v.r_shift = a2 * wc * wc * e.real();
    v.big_gamma = 2.0 * a2 * wc * wc * (t * t * special::psi(z * t)).imag();
    v.delta = p.delta;
    v.pi = p.pi;
    v.delta_integral = p.delta_integral;
    v.drive = p.drive;
    return v;
}

CoefficientValues LorentzDrudeModel::evaluate(double t) const {
    if (spec_.alpha() == 0.0 || t <= 0.0) return {};
    if (matsubara_) return assemble(t, matsubara_part(t));
    return evaluate(std::vector<double>{t}, 1).front();
}

std::vector<CoefficientValues> LorentzDrudeModel::evaluate(const std::vector<double>& times, unsigned threads) const {
    std::vector<CoefficientValues> out(times.size());
    if (spec_.alpha() == 0.0) return out;
    if (matsubara_) {
        parallel_for(times.size(), threads, [&](std::size_t i) { out[i] = evaluate(times[i]); });
        return out;
    }
    // Vacuum mode: cumulative quadrature interval by interval.
    std::vector<VacuumMoments> pieces(times.size());
    parallel_for(times.size(), threads, [&](std::size_t i) {
        const double lo = i == 0 ? 0.0 : times[i - 1];
        pieces[i] = vacuum_moments(std::max(lo, 0.0), times[i]);
    });
    const double w0 = spec_.omega0();
    VacuumMoments acc;
    for (std::size_t i = 0; i < times.size(); ++i) {
        acc.c += pieces[i].c;
        acc.s += pieces[i].s;
        acc.tc += pieces[i].tc;
        acc.e3 += pieces[i].e3;
        const double t = times[i];
        if (t <= 0.0) continue;
        Partial p;
        p.delta = acc.c;
        p.pi = acc.s;
        p.delta_integral = t * acc.c - acc.tc;
        p.drive = (acc.e3 - std::exp(cplx(0.0, -2.0 * w0 * t)) * cplx(acc.c, -acc.s)) / cplx(0.0, 4.0 * w0);
        out[i] = assemble(t, p);
    }
    return out;
}

double LorentzDrudeModel::noise_kernel(double tau) const {
    tau = std::abs(tau);
    if (spec_.alpha() == 0.0) return 0.0;
    if (!matsubara_) return vacuum_kernel(tau);
    const double a2 = spec_.alpha() * spec_.alpha();
    const double wc = spec_.omega_c();
    const double kt = spec_.kt();
    const double a = 2.0 * pi * kt;
    const double prefactor = 4.0 * a2 * wc * wc * kt;
    double sum = 0.0;
    for (int k = terms_; k >= 1; --k) {
        const double nu = a * k;
        sum += prefactor * nu * std::exp(-nu * tau) / ((nu - wc) * (nu + wc));
    }
    const double k0 = terms_ + 0.5;
    if (a * k0 * tau < kNegligibleExponent) {
        quad::Options q;
        q.rel_tol = 1e-10;
        q.abs_tol = 1e-300;
        q.throw_on_failure = false;
        sum += quad::integrate(
                   [&](double u) {
                       if (u <= 0.0) return 0.0;
                       const double k = k0 / u;
                       const double nu = a * k;
                       return prefactor * nu * std::exp(-nu * tau) / ((nu - wc) * (nu + wc)) * k0 / (u * u);
                   },
                   0.0, 1.0, q)
                   .value;
    }
    return cot_coefficient_ * std::exp(-wc * tau) + sum;
}

double LorentzDrudeModel::delta_limit() const {
    const double w0 = spec_.omega0();
    const double j = eval_spectral_density(spec_, w0);
    const double coth = spec_.kt() > 0.0 ? 1.0 / std::tanh(w0 / (2.0 * spec_.kt())) : 1.0;
    return spec_.alpha() * spec_.alpha() * 0.5 * pi * j * coth;
}

double LorentzDrudeModel::gamma_limit() const {
    return spec_.alpha() * spec_.alpha() * 0.5 * pi * eval_spectral_density(spec_, spec_.omega0());
}

}  // namespace qbm
