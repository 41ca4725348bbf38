// coefficient_model.hpp: closed-form second-order coefficients for the Ohmic
// Lorentz-Drude reservoir via the exponential (Matsubara) decomposition of its kernels.

#pragma once

#include <complex>
#include <vector>

#include "qbm/spectral.hpp"

namespace qbm {

struct CoefficientValues {
    double delta = 0.0;
    double gamma = 0.0;
    double pi = 0.0;
    double r_shift = 0.0;
    double big_gamma = 0.0;
    /// Int_0^t Delta(s) ds
    double delta_integral = 0.0;
    /// Int_0^t e^{-2i w0 s} (Delta(s) - i Pi(s))/2 ds, the drive of the anisotropic part of A(t).
    std::complex<double> drive = 0.0;
};

/// Evaluates Delta(t) = Int_0^t kappa cos(w0 s) ds, gamma(t) = Int_0^t mu sin(w0 s) ds,
/// Pi(t) = Int_0^t kappa sin(w0 s) ds, r(t) = Int_0^t mu cos(w0 s) ds and
/// Gamma(t) = 2 Int_0^t gamma. The kernels are sums of decaying exponentials
///   mu(s)    = a^2 wc^2 e^{-wc s}
///   kappa(s) = a^2 wc^2 [cot(wc/2kT) e^{-wc s} + 4 kT sum_k nu_k e^{-nu_k s}/(nu_k^2 - wc^2)]
/// with Matsubara frequencies nu_k = 2 pi k kT, so every time integral is elementary.
/// At T = 0 (or temperatures too low for the series) kappa is the closed-form vacuum
/// kernel and the s-integrals are done by adaptive quadrature.
class LorentzDrudeModel {
public:
    explicit LorentzDrudeModel(const ReservoirSpec& spec);

    const ReservoirSpec& spec() const { return spec_; }
    bool uses_matsubara_series() const { return matsubara_; }
    int matsubara_terms() const { return terms_; }

    CoefficientValues evaluate(double t) const;

    /// Values at ascending, non-negative times. Vacuum mode integrates cumulatively;
    /// the series mode evaluates points independently on up to `threads` workers.
    std::vector<CoefficientValues> evaluate(const std::vector<double>& times, unsigned threads = 1) const;

    /// kappa(tau) from the exponential decomposition, tau > 0.
    double noise_kernel(double tau) const;

    /// Markovian limits, Delta_inf = a^2 (pi/2) J(w0) coth(w0/2kT), gamma_inf = a^2 (pi/2) J(w0).
    double delta_limit() const;
    double gamma_limit() const;

private:
    struct Partial {
        double delta = 0.0;
        double pi = 0.0;
        double delta_integral = 0.0;
        std::complex<double> drive = 0.0;
    };
    struct VacuumMoments;
    Partial matsubara_part(double t) const;
    VacuumMoments vacuum_moments(double t0, double t1) const;
    CoefficientValues assemble(double t, const Partial& p) const;
    double vacuum_kernel(double tau) const;

    ReservoirSpec spec_;
    bool matsubara_ = false;
    int terms_ = 0;
    double cot_coefficient_ = 0.0;
};

}  // namespace qbm
