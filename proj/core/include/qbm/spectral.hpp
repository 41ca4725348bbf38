// spectral.hpp: reservoir model, spectral density and the noise/dissipation kernels

#pragma once

namespace qbm {

enum class SpectralFamily { OhmicLorentzDrude };

/// Reservoir and oscillator parameters. Frequencies in rad/s, hbar = 1; the
/// temperature is held as k_B T / hbar (rad/s) and converted once at construction.
class ReservoirSpec {
public:
    /// Throws std::invalid_argument on omega0 <= 0, omega_c <= 0, alpha < 0 or kT < 0.
    ReservoirSpec(double omega0, double alpha, double omega_c, double kt,
                  SpectralFamily family = SpectralFamily::OhmicLorentzDrude);

    static ReservoirSpec from_kelvin(double omega0, double alpha, double omega_c, double kelvin);
    /// omega_c given as r * omega0, temperature as k_B T in units of hbar omega0.
    static ReservoirSpec scaled(double omega0, double alpha, double r, double kt_over_omega0);

    double omega0() const { return omega0_; }
    double alpha() const { return alpha_; }
    double omega_c() const { return omega_c_; }
    /// k_B T / hbar in rad/s.
    double kt() const { return kt_; }
    double kelvin() const;
    double ratio() const { return omega_c_ / omega0_; }
    SpectralFamily family() const { return family_; }

    /// Upper limit of the frequency quadrature, max(50 omega_c, 50 kT).
    double omega_max() const;

    ReservoirSpec with_alpha(double alpha) const;
    ReservoirSpec with_kt(double kt) const;

private:
    double omega0_;
    double alpha_;
    double omega_c_;
    double kt_;
    SpectralFamily family_;
};

struct KernelSample {
    double tau = 0.0;
    double noise = 0.0;
    double dissipation = 0.0;
};

struct KernelOptions {
    double rel_tol = 1e-8;
    /// Add the analytic contribution of (omega_max, inf) for tau != 0.
    bool include_tail = true;
};

/// J(omega) = omega |g(omega)|^2 with |g|^2 = (2/pi) wc^2 / (wc^2 + omega^2).
double eval_spectral_density(const ReservoirSpec& spec, double omega);

/// Bose-Einstein occupation 1/(exp(omega/kT) - 1); zero at T = 0.
double thermal_occupation(const ReservoirSpec& spec, double omega);

/// Frequency-domain integrand of the noise kernel, 2 alpha^2 J(omega) (n(omega) + 1/2).
double noise_density(const ReservoirSpec& spec, double omega);

/// kappa(tau) = 2 alpha^2 Int J(w)(n(w) + 1/2) cos(w tau) dw. Even in tau.
/// kappa(0) diverges logarithmically for this family and is returned with the hard
/// cutoff omega_max (the short-time heating constant).
double noise_kernel(const ReservoirSpec& spec, double tau, const KernelOptions& opts = {});

/// mu(tau) = alpha^2 Int J(w) sin(w tau) dw. Odd in tau, temperature independent.
double dissipation_kernel(const ReservoirSpec& spec, double tau, const KernelOptions& opts = {});

KernelSample kernel_sample(const ReservoirSpec& spec, double tau, const KernelOptions& opts = {});

/// C = 2 alpha^2 Int_0^omega_max J(w)(n(w) + 1/2) dw, the coefficient of t^2/2 in the
/// short-time heating law.
double heating_constant(const ReservoirSpec& spec);

}  // namespace qbm
