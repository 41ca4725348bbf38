// special_functions.hpp: sine/cosine integrals and stable exponential helpers

#pragma once

#include <complex>

namespace qbm::special {

struct SiCi {
    double si;
    double ci;
};

/// Sine and cosine integrals Si(x), Ci(x) for x > 0.
SiCi sine_cosine_integral(double x);

/// x * coth(x), finite at x = 0.
double x_coth_x(double x);

/// (1 - e^{-w}) / w
std::complex<double> phi1(std::complex<double> w);
/// (1 - e^{-w}(1 + w)) / w^2
std::complex<double> phi2(std::complex<double> w);
/// (w - 1 + e^{-w}) / w^2
std::complex<double> psi(std::complex<double> w);

/// Closed form of Int_0^inf x cos(b x) / (x^2 + a^2) dx for a, b > 0, written as
/// -(1/2)[e^{-ab} Ei(ab) + e^{ab} Ei(-ab)] with an asymptotic branch for large ab.
double lorentz_cosine_transform(double a, double b);

}  // namespace qbm::special
