#include "qbm/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbm::special {

namespace {

constexpr double kEps = 1e-17;

// Continued fraction for E1(i x), x >= 2 (modified Lentz).
std::complex<double> e1_imaginary(double x) {
    const double tiny = 1e-300;
    std::complex<double> b(1.0, x);
    std::complex<double> c(1.0 / tiny, 0.0);
    std::complex<double> d = 1.0 / b;
    std::complex<double> h = d;
    for (int i = 2; i < 1000; ++i) {
        const double a = -static_cast<double>((i - 1) * (i - 1));
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const std::complex<double> del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16) break;
    }
    return std::complex<double>(std::cos(x), -std::sin(x)) * h;
}

}  // namespace

SiCi sine_cosine_integral(double x) {
    if (!(x > 0.0)) throw std::domain_error("sine_cosine_integral requires x > 0");
    if (x < 2.0) {
        const double x2 = x * x;
        double si = 0.0, ci = 0.0;
        double term = x;  // x^{2k+1}/(2k+1)!
        for (int k = 0; k < 40; ++k) {
            const double s = term / (2 * k + 1);
            si += (k % 2 == 0) ? s : -s;
            if (std::abs(s) < kEps * std::abs(si)) break;
            term *= x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        }
        term = 1.0;  // x^{2k}/(2k)!
        for (int k = 1; k < 40; ++k) {
            term *= x2 / ((2.0 * k - 1.0) * (2.0 * k));
            const double c = term / (2 * k);
            ci += (k % 2 == 1) ? -c : c;
            if (std::abs(c) < kEps) break;
        }
        ci += std::numbers::egamma + std::log(x);
        return {si, ci};
    }
    const std::complex<double> h = e1_imaginary(x);
    return {0.5 * std::numbers::pi + h.imag(), -h.real()};
}

double x_coth_x(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) return 1.0 + x * x / 3.0;
    if (ax > 40.0) return ax;
    return x / std::tanh(x);
}

std::complex<double> phi1(std::complex<double> w) {
    if (std::abs(w) < 0.25) {
        std::complex<double> sum = 0.0, term = 1.0;
        for (int n = 0; n < 30; ++n) {
            // term = (-w)^n / (n+1)!
            sum += term;
            term *= -w / static_cast<double>(n + 2);
        }
        return sum;
    }
    return (1.0 - std::exp(-w)) / w;
}

std::complex<double> phi2(std::complex<double> w) {
    if (std::abs(w) < 0.25) {
        std::complex<double> sum = 0.0, pw = 1.0;
        double fact = 2.0;  // (n+2)!
        for (int n = 0; n < 30; ++n) {
            sum += static_cast<double>(n + 1) * pw / fact;
            pw *= -w;
            fact *= static_cast<double>(n + 3);
        }
        return sum;
    }
    return (1.0 - std::exp(-w) * (1.0 + w)) / (w * w);
}

std::complex<double> psi(std::complex<double> w) {
    if (std::abs(w) < 0.25) {
        std::complex<double> sum = 0.0, pw = 1.0;
        double fact = 2.0;
        for (int n = 0; n < 30; ++n) {
            sum += pw / fact;
            pw *= -w;
            fact *= static_cast<double>(n + 3);
        }
        return sum;
    }
    return (w - 1.0 + std::exp(-w)) / (w * w);
}

double lorentz_cosine_transform(double a, double b) {
    const double y = a * b;
    if (y > 40.0) {
        // -(1/y^2) sum_k (2k+1)!/y^(2k), truncated once terms drop below double precision
        const double y2 = 1.0 / (y * y);
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 30 && term > 1e-17 * sum; ++k) {
            term *= static_cast<double>((2 * k) * (2 * k + 1)) * y2;
            sum += term;
        }
        return -y2 * sum;
    }
    return -0.5 * (std::exp(-y) * std::expint(y) + std::exp(y) * std::expint(-y));
}

}  // namespace qbm::special
