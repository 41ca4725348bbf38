// coefficients.hpp: coefficient tables, stationary rates, regime classification and RWA rates

#pragma once

#include <complex>
#include <iosfwd>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "qbm/coefficient_model.hpp"
#include "qbm/spectral.hpp"

namespace qbm {

struct CoefficientPoint {
    double delta = 0.0;
    double gamma = 0.0;
    double pi = 0.0;
    double r_shift = 0.0;
    double big_gamma = 0.0;
    double delta_gamma_int = 0.0;
};

/// Coefficients sampled on a uniform grid 0 = t_0 < ... < t_n = t_max. Immutable.
class CoefficientTable {
public:
    CoefficientTable(ReservoirSpec spec, double t_max, std::vector<double> delta, std::vector<double> gamma,
                     std::vector<double> pi, std::vector<double> r_shift, std::vector<double> big_gamma,
                     std::vector<double> delta_gamma_int, std::vector<std::complex<double>> anisotropy = {});

    /// Synthetic table from prescribed Delta, gamma (and optionally Pi) samples on a uniform
    /// grid. Gamma and Delta_Gamma are integrated with the exponential trapezoid rule
    /// (exact for piecewise-constant rates).
    static CoefficientTable from_rates(const ReservoirSpec& spec, double t_max, std::vector<double> delta,
                                       std::vector<double> gamma, std::vector<double> pi = {});

    const ReservoirSpec& spec() const { return spec_; }
    std::size_t size() const { return grid_.size(); }
    double t_max() const { return grid_.back(); }
    double step() const { return step_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& delta() const { return delta_; }
    const std::vector<double>& gamma() const { return gamma_; }
    const std::vector<double>& pi() const { return pi_; }
    const std::vector<double>& r_shift() const { return r_shift_; }
    const std::vector<double>& big_gamma() const { return big_gamma_; }
    const std::vector<double>& delta_gamma_int() const { return delta_gamma_int_; }
    /// W(t) = e^{-Gamma(t)} Int_0^t e^{Gamma(s)} e^{2i w0 (t-s)} (Delta(s) - i Pi(s))/2 ds at the
    /// grid points: the traceless part of A(t) is Re W sigma_z + Im W sigma_x.
    const std::vector<std::complex<double>>& anisotropy() const { return anisotropy_; }

    /// Cubic B-spline interpolation. Throws RangeError outside [0, t_max].
    CoefficientPoint at(double t) const;
    /// W(t) between grid points, interpolated in the frame co-rotating at 2 w0.
    std::complex<double> anisotropy_at(double t) const;

    /// Header `t,delta,gamma,pi,r_shift,big_gamma,delta_gamma_int`, 17 significant digits.
    void write_csv(std::ostream& os) const;

private:
    struct Splines;
    ReservoirSpec spec_;
    double step_;
    std::vector<double> grid_, delta_, gamma_, pi_, r_shift_, big_gamma_, delta_gamma_int_;
    std::vector<std::complex<double>> anisotropy_;
    std::shared_ptr<const Splines> splines_;
};

struct BuildOptions {
    /// Worker threads for grid evaluation (0: QBM_THREADS or hardware concurrency).
    unsigned threads = 0;
};

/// Throws ResolutionError if n_steps < 16 or the grid has fewer than 20 points per
/// oscillator period, std::invalid_argument if t_max <= 0.
CoefficientTable build_coefficient_table(const ReservoirSpec& spec, double t_max, int n_steps,
                                         const BuildOptions& opts = {});

struct StationaryOptions {
    /// With alpha = 0 return (0, 0) instead of throwing std::domain_error.
    bool allow_zero_coupling = false;
};

/// Long-time plateau (Delta_inf, gamma_inf). Starts at t = 20/omega_c; the horizon is doubled
/// (at most 8 times) until the relative drift over the last 10% of samples is below 1e-3.
/// Throws ConvergenceError if no plateau is found.
std::pair<double, double> stationary_rates(const ReservoirSpec& spec, const StationaryOptions& opts = {});

enum class RegimeClass { LindbladType, NonLindbladType };

struct RegimeReport {
    RegimeClass classification = RegimeClass::LindbladType;
    std::optional<double> first_violation_time;
    /// Most negative of min(Delta - gamma, Delta + gamma) over the grid (0 if none negative).
    double min_rate_value = 0.0;
    double tol = 0.0;
};

/// tol defaults to 1e-6 * max|Delta|. Throws std::invalid_argument on an empty table or tol < 0.
RegimeReport classify_regime(const CoefficientTable& table, std::optional<double> tol = std::nullopt);

/// Time-dependent rates of the number-conserving (rotating-wave) coupling,
///   gamma_down(t) = alpha^2 Int_0^t ds Int dw J(w)(n(w)+1) cos((w - w0)s),
///   gamma_up(t)   = alpha^2 Int_0^t ds Int dw J(w) n(w) cos((w - w0)s).
struct RwaRates {
    std::vector<double> grid;
    std::vector<double> gamma_down;
    std::vector<double> gamma_up;

    /// <n>(t) from vacuum under dn/dt = -(gamma_down - gamma_up) n + gamma_up.
    std::vector<double> heating() const;
};

RwaRates rwa_rates(const ReservoirSpec& spec, double t_max, int n_steps, const BuildOptions& opts = {});

/// <n>(t) from vacuum under the secular equation dn/dt = -2 gamma n + (Delta - gamma),
/// i.e. (e^{-Gamma} - 1)/2 + Delta_Gamma.
std::vector<double> secular_heating(const CoefficientTable& table);

/// Solves y' = -k(t) y + s(t), y(0) = 0 on a uniform grid with rates linear per interval
/// (exponential trapezoid rule). Exact for constant k and s.
std::vector<double> integrate_relaxation(double step, const std::vector<double>& decay,
                                         const std::vector<double>& source);
std::vector<std::complex<double>> integrate_relaxation(double step, const std::vector<std::complex<double>>& decay,
                                                       const std::vector<std::complex<double>>& source);

}  // namespace qbm
