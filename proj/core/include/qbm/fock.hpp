// fock.hpp: secular master equation in a truncated number basis with positivity audits

#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "qbm/coefficients.hpp"

namespace qbm {

/// Density matrix in the interaction picture, rho(m, n) = <m|rho|n>, m, n < dim.
struct FockDensityMatrix {
    Eigen::MatrixXcd rho;
    double t = 0.0;

    int dim() const { return static_cast<int>(rho.rows()); }

    static FockDensityMatrix vacuum(int dim);
    static FockDensityMatrix number_state(int dim, int k);
    static FockDensityMatrix thermal(int dim, double nbar);
    /// Normalized pure state |psi><psi|.
    static FockDensityMatrix pure(const Eigen::VectorXcd& psi);

    std::complex<double> trace() const { return rho.trace(); }
    double mean_n() const;
    /// <a> and <a^2>
    std::complex<double> mean_a() const;
    std::complex<double> mean_a2() const;
    /// Throws std::invalid_argument if not square, not Hermitian (1e-10) or trace off by more than 1e-8.
    void validate() const;
};

struct PositivityAudit {
    double t = 0.0;
    double min_eigenvalue = 0.0;
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
};

struct FockOptions {
    /// Maximum allowed rho(N-1, N-1) before the truncation is declared invalid.
    double spill_threshold = 1e-6;
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    /// Steps allowed between consecutive output times before IntegratorError.
    int max_steps_per_interval = 1000000;
};

struct FockRun {
    std::vector<FockDensityMatrix> states;
    std::vector<PositivityAudit> audits;
};

/// Integrates
///   d rho/dt = (Delta+gamma)/2 [2 a rho a^+ - a^+ a rho - rho a^+ a]
///            + (Delta-gamma)/2 [2 a^+ rho a - a a^+ rho - rho a a^+]
/// with signed rates taken from the table (no clamping). Truncated a, a^+ keep the
/// generator exactly trace preserving. Returns states and audits at every t_grid time.
/// Throws TruncationError (with the spill time), IntegratorError or RangeError.
FockRun integrate_secular(const FockDensityMatrix& rho0, const CoefficientTable& table,
                          const std::vector<double>& t_grid, const FockOptions& opts = {});

PositivityAudit audit_positivity(const FockDensityMatrix& state);
std::vector<PositivityAudit> audit_positivity(const std::vector<FockDensityMatrix>& states);

/// <n>(t) = sum_k k rho_kk
std::vector<double> heating_function(const std::vector<FockDensityMatrix>& states);

/// Re-applies the free rotation: rho_mn -> rho_mn e^{i w0 t (m - n)}, the phase-space
/// convention used by gaussian_qcf (x -> cos x - sin p).
FockDensityMatrix rotate_to_lab(const FockDensityMatrix& state, double omega0);

/// Smallest N whose geometric tail (nbar/(nbar+1))^N is below `tail`.
int thermal_truncation(double nbar, double tail = 1e-8);

/// Rows `t,N,re_0_0,im_0_0,re_0_1,...` (row-major).
void write_fock_csv(std::ostream& os, const std::vector<FockDensityMatrix>& states);
/// Header `t,min_eig,trace_err,herm_err`.
void write_audit_csv(std::ostream& os, const std::vector<PositivityAudit>& audits);

}  // namespace qbm
