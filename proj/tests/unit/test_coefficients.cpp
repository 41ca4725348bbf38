// test_coefficients.cpp: time-dependent coefficients, stationary rates, regimes and RWA rates
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qbm/analysis.hpp"
#include "qbm/coefficient_model.hpp"
#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"
#include "qbm/spectral.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using qbm::CoefficientTable;
using qbm::ReservoirSpec;
using std::numbers::pi;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

// Closed forms for the exponential dissipation kernel mu(s) = a^2 wc^2 e^{-wc s}.
struct DissipationOracle {
    double a2, wc, w0;
    double norm() const { return a2 * wc * wc / (wc * wc + w0 * w0); }
    // Int_0^t e^{-wc s} sin(w0 s) ds and Int_0^t e^{-wc s} cos(w0 s) ds, times (wc^2 + w0^2)
    double s_int(double t) const { return w0 - std::exp(-wc * t) * (wc * std::sin(w0 * t) + w0 * std::cos(w0 * t)); }
    double c_int(double t) const { return wc - std::exp(-wc * t) * (wc * std::cos(w0 * t) - w0 * std::sin(w0 * t)); }
    double gamma(double t) const { return norm() * s_int(t); }
    double r_shift(double t) const { return norm() * c_int(t); }
    double big_gamma(double t) const {
        const double d = wc * wc + w0 * w0;
        return 2.0 * norm() * (w0 * t - (wc * s_int(t) + w0 * c_int(t)) / d);
    }
};

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("dissipative coefficients match closed forms", "[coefficients]") {
    for (double kt : {0.0, 1.5}) {
        ReservoirSpec spec(1.3, 0.1, 2.0, kt);
        qbm::LorentzDrudeModel model(spec);
        DissipationOracle o{0.01, 2.0, 1.3};
        for (double t : {0.01, 0.5, 3.0, 17.0}) {
            CAPTURE(kt, t);
            auto v = model.evaluate(t);
            CHECK_THAT(v.gamma, WithinRel(o.gamma(t), 1e-12));
            CHECK_THAT(v.r_shift, WithinRel(o.r_shift(t), 1e-12));
            CHECK_THAT(v.big_gamma, WithinRel(o.big_gamma(t), 1e-10));
        }
        CHECK_THAT(model.gamma_limit(), WithinRel(o.gamma(1e3), 1e-12));
    }
}

TEST_CASE("diffusive coefficients match time quadrature of the frequency-domain kernel", "[coefficients]") {
    // Independent route: kappa(tau) by frequency quadrature, then Boost tau-quadrature.
    for (double kt : {0.0, 1.5}) {
        ReservoirSpec spec(1.0, 0.1, 2.0, kt);
        qbm::LorentzDrudeModel model(spec);
        const double t = 3.0;
        auto kappa = [&](double tau) { return qbm::noise_kernel(spec, tau); };
        double delta = GK::integrate([&](double s) { return kappa(s) * std::cos(s); }, 0.0, t, 12, 1e-10);
        double pi_c = GK::integrate([&](double s) { return kappa(s) * std::sin(s); }, 0.0, t, 12, 1e-10);
        auto v = model.evaluate(t);
        CAPTURE(kt);
        CHECK_THAT(v.delta, WithinRel(delta, 1e-6));
        CHECK_THAT(v.pi, WithinRel(pi_c, 1e-6));
    }
}

TEST_CASE("zero coupling gives identically zero series", "[coefficients]") {
    auto table = qbm::build_coefficient_table(ReservoirSpec(1.0, 0.0, 2.0, 3.0), 10.0, 400);
    for (const auto* s : {&table.delta(), &table.gamma(), &table.pi(), &table.r_shift(), &table.big_gamma(),
                          &table.delta_gamma_int()})
        CHECK(max_abs(*s) == 0.0);
    for (auto w : table.anisotropy()) CHECK(std::abs(w) == 0.0);
    CHECK(qbm::classify_regime(table).classification == qbm::RegimeClass::LindbladType);
}

TEST_CASE("every series starts at zero", "[coefficients]") {
    auto table = qbm::build_coefficient_table(ReservoirSpec(1.0, 0.1, 2.0, 3.0), 10.0, 400);
    CHECK(table.grid().front() == 0.0);
    CHECK(table.delta().front() == 0.0);
    CHECK(table.gamma().front() == 0.0);
    CHECK(table.big_gamma().front() == 0.0);
    CHECK(table.delta_gamma_int().front() == 0.0);
    CHECK(std::abs(table.anisotropy().front()) == 0.0);
}

TEST_CASE("synthetic constant rates reproduce the closed forms", "[coefficients]") {
    const double d = 0.3, g = 0.05, t_max = 20.0;
    const int n = 200;
    ReservoirSpec spec(1.0, 0.1, 1.0, 1.0);
    auto table = CoefficientTable::from_rates(spec, t_max, std::vector<double>(n + 1, d), std::vector<double>(n + 1, g));
    for (int i = 0; i <= n; i += 20) {
        double t = table.grid()[i];
        CHECK_THAT(table.big_gamma()[i], WithinAbs(2.0 * g * t, 1e-13));
        CHECK_THAT(table.delta_gamma_int()[i], WithinAbs(d / (2.0 * g) * (1.0 - std::exp(-2.0 * g * t)), 1e-13));
    }
    // W(t) = (d/2) (1 - e^{-(2g - 2i w0) t}) / (2g - 2i w0)
    const std::complex<double> k(2.0 * g, -2.0);
    for (int i = 0; i <= n; i += 25) {
        double t = table.grid()[i];
        auto w = 0.5 * d * (1.0 - std::exp(-k * t)) / k;
        CHECK(std::abs(table.anisotropy()[i] - w) < 1e-12);
    }
    CHECK_THROWS_AS(CoefficientTable::from_rates(spec, t_max, std::vector<double>(4, d), std::vector<double>(4, g)),
                    std::invalid_argument);
}

TEST_CASE("integrated damping and its derivative", "[coefficients]") {
    auto table = qbm::build_coefficient_table(ReservoirSpec(1.0, 0.2, 0.5, 2.0), 20.0, 2000);
    const double h = table.step();
    const auto& G = table.big_gamma();
    const double scale = max_abs(table.gamma());
    for (std::size_t i = 1; i + 1 < table.size(); i += 37) {
        double deriv = (G[i + 1] - G[i - 1]) / (2.0 * h);
        CHECK_THAT(deriv, WithinAbs(2.0 * table.gamma()[i], 1e-4 * scale));
    }
    // midpoint re-integration of gamma
    double mid = 0.0;
    for (std::size_t i = 0; i + 1 < table.size(); ++i) mid += h * table.at(table.grid()[i] + 0.5 * h).gamma;
    CHECK_THAT(2.0 * mid, WithinRel(G.back(), 1e-6));
}

TEST_CASE("Delta_Gamma satisfies its defining integral", "[coefficients]") {
    for (double kt : {0.0, 4.0}) {
        ReservoirSpec spec(1.0, 0.3, 1.5, kt);
        qbm::LorentzDrudeModel model(spec);
        auto table = qbm::build_coefficient_table(spec, 8.0, 800);
        for (std::size_t i : {std::size_t(100), std::size_t(450), std::size_t(800)}) {
            double t = table.grid()[i];
            double gt = model.evaluate(t).big_gamma;
            auto f = [&](double s) {
                auto v = model.evaluate(s);
                return std::exp(v.big_gamma - gt) * v.delta;
            };
            double oracle = GK::integrate(f, 0.0, t, 15, 1e-11);
            CAPTURE(kt, t);
            CHECK_THAT(table.delta_gamma_int()[i], WithinRel(oracle, 1e-8));
        }
    }
}

TEST_CASE("anisotropy W matches its defining integral", "[coefficients]") {
    ReservoirSpec spec(1.0, 0.3, 1.5, 2.0);
    qbm::LorentzDrudeModel model(spec);
    auto table = qbm::build_coefficient_table(spec, 6.0, 600);
    const std::size_t i = 437;
    const double t = table.grid()[i];
    const double gt = model.evaluate(t).big_gamma;
    auto part = [&](bool imag) {
        return GK::integrate(
            [&](double s) {
                auto v = model.evaluate(s);
                auto z = std::exp(v.big_gamma - gt) * std::exp(std::complex<double>(0.0, 2.0 * (t - s)))
                         * std::complex<double>(v.delta, -v.pi) * 0.5;
                return imag ? z.imag() : z.real();
            },
            0.0, t, 15, 1e-11);
    };
    std::complex<double> oracle(part(false), part(true));
    CHECK(std::abs(table.anisotropy()[i] - oracle) < 1e-8 * std::abs(oracle));
    // off-grid interpolation against the direct value at the same time
    const double tm = t + 0.5 * table.step();
    CHECK(std::abs(table.anisotropy_at(tm) - table.anisotropy()[i]) < 0.1 * std::abs(oracle));
}

TEST_CASE("short-time power laws", "[coefficients]") {
    ReservoirSpec spec(1.0, 0.1, 2.0, 50.0);
    qbm::LorentzDrudeModel model(spec);
    std::vector<double> t, d, g;
    for (double x = 1e-4; x <= 1e-3 * (1 + 1e-9); x *= std::pow(10.0, 0.1)) {
        auto v = model.evaluate(x);
        t.push_back(x);
        d.push_back(v.delta);
        g.push_back(v.gamma);
    }
    CHECK_THAT(qbm::analysis::fit_power_law(t, d).exponent, WithinAbs(1.0, 0.1));
    CHECK_THAT(qbm::analysis::fit_power_law(t, g).exponent, WithinAbs(2.0, 0.1));
}

TEST_CASE("interpolation agrees with a finer table", "[coefficients]") {
    ReservoirSpec spec(1.0, 0.2, 2.0, 0.5);
    auto coarse = qbm::build_coefficient_table(spec, 10.0, 200);
    auto fine = qbm::build_coefficient_table(spec, 10.0, 400);
    const double sd = max_abs(fine.delta()), sg = max_abs(fine.big_gamma());
    // skip t < 1, where the zero-point part of Delta grows like t log t
    for (std::size_t j = 41; j < fine.size(); j += 6) {
        auto p = coarse.at(fine.grid()[j]);
        CHECK_THAT(p.delta, WithinAbs(fine.delta()[j], 1e-5 * sd));
        CHECK_THAT(p.big_gamma, WithinAbs(fine.big_gamma()[j], 1e-6 * sg));
    }
    CHECK_THROWS_AS(coarse.at(-0.1), qbm::RangeError);
    CHECK_THROWS_AS(coarse.at(10.5), qbm::RangeError);
}

TEST_CASE("table construction validates resolution", "[coefficients]") {
    ReservoirSpec spec(1.0, 0.1, 2.0, 1.0);
    CHECK_THROWS_AS(qbm::build_coefficient_table(spec, 1.0, 15), qbm::ResolutionError);
    CHECK_THROWS_AS(qbm::build_coefficient_table(spec, 100.0, 100), qbm::ResolutionError);
    CHECK_THROWS_AS(qbm::build_coefficient_table(spec, 0.0, 100), std::invalid_argument);
    CHECK_NOTHROW(qbm::build_coefficient_table(spec, 2.0 * pi, 20));
}

TEST_CASE("table construction is independent of thread count", "[coefficients]") {
    ReservoirSpec spec(1.0, 0.1, 2.0, 3.0);
    auto a = qbm::build_coefficient_table(spec, 10.0, 300, {.threads = 1});
    auto b = qbm::build_coefficient_table(spec, 10.0, 300, {.threads = 4});
    std::ostringstream sa, sb;
    a.write_csv(sa);
    b.write_csv(sb);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("coefficient CSV has the documented header and round-trips", "[coefficients]") {
    auto table = qbm::build_coefficient_table(ReservoirSpec(1.0, 0.1, 2.0, 3.0), 5.0, 100);
    std::ostringstream os;
    table.write_csv(os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,delta,gamma,pi,r_shift,big_gamma,delta_gamma_int");
    std::size_t row = 0;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
        REQUIRE(v.size() == 7);
        CHECK(v[0] == table.grid()[row]);
        CHECK(v[1] == table.delta()[row]);
        CHECK(v[6] == table.delta_gamma_int()[row]);
        ++row;
    }
    CHECK(row == table.size());
}

TEST_CASE("stationary rates obey detailed balance", "[coefficients]") {
    ReservoirSpec spec(1.0, 0.05, 10.0, 10.0);
    auto [d, g] = qbm::stationary_rates(spec);
    const double nbar = qbm::thermal_occupation(spec, 1.0);
    CHECK_THAT(d / g, WithinRel(2.0 * nbar + 1.0, 1e-3));
    CHECK_THAT(g, WithinRel(0.05 * 0.05 * (pi / 2.0) * qbm::eval_spectral_density(spec, 1.0), 1e-3));

    auto [d0, g0] = qbm::stationary_rates(spec.with_kt(0.0));
    CHECK_THAT(d0 / g0, WithinRel(1.0, 1e-3));

    CHECK_THROWS_AS(qbm::stationary_rates(spec.with_alpha(0.0)), std::domain_error);
    auto zero = qbm::stationary_rates(spec.with_alpha(0.0), {.allow_zero_coupling = true});
    CHECK(zero.first == 0.0);
    CHECK(zero.second == 0.0);
}

TEST_CASE("regime classification", "[coefficients]") {
    SECTION("slow cutoff at room temperature is non-Lindblad") {
        auto spec = ReservoirSpec::from_kelvin(1e7, 1e-8, 1e6, 300.0);
        auto table = qbm::build_coefficient_table(spec, 4.0 * pi / 1e7, 400);
        auto report = qbm::classify_regime(table);
        CHECK(report.classification == qbm::RegimeClass::NonLindbladType);
        REQUIRE(report.first_violation_time.has_value());
        CHECK(*report.first_violation_time < 4.0 * pi / 1e7);
        CHECK(report.min_rate_value < -report.tol);
    }
    SECTION("fast cutoff at high temperature is Lindblad") {
        auto table = qbm::build_coefficient_table(ReservoirSpec::scaled(1.0, 0.05, 10.0, 100.0), 20.0, 2000);
        auto report = qbm::classify_regime(table);
        CHECK(report.classification == qbm::RegimeClass::LindbladType);
        CHECK_FALSE(report.first_violation_time.has_value());
    }
    SECTION("all-zero table has no violation") {
        ReservoirSpec spec(1.0, 0.1, 1.0, 1.0);
        auto table = CoefficientTable::from_rates(spec, 10.0, std::vector<double>(101, 0.0), std::vector<double>(101, 0.0));
        auto report = qbm::classify_regime(table);
        CHECK(report.classification == qbm::RegimeClass::LindbladType);
        CHECK(report.min_rate_value == 0.0);
        CHECK_THROWS_AS(qbm::classify_regime(table, -1.0), std::invalid_argument);
    }
    SECTION("explicit tolerance decides marginal cases") {
        ReservoirSpec spec(1.0, 0.1, 1.0, 1.0);
        std::vector<double> d(101, 0.0), g(101, 1e-3);
        g[0] = 0.0;
        auto table = CoefficientTable::from_rates(spec, 10.0, d, g);
        CHECK(qbm::classify_regime(table, 1e-2).classification == qbm::RegimeClass::LindbladType);
        auto strict = qbm::classify_regime(table, 1e-4);
        CHECK(strict.classification == qbm::RegimeClass::NonLindbladType);
        CHECK(*strict.first_violation_time == table.grid()[1]);
    }
}

TEST_CASE("rotating-wave rates", "[coefficients]") {
    SECTION("zero coupling") {
        auto r = qbm::rwa_rates(ReservoirSpec(1.0, 0.0, 0.1, 100.0), 1.0, 50);
        CHECK(max_abs(r.gamma_down) == 0.0);
        CHECK(max_abs(r.gamma_up) == 0.0);
    }
    SECTION("no upward rate at zero temperature") {
        auto r = qbm::rwa_rates(ReservoirSpec(1.0, 0.1, 2.0, 0.0), 10.0, 200);
        CHECK(max_abs(r.gamma_up) == 0.0);
        CHECK(max_abs(r.gamma_down) > 0.0);
    }
    SECTION("short-time heating is half the secular value") {
        ReservoirSpec spec(1.0, 0.01, 0.1, 100.0);
        auto rwa = qbm::rwa_rates(spec, 0.1, 100);
        auto table = qbm::build_coefficient_table(spec, 0.1, 100);
        auto n_rwa = rwa.heating();
        auto n_sec = qbm::secular_heating(table);
        CHECK(rwa.gamma_down.front() == 0.0);
        CHECK(rwa.gamma_up.front() == 0.0);
        for (std::size_t i = 5; i <= 100; i += 19) CHECK_THAT(n_rwa[i] / n_sec[i], WithinAbs(0.5, 0.02));
    }
    SECTION("long-time rates approach the golden-rule values") {
        ReservoirSpec spec(1.0, 0.1, 2.0, 1.0);
        auto r = qbm::rwa_rates(spec, 100.0, 2000);
        const double golden = 0.01 * pi * qbm::eval_spectral_density(spec, 1.0);
        const double nbar = qbm::thermal_occupation(spec, 1.0);
        // average the residual 1/t ripple over the last period
        double up = 0.0, down = 0.0;
        int m = 0;
        for (std::size_t i = r.grid.size() - 126; i < r.grid.size(); ++i, ++m) {
            up += r.gamma_up[i];
            down += r.gamma_down[i];
        }
        CHECK_THAT(up / m, WithinRel(golden * nbar, 5e-3));
        CHECK_THAT(down / m, WithinRel(golden * (nbar + 1.0), 5e-3));
    }
}

TEST_CASE("relaxation integrator", "[coefficients]") {
    SECTION("constant rates are exact") {
        const double k = 0.7, s = 0.2, h = 0.1;
        auto y = qbm::integrate_relaxation(h, std::vector<double>(51, k), std::vector<double>(51, s));
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK_THAT(y[i], WithinAbs(s / k * (1.0 - std::exp(-k * h * i)), 1e-14));
        const std::complex<double> kc(0.1, -2.0), sc(0.5, -0.25);
        auto z = qbm::integrate_relaxation(h, std::vector<std::complex<double>>(51, kc),
                                           std::vector<std::complex<double>>(51, sc));
        for (std::size_t i = 0; i < z.size(); ++i)
            CHECK(std::abs(z[i] - sc / kc * (1.0 - std::exp(-kc * (h * i)))) < 1e-14);
    }
    SECTION("time-dependent rates converge at second order") {
        // y' = -t y + 1, y(0) = 0: y(t) = e^{-t^2/2} Int_0^t e^{s^2/2} ds
        auto solve = [](int n) {
            const double h = 2.0 / n;
            std::vector<double> k(n + 1), s(n + 1, 1.0);
            for (int i = 0; i <= n; ++i) k[i] = h * i;
            return qbm::integrate_relaxation(h, k, s).back();
        };
        double exact = std::exp(-2.0) * GK::integrate([](double x) { return std::exp(0.5 * x * x); }, 0.0, 2.0, 10, 1e-14);
        double e1 = std::abs(solve(50) - exact), e2 = std::abs(solve(100) - exact);
        CHECK(e2 < 1e-3);
        CHECK(e1 / e2 > 3.5);
    }
}

TEST_CASE("secular heating is the solution of the mean-number equation", "[coefficients]") {
    auto table = qbm::build_coefficient_table(ReservoirSpec(1.0, 0.2, 1.0, 3.0), 10.0, 4000);
    auto n = qbm::secular_heating(table);
    const double h = table.step();
    const double scale = max_abs(table.delta());
    for (std::size_t i = 1; i + 1 < n.size(); i += 97) {
        double dn = (n[i + 1] - n[i - 1]) / (2.0 * h);
        double rhs = -2.0 * table.gamma()[i] * n[i] + table.delta()[i] - table.gamma()[i];
        CHECK_THAT(dn, WithinAbs(rhs, 1e-4 * scale));
    }
}
