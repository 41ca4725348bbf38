#include "qbm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "qbm/analysis.hpp"
#include "qbm/coefficients.hpp"
#include "qbm/csv.hpp"
#include "qbm/errors.hpp"
#include "qbm/fock.hpp"
#include "qbm/gaussian_qcf.hpp"
#include "qbm/mcwf.hpp"
#include "qbm/states.hpp"
#include "qbm/units.hpp"

namespace qbm {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using json = nlohmann::ordered_json;
using std::numbers::pi;

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
    if (name == "coefficients") return ExperimentKind::Coefficients;
    if (name == "heating") return ExperimentKind::Heating;
    if (name == "qcf") return ExperimentKind::Qcf;
    if (name == "mcwf") return ExperimentKind::Mcwf;
    if (name == "regimes") return ExperimentKind::Regimes;
    if (name == "rwa-compare") return ExperimentKind::RwaCompare;
    return std::nullopt;
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Coefficients: return "coefficients";
        case ExperimentKind::Heating: return "heating";
        case ExperimentKind::Qcf: return "qcf";
        case ExperimentKind::Mcwf: return "mcwf";
        case ExperimentKind::Regimes: return "regimes";
        case ExperimentKind::RwaCompare: return "rwa-compare";
    }
    return "unknown";
}

ReservoirSpec ExperimentConfig::reservoir() const { return ReservoirSpec(omega0, alpha, omega_c, kt); }

// ---------------------------------------------------------------- parsing

namespace {

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> text(const std::string& path) {
        used_.insert(path);
        auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
        if (!v) return std::nullopt;
        std::string s = boost::algorithm::trim_copy(*v);
        return s;
    }

    std::optional<double> number(const std::string& path) {
        auto s = text(path);
        if (!s) return std::nullopt;
        try {
            std::size_t pos = 0;
            double v = std::stod(*s, &pos);
            if (pos != s->size() || !std::isfinite(v)) throw std::invalid_argument("");
            return v;
        } catch (...) {
            fail(path, "expected a finite number, got '" + *s + "'");
            return std::nullopt;
        }
    }

    std::optional<long long> integer(const std::string& path) {
        auto s = text(path);
        if (!s) return std::nullopt;
        try {
            std::size_t pos = 0;
            long long v = std::stoll(*s, &pos);
            if (pos != s->size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            fail(path, "expected an integer, got '" + *s + "'");
            return std::nullopt;
        }
    }

    std::optional<std::uint64_t> unsigned64(const std::string& path) {
        auto s = text(path);
        if (!s) return std::nullopt;
        try {
            std::size_t pos = 0;
            if (!s->empty() && (*s)[0] == '-') throw std::invalid_argument("");
            unsigned long long v = std::stoull(*s, &pos);
            if (pos != s->size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            fail(path, "expected a non-negative integer, got '" + *s + "'");
            return std::nullopt;
        }
    }

    void fail(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }

    void check_unknown() {
        for (const auto& [section, body] : tree_) {
            if (body.empty() && !body.data().empty()) {
                fail(section, "key outside of a section");
                continue;
            }
            for (const auto& [key, value] : body) {
                (void)value;
                const std::string path = section + "." + key;
                if (!used_.count(path)) fail(path, "unknown key");
            }
        }
    }

    const std::vector<std::string>& errors() const { return errors_; }

private:
    const pt::ptree& tree_;
    std::set<std::string> used_;
    std::vector<std::string> errors_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentKind> experiment_override) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    Reader rd(tree);
    ExperimentConfig cfg;
    cfg.source_text = text;

    // [run] experiment
    if (auto e = rd.text("run.experiment")) {
        auto kind = parse_experiment_kind(*e);
        if (!kind)
            rd.fail("run.experiment", "unknown experiment '" + *e + "'");
        else if (experiment_override && *kind != *experiment_override)
            rd.fail("run.experiment", "'" + *e + "' does not match the requested subcommand '" +
                                          to_string(*experiment_override) + "'");
        else
            cfg.experiment = *kind;
    } else if (experiment_override) {
        cfg.experiment = *experiment_override;
    } else {
        rd.fail("run.experiment", "missing");
    }
    if (experiment_override) cfg.experiment = *experiment_override;

    // [reservoir]
    const auto fu = rd.text("reservoir.frequency_units");
    double fscale = 1.0;
    if (!fu)
        rd.fail("reservoir.frequency_units", "missing (declare 'rad/s' or 'Hz')");
    else if (*fu == "Hz")
        fscale = 2.0 * pi;
    else if (*fu != "rad/s")
        rd.fail("reservoir.frequency_units", "must be 'rad/s' or 'Hz', got '" + *fu + "'");

    const auto w0 = rd.number("reservoir.omega0");
    if (!w0)
        rd.fail("reservoir.omega0", "missing");
    else if (!(*w0 > 0.0))
        rd.fail("reservoir.omega0", "must be positive");
    else
        cfg.omega0 = *w0 * fscale;

    const auto alpha = rd.number("reservoir.alpha");
    if (!alpha)
        rd.fail("reservoir.alpha", "missing");
    else if (*alpha < 0.0)
        rd.fail("reservoir.alpha", "must be non-negative");
    else
        cfg.alpha = *alpha;

    const auto wc = rd.number("reservoir.omega_c");
    const auto r = rd.number("reservoir.r");
    if (wc && r)
        rd.fail("reservoir", "give exactly one of omega_c or r, not both");
    else if (!wc && !r && cfg.experiment != ExperimentKind::Regimes)
        rd.fail("reservoir", "one of omega_c or r is required");
    if (wc) {
        if (!(*wc > 0.0))
            rd.fail("reservoir.omega_c", "must be positive");
        else
            cfg.omega_c = *wc * fscale;
    }
    if (r) {
        if (!(*r > 0.0))
            rd.fail("reservoir.r", "must be positive");
        else
            cfg.omega_c = *r * cfg.omega0;
    }
    if (!wc && !r) cfg.omega_c = cfg.omega0;

    const auto tu = rd.text("reservoir.temperature_units");
    const auto temp = rd.number("reservoir.temperature");
    if (!tu) rd.fail("reservoir.temperature_units", "missing (declare 'K' or 'hbar_omega0')");
    if (!temp) rd.fail("reservoir.temperature", "missing");
    if (temp && *temp < 0.0) rd.fail("reservoir.temperature", "must be non-negative");
    if (tu && temp && *temp >= 0.0) {
        if (*tu == "K")
            cfg.kt = units::kelvin_to_rad_per_s(*temp);
        else if (*tu == "hbar_omega0")
            cfg.kt = *temp * cfg.omega0;
        else
            rd.fail("reservoir.temperature_units", "must be 'K' or 'hbar_omega0', got '" + *tu + "'");
    }

    // [run]
    const auto t_max = rd.number("run.t_max");
    const auto periods = rd.number("run.t_max_periods");
    if (t_max && periods)
        rd.fail("run", "give exactly one of t_max or t_max_periods");
    else if (!t_max && !periods)
        rd.fail("run.t_max", "missing (or give run.t_max_periods)");
    else if (t_max) {
        if (!(*t_max > 0.0))
            rd.fail("run.t_max", "must be positive");
        else
            cfg.t_max = *t_max;
    } else {
        if (!(*periods > 0.0))
            rd.fail("run.t_max_periods", "must be positive");
        else if (cfg.omega0 > 0.0)
            cfg.t_max = *periods * 2.0 * pi / cfg.omega0;
    }
    if (auto n = rd.integer("run.n_steps")) {
        if (*n < 16 || *n > 100000000)
            rd.fail("run.n_steps", "must be in [16, 1e8]");
        else
            cfg.n_steps = static_cast<int>(*n);
    } else {
        rd.fail("run.n_steps", "missing");
    }
    if (auto s = rd.text("run.solver")) {
        if (*s != "qcf" && *s != "fock")
            rd.fail("run.solver", "must be 'qcf' or 'fock'");
        else
            cfg.solver = *s;
    }

    // [initial_state]
    using K = InitialStateConfig::Kind;
    if (auto k = rd.text("initial_state.kind")) {
        if (*k == "vacuum")
            cfg.initial.kind = K::Vacuum;
        else if (*k == "coherent")
            cfg.initial.kind = K::Coherent;
        else if (*k == "fock")
            cfg.initial.kind = K::Fock;
        else if (*k == "thermal")
            cfg.initial.kind = K::Thermal;
        else if (*k == "gaussian")
            cfg.initial.kind = K::Gaussian;
        else
            rd.fail("initial_state.kind", "must be vacuum, coherent, fock, thermal or gaussian");
    }
    if (auto v = rd.number("initial_state.x")) cfg.initial.mean_x = *v;
    if (auto v = rd.number("initial_state.p")) cfg.initial.mean_p = *v;
    if (auto v = rd.integer("initial_state.k")) {
        if (*v < 0 || *v > 10000)
            rd.fail("initial_state.k", "must be in [0, 10000]");
        else
            cfg.initial.fock_k = static_cast<int>(*v);
    }
    if (auto v = rd.number("initial_state.nbar")) {
        if (*v < 0.0)
            rd.fail("initial_state.nbar", "must be non-negative");
        else
            cfg.initial.nbar = *v;
    }
    const auto cxx = rd.number("initial_state.cov_xx");
    const auto cxp = rd.number("initial_state.cov_xp");
    const auto cpp = rd.number("initial_state.cov_pp");
    if (cfg.initial.kind == K::Gaussian) {
        if (!cxx || !cxp || !cpp) {
            rd.fail("initial_state", "gaussian state needs cov_xx, cov_xp and cov_pp");
        } else {
            cfg.initial.cov = {*cxx, *cxp, *cpp};
            if (!(*cxx > 0.0 && *cpp > 0.0 && *cxx * *cpp - *cxp * *cxp >= 0.25 - 1e-12))
                rd.fail("initial_state", "covariance violates det(cov) >= 1/4");
        }
    }

    // [mcwf]
    if (auto v = rd.integer("mcwf.n_traj")) {
        if (*v < 1)
            rd.fail("mcwf.n_traj", "must be positive");
        else
            cfg.n_traj = static_cast<std::size_t>(*v);
    }
    if (auto v = rd.unsigned64("mcwf.master_seed")) cfg.master_seed = *v;
    if (auto v = rd.integer("mcwf.keep_jump_logs")) {
        if (*v < 0)
            rd.fail("mcwf.keep_jump_logs", "must be non-negative");
        else
            cfg.keep_jump_logs = static_cast<std::size_t>(*v);
    }

    // [fock]
    if (auto v = rd.integer("fock.dim")) {
        if (*v < 2 || *v > 2000)
            rd.fail("fock.dim", "must be in [2, 2000]");
        else
            cfg.fock_dim = static_cast<int>(*v);
    }
    if (auto v = rd.number("fock.spill_threshold")) {
        if (!(*v > 0.0 && *v < 1.0))
            rd.fail("fock.spill_threshold", "must be in (0, 1)");
        else
            cfg.spill_threshold = *v;
    }

    // [output]
    if (auto v = rd.text("output.directory")) cfg.output_directory = *v;
    if (auto v = rd.text("output.gnuplot")) {
        if (*v == "true")
            cfg.write_gnuplot = true;
        else if (*v == "false")
            cfg.write_gnuplot = false;
        else
            rd.fail("output.gnuplot", "must be true or false");
    }

    // [regimes]
    if (auto v = rd.text("regimes.r_values")) {
        std::vector<std::string> parts;
        boost::algorithm::split(parts, *v, boost::is_any_of(","));
        cfg.r_values.clear();
        for (auto& p : parts) {
            boost::algorithm::trim(p);
            try {
                std::size_t pos = 0;
                const double x = std::stod(p, &pos);
                if (pos != p.size() || !(x > 0.0)) throw std::invalid_argument("");
                cfg.r_values.push_back(x);
            } catch (...) {
                rd.fail("regimes.r_values", "expected comma-separated positive numbers, got '" + p + "'");
            }
        }
    }

    // Experiment-specific requirements.
    const bool gaussian_initial = cfg.initial.kind != K::Fock;
    if (cfg.experiment == ExperimentKind::Qcf && !gaussian_initial)
        rd.fail("initial_state.kind", "qcf propagation needs a Gaussian initial state");
    if (cfg.experiment == ExperimentKind::Heating && cfg.solver == "qcf" && !gaussian_initial)
        rd.fail("initial_state.kind", "heating with solver=qcf needs a Gaussian initial state (use solver=fock)");
    if (cfg.experiment == ExperimentKind::Mcwf && (cfg.initial.kind == K::Thermal || cfg.initial.kind == K::Gaussian))
        rd.fail("initial_state.kind", "mcwf needs a pure initial state (vacuum, coherent or fock)");
    if (cfg.experiment == ExperimentKind::Regimes && cfg.r_values.empty())
        rd.fail("regimes.r_values", "must list at least one value");

    rd.check_unknown();
    if (!rd.errors().empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : rd.errors()) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path, std::optional<ExperimentKind> experiment_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), experiment_override);
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

// ---------------------------------------------------------------- running

namespace {

class OutputDir {
public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    template <class Writer>
    void write(const std::string& name, Writer&& writer) {
        const fs::path p = dir_ / name;
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot write '" + p.string() + "'");
        writer(os);
        if (!os) throw ConfigError("write failed for '" + p.string() + "'");
        files_.push_back(p);
    }

    const std::vector<fs::path>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
};

json reservoir_json(const ReservoirSpec& s) {
    return {{"omega0_rad_per_s", s.omega0()}, {"alpha", s.alpha()},          {"omega_c_rad_per_s", s.omega_c()},
            {"r", s.ratio()},                 {"kT_rad_per_s", s.kt()},       {"temperature_K", s.kelvin()}};
}

json regime_json(const RegimeReport& rep) {
    json j;
    j["classification"] = rep.classification == RegimeClass::LindbladType ? "LindbladType" : "NonLindbladType";
    j["first_violation_time_s"] = rep.first_violation_time ? json(*rep.first_violation_time) : json(nullptr);
    j["min_rate_value"] = rep.min_rate_value;
    j["tol"] = rep.tol;
    return j;
}

GaussianQcfState gaussian_initial(const InitialStateConfig& ic) {
    using K = InitialStateConfig::Kind;
    switch (ic.kind) {
        case K::Vacuum: return GaussianQcfState::vacuum();
        case K::Coherent: return GaussianQcfState::coherent(ic.mean_x, ic.mean_p);
        case K::Thermal: return GaussianQcfState::thermal(ic.nbar);
        case K::Gaussian: {
            GaussianQcfState s;
            s.mean = {ic.mean_x, ic.mean_p};
            s.cov << ic.cov[0], ic.cov[1], ic.cov[1], ic.cov[2];
            s.validate();
            return s;
        }
        case K::Fock: break;
    }
    throw ConfigError("initial_state.kind: not a Gaussian state");
}

double initial_mean_n(const InitialStateConfig& ic) {
    return ic.kind == InitialStateConfig::Kind::Fock ? double(ic.fock_k) : gaussian_initial(ic).mean_n();
}

int initial_support(const InitialStateConfig& ic) {
    return ic.kind == InitialStateConfig::Kind::Fock ? ic.fock_k + 1 : gaussian_support(gaussian_initial(ic));
}

// Smallest N with thermal tail < 1e-8 at the largest <n> reached, covering the initial state.
int choose_dimension(const ExperimentConfig& cfg, const CoefficientTable& table) {
    if (cfg.fock_dim) return *cfg.fock_dim;
    const double n0 = initial_mean_n(cfg.initial);
    double n_max = n0;
    for (std::size_t i = 0; i < table.size(); ++i)
        n_max = std::max(n_max, std::exp(-table.big_gamma()[i]) * (n0 + 0.5) - 0.5 + table.delta_gamma_int()[i]);
    const int n = std::max(thermal_truncation(std::max(n_max, 0.0), 1e-8), initial_support(cfg.initial)) + 10;
    if (n > 2000)
        throw NumericalError("Fock truncation would need N = " + std::to_string(n) +
                             " (peak <n> = " + csv::format(n_max) + "); use the qcf solver");
    return n;
}

FockDensityMatrix fock_initial(const InitialStateConfig& ic, int dim) {
    if (ic.kind == InitialStateConfig::Kind::Fock) {
        if (ic.fock_k >= dim) throw ConfigError("initial_state.k: exceeds fock.dim");
        return FockDensityMatrix::number_state(dim, ic.fock_k);
    }
    return gaussian_to_fock(gaussian_initial(ic), dim);
}

Eigen::VectorXcd pure_initial(const InitialStateConfig& ic, int dim) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    switch (ic.kind) {
        case InitialStateConfig::Kind::Vacuum: psi(0) = 1.0; break;
        case InitialStateConfig::Kind::Fock:
            if (ic.fock_k >= dim) throw ConfigError("initial_state.k: exceeds fock.dim");
            psi(ic.fock_k) = 1.0;
            break;
        case InitialStateConfig::Kind::Coherent: {
            psi = coherent_amplitudes(dim, {ic.mean_x / std::sqrt(2.0), ic.mean_p / std::sqrt(2.0)});
            if (1.0 - psi.squaredNorm() > 1e-10) throw TruncationError("coherent state does not fit in the basis", 0.0);
            psi.normalize();
            break;
        }
        default: throw ConfigError("initial_state.kind: mcwf needs a pure state");
    }
    return psi;
}

// Points with 0 < t <= t_fit (at least the first decade of grid points).
analysis::PowerLawFit short_time_fit(const std::vector<double>& t, const std::vector<double>& y, double t_fit) {
    std::vector<double> ts, ys;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] <= t_fit || ts.size() < 10) {
            ts.push_back(t[i]);
            ys.push_back(y[i]);
        }
    return analysis::fit_power_law(ts, ys);
}

json fit_json(const std::vector<double>& t, const std::vector<double>& y, double t_fit) {
    try {
        const auto f = short_time_fit(t, y, t_fit);
        return {{"exponent", f.exponent}, {"prefactor", f.prefactor}, {"r_squared", f.r_squared}, {"points", f.points}};
    } catch (const std::invalid_argument&) {
        return nullptr;
    }
}

std::vector<double> thinned(const std::vector<double>& grid, std::size_t max_points) {
    const std::size_t stride = std::max<std::size_t>(1, (grid.size() - 1 + max_points - 1) / max_points);
    std::vector<double> out;
    for (std::size_t i = stride; i < grid.size(); i += stride) out.push_back(grid[i]);
    if (out.empty() || out.back() != grid.back()) out.push_back(grid.back());
    return out;
}

std::string gnuplot(const std::string& title, const std::string& file, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<std::pair<int, std::string>>& columns) {
    std::ostringstream os;
    os << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set title '" << title << "'\n"
       << "set xlabel '" << xlabel << "'\n"
       << "set ylabel '" << ylabel << "'\n"
       << "set grid\n"
       << "plot ";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) os << ", \\\n     ";
        os << "'" << file << "' using 1:" << columns[i].first << " with lines title '" << columns[i].second << "'";
    }
    os << "\npause -1\n";
    return os.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, const RunOptions& opts) {
    OutputDir out(out_dir);
    const BuildOptions build{opts.threads};
    const ReservoirSpec spec = cfg.reservoir();

    json summary;
    summary["experiment"] = to_string(cfg.experiment);
    summary["reservoir"] = reservoir_json(spec);
    summary["run"] = {{"t_max_s", cfg.t_max}, {"n_steps", cfg.n_steps}};
    std::string plot;

    auto add_stationary = [&](json& j) {
        if (spec.alpha() == 0.0) {
            j["stationary_rates"] = nullptr;
            return;
        }
        const auto [d, g] = stationary_rates(spec);
        const double expected = spec.kt() > 0.0 ? 1.0 / std::tanh(spec.omega0() / (2.0 * spec.kt())) : 1.0;
        j["stationary_rates"] = {{"delta_inf", d}, {"gamma_inf", g}, {"ratio", d / g}, {"coth", expected}};
        j["detailed_balance_residual"] = (d / g) / expected - 1.0;
    };

    switch (cfg.experiment) {
        case ExperimentKind::Coefficients: {
            const auto table = build_coefficient_table(spec, cfg.t_max, cfg.n_steps, build);
            out.write("coefficients.csv", [&](std::ostream& os) { table.write_csv(os); });
            summary["regime"] = regime_json(classify_regime(table));
            add_stationary(summary);
            summary["short_time_fit"] = {{"delta", fit_json(table.grid(), table.delta(), 0.1 / spec.omega_c())},
                                         {"gamma", fit_json(table.grid(), table.gamma(), 0.1 / spec.omega_c())}};
            plot = gnuplot("coefficients", "coefficients.csv", "t [s]", "rate [1/s]",
                           {{2, "Delta"}, {3, "gamma"}, {4, "Pi"}});
            break;
        }
        case ExperimentKind::Heating: {
            const auto table = build_coefficient_table(spec, cfg.t_max, cfg.n_steps, build);
            std::vector<double> n;
            json solver;
            if (cfg.solver == "qcf") {
                const auto s0 = gaussian_initial(cfg.initial);
                for (double t : table.grid()) n.push_back(propagate_secular(s0, table, t).mean_n());
                solver = {{"name", "qcf"}};
            } else {
                const int dim = choose_dimension(cfg, table);
                FockOptions fo;
                fo.spill_threshold = cfg.spill_threshold;
                const auto run = integrate_secular(fock_initial(cfg.initial, dim), table, table.grid(), fo);
                n = heating_function(run.states);
                double min_eig = 0.0, max_trace = 0.0;
                for (const auto& a : run.audits) {
                    min_eig = std::min(min_eig, a.min_eigenvalue);
                    max_trace = std::max(max_trace, a.trace_error);
                }
                out.write("audits.csv", [&](std::ostream& os) { write_audit_csv(os, run.audits); });
                solver = {{"name", "fock"}, {"dim", dim}, {"min_eigenvalue", min_eig}, {"max_trace_error", max_trace}};
            }
            out.write("heating.csv", [&](std::ostream& os) {
                csv::write_header(os, {"t", "n_mean"});
                for (std::size_t i = 0; i < n.size(); ++i) csv::write_row(os, {table.grid()[i], n[i]});
            });
            const auto osc = analysis::max_then_lower_min(n);
            // rounding-level dips do not count as non-monotone
            const double scale = std::max(1.0, *std::max_element(n.begin(), n.end()));
            summary["solver"] = solver;
            summary["regime"] = regime_json(classify_regime(table));
            summary["heating"] = {
                {"n_final", n.back()},
                {"monotone_non_decreasing", analysis::monotone_non_decreasing(n, 1e-12 * scale)},
                {"oscillation", osc ? json{{"max_time_s", table.grid()[osc->first]},
                                           {"max_value", n[osc->first]},
                                           {"min_time_s", table.grid()[osc->second]},
                                           {"min_value", n[osc->second]}}
                                    : json(nullptr)},
                {"short_time_fit", fit_json(table.grid(), n, 0.1 / spec.omega_c())}};
            plot = gnuplot("heating function", "heating.csv", "t [s]", "<n>", {{2, "<n>"}});
            break;
        }
        case ExperimentKind::Qcf: {
            const PropagatorBundle bundle(build_coefficient_table(spec, cfg.t_max, cfg.n_steps, build));
            const auto s0 = gaussian_initial(cfg.initial);
            std::vector<GaussianQcfState> full, sec;
            for (double t : bundle.table().grid()) {
                full.push_back(propagate_full(s0, bundle, t));
                sec.push_back(propagate_secular(s0, bundle.table(), t));
            }
            out.write("qcf_full.csv", [&](std::ostream& os) { write_qcf_csv(os, full); });
            out.write("qcf_secular.csv", [&](std::ostream& os) { write_qcf_csv(os, sec); });
            const auto check = secular_observable_check(s0, bundle, bundle.table().grid());
            double n_scale = 0.0, a_scale = 0.0;
            for (double v : check.n_secular) n_scale = std::max(n_scale, std::abs(v));
            for (double v : check.anisotropy_full) a_scale = std::max(a_scale, std::abs(v));
            summary["regime"] = regime_json(classify_regime(bundle.table()));
            summary["secular_check"] = {{"max_n_discrepancy", check.max_n_discrepancy},
                                        {"n_scale", n_scale},
                                        {"max_anisotropy_discrepancy", check.max_anisotropy_discrepancy},
                                        {"anisotropy_scale", a_scale}};
            summary["final"] = {{"n_full", full.back().mean_n()}, {"n_secular", sec.back().mean_n()}};
            plot = gnuplot("QCF propagation", "qcf_full.csv", "t [s]", "value",
                           {{4, "cov_xx"}, {6, "cov_pp"}, {7, "<n>"}});
            break;
        }
        case ExperimentKind::Mcwf: {
            const auto table = build_coefficient_table(spec, cfg.t_max, cfg.n_steps, build);
            const int dim = choose_dimension(cfg, table);
            const auto grid = thinned(table.grid(), 200);
            McwfOptions mo;
            mo.threads = opts.threads;
            mo.keep_trajectories = cfg.keep_jump_logs;
            std::vector<Trajectory> kept;
            const auto est =
                run_ensemble(pure_initial(cfg.initial, dim), table, grid, cfg.n_traj, cfg.master_seed, mo, &kept);
            out.write("mcwf.csv", [&](std::ostream& os) { write_ensemble_csv(os, est); });
            if (cfg.keep_jump_logs > 0)
                out.write("jumps.csv", [&](std::ostream& os) { write_jump_log_csv(os, kept); });
            summary["mcwf"] = {{"dim", dim},
                               {"n_traj", est.n_traj},
                               {"n_final", est.n_mean.back()},
                               {"std_err_final", est.std_err.back()},
                               {"down_jumps_mean", est.down_jumps_mean.back()},
                               {"up_jumps_mean", est.up_jumps_mean.back()}};
            plot = gnuplot("MCWF ensemble", "mcwf.csv", "t [s]", "<n>", {{2, "<n>"}});
            break;
        }
        case ExperimentKind::Regimes: {
            json rows = json::array();
            std::vector<std::pair<double, RegimeReport>> reports;
            for (double r : cfg.r_values) {
                const ReservoirSpec s(spec.omega0(), spec.alpha(), r * spec.omega0(), spec.kt());
                const auto rep = classify_regime(build_coefficient_table(s, cfg.t_max, cfg.n_steps, build));
                reports.emplace_back(r, rep);
                json row = regime_json(rep);
                row["r"] = r;
                rows.push_back(row);
            }
            out.write("regimes.csv", [&](std::ostream& os) {
                os << "r,classification,first_violation_time,min_rate_value\n";
                for (const auto& [r, rep] : reports)
                    os << csv::format(r) << ','
                       << (rep.classification == RegimeClass::LindbladType ? "LindbladType" : "NonLindbladType") << ','
                       << (rep.first_violation_time ? csv::format(*rep.first_violation_time) : std::string("")) << ','
                       << csv::format(rep.min_rate_value) << '\n';
            });
            summary["regimes"] = rows;
            plot = "set datafile separator ','\nset key autotitle columnhead\nset logscale x\n"
                   "set xlabel 'r = omega_c/omega0'\nset ylabel 'min rate [1/s]'\n"
                   "plot 'regimes.csv' using 1:4 with linespoints title 'min(Delta-gamma, Delta+gamma)'\npause -1\n";
            break;
        }
        case ExperimentKind::RwaCompare: {
            const auto rwa = rwa_rates(spec, cfg.t_max, cfg.n_steps, build);
            const auto table = build_coefficient_table(spec, cfg.t_max, cfg.n_steps, build);
            const auto n_rwa = rwa.heating();
            const auto n_sec = secular_heating(table);
            out.write("rwa.csv", [&](std::ostream& os) {
                csv::write_header(os, {"t", "gamma_down", "gamma_up", "n_rwa", "n_secular", "ratio"});
                for (std::size_t i = 0; i < n_rwa.size(); ++i)
                    csv::write_row(os, {rwa.grid[i], rwa.gamma_down[i], rwa.gamma_up[i], n_rwa[i], n_sec[i],
                                        n_sec[i] != 0.0 ? n_rwa[i] / n_sec[i] : 0.0});
            });
            const double ratio = n_sec.size() > 1 && n_sec[1] != 0.0 ? n_rwa[1] / n_sec[1] : 0.0;
            summary["rwa"] = {{"short_time_ratio", ratio},
                              {"short_time_time_s", rwa.grid.size() > 1 ? rwa.grid[1] : 0.0},
                              {"n_rwa_final", n_rwa.back()},
                              {"n_secular_final", n_sec.back()},
                              {"fit_rwa", fit_json(rwa.grid, n_rwa, 0.1 / spec.omega_c())},
                              {"fit_secular", fit_json(rwa.grid, n_sec, 0.1 / spec.omega_c())}};
            plot = gnuplot("RWA vs secular heating", "rwa.csv", "t [s]", "<n>", {{4, "n_rwa"}, {5, "n_secular"}});
            break;
        }
    }

    json prov;
    prov["config_sha256"] = sha256_hex(cfg.source_text);
    prov["version"] = QBM_VERSION;
    if (cfg.experiment == ExperimentKind::Mcwf) {
        prov["master_seed"] = cfg.master_seed;
        prov["n_traj"] = cfg.n_traj;
    }
    prov["units"] = {{"time", "s"}, {"rates", "1/s"}, {"frequencies", "rad/s"}};
    summary["provenance"] = prov;

    out.write("summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
    if (cfg.write_gnuplot) out.write("plot.gp", [&](std::ostream& os) { os << plot; });
    return {out.files()};
}

}  // namespace qbm
