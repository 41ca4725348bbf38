// qbm_cli.cpp: command line front end for the experiment runner

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qbm/errors.hpp"
#include "qbm/experiment.hpp"
#include "qbm/parallel.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kNumerical = 2, kRegime = 3 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-Markovian quantum Brownian motion simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(QBM_VERSION));

    std::string config_path;
    std::string out_dir;
    bool validate_only = false;
    unsigned threads = 0;

    const char* names[] = {"coefficients", "heating", "qcf", "mcwf", "regimes", "rwa-compare"};
    const char* help[] = {"master-equation coefficient table and regime classification",
                          "heating function <n>(t) (qcf or fock solver)",
                          "full and secular Gaussian QCF propagation",
                          "Monte Carlo wave-function ensemble",
                          "Lindblad / non-Lindblad classification sweep over r",
                          "pre-trace RWA vs secular short-time heating"};
    for (int i = 0; i < 6; ++i) {
        auto* sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("--config", config_path, "experiment config (INI)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: output.directory from the config)");
        sub->add_flag("--validate-only", validate_only, "parse and validate the config, then exit");
        sub->add_option("--threads", threads, "worker thread cap (default: QBM_THREADS or all cores)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        const auto kind = qbm::parse_experiment_kind(sub);
        const auto cfg = qbm::load_config(config_path, kind);
        if (validate_only) {
            std::cout << "config OK: " << sub << " (sha256 " << qbm::sha256_hex(cfg.source_text) << ")\n";
            return kOk;
        }
        const std::filesystem::path dir = out_dir.empty() ? cfg.output_directory : out_dir;
        qbm::RunOptions opts;
        opts.threads = qbm::resolve_thread_count(threads);
        const auto result = qbm::run_experiment(cfg, dir, opts);
        for (const auto& f : result.files) std::cout << f.string() << '\n';
        return kOk;
    } catch (const qbm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const qbm::RegimeError& e) {
        std::cerr << "regime error: " << e.what() << '\n';
        return kRegime;
    } catch (const qbm::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    }
}
