// Command-line front end: admissible, run, sweep, verify.
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kslog/config.hpp"
#include "kslog/harness.hpp"

namespace {

int with_config(const std::string& path, const std::function<int(const kslog::ExperimentConfig&)>& body) {
    kslog::ExperimentConfig cfg;
    try {
        cfg = kslog::load_config(path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kslog::exit_usage;
    }
    return body(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized logarithmic Keller-Segel solver and weak-form verifier"};
    app.require_subcommand(1);

    auto* adm = app.add_subcommand("admissible", "Classify (chi, a[, b]) and compare chi with known thresholds");
    double chi = 0.0, a = 0.0, b = 0.0;
    adm->add_option("--chi", chi, "Chemotactic sensitivity")->required();
    adm->add_option("--a", a, "Energy exponent a")->required();
    auto* b_opt = adm->add_option("--b", b, "Energy exponent b");

    std::string config_path;
    bool force = false;
    auto* run = app.add_subcommand("run", "Run one experiment and write its artifacts");
    run->add_option("config", config_path, "Configuration file")->required();
    run->add_flag("--force", force, "Run even if the parameters are not admissible");

    auto* sweep = app.add_subcommand("sweep", "Run a k or chi sweep");
    sweep->add_option("config", config_path, "Configuration file")->required();
    sweep->add_flag("--force", force, "Run inadmissible sweep points instead of marking them aborted");

    std::string dir;
    auto* verify = app.add_subcommand("verify", "Re-run the weak-form checks on existing artifacts");
    verify->add_option("config", config_path, "Configuration file")->required();
    verify->add_option("--dir", dir, "Artifact directory (default: output.dir of the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kslog::exit_usage;
    }

    if (*adm) {
        std::optional<double> bb;
        if (*b_opt) bb = b;
        return kslog::cmd_admissible(chi, a, bb, std::cout, std::cerr);
    }
    if (*run)
        return with_config(config_path, [&](const auto& cfg) { return kslog::cmd_run(cfg, force, std::cout, std::cerr); });
    if (*sweep)
        return with_config(config_path, [&](const auto& cfg) { return kslog::cmd_sweep(cfg, force, std::cout, std::cerr); });
    return with_config(config_path, [&](const auto& cfg) {
        return kslog::cmd_verify(cfg, dir.empty() ? cfg.output_dir : dir, std::cout, std::cerr);
    });
}
