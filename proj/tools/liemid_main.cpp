#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "liemidpoint/runner.hpp"
#include "liemidpoint/version.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kSolverError = 2, kInvariantViolation = 3 };

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool strict_guard = false;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Run configuration (TOML)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "Output directory (overrides the config)");
    cmd->add_option("--seed", args.seed, "Seed override")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--workers", args.workers, "Concurrent ensemble members / samples")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--strict-guard", args.strict_guard,
                  "Treat solvability-guard violations as errors");
}

lmp::RunOverrides overrides(const CommonArgs& args) {
    lmp::RunOverrides ov;
    if (!args.out_dir.empty()) ov.out_dir = args.out_dir;
    if (args.seed_set) ov.seed = args.seed;
    ov.workers = args.workers;
    ov.strict_guard = args.strict_guard;
    return ov;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic variational midpoint integrators on SO(3)"};
    app.set_version_flag("--version", std::string(lmp::kVersion));
    app.require_subcommand(1);

    CommonArgs sim_args, ens_args, conv_args, check_args;
    CLI::App* sim = app.add_subcommand("simulate", "Integrate one trajectory and write outputs");
    add_common(sim, sim_args);
    CLI::App* ens = app.add_subcommand("ensemble", "Integrate an ensemble of trajectories");
    add_common(ens, ens_args);
    CLI::App* conv = app.add_subcommand("converge", "Coupled strong-convergence study");
    add_common(conv, conv_args);
    CLI::App* chk = app.add_subcommand("check", "Run and audit the conservation laws");
    add_common(chk, check_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const auto cfg = lmp::RunConfig::from_file(sim_args.config_path);
            const auto result = lmp::run_simulate(cfg, overrides(sim_args));
            std::cout << "trajectory: " << result.trajectory_path.string() << '\n';
            std::cout << "summary:    " << result.summary_path.string() << '\n';
            for (const auto& e : result.drift.entries) {
                std::cout << "drift " << e.name << ": " << e.max_abs_deviation << '\n';
            }
        } else if (ens->parsed()) {
            const auto cfg = lmp::RunConfig::from_file(ens_args.config_path);
            const auto result = lmp::run_ensemble(cfg, overrides(ens_args));
            std::cout << "members:   " << result.members << " (" << result.failed << " failed)\n";
            std::cout << "snapshots: " << result.snapshot_path.string() << '\n';
            std::cout << "summary:   " << result.summary_path.string() << '\n';
            for (const auto& f : result.failures) std::cerr << f << '\n';
            if (result.failed == result.members) return kSolverError;
        } else if (conv->parsed()) {
            const auto cfg = lmp::RunConfig::from_file(conv_args.config_path);
            const auto result = lmp::run_converge(cfg, overrides(conv_args));
            for (const auto& row : result.table.rows) {
                std::cout << "dt " << row.dt << ": rms " << row.rms_error << '\n';
            }
            std::cout << "slope " << result.fit.slope << " (r^2 " << result.fit.r_squared << ")\n";
            std::cout << "table:  " << result.table_path.string() << '\n';
            std::cout << "report: " << result.report_path.string() << '\n';
        } else if (chk->parsed()) {
            const auto cfg = lmp::RunConfig::from_file(check_args.config_path);
            const auto result = lmp::run_check(cfg, overrides(check_args));
            for (const auto& line : result.lines) std::cout << line << '\n';
            if (!result.passed) {
                std::cerr << result.failures.size() << " invariant(s) violated\n";
                return kInvariantViolation;
            }
        }
    } catch (const lmp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const lmp::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolverError;
    } catch (const lmp::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kInvariantViolation;
    } catch (const lmp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}
