#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "liemidpoint/config.hpp"
#include "liemidpoint/convergence.hpp"
#include "liemidpoint/diagnostics.hpp"
#include "liemidpoint/integrator.hpp"

namespace lmp {

struct RunOverrides {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    bool strict_guard = false;
};

/// One integrated trajectory, recorded every `stride` steps (plus step 0 and
/// the final step).
struct Trajectory {
    std::vector<std::int64_t> step;
    std::vector<double> t;
    std::vector<Vec3> mu;
    std::vector<Rotation> g;
    std::vector<Vec3> gamma; // empty for the rigid body
    SolverStats stats;
    bool completed = true;                  // false after a mid-run solver failure
    std::optional<std::string> error;       // the failure, when completed is false
};

/// Integrate one trajectory of the configured model. `member` selects the
/// per-trajectory increment stream; simulate uses member 0.
Trajectory integrate_trajectory(const RunConfig& cfg, std::uint64_t seed, int member,
                                std::int64_t stride);

/// Conservation monitors for a trajectory (always the full builtin set for
/// the model; CSV column selection is separate).
DriftReport trajectory_drift(const RunConfig& cfg, const Trajectory& traj);

struct SimulateResult {
    std::filesystem::path trajectory_path;
    std::filesystem::path summary_path;
    DriftReport drift;
    SolverStats stats;
};

SimulateResult run_simulate(const RunConfig& cfg, const RunOverrides& ov);

struct EnsembleResult {
    int members = 0;
    int failed = 0;
    std::filesystem::path snapshot_path;
    std::filesystem::path summary_path;
    std::vector<std::string> failures;
};

EnsembleResult run_ensemble(const RunConfig& cfg, const RunOverrides& ov);

struct ConvergeResult {
    ErrorTable table;
    OrderFit fit;
    std::filesystem::path table_path;
    std::filesystem::path report_path;
};

ConvergeResult run_converge(const RunConfig& cfg, const RunOverrides& ov);

struct CheckResult {
    bool passed = true;
    std::vector<std::string> lines;    // one human-readable line per invariant
    std::vector<std::string> failures; // subset that violated its tolerance
};

CheckResult run_check(const RunConfig& cfg, const RunOverrides& ov);

} // namespace lmp
