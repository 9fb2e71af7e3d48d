#include "liemidpoint/runner.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <limits>
#include <optional>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "liemidpoint/format.hpp"
#include "liemidpoint/noise.hpp"
#include "liemidpoint/version.hpp"

namespace lmp {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

RunConfig effective_config(RunConfig cfg, const RunOverrides& ov) {
    if (ov.seed) {
        cfg.seed = *ov.seed;
        cfg.canonical["run"]["seed"] = cfg.seed;
    }
    if (ov.out_dir) {
        cfg.output.directory = *ov.out_dir;
        cfg.canonical["output"]["directory"] = cfg.output.directory;
    }
    if (ov.strict_guard) {
        cfg.guard = GuardMode::strict;
        cfg.canonical["solver"]["guard"] = "strict";
    }
    return cfg;
}

StepControls model_controls(const RunConfig& cfg) {
    StepControls c = cfg.controls();
    if (cfg.model == ModelKind::rigid_body) {
        c.drift_bound = cfg.rigid_body().inverse_norm();
    } else {
        c.drift_bound = cfg.heavy_top().inverse_norm();
    }
    c.noise_bound = noise_gradient_bound(cfg.noise, norm(cfg.mu0));
    if (!cfg.noise.empty()) c.level = default_level(cfg.dt);
    return c;
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json rot_json(const Rotation& r) {
    const Mat3& m = r.matrix();
    json rows = json::array();
    for (int i = 0; i < 3; ++i) rows.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
    return rows;
}

json drift_json(const DriftReport& report) {
    json arr = json::array();
    for (const auto& e : report.entries) {
        arr.push_back({{"name", e.name},
                       {"initial", e.initial},
                       {"max_abs_deviation", e.max_abs_deviation},
                       {"step_of_max", e.step_of_max}});
    }
    return arr;
}

json stats_json(const SolverStats& s) {
    return {{"steps", s.steps},
            {"mean_iterations", s.mean_iterations()},
            {"max_iterations", s.max_iterations},
            {"max_residual", s.max_residual},
            {"max_stage_ratio", s.max_stage_ratio},
            {"guard_violations", s.guard_violations},
            {"max_guard_quantity", s.max_guard_quantity}};
}

void write_header(std::ostream& os, const RunConfig& cfg) {
    os << "# liemidpoint " << kVersion << '\n';
    os << "# config_hash=" << cfg.hash() << '\n';
    os << "# seed=" << cfg.seed << '\n';
}

/// Per-record diagnostic, evaluated on trajectory index i.
struct DiagnosticColumn {
    std::string name;
    std::function<double(const Trajectory&, std::size_t)> eval;
};

std::vector<std::string> default_diagnostics(const RunConfig& cfg) {
    if (cfg.model == ModelKind::rigid_body) {
        return {"orbit_radius", "energy", "pi_x", "pi_y", "pi_z"};
    }
    return {"energy", "p_phi", "p_psi", "gamma_norm_sq", "pi_dot_gamma", "theta"};
}

std::vector<DiagnosticColumn> make_columns(const RunConfig& cfg,
                                           const std::vector<std::string>& names) {
    std::vector<DiagnosticColumn> cols;
    const bool heavy = cfg.model == ModelKind::heavy_top;
    const RigidBody body = heavy ? RigidBody(cfg.inertia) : cfg.rigid_body();
    const std::optional<HeavyTop> top =
        heavy ? std::optional<HeavyTop>(cfg.heavy_top()) : std::nullopt;

    for (const auto& name : names) {
        DiagnosticColumn col;
        col.name = name;
        if (name == "orbit_radius") {
            col.eval = [](const Trajectory& tr, std::size_t i) { return orbit_radius(tr.mu[i]); };
        } else if (name == "energy") {
            if (heavy) {
                col.eval = [t = *top](const Trajectory& tr, std::size_t i) {
                    return t.energy(tr.mu[i], tr.gamma[i]);
                };
            } else {
                col.eval = [body](const Trajectory& tr, std::size_t i) {
                    return body.energy(tr.mu[i]);
                };
            }
        } else if (name == "pi_x" || name == "pi_y" || name == "pi_z") {
            const int comp = name.back() == 'x' ? 0 : (name.back() == 'y' ? 1 : 2);
            col.eval = [comp](const Trajectory& tr, std::size_t i) {
                const Vec3 pi = spatial_momentum(tr.g[i], tr.mu[i]);
                return comp == 0 ? pi.x : (comp == 1 ? pi.y : pi.z);
            };
        } else if (name == "p_phi") {
            col.eval = [](const Trajectory& tr, std::size_t i) {
                return heavytop_momentum_map(tr.g[i], tr.mu[i]);
            };
        } else if (name == "p_psi") {
            col.eval = [](const Trajectory& tr, std::size_t i) { return tr.mu[i].z; };
        } else if (name == "gamma_norm_sq" && heavy) {
            col.eval = [](const Trajectory& tr, std::size_t i) {
                return dot(tr.gamma[i], tr.gamma[i]);
            };
        } else if (name == "pi_dot_gamma" && heavy) {
            col.eval = [](const Trajectory& tr, std::size_t i) {
                return dot(tr.mu[i], tr.gamma[i]);
            };
        } else if (name == "theta") {
            col.eval = [](const Trajectory& tr, std::size_t i) {
                try {
                    return euler_from_rotation(tr.g[i]).theta;
                } catch (const DomainError&) {
                    return std::numeric_limits<double>::quiet_NaN();
                }
            };
        } else if (name == "rotation_defect") {
            col.eval = [](const Trajectory& tr, std::size_t i) {
                return orthogonality_defect(tr.g[i].matrix());
            };
        } else if (name == "alpha_consistency" && heavy) {
            col.eval = [alpha0 = cfg.alpha0](const Trajectory& tr, std::size_t i) {
                return norm(tr.gamma[i] - tr.g[i].matrix().transposed() * alpha0);
            };
        } else {
            throw ConfigError(
                "unknown diagnostic '" + name +
                "' (known: orbit_radius energy pi_x pi_y pi_z p_phi p_psi gamma_norm_sq "
                "pi_dot_gamma theta rotation_defect alpha_consistency)");
        }
        cols.push_back(std::move(col));
    }
    return cols;
}

void write_trajectory_csv(std::ostream& os, const RunConfig& cfg, const Trajectory& traj) {
    write_header(os, cfg);
    const std::vector<std::string> names =
        cfg.output.diagnostics.empty() ? default_diagnostics(cfg) : cfg.output.diagnostics;
    const std::vector<DiagnosticColumn> cols = make_columns(cfg, names);

    os << "step,t,mu_x,mu_y,mu_z";
    os << ",r00,r01,r02,r10,r11,r12,r20,r21,r22";
    const bool heavy = cfg.model == ModelKind::heavy_top;
    if (heavy) os << ",gamma_x,gamma_y,gamma_z";
    for (const auto& c : cols) os << ',' << c.name;
    os << '\n';

    for (std::size_t i = 0; i < traj.mu.size(); ++i) {
        os << traj.step[i] << ',' << format_double(traj.t[i]);
        os << ',' << format_double(traj.mu[i].x) << ',' << format_double(traj.mu[i].y) << ','
           << format_double(traj.mu[i].z);
        const Mat3& m = traj.g[i].matrix();
        for (double v : m.a) os << ',' << format_double(v);
        if (heavy) {
            os << ',' << format_double(traj.gamma[i].x) << ',' << format_double(traj.gamma[i].y)
               << ',' << format_double(traj.gamma[i].z);
        }
        for (const auto& c : cols) os << ',' << format_double(c.eval(traj, i));
        os << '\n';
    }
}

json summary_json(const RunConfig& cfg, const Trajectory& traj, const DriftReport& drift,
                  double runtime_seconds) {
    json j;
    j["artifact_version"] = kVersion;
    j["config_hash"] = cfg.hash();
    j["seed"] = cfg.seed;
    j["model"] = cfg.model == ModelKind::rigid_body ? "rigid_body" : "heavy_top";
    j["dt"] = cfg.dt;
    j["t_final"] = cfg.t_final;
    j["steps"] = cfg.steps();
    j["final"]["mu"] = vec_json(traj.mu.back());
    j["final"]["rotation"] = rot_json(traj.g.back());
    if (!traj.gamma.empty()) j["final"]["gamma"] = vec_json(traj.gamma.back());
    j["drift"] = drift_json(drift);
    j["solver"] = stats_json(traj.stats);
    j["completed"] = traj.completed;
    if (traj.error) j["error"] = *traj.error;
    j["runtime_seconds"] = runtime_seconds;
    return j;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
    const fs::path dir(cfg.output.directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");
    return dir;
}

std::string member_file_name(const std::string& stem, int member) {
    const auto dotpos = stem.rfind('.');
    std::ostringstream os;
    os << stem.substr(0, dotpos == std::string::npos ? stem.size() : dotpos) << "_m";
    os.width(3);
    os.fill('0');
    os << member;
    os << (dotpos == std::string::npos ? ".csv" : stem.substr(dotpos));
    return os.str();
}

} // namespace

Trajectory integrate_trajectory(const RunConfig& cfg, std::uint64_t seed, int member,
                                std::int64_t stride) {
    const std::int64_t steps = cfg.steps();
    const bool heavy = cfg.model == ModelKind::heavy_top;
    const std::size_t channels = cfg.noise.size();

    if (!cfg.noise.empty() && cfg.dt >= 1.0) {
        throw ConfigError("stochastic runs need dt < 1 (truncation level is undefined otherwise)");
    }

    StepControls controls = model_controls(cfg);
    std::optional<WienerGrid> grid;
    if (!cfg.noise.empty()) {
        grid = WienerGrid::generate(rng::derive_stream(seed, static_cast<std::uint64_t>(member)),
                                    steps, static_cast<int>(channels), cfg.dt);
    }

    Trajectory traj;
    Vec3 mu = cfg.mu0;
    Rotation g = cfg.initial_rotation();
    Vec3 gamma = cfg.initial_gamma();

    auto record = [&](std::int64_t k) {
        traj.step.push_back(k);
        traj.t.push_back(static_cast<double>(k) * cfg.dt);
        traj.mu.push_back(mu);
        traj.g.push_back(g);
        if (heavy) traj.gamma.push_back(gamma);
    };
    record(0);

    ReducedGradient rb_drift;
    std::vector<ReducedGradient> rb_noise;
    AdvectedHamiltonian ht_drift;
    std::vector<AdvectedHamiltonian> ht_noise;
    if (heavy) {
        const HeavyTop top = cfg.heavy_top();
        ht_drift = advected_drift(top);
        ht_noise = advected_noise(top, cfg.noise);
    } else {
        rb_drift = reduced_drift(cfg.rigid_body());
        rb_noise = reduced_noise(cfg.noise);
    }

    std::vector<double> dw(channels, 0.0);
    for (std::int64_t k = 0; k < steps; ++k) {
        for (std::size_t i = 0; i < channels; ++i) {
            dw[i] = truncate(grid->at(k, static_cast<int>(i)), controls.level);
        }
        try {
            if (heavy) {
                const AdvectedStages stages =
                    solve_stages_advected(ht_drift, ht_noise, mu, gamma, cfg.dt, dw, controls);
                traj.stats.absorb(stages.stages);
                std::tie(mu, gamma) = step_advected(stages, cfg.dt);
                g = reconstruct(g, stages.stages, cfg.dt).second;
            } else {
                const StageSolution stages =
                    solve_stages_reduced(rb_drift, rb_noise, mu, cfg.dt, dw, controls);
                traj.stats.absorb(stages);
                mu = step_reduced(stages, cfg.dt);
                g = reconstruct(g, stages, cfg.dt).second;
            }
        } catch (const SolverError& e) {
            traj.completed = false;
            std::ostringstream os;
            os << "step " << k + 1 << ": " << e.what();
            traj.error = os.str();
            return traj;
        }
        if ((k + 1) % stride == 0 || k + 1 == steps) record(k + 1);
    }
    return traj;
}

DriftReport trajectory_drift(const RunConfig& cfg, const Trajectory& traj) {
    const std::size_t n = traj.mu.size();
    std::vector<std::pair<std::string, std::vector<double>>> series;
    auto make = [&](const std::string& name, auto&& f) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = f(i);
        series.emplace_back(name, std::move(v));
    };

    if (cfg.model == ModelKind::rigid_body) {
        const RigidBody body = cfg.rigid_body();
        make("orbit_radius", [&](std::size_t i) { return orbit_radius(traj.mu[i]); });
        make("energy", [&](std::size_t i) { return body.energy(traj.mu[i]); });
        const Vec3 pi0 = spatial_momentum(traj.g[0], traj.mu[0]);
        make("spatial_momentum", [&](std::size_t i) {
            return norm(spatial_momentum(traj.g[i], traj.mu[i]) - pi0);
        });
    } else {
        const HeavyTop top = cfg.heavy_top();
        make("energy", [&](std::size_t i) { return top.energy(traj.mu[i], traj.gamma[i]); });
        make("p_phi", [&](std::size_t i) { return heavytop_momentum_map(traj.g[i], traj.mu[i]); });
        make("p_psi", [&](std::size_t i) { return traj.mu[i].z; });
        make("gamma_norm_sq", [&](std::size_t i) { return dot(traj.gamma[i], traj.gamma[i]); });
        make("pi_dot_gamma", [&](std::size_t i) { return dot(traj.mu[i], traj.gamma[i]); });
        make("alpha_consistency", [&](std::size_t i) {
            return norm(traj.gamma[i] - traj.g[i].matrix().transposed() * cfg.alpha0);
        });
    }
    make("rotation_defect",
         [&](std::size_t i) { return orthogonality_defect(traj.g[i].matrix()); });
    return drift_report(series);
}

SimulateResult run_simulate(const RunConfig& raw, const RunOverrides& ov) {
    const RunConfig cfg = effective_config(raw, ov);
    const fs::path dir = prepare_out_dir(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    const Trajectory traj = integrate_trajectory(cfg, cfg.seed, 0, cfg.output.stride);
    const DriftReport drift = trajectory_drift(cfg, traj);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    SimulateResult result;
    result.drift = drift;
    result.stats = traj.stats;
    result.trajectory_path = dir / cfg.output.trajectory;
    result.summary_path = dir / cfg.output.summary;

    std::ostringstream csv;
    write_trajectory_csv(csv, cfg, traj);
    write_file(result.trajectory_path, csv.str());
    write_file(result.summary_path, summary_json(cfg, traj, drift, runtime).dump(2) + "\n");

    if (!traj.completed) {
        throw SolverError("simulate: " + *traj.error + " (partial output written)", 0.0, 0);
    }
    return result;
}

EnsembleResult run_ensemble(const RunConfig& raw, const RunOverrides& ov) {
    const RunConfig cfg = effective_config(raw, ov);
    if (!cfg.ensemble) throw ConfigError("ensemble: config has no [ensemble] block");
    const int members = cfg.ensemble->size;
    const fs::path dir = prepare_out_dir(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<double> snapshot_times = cfg.ensemble->snapshot_times;
    if (snapshot_times.empty()) {
        for (double t : {5.0, 20.0, 40.0, 50.0}) {
            if (t <= cfg.t_final + 1e-12) snapshot_times.push_back(t);
        }
    }
    std::vector<std::int64_t> snapshot_steps;
    for (double t : snapshot_times) {
        const auto k = static_cast<std::int64_t>(std::llround(t / cfg.dt));
        if (k < 0 || k > cfg.steps()) {
            throw ConfigError("ensemble: snapshot time outside the run horizon");
        }
        snapshot_steps.push_back(k);
    }

    struct MemberOutcome {
        bool ok = false;
        std::string error;
        std::vector<Vec3> snapshots;
        json summary;
    };
    std::vector<MemberOutcome> outcomes(static_cast<std::size_t>(members));

    auto run_member = [&](int m) {
        // Every member records each step so snapshots exist at exact indices.
        const Trajectory traj = integrate_trajectory(cfg, cfg.seed, m, 1);
        MemberOutcome& out = outcomes[static_cast<std::size_t>(m)];
        const DriftReport drift = trajectory_drift(cfg, traj);

        std::ostringstream csv;
        write_trajectory_csv(csv, cfg, traj);
        write_file(dir / member_file_name(cfg.output.trajectory, m), csv.str());

        out.summary = {{"member", m},
                       {"completed", traj.completed},
                       {"final_mu", vec_json(traj.mu.back())},
                       {"drift", drift_json(drift)},
                       {"solver", stats_json(traj.stats)}};
        if (traj.error) out.summary["error"] = *traj.error;
        if (!traj.completed) {
            out.ok = false;
            out.error = *traj.error;
            return;
        }
        for (const auto k : snapshot_steps) {
            out.snapshots.push_back(traj.mu[static_cast<std::size_t>(k)]);
        }
        out.ok = true;
    };

    const int workers = std::max(1, std::min(ov.workers, members));
    if (workers == 1) {
        for (int m = 0; m < members; ++m) run_member(m);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const int m = next.fetch_add(1);
                    if (m >= members) return;
                    try {
                        run_member(m);
                    } catch (const std::exception& e) {
                        outcomes[static_cast<std::size_t>(m)].ok = false;
                        outcomes[static_cast<std::size_t>(m)].error = e.what();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    EnsembleResult result;
    result.members = members;
    result.snapshot_path = dir / "snapshots.csv";
    result.summary_path = dir / cfg.output.summary;

    std::ostringstream snap;
    write_header(snap, cfg);
    snap << "member,t,mu_x,mu_y,mu_z\n";
    for (int m = 0; m < members; ++m) {
        const MemberOutcome& out = outcomes[static_cast<std::size_t>(m)];
        if (!out.ok) {
            result.failed += 1;
            result.failures.push_back("member " + std::to_string(m) + ": " + out.error);
            continue;
        }
        for (std::size_t si = 0; si < snapshot_steps.size(); ++si) {
            snap << m << ',' << format_double(snapshot_times[si]) << ','
                 << format_double(out.snapshots[si].x) << ',' << format_double(out.snapshots[si].y)
                 << ',' << format_double(out.snapshots[si].z) << '\n';
        }
    }
    write_file(result.snapshot_path, snap.str());

    json summary;
    summary["artifact_version"] = kVersion;
    summary["config_hash"] = cfg.hash();
    summary["seed"] = cfg.seed;
    summary["members"] = members;
    summary["failed"] = result.failed;
    summary["snapshot_times"] = snapshot_times;
    summary["member_reports"] = json::array();
    for (const auto& out : outcomes) summary["member_reports"].push_back(out.summary);
    summary["runtime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(result.summary_path, summary.dump(2) + "\n");
    return result;
}

ConvergeResult run_converge(const RunConfig& raw, const RunOverrides& ov) {
    const RunConfig cfg = effective_config(raw, ov);
    if (!cfg.convergence) throw ConfigError("converge: config has no [convergence] block");
    const fs::path dir = prepare_out_dir(cfg);

    ConvergenceSetup setup;
    setup.dt_fine = cfg.convergence->dt_fine;
    setup.factors = cfg.convergence->factors;
    setup.samples = cfg.convergence->samples;
    setup.horizon = cfg.convergence->horizon;
    setup.seed = cfg.seed;
    setup.workers = ov.workers;
    setup.controls = cfg.controls();
    // Convergence studies run with the strict guard unless explicitly disabled.
    if (setup.controls.guard == GuardMode::advise) setup.controls.guard = GuardMode::strict;

    ConvergeResult result;
    if (cfg.model == ModelKind::rigid_body) {
        result.table = coupled_errors(cfg.rigid_body(), cfg.noise, cfg.mu0, setup);
    } else {
        result.table =
            coupled_errors(cfg.heavy_top(), cfg.noise, cfg.mu0, cfg.initial_gamma(), setup);
    }
    result.fit = estimate_order(result.table);

    result.table_path = dir / "error_table.csv";
    std::ostringstream csv;
    write_header(csv, cfg);
    write_csv(result.table, csv);
    write_file(result.table_path, csv.str());

    json report;
    report["artifact_version"] = kVersion;
    report["config_hash"] = cfg.hash();
    report["seed"] = cfg.seed;
    report["dt_reference"] = result.table.dt_reference;
    report["horizon"] = result.table.horizon;
    report["rows"] = json::array();
    for (const auto& row : result.table.rows) {
        report["rows"].push_back(
            {{"dt", row.dt}, {"rms_error", row.rms_error}, {"samples", row.samples}});
    }
    report["fit"] = {{"slope", result.fit.slope},
                     {"intercept", result.fit.intercept},
                     {"r_squared", result.fit.r_squared},
                     {"rows_used", result.fit.rows_used},
                     {"rows_excluded", result.fit.rows_excluded}};
    if (cfg.noise.size() > 1) {
        report["caveat"] =
            "reference is the same scheme at dt_fine; with more than one noise channel the "
            "measured slope orders the errors but does not certify the strong rate against "
            "the exact solution";
    }
    result.report_path = dir / "convergence.json";
    write_file(result.report_path, report.dump(2) + "\n");
    return result;
}

CheckResult run_check(const RunConfig& raw, const RunOverrides& ov) {
    RunConfig cfg = effective_config(raw, ov);
    // A guard violation must surface as a failure here, not as a warning.
    if (cfg.guard == GuardMode::advise) cfg.guard = GuardMode::strict;

    const Trajectory traj = integrate_trajectory(cfg, cfg.seed, 0, 1);
    if (!traj.completed) {
        throw SolverError("check: " + *traj.error, 0.0, 0);
    }
    const DriftReport drift = trajectory_drift(cfg, traj);
    const bool deterministic = cfg.noise.empty();

    CheckResult result;
    auto assert_drift = [&](const std::string& name, double tol) {
        const DriftEntry* e = drift.find(name);
        if (e == nullptr) return;
        std::ostringstream os;
        os << (e->max_abs_deviation <= tol ? "PASS" : "FAIL") << ' ' << name << " drift "
           << e->max_abs_deviation << " (tolerance " << tol << ")";
        result.lines.push_back(os.str());
        if (e->max_abs_deviation > tol) {
            result.passed = false;
            result.failures.push_back(os.str());
        }
    };

    if (cfg.model == ModelKind::rigid_body) {
        assert_drift("orbit_radius", cfg.check.orbit_radius);
        assert_drift("spatial_momentum", cfg.check.spatial_momentum);
        if (deterministic) assert_drift("energy", cfg.check.energy_rigid);
    } else {
        assert_drift("p_phi", cfg.check.p_phi);
        assert_drift("gamma_norm_sq", cfg.check.gamma_norm_sq);
        assert_drift("pi_dot_gamma", cfg.check.pi_dot_gamma);
        const Mat3& in = cfg.inertia;
        const bool symmetric_top = std::fabs(in(0, 0) - in(1, 1)) <= 1e-12 &&
                                   std::fabs(in(0, 1)) + std::fabs(in(0, 2)) + std::fabs(in(1, 2)) <=
                                       1e-12 &&
                                   cfg.lever.x == 0.0 && cfg.lever.y == 0.0;
        bool pi_z_preserved = symmetric_top;
        for (const auto& n : cfg.noise) pi_z_preserved = pi_z_preserved && n.preserves_pi_z();
        if (pi_z_preserved) {
            assert_drift("p_psi", deterministic ? cfg.check.p_psi : cfg.check.p_psi_stochastic);
        }
        if (deterministic) assert_drift("energy", cfg.check.energy_heavy_top);
    }
    return result;
}

} // namespace lmp
