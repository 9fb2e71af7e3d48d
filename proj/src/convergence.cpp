#include "liemidpoint/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include "liemidpoint/format.hpp"
#include "liemidpoint/reduce.hpp"

namespace lmp {

namespace {

// Momentum path of one scheme run over a grid, increments clipped at the
// grid's own truncation level.
using PathRunner = std::function<std::vector<Vec3>(const WienerGrid&, const StepControls&)>;

std::vector<double> truncated_row(const WienerGrid& grid, std::int64_t k, TruncationLevel level) {
    std::vector<double> dw(static_cast<std::size_t>(grid.channels()));
    for (int i = 0; i < grid.channels(); ++i) dw[static_cast<std::size_t>(i)] = truncate(grid.at(k, i), level);
    return dw;
}

ErrorTable run_coupled(const PathRunner& runner, int channels, double mu0_norm,
                       double drift_bound, double noise_bound,
                       const ConvergenceSetup& setup) {
    if (!(setup.dt_fine > 0.0)) throw ConfigError("coupled_errors: dt_fine must be positive");
    if (setup.samples < 1) throw ConfigError("coupled_errors: at least one sample required");
    if (setup.factors.empty()) throw ConfigError("coupled_errors: factor list is empty");

    const double steps_real = setup.horizon / setup.dt_fine;
    const auto fine_steps = static_cast<std::int64_t>(std::llround(steps_real));
    if (fine_steps < 1 || std::fabs(steps_real - static_cast<double>(fine_steps)) > 1e-9) {
        throw ConfigError("coupled_errors: horizon must be an integer multiple of dt_fine");
    }
    for (const auto m : setup.factors) {
        if (m < 1 || fine_steps % m != 0) {
            std::ostringstream os;
            os << "coupled_errors: factor " << m << " does not divide the " << fine_steps
               << " fine steps";
            throw ConfigError(os.str());
        }
    }

    // Solvability at the coarsest step decides feasibility of the whole ladder.
    if (setup.controls.guard != GuardMode::off) {
        const auto coarsest = *std::max_element(setup.factors.begin(), setup.factors.end());
        const double dt_c = setup.dt_fine * static_cast<double>(coarsest);
        const double q = drift_bound * mu0_norm * dt_c + noise_bound * default_level(dt_c).d;
        if (q > 0.5) {
            std::ostringstream os;
            os << "coupled_errors: guard quantity " << q << " exceeds 1/2 at dt = " << dt_c
               << "; use smaller coarsening factors";
            throw ConfigError(os.str());
        }
    }

    const std::size_t n_factors = setup.factors.size();
    std::vector<std::vector<double>> sup_err(static_cast<std::size_t>(setup.samples),
                                             std::vector<double>(n_factors, 0.0));

    auto run_sample = [&](int s) {
        const std::uint64_t sample_seed = rng::derive_stream(setup.seed, static_cast<std::uint64_t>(s));
        const WienerGrid fine = WienerGrid::generate(sample_seed, fine_steps, channels, setup.dt_fine);
        const std::vector<Vec3> ref = runner(fine, setup.controls);
        for (std::size_t fi = 0; fi < n_factors; ++fi) {
            const std::int64_t m = setup.factors[fi];
            const WienerGrid coarse = fine.coarsen(m);
            const std::vector<Vec3> path = runner(coarse, setup.controls);
            double sup = 0.0;
            for (std::size_t j = 0; j < path.size(); ++j) {
                sup = std::max(sup, norm(path[j] - ref[j * static_cast<std::size_t>(m)]));
            }
            sup_err[static_cast<std::size_t>(s)][fi] = sup;
        }
    };

    const int workers = std::max(1, std::min(setup.workers, setup.samples));
    if (workers == 1) {
        for (int s = 0; s < setup.samples; ++s) run_sample(s);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const int s = next.fetch_add(1);
                    if (s >= setup.samples) return;
                    try {
                        run_sample(s);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    ErrorTable table;
    table.dt_reference = setup.dt_fine;
    table.horizon = setup.horizon;
    std::vector<double> squares(static_cast<std::size_t>(setup.samples));
    for (std::size_t fi = 0; fi < n_factors; ++fi) {
        for (int s = 0; s < setup.samples; ++s) {
            const double e = sup_err[static_cast<std::size_t>(s)][fi];
            squares[static_cast<std::size_t>(s)] = e * e;
        }
        ErrorRow row;
        row.dt = setup.dt_fine * static_cast<double>(setup.factors[fi]);
        row.rms_error = std::sqrt(pairwise_sum(squares) / static_cast<double>(setup.samples));
        row.samples = setup.samples;
        table.rows.push_back(row);
    }
    return table;
}

} // namespace

ErrorTable coupled_errors(const RigidBody& body, std::vector<NoiseHamiltonian> specs,
                          const Vec3& mu0, const ConvergenceSetup& setup) {
    const ReducedGradient drift = reduced_drift(body);
    const std::vector<ReducedGradient> noise = reduced_noise(specs);
    const int channels = std::max<std::size_t>(specs.size(), 1);

    PathRunner runner = [drift, noise, mu0, n_noise = specs.size()](const WienerGrid& grid,
                                                                    const StepControls& base) {
        StepControls controls = base;
        controls.level = default_level(grid.dt());
        std::vector<Vec3> path;
        path.reserve(static_cast<std::size_t>(grid.steps()) + 1);
        path.push_back(mu0);
        Vec3 mu = mu0;
        for (std::int64_t k = 0; k < grid.steps(); ++k) {
            std::vector<double> dw = truncated_row(grid, k, controls.level);
            dw.resize(n_noise);
            const StageSolution stages =
                solve_stages_reduced(drift, noise, mu, grid.dt(), dw, controls);
            mu = step_reduced(stages, grid.dt());
            path.push_back(mu);
        }
        return path;
    };

    ConvergenceSetup s = setup;
    s.controls.drift_bound = body.inverse_norm();
    s.controls.noise_bound = noise_gradient_bound(specs, norm(mu0));
    return run_coupled(runner, channels, norm(mu0), s.controls.drift_bound,
                       s.controls.noise_bound, s);
}

ErrorTable coupled_errors(const HeavyTop& top, std::vector<NoiseHamiltonian> specs,
                          const Vec3& mu0, const Vec3& gamma0, const ConvergenceSetup& setup) {
    const AdvectedHamiltonian drift = advected_drift(top);
    const std::vector<AdvectedHamiltonian> noise = advected_noise(top, specs);
    const int channels = std::max<std::size_t>(specs.size(), 1);

    PathRunner runner = [drift, noise, mu0, gamma0, n_noise = specs.size()](
                            const WienerGrid& grid, const StepControls& base) {
        StepControls controls = base;
        controls.level = default_level(grid.dt());
        std::vector<Vec3> path;
        path.reserve(static_cast<std::size_t>(grid.steps()) + 1);
        path.push_back(mu0);
        Vec3 mu = mu0;
        Vec3 gamma = gamma0;
        for (std::int64_t k = 0; k < grid.steps(); ++k) {
            std::vector<double> dw = truncated_row(grid, k, controls.level);
            dw.resize(n_noise);
            const AdvectedStages stages =
                solve_stages_advected(drift, noise, mu, gamma, grid.dt(), dw, controls);
            std::tie(mu, gamma) = step_advected(stages, grid.dt());
            path.push_back(mu);
        }
        return path;
    };

    ConvergenceSetup s = setup;
    s.controls.drift_bound = top.inverse_norm();
    s.controls.noise_bound = noise_gradient_bound(specs, norm(mu0));
    return run_coupled(runner, channels, norm(mu0), s.controls.drift_bound,
                       s.controls.noise_bound, s);
}

OrderFit estimate_order(const ErrorTable& table) {
    std::vector<double> xs, ys;
    OrderFit fit;
    for (const auto& row : table.rows) {
        if (row.rms_error > 0.0) {
            xs.push_back(std::log2(row.dt));
            ys.push_back(std::log2(row.rms_error));
        } else {
            ++fit.rows_excluded;
        }
    }
    if (xs.size() < 2) {
        throw DomainError("estimate_order: need at least two rows with positive errors");
    }
    const auto n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw DomainError("estimate_order: all rows share the same dt");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += e * e;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.rows_used = static_cast<int>(xs.size());
    return fit;
}

void write_csv(const ErrorTable& table, std::ostream& os) {
    os << "dt,rms_error,samples\n";
    for (const auto& row : table.rows) {
        os << format_double(row.dt) << ',' << format_double(row.rms_error) << ',' << row.samples
           << '\n';
    }
}

} // namespace lmp
