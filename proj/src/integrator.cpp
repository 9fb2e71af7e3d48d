#include "liemidpoint/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lmp {

namespace {

// Extra Picard/Newton sweeps allowed after the tolerance is first reached,
// while the residual still strictly improves. The discrete conservation laws
// hold only up to the accepted defect, so the solvers land on the numerical
// fixed point instead of stopping right at tol.
constexpr int kPolishSweeps = 8;

double guard_quantity(const StepControls& c, double mu_norm, double dt) {
    return c.drift_bound * mu_norm * dt + c.noise_bound * c.level.d;
}

void require_positive_dt(double dt, const char* who) {
    if (!(dt > 0.0)) {
        std::ostringstream os;
        os << who << ": dt must be positive (the truncation level is undefined at dt = 0)";
        throw DomainError(os.str());
    }
}

// Shared Picard core for the reduced, advected, and general stage systems.
// `velocity` evaluates xi from the stage midpoint using the context of the
// previous sweep; `refresh` moves the context (alpha~ or g~) to the current
// xi; `force` returns the dt-scaled force vector entering the first
// dual-transport equation, or nullptr for the force-free reduced system.
struct StageProblem {
    Vec3 mu_k;
    double dt;
    std::function<Vec3(const Vec3& midpoint)> velocity;
    std::function<void(const Vec3& xi)> refresh;
    std::function<Vec3(const Vec3& midpoint)> force;
};

StageSolution solve_stage_problem(const StageProblem& prob, const StepControls& c) {
    const double dt = prob.dt;
    const double mu_norm = norm(prob.mu_k);
    const double scale = std::max(mu_norm, std::numeric_limits<double>::min());

    StageSolution out;
    out.guard_quantity = guard_quantity(c, mu_norm, dt);
    if (c.guard != GuardMode::off && out.guard_quantity > 0.5) {
        if (c.guard == GuardMode::strict) {
            std::ostringstream os;
            os << "stage solve: solvability guard " << out.guard_quantity
               << " exceeds 1/2; reduce dt";
            throw GuardError(os.str(), out.guard_quantity);
        }
        out.guard_ok = false;
    }

    Vec3 a = prob.mu_k;
    Vec3 b = prob.mu_k;
    out.max_stage_ratio = 1.0;

    double best_res = std::numeric_limits<double>::infinity();
    bool reached = false;
    int polish = 0;

    for (int iter = 1; iter <= c.max_iter; ++iter) {
        const Vec3 mid = 0.5 * (a + b);
        const Vec3 xi = prob.velocity(mid);
        if (prob.refresh) prob.refresh(xi);
        const Vec3 fvec = prob.force ? prob.force(mid) : Vec3{};

        // Defects of the two dual-transport equations at the current iterate.
        const Vec3 d1 = dcayinv_dual(xi, dt, a) - prob.mu_k;
        const Vec3 d2 = dcayinv_dual(xi, dt, b) - (dcayinv_dual(-xi, dt, a) - fvec);
        const double res = std::max(norm_inf(d1), norm_inf(d2)) / scale;

        out.iterations = iter;
        out.max_stage_ratio = std::max(out.max_stage_ratio, std::max(norm(a), norm(b)) / scale);

        if (res <= c.tol) {
            if (res < best_res) {
                best_res = res;
                out.mu1 = a;
                out.mu2 = b;
                out.xi = xi;
                out.xi_tilde = xi;
                out.residual = res;
            } else {
                break; // stalled at the numerical fixed point
            }
            reached = true;
            if (++polish > kPolishSweeps) break;
        }

        const Vec3 an = prob.mu_k - (0.5 * dt) * cross(xi, a) + (0.25 * dt * dt * dot(xi, a)) * xi;
        Vec3 bn = prob.mu_k - dt * (cross(xi, a) + 0.5 * cross(xi, b)) +
                  (0.25 * dt * dt * dot(xi, b)) * xi;
        if (prob.force) bn -= fvec;
        a = an;
        b = bn;
    }

    if (!reached) {
        const Vec3 mid = 0.5 * (a + b);
        const Vec3 xi = prob.velocity(mid);
        const Vec3 fvec = prob.force ? prob.force(mid) : Vec3{};
        const Vec3 d1 = dcayinv_dual(xi, dt, a) - prob.mu_k;
        const Vec3 d2 = dcayinv_dual(xi, dt, b) - (dcayinv_dual(-xi, dt, a) - fvec);
        const double res = std::max(norm_inf(d1), norm_inf(d2)) / scale;
        std::ostringstream os;
        os << "stage solve: no convergence after " << c.max_iter << " sweeps, residual " << res;
        throw SolverError(os.str(), res, c.max_iter);
    }
    return out;
}

std::vector<double> solve_dense(std::vector<double> m, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(m[r * n + col]) > std::fabs(m[pivot * n + col])) pivot = r;
        }
        if (std::fabs(m[pivot * n + col]) < 1e-300) {
            throw SolverError("midpoint_step_vs: singular Newton system", 0.0, 0);
        }
        if (pivot != col) {
            for (std::size_t cidx = 0; cidx < n; ++cidx) std::swap(m[pivot * n + cidx], m[col * n + cidx]);
            std::swap(rhs[pivot], rhs[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r * n + col] / m[col * n + col];
            for (std::size_t cidx = col; cidx < n; ++cidx) m[r * n + cidx] -= f * m[col * n + cidx];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = rhs[ri];
        for (std::size_t cidx = ri + 1; cidx < n; ++cidx) s -= m[ri * n + cidx] * x[cidx];
        x[ri] = s / m[ri * n + ri];
    }
    return x;
}

} // namespace

FixedPointResult fixed_point(
    const std::function<std::vector<double>(std::span<const double>)>& map,
    std::span<const double> x0, const StepControls& controls,
    const std::function<double(std::span<const double>)>& residual,
    const std::function<void(std::span<const double>)>& observer) {
    std::vector<double> x(x0.begin(), x0.end());
    if (observer) observer(x);

    FixedPointResult best;
    best.residual = std::numeric_limits<double>::infinity();
    bool reached = false;
    int polish = 0;
    double last_res = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= controls.max_iter; ++iter) {
        std::vector<double> xn = map(x);
        if (xn.size() != x.size()) {
            throw DomainError("fixed_point: map changed the iterate dimension");
        }
        double res;
        if (residual) {
            res = residual(xn);
        } else {
            res = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                res = std::max(res, std::fabs(xn[i] - x[i]));
            }
        }
        x = std::move(xn);
        if (observer) observer(x);
        last_res = res;

        if (res <= controls.tol) {
            if (res < best.residual) {
                best.x = x;
                best.residual = res;
                best.iterations = iter;
            } else {
                break;
            }
            reached = true;
            if (++polish > kPolishSweeps) break;
        }
    }

    if (!reached) {
        std::ostringstream os;
        os << "fixed_point: no convergence after " << controls.max_iter
           << " iterations, residual " << last_res;
        throw SolverError(os.str(), last_res, controls.max_iter);
    }
    return best;
}

CanonicalState midpoint_step_vs(const CanonicalHamiltonian& h,
                                std::span<const CanonicalHamiltonian> noise,
                                const CanonicalState& state, double dt,
                                std::span<const double> dW, const StepControls& controls) {
    require_positive_dt(dt, "midpoint_step_vs");
    if (state.q.size() != state.p.size()) {
        throw DomainError("midpoint_step_vs: q and p dimensions differ");
    }
    if (noise.size() != dW.size()) {
        throw DomainError("midpoint_step_vs: one increment per noise Hamiltonian required");
    }
    const std::size_t n = state.q.size();
    const std::size_t dim = 2 * n;

    double scale = 1.0;
    for (double v : state.q) scale = std::max(scale, std::fabs(v));
    for (double v : state.p) scale = std::max(scale, std::fabs(v));

    // Residual of the implicit midpoint system at candidate endpoint x = (q', p').
    auto residual_at = [&](const std::vector<double>& x, std::vector<double>& r) {
        std::vector<double> qm(n), pm(n);
        for (std::size_t i = 0; i < n; ++i) {
            qm[i] = 0.5 * (x[i] + state.q[i]);
            pm[i] = 0.5 * (x[n + i] + state.p[i]);
        }
        std::vector<double> fq = h.grad_p(qm, pm);  // dq/dt contribution
        std::vector<double> fp = h.grad_q(qm, pm);  // -dp/dt contribution
        if (fq.size() != n || fp.size() != n) {
            throw DomainError("midpoint_step_vs: gradient dimension mismatch");
        }
        for (std::size_t i = 0; i < n; ++i) {
            fq[i] *= dt;
            fp[i] *= dt;
        }
        for (std::size_t k = 0; k < noise.size(); ++k) {
            const std::vector<double> gq = noise[k].grad_p(qm, pm);
            const std::vector<double> gp = noise[k].grad_q(qm, pm);
            for (std::size_t i = 0; i < n; ++i) {
                fq[i] += gq[i] * dW[k];
                fp[i] += gp[i] * dW[k];
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = x[i] - state.q[i] - fq[i];
            r[n + i] = x[n + i] - state.p[i] + fp[i];
        }
    };

    std::vector<double> x(dim);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = state.q[i];
        x[n + i] = state.p[i];
    }

    std::vector<double> r(dim), rp(dim);
    double best_res = std::numeric_limits<double>::infinity();
    std::vector<double> best_x = x;
    bool reached = false;
    int polish = 0;
    double res = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= controls.max_iter; ++iter) {
        residual_at(x, r);
        res = 0.0;
        for (double v : r) res = std::max(res, std::fabs(v));
        res /= scale;

        if (res <= controls.tol) {
            if (res < best_res) {
                best_res = res;
                best_x = x;
            } else {
                break;
            }
            reached = true;
            if (++polish > kPolishSweeps) break;
        }

        // Forward-difference Jacobian; the system is small in every use here.
        std::vector<double> jac(dim * dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const double step = std::sqrt(std::numeric_limits<double>::epsilon()) *
                                std::max(1.0, std::fabs(x[j]));
            const double saved = x[j];
            x[j] = saved + step;
            residual_at(x, rp);
            x[j] = saved;
            for (std::size_t i = 0; i < dim; ++i) {
                jac[i * dim + j] = (rp[i] - r[i]) / step;
            }
        }
        std::vector<double> rhs(dim);
        for (std::size_t i = 0; i < dim; ++i) rhs[i] = -r[i];
        const std::vector<double> delta = solve_dense(std::move(jac), std::move(rhs));
        for (std::size_t i = 0; i < dim; ++i) x[i] += delta[i];
    }

    if (!reached) {
        std::ostringstream os;
        os << "midpoint_step_vs: no convergence after " << controls.max_iter
           << " iterations, residual " << res;
        throw SolverError(os.str(), res, controls.max_iter);
    }

    CanonicalState next;
    next.q.assign(best_x.begin(), best_x.begin() + static_cast<long>(n));
    next.p.assign(best_x.begin() + static_cast<long>(n), best_x.end());
    return next;
}

StageSolution solve_stages_reduced(const ReducedGradient& grad_h,
                                   std::span<const ReducedGradient> grad_hi, const Vec3& mu_k,
                                   double dt, std::span<const double> dW,
                                   const StepControls& controls) {
    require_positive_dt(dt, "solve_stages_reduced");
    if (grad_hi.size() != dW.size()) {
        throw DomainError("solve_stages_reduced: one increment per noise Hamiltonian required");
    }
    StageProblem prob;
    prob.mu_k = mu_k;
    prob.dt = dt;
    prob.velocity = [&](const Vec3& mid) {
        Vec3 xi = 0.5 * grad_h(mid);
        for (std::size_t i = 0; i < grad_hi.size(); ++i) {
            xi += (0.5 * dW[i] / dt) * grad_hi[i](mid);
        }
        return xi;
    };
    return solve_stage_problem(prob, controls);
}

Vec3 step_reduced(const StageSolution& stages, double dt) {
    return dcayinv_dual(-stages.xi, dt, stages.mu2);
}

AdvectedStages solve_stages_advected(const AdvectedHamiltonian& h,
                                     std::span<const AdvectedHamiltonian> noise, const Vec3& mu_k,
                                     const Vec3& alpha_k, double dt, std::span<const double> dW,
                                     const StepControls& controls) {
    require_positive_dt(dt, "solve_stages_advected");
    if (noise.size() != dW.size()) {
        throw DomainError("solve_stages_advected: one increment per noise Hamiltonian required");
    }
    Vec3 alpha_tilde = alpha_k;

    StageProblem prob;
    prob.mu_k = mu_k;
    prob.dt = dt;
    prob.velocity = [&](const Vec3& mid) {
        Vec3 xi = 0.5 * h.grad_mu(mid, alpha_tilde);
        for (std::size_t i = 0; i < noise.size(); ++i) {
            xi += (0.5 * dW[i] / dt) * noise[i].grad_mu(mid, alpha_tilde);
        }
        return xi;
    };
    prob.refresh = [&](const Vec3& xi) {
        alpha_tilde = cayley(dt * xi).transposed() * alpha_k;
    };
    prob.force = [&](const Vec3& mid) {
        Vec3 f = dt * h.grad_alpha(mid, alpha_tilde);
        for (std::size_t i = 0; i < noise.size(); ++i) {
            f += dW[i] * noise[i].grad_alpha(mid, alpha_tilde);
        }
        return diamond(f, alpha_tilde);
    };

    AdvectedStages out;
    out.stages = solve_stage_problem(prob, controls);
    // alpha~ of the accepted sweep; recompute from the accepted xi so the pair
    // is consistent even if a later rejected sweep moved the shared state.
    out.alpha_tilde = cayley(dt * out.stages.xi).transposed() * alpha_k;
    return out;
}

std::pair<Vec3, Vec3> step_advected(const AdvectedStages& adv, double dt) {
    const Vec3 mu_next = dcayinv_dual(-adv.stages.xi, dt, adv.stages.mu2);
    const Vec3 alpha_next = cayley(dt * adv.stages.xi).transposed() * adv.alpha_tilde;
    return {mu_next, alpha_next};
}

std::pair<Rotation, Rotation> reconstruct(const Rotation& g_k, const StageSolution& stages,
                                          double dt) {
    const Rotation g_tilde = composed(g_k, cayley(dt * stages.xi_tilde));
    const Rotation g_next = composed(g_tilde, cayley(dt * stages.xi));
    return {g_tilde, g_next};
}

GeneralStepResult step_general(const GeneralHamiltonian& h,
                               std::span<const GeneralHamiltonian> noise, const PhaseState& state,
                               double dt, std::span<const double> dW,
                               const StepControls& controls) {
    require_positive_dt(dt, "step_general");
    if (noise.size() != dW.size()) {
        throw DomainError("step_general: one increment per noise Hamiltonian required");
    }
    if (!h.grad_mu) throw DomainError("step_general: drift grad_mu callback is required");

    Rotation g_tilde = state.g;
    const bool any_g_force = static_cast<bool>(h.grad_g) ||
                             std::any_of(noise.begin(), noise.end(),
                                         [](const GeneralHamiltonian& n) { return static_cast<bool>(n.grad_g); });

    StageProblem prob;
    prob.mu_k = state.mu;
    prob.dt = dt;
    prob.velocity = [&](const Vec3& mid) {
        Vec3 xi = 0.5 * h.grad_mu(g_tilde, mid);
        for (std::size_t i = 0; i < noise.size(); ++i) {
            xi += (0.5 * dW[i] / dt) * noise[i].grad_mu(g_tilde, mid);
        }
        return xi;
    };
    prob.refresh = [&](const Vec3& xi) { g_tilde = composed(state.g, cayley(dt * xi)); };
    if (any_g_force) {
        prob.force = [&](const Vec3& mid) {
            Vec3 f = h.grad_g ? dt * h.grad_g(g_tilde, mid) : Vec3{};
            for (std::size_t i = 0; i < noise.size(); ++i) {
                if (noise[i].grad_g) f += dW[i] * noise[i].grad_g(g_tilde, mid);
            }
            return f;
        };
    }

    GeneralStepResult out;
    out.stages = solve_stage_problem(prob, controls);
    auto [gt, gn] = reconstruct(state.g, out.stages, dt);
    out.g_tilde = gt;
    out.state.g = gn;
    out.state.mu = step_reduced(out.stages, dt);
    return out;
}

void SolverStats::absorb(const StageSolution& s) {
    ++steps;
    total_iterations += s.iterations;
    max_iterations = std::max(max_iterations, s.iterations);
    max_residual = std::max(max_residual, s.residual);
    max_stage_ratio = std::max(max_stage_ratio, s.max_stage_ratio);
    if (!s.guard_ok) ++guard_violations;
    max_guard_quantity = std::max(max_guard_quantity, s.guard_quantity);
}

double SolverStats::mean_iterations() const {
    return steps == 0 ? 0.0 : static_cast<double>(total_iterations) / static_cast<double>(steps);
}

} // namespace lmp
