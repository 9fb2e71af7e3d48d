#pragma once

#include <functional>
#include <span>
#include <vector>

#include "liemidpoint/lie.hpp"
#include "liemidpoint/noise.hpp"

namespace lmp {

enum class GuardMode { off, advise, strict };

/// Policy for the implicit stage solves.
///
/// The solvability guard implements the step-size condition
///   ||I^{-1}|| |mu_k| dt + L_noise D_dt <= 1/2,
/// under which the stage map is a contraction on the ball of radius 2 |mu_k|
/// and plain Picard iteration is guaranteed to converge. The bound constants
/// are supplied by the caller (they depend on the model, not the scheme);
/// with both at zero the guard is vacuous.
struct StepControls {
    double tol = 1e-12; ///< max-norm stage-equation defect, scaled by |mu_k|
    int max_iter = 100;
    GuardMode guard = GuardMode::advise;
    double drift_bound = 0.0;  ///< operator norm of the inverse inertia
    double noise_bound = 0.0;  ///< bound on the noise Hamiltonians' mu-gradients
    TruncationLevel level{};   ///< truncation level entering the guard quantity
};

/// Converged per-step unknowns of the implicit midpoint stage equations.
/// xi_tilde and xi solve identical equations in this scheme and always carry
/// the same value; both are kept since they parameterize the two half-interval
/// group increments.
struct StageSolution {
    Vec3 mu1{};      ///< first stage momentum
    Vec3 mu2{};      ///< second stage momentum
    Vec3 xi_tilde{}; ///< velocity of the step into the midpoint configuration
    Vec3 xi{};       ///< velocity of the step out of the midpoint configuration
    double residual = 0.0;
    int iterations = 0;
    double max_stage_ratio = 0.0; ///< max(|mu1|,|mu2|)/|mu_k| over all iterates
    bool guard_ok = true;
    double guard_quantity = 0.0;
};

struct PhaseState {
    Rotation g;
    Vec3 mu;
};

struct AdvectedState {
    Rotation g;
    Vec3 mu;
    Vec3 alpha;
};

struct CanonicalState {
    std::vector<double> q;
    std::vector<double> p;
};

/// Gradient of a reduced Hamiltonian h(mu).
using ReducedGradient = std::function<Vec3(const Vec3& mu)>;

/// Gradients of a Hamiltonian h(mu, alpha) with an advected parameter.
struct AdvectedHamiltonian {
    std::function<Vec3(const Vec3& mu, const Vec3& alpha)> grad_mu;
    std::function<Vec3(const Vec3& mu, const Vec3& alpha)> grad_alpha;
};

/// Gradients of a left-trivialized Hamiltonian h(g, mu). grad_g returns the
/// left-trivialized derivative g^{-1} dh/dg as a momentum-typed force; leave
/// it empty when the Hamiltonian does not depend on g.
struct GeneralHamiltonian {
    std::function<Vec3(const Rotation& g_tilde, const Vec3& mu)> grad_mu;
    std::function<Vec3(const Rotation& g_tilde, const Vec3& mu)> grad_g;
};

/// Gradients of a canonical Hamiltonian H(q, p) on a vector space.
struct CanonicalHamiltonian {
    std::function<std::vector<double>(std::span<const double> q, std::span<const double> p)> grad_q;
    std::function<std::vector<double>(std::span<const double> q, std::span<const double> p)> grad_p;
};

struct FixedPointResult {
    std::vector<double> x;
    double residual = 0.0;
    int iterations = 0;
};

/// Picard iteration x_{n+1} = F(x_n) until the residual drops to
/// controls.tol, plus a short polishing phase that keeps sweeping while the
/// residual strictly improves (a handful of extra sweeps that land on the
/// numerical fixed point; the discrete conservation laws hold to the accepted
/// residual, so stopping right at tol would leak it into the invariants).
///
/// `residual` defaults to the max-norm difference of consecutive iterates.
/// `observer` is invoked on every iterate, including the initial guess.
/// Throws SolverError when tol is not reached within max_iter sweeps.
FixedPointResult fixed_point(
    const std::function<std::vector<double>(std::span<const double>)>& map,
    std::span<const double> x0, const StepControls& controls,
    const std::function<double(std::span<const double>)>& residual = {},
    const std::function<void(std::span<const double>)>& observer = {});

/// One step of the stochastic midpoint method on a vector space:
///   (q' - q)/dt =  dH/dp(m) + sum_i dH_i/dp(m) dW_i/dt
///   (p' - p)/dt = -dH/dq(m) - sum_i dH_i/dq(m) dW_i/dt
/// with m the arithmetic midpoint of the two endpoint states. The implicit
/// system is solved by a damped-free Newton iteration with a finite-difference
/// Jacobian (the midpoint map is not a contraction for large dt, so Picard
/// is not an option here).
CanonicalState midpoint_step_vs(const CanonicalHamiltonian& h,
                                std::span<const CanonicalHamiltonian> noise,
                                const CanonicalState& state, double dt,
                                std::span<const double> dW, const StepControls& controls);

/// Solve the reduced (Lie-Poisson) stage equations for one step:
///   [d_{dt xi} tau^{-1}]* mu1            = mu_k
///   [d_{dt xi} tau^{-1}]* mu2            = [d_{-dt xi} tau^{-1}]* mu1
///   xi = 1/2 grad_h(P) + 1/2 sum_i grad_hi(P) dW_i/dt,  P = (mu1 + mu2)/2
/// by Picard iteration on the equivalent explicit fixed-point map, starting
/// from mu1 = mu2 = mu_k.
StageSolution solve_stages_reduced(const ReducedGradient& grad_h,
                                   std::span<const ReducedGradient> grad_hi, const Vec3& mu_k,
                                   double dt, std::span<const double> dW,
                                   const StepControls& controls);

/// Momentum update mu_{k+1} = [d_{-dt xi} tau^{-1}]* mu2 from accepted stages.
/// Preserves |mu| to the accepted residual (coadjoint-orbit preservation).
Vec3 step_reduced(const StageSolution& stages, double dt);

struct AdvectedStages {
    StageSolution stages;
    Vec3 alpha_tilde{}; ///< midpoint advected parameter, tau(dt xi)^T alpha_k
};

/// Stage equations with an advected parameter. The first dual-transport
/// equation gains the force (dt dh/dalpha + sum_i dh_i/dalpha dW_i) x alpha~,
/// and alpha~ = tau(dt xi)^T alpha_k is refreshed from the current xi iterate
/// on every Picard sweep, since xi is itself part of the unknowns.
AdvectedStages solve_stages_advected(const AdvectedHamiltonian& h,
                                     std::span<const AdvectedHamiltonian> noise, const Vec3& mu_k,
                                     const Vec3& alpha_k, double dt, std::span<const double> dW,
                                     const StepControls& controls);

/// (mu_{k+1}, alpha_{k+1}) from accepted advected stages:
/// mu as in step_reduced, alpha_{k+1} = tau(dt xi)^T alpha~.
std::pair<Vec3, Vec3> step_advected(const AdvectedStages& stages, double dt);

/// Midpoint configurations: g~ = g_k tau(dt xi~), g_{k+1} = g~ tau(dt xi).
std::pair<Rotation, Rotation> reconstruct(const Rotation& g_k, const StageSolution& stages,
                                          double dt);

struct GeneralStepResult {
    PhaseState state;
    Rotation g_tilde;
    StageSolution stages;
};

/// One step of the general left-trivialized scheme on SO(3). Hamiltonian
/// gradients are evaluated at the midpoint configuration g~, which depends on
/// the unknown xi~ and is therefore refreshed per Picard sweep. When every
/// grad_g callback is empty or returns zero, the arithmetic reduces to
/// solve_stages_reduced + step_reduced exactly (bit for bit).
GeneralStepResult step_general(const GeneralHamiltonian& h,
                               std::span<const GeneralHamiltonian> noise, const PhaseState& state,
                               double dt, std::span<const double> dW,
                               const StepControls& controls);

/// Running tallies of stage-solver behavior over a trajectory.
struct SolverStats {
    long long steps = 0;
    long long total_iterations = 0;
    int max_iterations = 0;
    double max_residual = 0.0;
    double max_stage_ratio = 0.0;
    long long guard_violations = 0;
    double max_guard_quantity = 0.0;

    void absorb(const StageSolution& s);
    double mean_iterations() const;
};

} // namespace lmp
