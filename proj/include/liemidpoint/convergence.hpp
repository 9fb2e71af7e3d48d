#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "liemidpoint/integrator.hpp"
#include "liemidpoint/models.hpp"
#include "liemidpoint/noise.hpp"

namespace lmp {

struct ErrorRow {
    double dt = 0.0;
    double rms_error = 0.0;
    int samples = 0;
};

/// Root-mean-square of sup_k |Pi_k - Pi^ref(t_k)| against the fine-step
/// reference, per coarse step size.
struct ErrorTable {
    double dt_reference = 0.0;
    double horizon = 0.0;
    std::vector<ErrorRow> rows;
};

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int rows_used = 0;
    int rows_excluded = 0;
};

struct ConvergenceSetup {
    double dt_fine = 0.0;
    std::vector<std::int64_t> factors;
    double horizon = 0.0;
    int samples = 0;
    std::uint64_t seed = 0;
    StepControls controls{};
    int workers = 1;
};

/// Coupled strong-error measurement for the reduced rigid-body scheme. For
/// each sample one fine Wiener grid is drawn; the reference trajectory is the
/// scheme itself at dt_fine, and each factor m re-runs the scheme on the
/// m-fold coarsened grid (same underlying path). Every run truncates its
/// increments at its own level D_dt. Sup-norm distances are taken at shared
/// grid points and averaged in rms over samples with a fixed pairwise
/// reduction, so results are independent of the worker count.
///
/// For several noise channels this self-convergence measurement shares the
/// scheme's own bias with the reference; it orders the errors but does not
/// certify an absolute rate (see estimate_order's caveat field in the CLI
/// report).
ErrorTable coupled_errors(const RigidBody& body, std::vector<NoiseHamiltonian> noise,
                          const Vec3& mu0, const ConvergenceSetup& setup);

/// Heavy-top variant; distances are measured on the momentum component.
ErrorTable coupled_errors(const HeavyTop& top, std::vector<NoiseHamiltonian> noise,
                          const Vec3& mu0, const Vec3& gamma0, const ConvergenceSetup& setup);

/// Ordinary least squares of log2(rms_error) against log2(dt). Rows with a
/// zero error are excluded (with a count in the result); fewer than two
/// usable rows is an error.
OrderFit estimate_order(const ErrorTable& table);

void write_csv(const ErrorTable& table, std::ostream& os);

} // namespace lmp
