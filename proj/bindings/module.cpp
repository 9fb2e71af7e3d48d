#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>

#include "liemidpoint/convergence.hpp"
#include "liemidpoint/diagnostics.hpp"
#include "liemidpoint/integrator.hpp"
#include "liemidpoint/lie.hpp"
#include "liemidpoint/models.hpp"
#include "liemidpoint/noise.hpp"
#include "liemidpoint/version.hpp"

namespace py = pybind11;

namespace {

using V3 = std::array<double, 3>;
using M3 = std::array<std::array<double, 3>, 3>;

lmp::Vec3 vec(const V3& a) { return {a[0], a[1], a[2]}; }
V3 arr(const lmp::Vec3& v) { return {v.x, v.y, v.z}; }

lmp::Mat3 mat(const M3& rows) {
    lmp::Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = rows[r][c];
    return m;
}

M3 rows(const lmp::Mat3& m) {
    M3 out{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out[r][c] = m(r, c);
    return out;
}

lmp::StepControls controls_from(double tol, int max_iter, const std::string& guard, double dt,
                                bool stochastic) {
    lmp::StepControls c;
    c.tol = tol;
    c.max_iter = max_iter;
    c.guard = guard == "strict" ? lmp::GuardMode::strict
                                : (guard == "off" ? lmp::GuardMode::off : lmp::GuardMode::advise);
    if (stochastic) c.level = lmp::default_level(dt);
    return c;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Structure-preserving stochastic midpoint integrators on SO(3)";
    m.attr("__version__") = lmp::kVersion;

    py::register_exception<lmp::DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<lmp::ConfigError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<lmp::SolverError>(m, "SolverFailure", PyExc_RuntimeError);

    // Lie-group kernel.
    m.def("hat", [](const V3& v) { return rows(lmp::hat(vec(v))); },
          "Skew matrix of a 3-vector: hat(v) w = v x w");
    m.def("vee", [](const M3& mm) { return arr(lmp::vee(mat(mm))); });
    m.def("cayley", [](const V3& v) { return rows(lmp::cayley(vec(v)).matrix()); },
          "Cayley retraction R^3 -> SO(3)");
    m.def("cayley_inv", [](const M3& r) { return arr(lmp::cayley_inv(lmp::Rotation(mat(r)))); });
    m.def("dcayinv_dual",
          [](const V3& xi, double dt, const V3& mu) {
              return arr(lmp::dcayinv_dual(vec(xi), dt, vec(mu)));
          },
          py::arg("xi"), py::arg("dt"), py::arg("mu"));
    m.def("ad_star", [](const V3& xi, const V3& mu) { return arr(lmp::ad_star(vec(xi), vec(mu))); });
    m.def("Ad_star",
          [](const M3& r, const V3& mu) { return arr(lmp::Ad_star(lmp::Rotation(mat(r)), vec(mu))); });
    m.def("diamond",
          [](const V3& v, const V3& alpha) { return arr(lmp::diamond(vec(v), vec(alpha))); });
    m.def("orthogonality_defect", [](const M3& r) { return lmp::orthogonality_defect(mat(r)); });

    // Wiener increments.
    py::class_<lmp::WienerGrid>(m, "WienerGrid")
        .def_static("generate", &lmp::WienerGrid::generate, py::arg("seed"), py::arg("steps"),
                    py::arg("channels"), py::arg("dt"))
        .def_property_readonly("dt", &lmp::WienerGrid::dt)
        .def_property_readonly("steps", &lmp::WienerGrid::steps)
        .def_property_readonly("channels", &lmp::WienerGrid::channels)
        .def("at", &lmp::WienerGrid::at, py::arg("step"), py::arg("channel"))
        .def("coarsen", &lmp::WienerGrid::coarsen, py::arg("factor"))
        .def("channel_total", &lmp::WienerGrid::channel_total, py::arg("channel"))
        .def_property_readonly("increments",
                               [](const lmp::WienerGrid& g) { return g.increments(); });
    m.def("truncation_level", [](double dt) { return lmp::default_level(dt).d; },
          "The clipping level D_dt = sqrt(4 |ln dt| dt)");
    m.def("truncate_increment",
          [](double w, double level) { return lmp::truncate(w, lmp::TruncationLevel{level}); });
    m.def("normal_quantile", &lmp::rng::normal_quantile);

    // Models.
    py::class_<lmp::RigidBody>(m, "RigidBody")
        .def(py::init([](const M3& inertia) { return lmp::RigidBody(mat(inertia)); }))
        .def_static("from_diagonal", &lmp::RigidBody::from_diagonal)
        .def("energy", [](const lmp::RigidBody& b, const V3& pi) { return b.energy(vec(pi)); })
        .def("grad", [](const lmp::RigidBody& b, const V3& pi) { return arr(b.grad(vec(pi))); })
        .def_property_readonly("inertia",
                               [](const lmp::RigidBody& b) { return rows(b.inertia()); })
        .def_property_readonly("inverse_norm", &lmp::RigidBody::inverse_norm);

    py::class_<lmp::HeavyTop>(m, "HeavyTop")
        .def(py::init([](const M3& inertia, double mass, double gravity, const V3& lever,
                         const V3& alpha0) {
                 return lmp::HeavyTop(mat(inertia), mass, gravity, vec(lever), vec(alpha0));
             }),
             py::arg("inertia"), py::arg("mass"), py::arg("gravity"), py::arg("lever"),
             py::arg("alpha0") = V3{0.0, 0.0, 1.0})
        .def("energy", [](const lmp::HeavyTop& t, const V3& pi, const V3& gamma) {
            return t.energy(vec(pi), vec(gamma));
        })
        .def("grads",
             [](const lmp::HeavyTop& t, const V3& pi, const V3& gamma) {
                 const auto [gm, ga] = t.grads(vec(pi), vec(gamma));
                 return std::make_pair(arr(gm), arr(ga));
             })
        .def_property_readonly("weight_moment", &lmp::HeavyTop::weight_moment);

    py::class_<lmp::NoiseHamiltonian>(m, "NoiseHamiltonian")
        .def_static("linear_momentum",
                    [](const V3& chi) { return lmp::NoiseHamiltonian::linear_momentum(vec(chi)); })
        .def_static("momentum_x", &lmp::NoiseHamiltonian::momentum_x)
        .def_static("momentum_y", &lmp::NoiseHamiltonian::momentum_y)
        .def_static("momentum_z", &lmp::NoiseHamiltonian::momentum_z)
        .def_static("momentum_norm_sq", &lmp::NoiseHamiltonian::momentum_norm_sq)
        .def_static("gamma_x", &lmp::NoiseHamiltonian::gamma_x)
        .def_static("gamma_y", &lmp::NoiseHamiltonian::gamma_y)
        .def_static("gamma_z", &lmp::NoiseHamiltonian::gamma_z)
        .def_property_readonly("name", &lmp::NoiseHamiltonian::name)
        .def_property_readonly("needs_gamma", &lmp::NoiseHamiltonian::needs_gamma);

    // Trajectory drivers.
    m.def(
        "integrate_rigid_body",
        [](const lmp::RigidBody& body, const std::vector<lmp::NoiseHamiltonian>& specs,
           const V3& mu0, double dt, std::int64_t steps, std::uint64_t seed, double tol,
           int max_iter, const std::string& guard) {
            lmp::StepControls c = controls_from(tol, max_iter, guard, dt, !specs.empty());
            c.drift_bound = body.inverse_norm();
            c.noise_bound = lmp::noise_gradient_bound(specs, lmp::norm(vec(mu0)));
            const auto drift = lmp::reduced_drift(body);
            const auto noise = lmp::reduced_noise(specs);
            std::optional<lmp::WienerGrid> grid;
            if (!specs.empty()) {
                grid = lmp::WienerGrid::generate(lmp::rng::derive_stream(seed, 0), steps,
                                                 static_cast<int>(specs.size()), dt);
            }
            std::vector<V3> mus{mu0};
            std::vector<M3> gs{rows(lmp::Mat3::identity())};
            lmp::Vec3 mu = vec(mu0);
            lmp::Rotation g;
            std::vector<double> dw(specs.size(), 0.0);
            for (std::int64_t k = 0; k < steps; ++k) {
                for (std::size_t i = 0; i < specs.size(); ++i) {
                    dw[i] = lmp::truncate(grid->at(k, static_cast<int>(i)), c.level);
                }
                const auto stages = lmp::solve_stages_reduced(drift, noise, mu, dt, dw, c);
                mu = lmp::step_reduced(stages, dt);
                g = lmp::reconstruct(g, stages, dt).second;
                mus.push_back(arr(mu));
                gs.push_back(rows(g.matrix()));
            }
            py::dict out;
            out["mu"] = mus;
            out["rotation"] = gs;
            return out;
        },
        py::arg("body"), py::arg("noise"), py::arg("mu0"), py::arg("dt"), py::arg("steps"),
        py::arg("seed") = 0, py::arg("tol") = 1e-12, py::arg("max_iter") = 100,
        py::arg("guard") = "advise");

    m.def(
        "integrate_heavy_top",
        [](const lmp::HeavyTop& top, const std::vector<lmp::NoiseHamiltonian>& specs,
           const V3& mu0, const V3& gamma0, double dt, std::int64_t steps, std::uint64_t seed,
           double tol, int max_iter, const std::string& guard) {
            lmp::StepControls c = controls_from(tol, max_iter, guard, dt, !specs.empty());
            c.drift_bound = top.inverse_norm();
            c.noise_bound = lmp::noise_gradient_bound(specs, lmp::norm(vec(mu0)));
            const auto drift = lmp::advected_drift(top);
            const auto noise = lmp::advected_noise(top, specs);
            std::optional<lmp::WienerGrid> grid;
            if (!specs.empty()) {
                grid = lmp::WienerGrid::generate(lmp::rng::derive_stream(seed, 0), steps,
                                                 static_cast<int>(specs.size()), dt);
            }
            std::vector<V3> mus{mu0}, gammas{gamma0};
            lmp::Vec3 mu = vec(mu0);
            lmp::Vec3 gamma = vec(gamma0);
            std::vector<double> dw(specs.size(), 0.0);
            for (std::int64_t k = 0; k < steps; ++k) {
                for (std::size_t i = 0; i < specs.size(); ++i) {
                    dw[i] = lmp::truncate(grid->at(k, static_cast<int>(i)), c.level);
                }
                const auto stages =
                    lmp::solve_stages_advected(drift, noise, mu, gamma, dt, dw, c);
                std::tie(mu, gamma) = lmp::step_advected(stages, dt);
                mus.push_back(arr(mu));
                gammas.push_back(arr(gamma));
            }
            py::dict out;
            out["mu"] = mus;
            out["gamma"] = gammas;
            return out;
        },
        py::arg("top"), py::arg("noise"), py::arg("mu0"), py::arg("gamma0"), py::arg("dt"),
        py::arg("steps"), py::arg("seed") = 0, py::arg("tol") = 1e-12, py::arg("max_iter") = 100,
        py::arg("guard") = "advise");

    // Diagnostics.
    m.def("orbit_radius", [](const V3& pi) { return lmp::orbit_radius(vec(pi)); });
    m.def("spatial_momentum", [](const M3& r, const V3& pi) {
        return arr(lmp::spatial_momentum(lmp::Rotation(mat(r)), vec(pi)));
    });
    m.def("heavytop_momentum_map", [](const M3& r, const V3& pi) {
        return lmp::heavytop_momentum_map(lmp::Rotation(mat(r)), vec(pi));
    });
    m.def("casimirs_ht",
          [](const V3& pi, const V3& gamma) { return lmp::casimirs_ht(vec(pi), vec(gamma)); });
    m.def("euler_from_rotation", [](const M3& r) {
        const auto an = lmp::euler_from_rotation(lmp::Rotation(mat(r)));
        return std::make_tuple(an.phi, an.theta, an.psi);
    });
    m.def("rotation_from_euler", [](double phi, double theta, double psi) {
        return rows(lmp::rotation_from_euler({phi, theta, psi}).matrix());
    });
    m.def("effective_potential", &lmp::effective_potential, py::arg("theta"), py::arg("p_phi"),
          py::arg("p_psi"), py::arg("i1"), py::arg("mgl"));
    m.def("nutation_bounds", &lmp::nutation_bounds, py::arg("e_prime"), py::arg("p_phi"),
          py::arg("p_psi"), py::arg("i1"), py::arg("mgl"));

    // Convergence harness.
    m.def(
        "coupled_errors_rigid_body",
        [](const lmp::RigidBody& body, const std::vector<lmp::NoiseHamiltonian>& specs,
           const V3& mu0, double dt_fine, const std::vector<std::int64_t>& factors, double horizon,
           int samples, std::uint64_t seed, int workers) {
            lmp::ConvergenceSetup setup;
            setup.dt_fine = dt_fine;
            setup.factors = factors;
            setup.horizon = horizon;
            setup.samples = samples;
            setup.seed = seed;
            setup.workers = workers;
            setup.controls.guard = lmp::GuardMode::strict;
            const lmp::ErrorTable table = lmp::coupled_errors(body, specs, vec(mu0), setup);
            const lmp::OrderFit fit = lmp::estimate_order(table);
            py::dict out;
            std::vector<std::pair<double, double>> pairs;
            for (const auto& row : table.rows) pairs.emplace_back(row.dt, row.rms_error);
            out["rows"] = pairs;
            out["slope"] = fit.slope;
            out["r_squared"] = fit.r_squared;
            return out;
        },
        py::arg("body"), py::arg("noise"), py::arg("mu0"), py::arg("dt_fine"), py::arg("factors"),
        py::arg("horizon"), py::arg("samples"), py::arg("seed") = 0, py::arg("workers") = 1);
}
