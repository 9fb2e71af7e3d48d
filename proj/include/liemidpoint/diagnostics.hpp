#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liemidpoint/lie.hpp"

namespace lmp {

/// ZXZ Euler angles with theta in (0, pi) and phi, psi in [0, 2 pi).
struct EulerAngles {
    double phi = 0.0;
    double theta = 0.0;
    double psi = 0.0;
};

/// Coadjoint-orbit radius |Pi|.
double orbit_radius(const Vec3& pi);

/// Spatial angular momentum pi = R Pi, the full-symmetry momentum map.
Vec3 spatial_momentum(const Rotation& r, const Vec3& pi);

/// Heavy-top momentum map (R Pi)_z = p_phi (Noether quantity for rotations
/// about the spatial z axis).
double heavytop_momentum_map(const Rotation& r, const Vec3& pi);

/// Semidirect-product Casimirs (|Gamma|^2, Pi . Gamma).
std::pair<double, double> casimirs_ht(const Vec3& pi, const Vec3& gamma);

/// Rotation matrix of the Euler triple (ZXZ convention).
Rotation rotation_from_euler(const EulerAngles& angles);

/// Unique Euler triple of a rotation that does not fix the z axis.
/// Throws DomainError when |R_33| >= 1 - 1e-9 (precession and spin are not
/// separable there).
EulerAngles euler_from_rotation(const Rotation& r);

struct EulerRates {
    double omega_phi = 0.0;
    double omega_theta = 0.0;
    double omega_psi = 0.0;
};

/// Euler-angle velocities from the body momentum: omega = I^{-1} Pi, then
///   omega_theta = omega_x cos psi - omega_y sin psi
///   omega_phi   = (omega_x sin psi + omega_y cos psi) / sin theta
///   omega_psi   = omega_z - omega_phi cos theta.
/// Requires sin theta >= 1e-6.
EulerRates euler_rates(const Vec3& pi, const Mat3& inertia, const EulerAngles& angles);

/// Conjugate momenta of the cyclic angles for a symmetric top
/// (I1 = inertia(0,0), I3 = inertia(2,2)):
///   p_phi = (I1 sin^2 th + I3 cos^2 th) omega_phi + I3 omega_psi cos th
///   p_psi = I3 (omega_psi + omega_phi cos th).
/// p_phi equals (R Pi)_z and p_psi equals Pi_z.
std::pair<double, double> conjugate_momenta(const Vec3& pi, const Mat3& inertia,
                                            const EulerAngles& angles);

/// Effective potential of the nutation angle,
/// V(th) = (p_phi - p_psi cos th)^2 / (2 I1 sin^2 th) + Mgl cos th.
double effective_potential(double theta, double p_phi, double p_psi, double i1, double mgl);

/// The two roots of V(theta) = e_prime bracketing the minimizer, by
/// golden-section search for the minimizer and bisection for the roots.
/// Throws DomainError when e_prime < min V. When a branch of V stays below
/// e_prime all the way to the chart boundary, that endpoint is returned.
std::pair<double, double> nutation_bounds(double e_prime, double p_phi, double p_psi, double i1,
                                          double mgl);

struct DriftEntry {
    std::string name;
    double initial = 0.0;
    double max_abs_deviation = 0.0;
    std::size_t step_of_max = 0;
};

struct DriftReport {
    std::vector<DriftEntry> entries;

    const DriftEntry* find(const std::string& name) const;
    std::string to_json() const;
};

/// Max deviation of one scalar series from its first value.
DriftEntry drift_entry(std::string name, std::span<const double> series);

DriftReport drift_report(const std::vector<std::pair<std::string, std::vector<double>>>& series);

} // namespace lmp
