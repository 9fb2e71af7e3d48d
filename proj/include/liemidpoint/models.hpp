#pragma once

#include <array>
#include <string>
#include <vector>

#include "liemidpoint/integrator.hpp"
#include "liemidpoint/lie.hpp"

namespace lmp {

/// Eigenvalues of a symmetric 3x3 matrix, descending.
std::array<double, 3> symmetric_eigenvalues(const Mat3& m);

/// Free rigid body with reduced Hamiltonian h(Pi) = 1/2 Pi . I^{-1} Pi.
/// The inertia is any symmetric positive-definite matrix; its inverse is
/// precomputed at construction.
class RigidBody {
public:
    explicit RigidBody(const Mat3& inertia);
    static RigidBody from_diagonal(double i1, double i2, double i3);

    const Mat3& inertia() const { return inertia_; }
    const Mat3& inertia_inverse() const { return inverse_; }
    /// Spectral norm of I^{-1} (enters the solvability guard).
    double inverse_norm() const { return inverse_norm_; }

    double energy(const Vec3& pi) const { return 0.5 * dot(pi, inverse_ * pi); }
    Vec3 grad(const Vec3& pi) const { return inverse_ * pi; }

private:
    Mat3 inertia_;
    Mat3 inverse_;
    double inverse_norm_ = 0.0;
};

/// Heavy top: h(Pi, Gamma) = 1/2 Pi . I^{-1} Pi + m g a . Gamma, with a the
/// body-frame vector from the attachment point to the center of mass and
/// Gamma = R^T alpha0 the advected gravity direction.
class HeavyTop {
public:
    HeavyTop(const Mat3& inertia, double mass, double gravity, const Vec3& lever,
             const Vec3& alpha0 = Vec3{0.0, 0.0, 1.0});

    const Mat3& inertia() const { return inertia_; }
    const Mat3& inertia_inverse() const { return inverse_; }
    double inverse_norm() const { return inverse_norm_; }
    double mass() const { return mass_; }
    double gravity() const { return gravity_; }
    const Vec3& lever() const { return lever_; }
    const Vec3& alpha0() const { return alpha0_; }
    /// m g |a|, the effective-potential weight.
    double weight_moment() const { return mass_ * gravity_ * norm(lever_); }

    double energy(const Vec3& pi, const Vec3& gamma) const {
        return 0.5 * dot(pi, inverse_ * pi) + mass_ * gravity_ * dot(lever_, gamma);
    }
    /// (dh/dPi, dh/dGamma) = (I^{-1} Pi, m g a).
    std::pair<Vec3, Vec3> grads(const Vec3& pi, const Vec3& gamma) const;

private:
    Mat3 inertia_;
    Mat3 inverse_;
    double inverse_norm_ = 0.0;
    double mass_;
    double gravity_;
    Vec3 lever_;
    Vec3 alpha0_;
};

/// Catalog of stochastic Hamiltonians used with the rigid body and the heavy
/// top. The gamma_* variants read mass and gravity off the heavy top, so they
/// are rejected in pure rigid-body runs.
struct NoiseHamiltonian {
    enum class Kind {
        linear_momentum, ///< h = chi . Pi
        momentum_x,      ///< h = k Pi_x
        momentum_y,      ///< h = k Pi_y
        momentum_z,      ///< h = k Pi_z
        momentum_norm_sq,///< h = k |Pi|^2
        gamma_x,         ///< h = m g k Gamma_x
        gamma_y,         ///< h = m g k Gamma_y
        gamma_z          ///< h = m g k Gamma_z
    };

    Kind kind = Kind::linear_momentum;
    Vec3 chi{};     // linear_momentum coefficient
    double k = 0.0; // scalar coefficient of the other variants

    static NoiseHamiltonian linear_momentum(const Vec3& chi);
    static NoiseHamiltonian momentum_x(double k);
    static NoiseHamiltonian momentum_y(double k);
    static NoiseHamiltonian momentum_z(double k);
    static NoiseHamiltonian momentum_norm_sq(double k);
    static NoiseHamiltonian gamma_x(double k);
    static NoiseHamiltonian gamma_y(double k);
    static NoiseHamiltonian gamma_z(double k);

    bool needs_gamma() const;
    std::string name() const;

    double value(const HeavyTop* top, const Vec3& pi, const Vec3& gamma) const;

    /// (dh/dPi, dh/dGamma). `top` may be null for the Pi-only variants.
    std::pair<Vec3, Vec3> grads(const HeavyTop* top, const Vec3& pi, const Vec3& gamma) const;

    /// Bound on |dh/dPi| over the ball of radius `radius` (guard input).
    double mu_gradient_bound(double radius) const;

    /// True when the variant commutes with rotation about the z axis in the
    /// sense that it leaves Pi_z invariant for a symmetric top.
    bool preserves_pi_z() const;
};

/// Stepper callback bundles.
ReducedGradient reduced_drift(const RigidBody& body);
std::vector<ReducedGradient> reduced_noise(std::vector<NoiseHamiltonian> specs);
AdvectedHamiltonian advected_drift(const HeavyTop& top);
std::vector<AdvectedHamiltonian> advected_noise(const HeavyTop& top,
                                                std::vector<NoiseHamiltonian> specs);

/// max_i sup_{|mu| <= radius} |dh_i/dPi|, the noise part of the guard.
double noise_gradient_bound(std::span<const NoiseHamiltonian> specs, double radius);

} // namespace lmp
