#include "liemidpoint/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmp {

namespace {

constexpr double kSymmetryGate = 1e-12;

Mat3 invert_spd(const Mat3& m) {
    Mat3 inv;
    for (int c = 0; c < 3; ++c) {
        const Vec3 col = solve3(m, {c == 0 ? 1.0 : 0.0, c == 1 ? 1.0 : 0.0, c == 2 ? 1.0 : 0.0});
        inv(0, c) = col.x;
        inv(1, c) = col.y;
        inv(2, c) = col.z;
    }
    return inv;
}

void validate_inertia(const Mat3& m, const char* who) {
    if (!is_finite(m)) throw DomainError(std::string(who) + ": inertia has non-finite entries");
    const double asym = std::max({std::fabs(m(0, 1) - m(1, 0)), std::fabs(m(0, 2) - m(2, 0)),
                                  std::fabs(m(1, 2) - m(2, 1))});
    if (asym > kSymmetryGate * std::max(1.0, norm_max(m))) {
        std::ostringstream os;
        os << who << ": inertia must be symmetric (asymmetry " << asym << ")";
        throw DomainError(os.str());
    }
    const auto eig = symmetric_eigenvalues(m);
    if (!(eig[2] > 0.0)) {
        std::ostringstream os;
        os << who << ": inertia must be positive definite (smallest eigenvalue " << eig[2] << ")";
        throw DomainError(os.str());
    }
}

} // namespace

std::array<double, 3> symmetric_eigenvalues(const Mat3& m) {
    // Trigonometric closed form for the symmetric 3x3 eigenproblem.
    const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
    if (p1 == 0.0) {
        std::array<double, 3> eig{m(0, 0), m(1, 1), m(2, 2)};
        std::sort(eig.begin(), eig.end(), std::greater<>());
        return eig;
    }
    const double q = (m(0, 0) + m(1, 1) + m(2, 2)) / 3.0;
    const double p2 = (m(0, 0) - q) * (m(0, 0) - q) + (m(1, 1) - q) * (m(1, 1) - q) +
                      (m(2, 2) - q) * (m(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Mat3 b = (1.0 / p) * (m - q * Mat3::identity());
    double r = det(b) / 2.0;
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    return {e1, e2, e3};
}

RigidBody::RigidBody(const Mat3& inertia) : inertia_(inertia) {
    validate_inertia(inertia, "RigidBody");
    inverse_ = invert_spd(inertia);
    inverse_norm_ = 1.0 / symmetric_eigenvalues(inertia)[2];
}

RigidBody RigidBody::from_diagonal(double i1, double i2, double i3) {
    return RigidBody(Mat3::diagonal(i1, i2, i3));
}

HeavyTop::HeavyTop(const Mat3& inertia, double mass, double gravity, const Vec3& lever,
                   const Vec3& alpha0)
    : inertia_(inertia), mass_(mass), gravity_(gravity), lever_(lever), alpha0_(alpha0) {
    validate_inertia(inertia, "HeavyTop");
    if (!(mass_ > 0.0)) throw DomainError("HeavyTop: mass must be positive");
    if (!(gravity_ > 0.0)) throw DomainError("HeavyTop: gravity must be positive");
    if (!is_finite(lever_)) throw DomainError("HeavyTop: lever vector must be finite");
    if (!(norm(alpha0_) > 0.0)) throw DomainError("HeavyTop: alpha0 must be non-zero");
    inverse_ = invert_spd(inertia);
    inverse_norm_ = 1.0 / symmetric_eigenvalues(inertia)[2];
}

std::pair<Vec3, Vec3> HeavyTop::grads(const Vec3& pi, const Vec3& /*gamma*/) const {
    return {inverse_ * pi, (mass_ * gravity_) * lever_};
}

NoiseHamiltonian NoiseHamiltonian::linear_momentum(const Vec3& chi) {
    NoiseHamiltonian n;
    n.kind = Kind::linear_momentum;
    n.chi = chi;
    return n;
}

namespace {
NoiseHamiltonian scalar_kind(NoiseHamiltonian::Kind kind, double k) {
    NoiseHamiltonian n;
    n.kind = kind;
    n.k = k;
    return n;
}
} // namespace

NoiseHamiltonian NoiseHamiltonian::momentum_x(double k) { return scalar_kind(Kind::momentum_x, k); }
NoiseHamiltonian NoiseHamiltonian::momentum_y(double k) { return scalar_kind(Kind::momentum_y, k); }
NoiseHamiltonian NoiseHamiltonian::momentum_z(double k) { return scalar_kind(Kind::momentum_z, k); }
NoiseHamiltonian NoiseHamiltonian::momentum_norm_sq(double k) {
    return scalar_kind(Kind::momentum_norm_sq, k);
}
NoiseHamiltonian NoiseHamiltonian::gamma_x(double k) { return scalar_kind(Kind::gamma_x, k); }
NoiseHamiltonian NoiseHamiltonian::gamma_y(double k) { return scalar_kind(Kind::gamma_y, k); }
NoiseHamiltonian NoiseHamiltonian::gamma_z(double k) { return scalar_kind(Kind::gamma_z, k); }

bool NoiseHamiltonian::needs_gamma() const {
    return kind == Kind::gamma_x || kind == Kind::gamma_y || kind == Kind::gamma_z;
}

std::string NoiseHamiltonian::name() const {
    switch (kind) {
        case Kind::linear_momentum: return "linear_momentum";
        case Kind::momentum_x: return "momentum_x";
        case Kind::momentum_y: return "momentum_y";
        case Kind::momentum_z: return "momentum_z";
        case Kind::momentum_norm_sq: return "momentum_norm_sq";
        case Kind::gamma_x: return "gamma_x";
        case Kind::gamma_y: return "gamma_y";
        case Kind::gamma_z: return "gamma_z";
    }
    return "unknown";
}

double NoiseHamiltonian::value(const HeavyTop* top, const Vec3& pi, const Vec3& gamma) const {
    switch (kind) {
        case Kind::linear_momentum: return dot(chi, pi);
        case Kind::momentum_x: return k * pi.x;
        case Kind::momentum_y: return k * pi.y;
        case Kind::momentum_z: return k * pi.z;
        case Kind::momentum_norm_sq: return k * dot(pi, pi);
        default: break;
    }
    if (top == nullptr) {
        throw ConfigError("noise Hamiltonian " + name() + " requires a heavy-top model");
    }
    const double mg = top->mass() * top->gravity();
    switch (kind) {
        case Kind::gamma_x: return mg * k * gamma.x;
        case Kind::gamma_y: return mg * k * gamma.y;
        case Kind::gamma_z: return mg * k * gamma.z;
        default: break;
    }
    return 0.0;
}

std::pair<Vec3, Vec3> NoiseHamiltonian::grads(const HeavyTop* top, const Vec3& pi,
                                              const Vec3& /*gamma*/) const {
    switch (kind) {
        case Kind::linear_momentum: return {chi, Vec3{}};
        case Kind::momentum_x: return {Vec3{k, 0.0, 0.0}, Vec3{}};
        case Kind::momentum_y: return {Vec3{0.0, k, 0.0}, Vec3{}};
        case Kind::momentum_z: return {Vec3{0.0, 0.0, k}, Vec3{}};
        case Kind::momentum_norm_sq: return {(2.0 * k) * pi, Vec3{}};
        default: break;
    }
    if (top == nullptr) {
        throw ConfigError("noise Hamiltonian " + name() + " requires a heavy-top model");
    }
    const double mgk = top->mass() * top->gravity() * k;
    switch (kind) {
        case Kind::gamma_x: return {Vec3{}, Vec3{mgk, 0.0, 0.0}};
        case Kind::gamma_y: return {Vec3{}, Vec3{0.0, mgk, 0.0}};
        case Kind::gamma_z: return {Vec3{}, Vec3{0.0, 0.0, mgk}};
        default: break;
    }
    return {Vec3{}, Vec3{}};
}

double NoiseHamiltonian::mu_gradient_bound(double radius) const {
    switch (kind) {
        case Kind::linear_momentum: return norm(chi);
        case Kind::momentum_x:
        case Kind::momentum_y:
        case Kind::momentum_z: return std::fabs(k);
        // The stage iterates live in the ball of radius 2R.
        case Kind::momentum_norm_sq: return 2.0 * std::fabs(k) * 2.0 * radius;
        default: return 0.0;
    }
}

bool NoiseHamiltonian::preserves_pi_z() const {
    switch (kind) {
        case Kind::momentum_z:
        case Kind::momentum_norm_sq:
        case Kind::gamma_z: return true;
        case Kind::linear_momentum: return chi.x == 0.0 && chi.y == 0.0;
        default: return false;
    }
}

ReducedGradient reduced_drift(const RigidBody& body) {
    return [body](const Vec3& pi) { return body.grad(pi); };
}

std::vector<ReducedGradient> reduced_noise(std::vector<NoiseHamiltonian> specs) {
    std::vector<ReducedGradient> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        if (spec.needs_gamma()) {
            throw ConfigError("noise Hamiltonian " + spec.name() +
                              " requires a heavy-top model, not a rigid body");
        }
        out.push_back([spec](const Vec3& pi) { return spec.grads(nullptr, pi, Vec3{}).first; });
    }
    return out;
}

AdvectedHamiltonian advected_drift(const HeavyTop& top) {
    AdvectedHamiltonian h;
    h.grad_mu = [top](const Vec3& pi, const Vec3& gamma) { return top.grads(pi, gamma).first; };
    h.grad_alpha = [top](const Vec3& pi, const Vec3& gamma) { return top.grads(pi, gamma).second; };
    return h;
}

std::vector<AdvectedHamiltonian> advected_noise(const HeavyTop& top,
                                                std::vector<NoiseHamiltonian> specs) {
    std::vector<AdvectedHamiltonian> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        AdvectedHamiltonian h;
        h.grad_mu = [top, spec](const Vec3& pi, const Vec3& gamma) {
            return spec.grads(&top, pi, gamma).first;
        };
        h.grad_alpha = [top, spec](const Vec3& pi, const Vec3& gamma) {
            return spec.grads(&top, pi, gamma).second;
        };
        out.push_back(std::move(h));
    }
    return out;
}

double noise_gradient_bound(std::span<const NoiseHamiltonian> specs, double radius) {
    double bound = 0.0;
    for (const auto& spec : specs) bound = std::max(bound, spec.mu_gradient_bound(radius));
    return bound;
}

} // namespace lmp
