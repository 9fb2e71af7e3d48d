#pragma once

#include <array>
#include <cmath>

#include "liemidpoint/errors.hpp"

namespace lmp {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x, double y, double z) : x(x), y(y), z(z) {}

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend constexpr Vec3 operator*(double s, const Vec3& a) {
        return {s * a.x, s * a.y, s * a.z};
    }
    friend constexpr Vec3 operator*(const Vec3& a, double s) { return s * a; }
    friend constexpr Vec3 operator/(const Vec3& a, double s) {
        return {a.x / s, a.y / s, a.z / s};
    }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& b) { x += b.x; y += b.y; z += b.z; return *this; }
    Vec3& operator-=(const Vec3& b) { x -= b.x; y -= b.y; z -= b.z; return *this; }

    friend constexpr bool operator==(const Vec3& a, const Vec3& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec3& a) {
    return std::max({std::fabs(a.x), std::fabs(a.y), std::fabs(a.z)});
}

inline bool is_finite(const Vec3& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// Body angular velocity xi in so(3), identified with R^3 by the hat map.
using AlgebraVector = Vec3;
/// Body angular momentum mu in so(3)*, identified with R^3 by the same pairing.
using Momentum = Vec3;

/// 3x3 matrix, row-major.
struct Mat3 {
    std::array<double, 9> a{};

    constexpr double operator()(int r, int c) const { return a[3 * r + c]; }
    constexpr double& operator()(int r, int c) { return a[3 * r + c]; }

    static constexpr Mat3 identity() {
        Mat3 m;
        m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return m;
    }
    static constexpr Mat3 diagonal(double d0, double d1, double d2) {
        Mat3 m;
        m.a = {d0, 0, 0, 0, d1, 0, 0, 0, d2};
        return m;
    }

    constexpr Mat3 transposed() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
        return t;
    }

    friend constexpr Mat3 operator+(const Mat3& m, const Mat3& n) {
        Mat3 s;
        for (int i = 0; i < 9; ++i) s.a[i] = m.a[i] + n.a[i];
        return s;
    }
    friend constexpr Mat3 operator-(const Mat3& m, const Mat3& n) {
        Mat3 s;
        for (int i = 0; i < 9; ++i) s.a[i] = m.a[i] - n.a[i];
        return s;
    }
    friend constexpr Mat3 operator*(double s, const Mat3& m) {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = s * m.a[i];
        return r;
    }
    friend constexpr Mat3 operator*(const Mat3& m, const Mat3& n) {
        Mat3 p;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                p(r, c) = m(r, 0) * n(0, c) + m(r, 1) * n(1, c) + m(r, 2) * n(2, c);
        return p;
    }
    friend constexpr Vec3 operator*(const Mat3& m, const Vec3& v) {
        return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
                m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
                m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
    }
};

double det(const Mat3& m);
double norm_max(const Mat3& m);
bool is_finite(const Mat3& m);

/// Solve m x = b by Gaussian elimination with partial pivoting.
/// Throws DomainError if m is singular to working precision.
Vec3 solve3(const Mat3& m, const Vec3& b);

/// Max-norm of R^T R - I. Zero for an exact rotation; grows only through
/// floating-point accumulation along a run, and is monitored, never corrected.
double orthogonality_defect(const Mat3& m);

/// Element of SO(3). Construction from a raw matrix enforces
/// ||R^T R - I||_max <= 1e-9 and |det R - 1| <= 1e-9.
class Rotation {
public:
    Rotation() : m_(Mat3::identity()) {}

    explicit Rotation(const Mat3& m);

    static Rotation identity() { return Rotation(); }

    /// Group composition. Inputs are already validated rotations, so the
    /// product is not re-gated; its defect stays observable via
    /// orthogonality_defect().
    friend Rotation composed(const Rotation& a, const Rotation& b) {
        return Rotation(a.m_ * b.m_, unchecked{});
    }

    friend Vec3 operator*(const Rotation& r, const Vec3& v) { return r.m_ * v; }

    const Mat3& matrix() const { return m_; }
    Rotation transposed() const { return Rotation(m_.transposed(), unchecked{}); }

private:
    struct unchecked {};
    Rotation(const Mat3& m, unchecked) : m_(m) {}

    Mat3 m_;
};

/// Hat map R^3 -> so(3): hat(v) w = v x w.
Mat3 hat(const Vec3& v);

/// Inverse of the hat map. The input must be skew-symmetric within 1e-9.
Vec3 vee(const Mat3& m);

/// Cayley retraction tau(v) = (I - hat(v)/2)^{-1} (I + hat(v)/2).
/// Defined for every v; satisfies tau(0) = I and tau(-v) = tau(v)^T.
Rotation cayley(const Vec3& v);

/// Inverse retraction, hat(v) = 2 (R - I)(R + I)^{-1}.
/// Throws DomainError for rotations at or numerically near angle pi,
/// where the Cayley chart is singular.
Vec3 cayley_inv(const Rotation& r);

/// Dual of the right-trivialized derivative of the inverse Cayley map:
/// [d_{dt xi} tau^{-1}]* mu = mu + (dt/2) xi x mu - (dt^2/4)(xi . mu) xi.
Vec3 dcayinv_dual(const Vec3& xi, double dt, const Vec3& mu);

/// Infinitesimal coadjoint operator on so(3)*: ad*_xi mu = mu x xi.
constexpr Vec3 ad_star(const Vec3& xi, const Vec3& mu) { return cross(mu, xi); }

/// Coadjoint action: Ad*_R mu = R^T mu. Norm-preserving.
Vec3 Ad_star(const Rotation& r, const Vec3& mu);

/// Diamond operator for SO(3) acting on R^3: v diamond alpha = v x alpha,
/// the unique element with <v ◇ alpha, xi> = <xi x v, alpha> for all xi.
constexpr Vec3 diamond(const Vec3& v, const Vec3& alpha) { return cross(v, alpha); }

} // namespace lmp
