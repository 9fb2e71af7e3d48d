#include "liemidpoint/lie.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmp {

namespace {
constexpr double kRotationGate = 1e-9;
constexpr double kSkewGate = 1e-9;
} // namespace

double det(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

double norm_max(const Mat3& m) {
    double n = 0.0;
    for (double v : m.a) n = std::max(n, std::fabs(v));
    return n;
}

bool is_finite(const Mat3& m) {
    for (double v : m.a) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Vec3 solve3(const Mat3& m, const Vec3& b) {
    double aug[3][4] = {{m(0, 0), m(0, 1), m(0, 2), b.x},
                        {m(1, 0), m(1, 1), m(1, 2), b.y},
                        {m(2, 0), m(2, 1), m(2, 2), b.z}};
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::fabs(aug[r][col]) > std::fabs(aug[pivot][col])) pivot = r;
        }
        if (std::fabs(aug[pivot][col]) < 1e-300) {
            throw DomainError("solve3: singular 3x3 system");
        }
        if (pivot != col) std::swap(aug[pivot], aug[col]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = aug[r][col] / aug[col][col];
            for (int c = col; c < 4; ++c) aug[r][c] -= f * aug[col][c];
        }
    }
    Vec3 x;
    double* xs[3] = {&x.x, &x.y, &x.z};
    for (int r = 2; r >= 0; --r) {
        double s = aug[r][3];
        for (int c = r + 1; c < 3; ++c) s -= aug[r][c] * *xs[c];
        *xs[r] = s / aug[r][r];
    }
    return x;
}

double orthogonality_defect(const Mat3& m) {
    return norm_max(m.transposed() * m - Mat3::identity());
}

Rotation::Rotation(const Mat3& m) : m_(m) {
    if (!is_finite(m)) throw DomainError("Rotation: non-finite entries");
    const double defect = orthogonality_defect(m);
    if (defect > kRotationGate) {
        std::ostringstream os;
        os << "Rotation: orthogonality defect " << defect << " exceeds " << kRotationGate;
        throw DomainError(os.str());
    }
    const double d = det(m);
    if (std::fabs(d - 1.0) > kRotationGate) {
        std::ostringstream os;
        os << "Rotation: determinant " << d << " is not 1 within " << kRotationGate;
        throw DomainError(os.str());
    }
}

Mat3 hat(const Vec3& v) {
    Mat3 m;
    m.a = {0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0};
    return m;
}

Vec3 vee(const Mat3& m) {
    const double asym = std::max({std::fabs(m(0, 1) + m(1, 0)), std::fabs(m(0, 2) + m(2, 0)),
                                  std::fabs(m(1, 2) + m(2, 1)), std::fabs(m(0, 0)),
                                  std::fabs(m(1, 1)), std::fabs(m(2, 2))});
    if (!(asym <= kSkewGate)) {
        std::ostringstream os;
        os << "vee: matrix is not skew-symmetric (defect " << asym << ")";
        throw DomainError(os.str());
    }
    return {m(2, 1), m(0, 2), m(1, 0)};
}

Rotation cayley(const Vec3& v) {
    // Closed form of (I - hat(v)/2)^{-1} (I + hat(v)/2); the inverse always
    // exists since det(I - hat(v)/2) = 1 + |v|^2/4.
    const Mat3 w = hat(v);
    const double s = 4.0 / (4.0 + dot(v, v));
    return Rotation(Mat3::identity() + s * (w + 0.5 * (w * w)));
}

Vec3 cayley_inv(const Rotation& r) {
    const Mat3& m = r.matrix();
    // trace R = 1 + 2 cos(angle); the chart needs angle < pi.
    const double tr = m(0, 0) + m(1, 1) + m(2, 2);
    if (tr + 1.0 < 1e-12) {
        throw DomainError("cayley_inv: rotation at or near angle pi is outside the Cayley chart");
    }
    const Mat3 num = m - Mat3::identity();
    const Mat3 den = m + Mat3::identity();
    // hat(v) = 2 (R - I)(R + I)^{-1}, computed column-wise via 3x3 solves of
    // the transposed system: X = N D^{-1}  <=>  D^T X^T = N^T.
    const Mat3 dt = den.transposed();
    const Mat3 nt = num.transposed();
    Mat3 xt;
    for (int c = 0; c < 3; ++c) {
        const Vec3 col = solve3(dt, {nt(0, c), nt(1, c), nt(2, c)});
        xt(0, c) = col.x;
        xt(1, c) = col.y;
        xt(2, c) = col.z;
    }
    const Mat3 skew = 2.0 * xt.transposed();
    // Exactly skew in exact arithmetic; average off-diagonal pairs to shed rounding.
    return {0.5 * (skew(2, 1) - skew(1, 2)), 0.5 * (skew(0, 2) - skew(2, 0)),
            0.5 * (skew(1, 0) - skew(0, 1))};
}

Vec3 dcayinv_dual(const Vec3& xi, double dt, const Vec3& mu) {
    return mu + (0.5 * dt) * cross(xi, mu) - (0.25 * dt * dt * dot(xi, mu)) * xi;
}

Vec3 Ad_star(const Rotation& r, const Vec3& mu) { return r.matrix().transposed() * mu; }

} // namespace lmp
