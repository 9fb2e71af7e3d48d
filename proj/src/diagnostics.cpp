#include "liemidpoint/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace lmp {

namespace {
constexpr double kGimbalGate = 1e-9;
constexpr double kSinThetaFloor = 1e-6;
constexpr double kTwoPi = 2.0 * M_PI;

double wrap_angle(double a) { return a < 0.0 ? a + kTwoPi : a; }
} // namespace

double orbit_radius(const Vec3& pi) { return norm(pi); }

Vec3 spatial_momentum(const Rotation& r, const Vec3& pi) { return r * pi; }

double heavytop_momentum_map(const Rotation& r, const Vec3& pi) {
    return spatial_momentum(r, pi).z;
}

std::pair<double, double> casimirs_ht(const Vec3& pi, const Vec3& gamma) {
    return {dot(gamma, gamma), dot(pi, gamma)};
}

Rotation rotation_from_euler(const EulerAngles& an) {
    const double cf = std::cos(an.phi), sf = std::sin(an.phi);
    const double ct = std::cos(an.theta), st = std::sin(an.theta);
    const double cp = std::cos(an.psi), sp = std::sin(an.psi);
    Mat3 m;
    m.a = {cf * cp - ct * sf * sp, -cf * sp - ct * sf * cp, st * sf,
           sf * cp + ct * cf * sp, -sf * sp + ct * cf * cp, -st * cf,
           st * sp,                st * cp,                 ct};
    return Rotation(m);
}

EulerAngles euler_from_rotation(const Rotation& r) {
    const Mat3& m = r.matrix();
    const double r33 = m(2, 2);
    if (std::fabs(r33) >= 1.0 - kGimbalGate) {
        std::ostringstream os;
        os << "euler_from_rotation: rotation fixes the z axis (R_33 = " << r33
           << "), Euler angles are degenerate";
        throw DomainError(os.str());
    }
    EulerAngles an;
    an.theta = std::acos(r33);
    an.phi = wrap_angle(std::atan2(m(0, 2), -m(1, 2)));
    an.psi = wrap_angle(std::atan2(m(2, 0), m(2, 1)));
    return an;
}

EulerRates euler_rates(const Vec3& pi, const Mat3& inertia, const EulerAngles& an) {
    const double st = std::sin(an.theta);
    if (st < kSinThetaFloor) {
        throw DomainError("euler_rates: sin(theta) below 1e-6, rates are degenerate");
    }
    const Vec3 omega = solve3(inertia, pi);
    const double cp = std::cos(an.psi), sp = std::sin(an.psi);
    EulerRates rates;
    rates.omega_theta = omega.x * cp - omega.y * sp;
    rates.omega_phi = (omega.x * sp + omega.y * cp) / st;
    rates.omega_psi = omega.z - rates.omega_phi * std::cos(an.theta);
    return rates;
}

std::pair<double, double> conjugate_momenta(const Vec3& pi, const Mat3& inertia,
                                            const EulerAngles& an) {
    const EulerRates rates = euler_rates(pi, inertia, an);
    const double i1 = inertia(0, 0);
    const double i3 = inertia(2, 2);
    const double ct = std::cos(an.theta), st = std::sin(an.theta);
    const double p_phi =
        (i1 * st * st + i3 * ct * ct) * rates.omega_phi + i3 * rates.omega_psi * ct;
    const double p_psi = i3 * (rates.omega_psi + rates.omega_phi * ct);
    return {p_phi, p_psi};
}

double effective_potential(double theta, double p_phi, double p_psi, double i1, double mgl) {
    const double st = std::sin(theta);
    const double num = p_phi - p_psi * std::cos(theta);
    return num * num / (2.0 * i1 * st * st) + mgl * std::cos(theta);
}

std::pair<double, double> nutation_bounds(double e_prime, double p_phi, double p_psi, double i1,
                                          double mgl) {
    constexpr double eps = 1e-8;
    auto v = [&](double th) { return effective_potential(th, p_phi, p_psi, i1, mgl); };

    // V is convex on (0, pi); locate the minimizer by golden-section search.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = eps, hi = M_PI - eps;
    double c = hi - gr * (hi - lo);
    double d = lo + gr * (hi - lo);
    double vc = v(c), vd = v(d);
    while (hi - lo > 1e-12) {
        if (vc < vd) {
            hi = d;
            d = c;
            vd = vc;
            c = hi - gr * (hi - lo);
            vc = v(c);
        } else {
            lo = c;
            c = d;
            vc = vd;
            d = lo + gr * (hi - lo);
            vd = v(d);
        }
    }
    const double theta_min = 0.5 * (lo + hi);
    const double v_min = v(theta_min);

    if (e_prime < v_min - 1e-12 * std::max(1.0, std::fabs(v_min))) {
        std::ostringstream os;
        os << "nutation_bounds: E' = " << e_prime << " lies below min V = " << v_min;
        throw DomainError(os.str());
    }
    if (e_prime <= v_min) return {theta_min, theta_min};

    auto bisect = [&](double a, double b) {
        // Root of V - E' on [a, b]; V - E' changes sign by construction.
        for (int i = 0; i < 200 && b - a > 1e-10; ++i) {
            const double mid = 0.5 * (a + b);
            if ((v(a) - e_prime) * (v(mid) - e_prime) <= 0.0) {
                b = mid;
            } else {
                a = mid;
            }
        }
        return 0.5 * (a + b);
    };

    const double left = v(eps) > e_prime ? bisect(eps, theta_min) : eps;
    const double right = v(M_PI - eps) > e_prime ? bisect(theta_min, M_PI - eps) : M_PI - eps;
    return {left, right};
}

DriftEntry drift_entry(std::string name, std::span<const double> series) {
    if (series.empty()) throw DomainError("drift_entry: empty series");
    DriftEntry e;
    e.name = std::move(name);
    e.initial = series[0];
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double dev = std::fabs(series[i] - e.initial);
        if (dev > e.max_abs_deviation) {
            e.max_abs_deviation = dev;
            e.step_of_max = i;
        }
    }
    return e;
}

DriftReport drift_report(const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    DriftReport report;
    report.entries.reserve(series.size());
    for (const auto& [name, values] : series) {
        report.entries.push_back(drift_entry(name, values));
    }
    return report;
}

const DriftEntry* DriftReport::find(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

std::string DriftReport::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : entries) {
        j.push_back({{"name", e.name},
                     {"initial", e.initial},
                     {"max_abs_deviation", e.max_abs_deviation},
                     {"step_of_max", e.step_of_max}});
    }
    return j.dump();
}

} // namespace lmp
