#include "liemidpoint/noise.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "liemidpoint/format.hpp"
#include "liemidpoint/reduce.hpp"

namespace lmp {

TruncationLevel default_level(double dt) {
    if (!(dt > 0.0) || dt >= 1.0) {
        std::ostringstream os;
        os << "default_level: dt must lie in (0, 1), got " << dt;
        throw DomainError(os.str());
    }
    return TruncationLevel{std::sqrt(4.0 * std::fabs(std::log(dt)) * dt)};
}

double truncate(double w, TruncationLevel level) {
    if (w > level.d) return level.d;
    if (w < -level.d) return -level.d;
    return w;
}

namespace rng {

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ (0xa0761d6478bd642fULL * (stream + 1)));
}

std::uint64_t counter_output(std::uint64_t key, std::uint64_t counter) {
    return mix64(key + (counter + 1) * 0x9e3779b97f4a7c15ULL);
}

double to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double normal_quantile(double p) {
    // Wichura (1988), algorithm AS241, PPND16. Relative error below 1e-15
    // over (0, 1); uses only arithmetic, sqrt, and log.
    static constexpr double a[8] = {
        3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
        1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
        3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[8] = {
        1.0,                      4.2313330701600911252e+1, 6.8718700749205790830e+2,
        5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
        2.8729085735721942674e+4, 5.2264952788528545610e+3};
    static constexpr double c[8] = {
        1.42343711074968357734e0,  4.63033784615654529590e0,  5.76949722146069140550e0,
        3.64784832476320460504e0,  1.27045825245236838258e0,  2.41780725177450611770e-1,
        2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[8] = {
        1.0,                       2.05319162663775882187e0,  1.67638483018380384940e0,
        6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
        5.47593808499534494600e-4, 1.05075007164441684324e-9};
    static constexpr double e[8] = {
        6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
        2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
        2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[8] = {
        1.0,                       5.99832206555887937690e-1, 1.36929880922735805310e-1,
        1.48753612908506150230e-2, 7.86869131145613294790e-4, 1.84631831751005468180e-5,
        1.42151175831644588870e-7, 2.04426310338993978564e-15};

    auto ratio = [](const double (&num)[8], const double (&den)[8], double r) {
        double n = num[7], m = den[7];
        for (int i = 6; i >= 0; --i) {
            n = n * r + num[i];
            m = m * r + den[i];
        }
        return n / m;
    };

    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * ratio(a, b, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        value = ratio(c, d, r - 1.6);
    } else {
        value = ratio(e, f, r - 5.0);
    }
    return q < 0.0 ? -value : value;
}

double standard_normal(std::uint64_t key, std::uint64_t counter) {
    return normal_quantile(to_open_unit(counter_output(key, counter)));
}

} // namespace rng

WienerGrid::WienerGrid(double dt, std::int64_t steps, int channels, std::vector<double> increments)
    : dt_(dt), steps_(steps), channels_(channels), increments_(std::move(increments)) {
    if (!(dt_ > 0.0)) throw DomainError("WienerGrid: dt must be positive");
    if (steps_ < 1) throw DomainError("WienerGrid: steps must be >= 1");
    if (channels_ < 1) throw DomainError("WienerGrid: channels must be >= 1");
    if (increments_.size() != static_cast<std::size_t>(steps_) * channels_) {
        throw DomainError("WienerGrid: increment buffer does not match steps x channels");
    }
    for (double v : increments_) {
        if (!std::isfinite(v)) throw DomainError("WienerGrid: non-finite increment");
    }
}

WienerGrid WienerGrid::generate(std::uint64_t seed, std::int64_t steps, int channels, double dt) {
    if (steps < 1) throw DomainError("WienerGrid::generate: steps must be >= 1");
    if (channels < 1) throw DomainError("WienerGrid::generate: channels must be >= 1");
    if (!(dt > 0.0)) throw DomainError("WienerGrid::generate: dt must be positive");

    const double scale = std::sqrt(dt);
    std::vector<double> inc(static_cast<std::size_t>(steps) * channels);
    for (int i = 0; i < channels; ++i) {
        // One substream per channel, so entry (k, i) is a function of
        // (seed, k, i) alone.
        const std::uint64_t key = rng::derive_stream(seed, static_cast<std::uint64_t>(i));
        for (std::int64_t k = 0; k < steps; ++k) {
            inc[static_cast<std::size_t>(k) * channels + i] =
                scale * rng::standard_normal(key, static_cast<std::uint64_t>(k));
        }
    }
    return WienerGrid(dt, steps, channels, std::move(inc));
}

WienerGrid WienerGrid::coarsen(std::int64_t m) const {
    if (m < 1) throw DomainError("WienerGrid::coarsen: factor must be >= 1");
    if (steps_ % m != 0) {
        std::ostringstream os;
        os << "WienerGrid::coarsen: factor " << m << " does not divide " << steps_ << " steps";
        throw DomainError(os.str());
    }
    const std::int64_t coarse_steps = steps_ / m;
    std::vector<double> inc(static_cast<std::size_t>(coarse_steps) * channels_);
    std::vector<double> group(static_cast<std::size_t>(m));
    for (std::int64_t k = 0; k < coarse_steps; ++k) {
        for (int i = 0; i < channels_; ++i) {
            for (std::int64_t j = 0; j < m; ++j) group[static_cast<std::size_t>(j)] = at(k * m + j, i);
            inc[static_cast<std::size_t>(k) * channels_ + i] = pairwise_sum(group);
        }
    }
    return WienerGrid(dt_ * static_cast<double>(m), coarse_steps, channels_, std::move(inc));
}

double WienerGrid::channel_total(int channel) const {
    std::vector<double> col(static_cast<std::size_t>(steps_));
    for (std::int64_t k = 0; k < steps_; ++k) col[static_cast<std::size_t>(k)] = at(k, channel);
    return pairwise_sum(col);
}

void WienerGrid::write_csv(std::ostream& os) const {
    for (std::int64_t k = 0; k < steps_; ++k) {
        for (int i = 0; i < channels_; ++i) {
            if (i) os << ',';
            os << format_double(at(k, i));
        }
        os << '\n';
    }
}

} // namespace lmp
