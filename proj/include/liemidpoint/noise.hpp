#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "liemidpoint/errors.hpp"

namespace lmp {

/// Clipping level D_dt for Wiener increments.
struct TruncationLevel {
    double d = 0.0;
};

/// The paper's choice D_dt = sqrt(4 |ln dt| dt), valid for 0 < dt < 1.
TruncationLevel default_level(double dt);

/// Clip w to [-d, d].
double truncate(double w, TruncationLevel level);

/// Matrix of raw Wiener increments over `steps` steps and `channels`
/// independent channels at step size dt. Entries are N(0, dt) draws from a
/// counter-based generator, so a (seed, steps, channels, dt) tuple always
/// reproduces the same grid. Increments are stored untruncated; clipping
/// happens where they are consumed.
class WienerGrid {
public:
    WienerGrid(double dt, std::int64_t steps, int channels, std::vector<double> increments);

    /// Draw a fresh grid. Entry (k, i) depends only on (seed, k, i), not on
    /// the grid shape, so extending a grid re-derives the same prefix.
    static WienerGrid generate(std::uint64_t seed, std::int64_t steps, int channels, double dt);

    double dt() const { return dt_; }
    std::int64_t steps() const { return steps_; }
    int channels() const { return channels_; }

    double at(std::int64_t step, int channel) const {
        return increments_[static_cast<std::size_t>(step) * channels_ + channel];
    }
    const std::vector<double>& increments() const { return increments_; }

    /// Merge groups of m consecutive increments by aligned pairwise
    /// summation, so that for power-of-two shapes channel_total() of the
    /// coarse grid equals channel_total() of the fine grid bit-for-bit.
    /// m must divide steps().
    WienerGrid coarsen(std::int64_t m) const;

    /// Total displacement W(T) of one channel (pairwise summation).
    double channel_total(int channel) const;

    /// One row per step, one column per channel.
    void write_csv(std::ostream& os) const;

private:
    double dt_;
    std::int64_t steps_;
    int channels_;
    std::vector<double> increments_;
};

namespace rng {

/// SplitMix64 output function (bijective on 64-bit words).
std::uint64_t mix64(std::uint64_t z);

/// Key for an independent substream; injective in `stream` for a fixed seed.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream);

/// n-th output of SplitMix64 run in counter mode from `key`.
std::uint64_t counter_output(std::uint64_t key, std::uint64_t counter);

/// Uniform draw in the open interval (0, 1) from a 64-bit word.
double to_open_unit(std::uint64_t bits);

/// Inverse normal CDF (Wichura's AS241, double precision). Deterministic
/// transform: no rejection loops, so the draw count per sample is fixed.
double normal_quantile(double p);

/// Standard normal draw for (key, counter).
double standard_normal(std::uint64_t key, std::uint64_t counter);

} // namespace rng

} // namespace lmp
