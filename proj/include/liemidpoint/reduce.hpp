#pragma once

#include <cstddef>
#include <span>

namespace lmp {

/// Pairwise (recursive halving) summation. Deterministic for a given input
/// order, and associative across power-of-two block boundaries: summing
/// aligned power-of-two blocks first and then their totals reproduces the
/// full sum bit-for-bit. Wiener-path coarsening and ensemble reductions rely
/// on that alignment.
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n == 1) return v[0];
    if (n == 2) return v[0] + v[1];
    const std::size_t half = n / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

} // namespace lmp
