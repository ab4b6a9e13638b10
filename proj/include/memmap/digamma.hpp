#pragma once

#include <cmath>
#include <stdexcept>

namespace memmap {

/// psi(x) for x > 0 via recurrence shift to x >= 8 followed by the
/// asymptotic Bernoulli series. Absolute error below 1e-12.
inline double digamma(double x) {
    if (!(x > 0.0)) {
        throw std::invalid_argument("digamma: argument must be positive");
    }
    double acc = 0.0;
    while (x < 8.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // ln x - 1/(2x) - sum B_{2n} / (2n x^{2n}), n = 1..7
    const double series =
        inv2 * (1.0 / 12.0 -
        inv2 * (1.0 / 120.0 -
        inv2 * (1.0 / 252.0 -
        inv2 * (1.0 / 240.0 -
        inv2 * (1.0 / 132.0 -
        inv2 * (691.0 / 32760.0 -
        inv2 * (1.0 / 12.0)))))));
    return acc + std::log(x) - 0.5 * inv - series;
}

} // namespace memmap
