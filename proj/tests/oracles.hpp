// Independent reference computations used only by the test suites. These
// stay deliberately separate from the library implementation paths they
// check: the mutual-inductance oracle integrates the Neumann double line
// integral numerically instead of using Maxwell's closed form.
#pragma once

#include <cmath>
#include <numbers>

namespace oracle {

// Mutual inductance of coaxial circular loops by the Neumann formula,
// reduced by symmetry to a single integral:
//   M = (mu0/2) * a * b * \int_0^{2pi} cos(p) / sqrt(a^2 + b^2 - 2ab cos p + d^2) dp
// evaluated with composite Simpson on a fine grid.
inline double neumann_mutual(double a, double b, double d, int n = 20000) {
    const double mu0 = 1.25663706212e-6;
    auto f = [&](double p) {
        return std::cos(p) / std::sqrt(a * a + b * b - 2.0 * a * b * std::cos(p) + d * d);
    };
    if (n % 2 != 0) ++n;
    const double h = 2.0 * std::numbers::pi / n;
    double acc = f(0.0) + f(2.0 * std::numbers::pi);
    for (int i = 1; i < n; ++i) {
        acc += f(i * h) * (i % 2 == 0 ? 2.0 : 4.0);
    }
    const double integral = acc * h / 3.0;
    return 0.5 * mu0 * a * b * integral;
}

// Fundamental-suppression ratio of the k-th square-wave harmonic through a
// series RLC tank driven at resonance: (1/k) / sqrt(1 + Q^2 (k - 1/k)^2).
inline double rlc_harmonic_ratio(double q, int k) {
    const double detune = static_cast<double>(k) - 1.0 / static_cast<double>(k);
    return (1.0 / k) / std::sqrt(1.0 + q * q * detune * detune);
}

} // namespace oracle
