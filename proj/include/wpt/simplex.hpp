#pragma once

#include <functional>
#include <vector>

namespace wpt {

struct SimplexOptions {
    int max_evaluations = 400;
    double f_tolerance = 1e-10; // spread of simplex values
    double x_tolerance = 1e-9;  // relative simplex diameter
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
    int evaluations = 0;
};

// Derivative-free Nelder-Mead minimization with the standard
// reflection/expansion/contraction/shrink coefficients. Deterministic for a
// fixed starting point and step vector.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          const std::vector<double>& x0, const std::vector<double>& steps,
                          const SimplexOptions& opts = {});

} // namespace wpt
