#include "wpt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wpt {

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          const std::vector<double>& x0, const std::vector<double>& steps,
                          const SimplexOptions& opts) {
    const size_t n = x0.size();
    if (n == 0 || steps.size() != n) {
        throw std::invalid_argument("nelder_mead: dimension mismatch");
    }

    std::vector<std::vector<double>> pts(n + 1, x0);
    for (size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];

    int evals = 0;
    std::vector<double> vals(n + 1);
    for (size_t i = 0; i <= n; ++i) {
        vals[i] = objective(pts[i]);
        ++evals;
    }

    std::vector<size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return vals[a] < vals[b]; });
    };

    SimplexResult result;
    while (evals < opts.max_evaluations) {
        sort_simplex();
        const size_t best = order[0];
        const size_t worst = order[n];
        const size_t second = order[n - 1];

        double spread = std::abs(vals[worst] - vals[best]);
        double diameter = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double scale = std::max(1.0, std::abs(pts[best][i]));
            diameter = std::max(diameter,
                                std::abs(pts[worst][i] - pts[best][i]) / scale);
        }
        if (spread < opts.f_tolerance && diameter < opts.x_tolerance) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (size_t d = 0; d < n; ++d) {
                p[d] = centroid[d] + coef * (pts[worst][d] - centroid[d]);
            }
            return p;
        };

        const auto reflected = blend(-1.0);
        const double f_ref = objective(reflected);
        ++evals;

        if (f_ref < vals[order[0]]) {
            const auto expanded = blend(-2.0);
            const double f_exp = objective(expanded);
            ++evals;
            if (f_exp < f_ref) {
                pts[worst] = expanded;
                vals[worst] = f_exp;
            } else {
                pts[worst] = reflected;
                vals[worst] = f_ref;
            }
        } else if (f_ref < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = f_ref;
        } else {
            const bool outside = f_ref < vals[worst];
            const auto contracted = blend(outside ? -0.5 : 0.5);
            const double f_con = objective(contracted);
            ++evals;
            if (f_con < std::min(f_ref, vals[worst])) {
                pts[worst] = contracted;
                vals[worst] = f_con;
            } else {
                // shrink toward the best vertex
                for (size_t i = 0; i <= n; ++i) {
                    if (i == order[0]) continue;
                    for (size_t d = 0; d < n; ++d) {
                        pts[i][d] = pts[order[0]][d] + 0.5 * (pts[i][d] - pts[order[0]][d]);
                    }
                    vals[i] = objective(pts[i]);
                    ++evals;
                }
            }
        }
    }

    sort_simplex();
    result.x = pts[order[0]];
    result.value = vals[order[0]];
    result.evaluations = evals;
    return result;
}

} // namespace wpt
