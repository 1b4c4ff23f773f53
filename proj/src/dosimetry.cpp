#include "wpt/dosimetry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "wpt/elliptic.hpp"
#include "wpt/errors.hpp"

namespace wpt {

namespace {
constexpr double k_eps0 = 8.8541878128e-12;
}

void TissuePhantom::validate() const {
    std::vector<std::string> bad;
    if (!(radius > 0.0)) bad.push_back("phantom.radius: must be > 0");
    if (!(length > 0.0)) bad.push_back("phantom.length: must be > 0");
    if (!(sigma > 0.0)) bad.push_back("phantom.sigma: must be > 0");
    if (!(rho > 0.0)) bad.push_back("phantom.rho: must be > 0");
    if (!bad.empty()) throw validation_error(std::move(bad));
}

double FieldMap::max_e() const { return *std::max_element(e_peak.begin(), e_peak.end()); }
double FieldMap::max_j() const { return *std::max_element(j_peak.begin(), j_peak.end()); }
double FieldMap::max_b() const { return *std::max_element(b_peak.begin(), b_peak.end()); }

Vec3 b_field_loop(double radius, double current, const Vec3& point) {
    if (!(radius > 0.0)) throw std::domain_error("b_field_loop: radius must be > 0");
    const double rho = std::hypot(point.x, point.y);
    const double z = point.z;
    const double a = radius;

    if (rho < 1e-12 * a) {
        // on-axis closed form
        const double denom = std::pow(a * a + z * z, 1.5);
        return {0.0, 0.0, k_mu0 * current * a * a / (2.0 * denom)};
    }

    const double alpha2 = a * a + rho * rho + z * z - 2.0 * a * rho;
    const double beta2 = a * a + rho * rho + z * z + 2.0 * a * rho;
    if (alpha2 <= 0.0 || alpha2 < 1e-24 * beta2) {
        throw std::domain_error("b_field_loop: point lies on the filament");
    }
    const double beta = std::sqrt(beta2);
    const double m = 1.0 - alpha2 / beta2; // elliptic parameter k^2
    const auto [kk, ee] = elliptic_ke(m);
    const double c = k_mu0 * current / std::numbers::pi;
    const double b_rho =
        c * z / (2.0 * alpha2 * beta * rho) * ((a * a + rho * rho + z * z) * ee - alpha2 * kk);
    const double b_z =
        c / (2.0 * alpha2 * beta) * ((a * a - rho * rho - z * z) * ee + alpha2 * kk);
    const double inv_rho = 1.0 / rho;
    return {b_rho * point.x * inv_rho, b_rho * point.y * inv_rho, b_z};
}

namespace {

struct Loop {
    double radius;
    double z_center;
};

// Vector potential of one filament loop by midpoint quadrature around the
// circumference; spectrally accurate off the loop.
Vec3 loop_vector_potential(const Loop& loop, double current, const Vec3& p, int segments) {
    const double dphi = 2.0 * std::numbers::pi / segments;
    double ax = 0.0;
    double ay = 0.0;
    for (int j = 0; j < segments; ++j) {
        const double phi = (j + 0.5) * dphi;
        const double cs = std::cos(phi);
        const double sn = std::sin(phi);
        const double sx = loop.radius * cs;
        const double sy = loop.radius * sn;
        const double dx = p.x - sx;
        const double dy = p.y - sy;
        const double dz = p.z - loop.z_center;
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        const double dl = loop.radius * dphi / r;
        ax += -sn * dl;
        ay += cs * dl;
    }
    const double c = k_mu0 * current / (4.0 * std::numbers::pi);
    return {c * ax, c * ay, 0.0};
}

} // namespace

FieldMap induced_fields(const TissuePhantom& phantom, const CoilSpec& coil,
                        double surface_gap, double i_peak, double frequency,
                        double spacing, const FieldOptions& opts) {
    phantom.validate();
    coil.validate("coil");
    if (!(surface_gap > 0.0)) {
        throw std::domain_error("induced_fields: coil must sit outside the phantom");
    }
    if (!(spacing > 0.0) || spacing > 2e-3 + 1e-12) {
        throw std::domain_error("induced_fields: spacing must lie in (0, 2 mm]");
    }
    if (!(frequency > 0.0)) throw std::domain_error("induced_fields: frequency must be > 0");

    FieldMap map;
    map.spacing = spacing;
    map.i_ref = i_peak;
    map.frequency = frequency;
    const double hx = phantom.length / 2.0;
    const double r = phantom.radius;
    map.dims = {static_cast<int>(std::floor(2.0 * hx / spacing)) + 1,
                static_cast<int>(std::floor(2.0 * r / spacing)) + 1,
                static_cast<int>(std::floor(2.0 * r / spacing)) + 1};
    map.origin = {-0.5 * (map.dims[0] - 1) * spacing, -0.5 * (map.dims[1] - 1) * spacing,
                  -0.5 * (map.dims[2] - 1) * spacing};
    map.inside.assign(map.size(), 0);
    map.e_peak.assign(map.size(), 0.0);
    map.j_peak.assign(map.size(), 0.0);
    map.b_peak.assign(map.size(), 0.0);

    // coil axis along z through the cylinder axis, plane at z = r + gap
    const double z_coil = r + surface_gap;
    std::vector<Loop> loops;
    loops.reserve(coil.filaments.size());
    for (const auto& f : coil.filaments) {
        loops.push_back({f.radius, z_coil + f.axial_offset});
    }

    const double w = 2.0 * std::numbers::pi * frequency;
    const double j_factor = opts.complex_admittivity
                                ? std::hypot(phantom.sigma, w * k_eps0 * phantom.eps_r)
                                : phantom.sigma;
    const double scale = coil.turns_scale * i_peak;
    const auto total = static_cast<long>(map.size());
    std::atomic<int> excluded{0};

    const bool parallel = opts.parallel;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (long flat = 0; flat < total; ++flat) {
        const int ix = static_cast<int>(flat / (map.dims[1] * map.dims[2]));
        const int rem = static_cast<int>(flat % (map.dims[1] * map.dims[2]));
        const int iy = rem / map.dims[2];
        const int iz = rem % map.dims[2];
        const Vec3 p = map.point(ix, iy, iz);
        if (p.y * p.y + p.z * p.z > r * r || std::abs(p.x) > hx) continue;
        map.inside[static_cast<size_t>(flat)] = 1;

        Vec3 a_total{};
        Vec3 b_total{};
        bool bad = false;
        for (const auto& loop : loops) {
            const Vec3 a = loop_vector_potential(loop, scale, p, opts.quadrature_segments);
            a_total.x += a.x;
            a_total.y += a.y;
            try {
                const Vec3 b =
                    b_field_loop(loop.radius, scale, {p.x, p.y, p.z - loop.z_center});
                b_total.x += b.x;
                b_total.y += b.y;
                b_total.z += b.z;
            } catch (const std::domain_error&) {
                bad = true;
                break;
            }
        }
        if (bad) {
            excluded.fetch_add(1, std::memory_order_relaxed);
            map.inside[static_cast<size_t>(flat)] = 0;
            continue;
        }
        const double e = w * std::hypot(a_total.x, a_total.y);
        map.e_peak[static_cast<size_t>(flat)] = e;
        map.j_peak[static_cast<size_t>(flat)] = j_factor * e;
        map.b_peak[static_cast<size_t>(flat)] =
            std::sqrt(b_total.x * b_total.x + b_total.y * b_total.y + b_total.z * b_total.z);
    }
    map.excluded_points = excluded.load();
    return map;
}

double sar_10g(const FieldMap& map, const TissuePhantom& phantom) {
    if (map.size() == 0) throw std::invalid_argument("sar_10g: empty map");
    if (map.spacing > 5e-3 + 1e-12) {
        throw std::domain_error("sar_10g: grid spacing must be <= 5 mm");
    }
    const double side = std::cbrt(0.010 / phantom.rho);
    if (side > phantom.length || side > 2.0 * phantom.radius) {
        throw std::domain_error("sar_10g: averaging cube larger than the phantom");
    }
    const int half = static_cast<int>(std::lround((side / map.spacing - 1.0) / 2.0));

    const int nx = map.dims[0];
    const int ny = map.dims[1];
    const int nz = map.dims[2];
    const double sar_scale = phantom.sigma / (2.0 * phantom.rho); // sigma*(E/sqrt2)^2/rho

    // summed-area tables over local SAR and inside-node count
    const size_t n1 = static_cast<size_t>(nx + 1) * (ny + 1) * (nz + 1);
    std::vector<double> psum(n1, 0.0);
    std::vector<double> pcount(n1, 0.0);
    auto pidx = [&](int ix, int iy, int iz) {
        return (static_cast<size_t>(ix) * (ny + 1) + iy) * (nz + 1) + iz;
    };
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            for (int iz = 0; iz < nz; ++iz) {
                const size_t i = map.index(ix, iy, iz);
                const double e = map.e_peak[i];
                const double v = map.inside[i] ? sar_scale * e * e : 0.0;
                const double c = map.inside[i] ? 1.0 : 0.0;
                psum[pidx(ix + 1, iy + 1, iz + 1)] =
                    v + psum[pidx(ix, iy + 1, iz + 1)] + psum[pidx(ix + 1, iy, iz + 1)] +
                    psum[pidx(ix + 1, iy + 1, iz)] - psum[pidx(ix, iy, iz + 1)] -
                    psum[pidx(ix, iy + 1, iz)] - psum[pidx(ix + 1, iy, iz)] +
                    psum[pidx(ix, iy, iz)];
                pcount[pidx(ix + 1, iy + 1, iz + 1)] =
                    c + pcount[pidx(ix, iy + 1, iz + 1)] + pcount[pidx(ix + 1, iy, iz + 1)] +
                    pcount[pidx(ix + 1, iy + 1, iz)] - pcount[pidx(ix, iy, iz + 1)] -
                    pcount[pidx(ix, iy + 1, iz)] - pcount[pidx(ix + 1, iy, iz)] +
                    pcount[pidx(ix, iy, iz)];
            }
        }
    }
    auto box = [&](const std::vector<double>& p, int x0, int x1, int y0, int y1, int z0,
                   int z1) {
        // inclusive node ranges
        return p[pidx(x1 + 1, y1 + 1, z1 + 1)] - p[pidx(x0, y1 + 1, z1 + 1)] -
               p[pidx(x1 + 1, y0, z1 + 1)] - p[pidx(x1 + 1, y1 + 1, z0)] +
               p[pidx(x0, y0, z1 + 1)] + p[pidx(x0, y1 + 1, z0)] + p[pidx(x1 + 1, y0, z0)] -
               p[pidx(x0, y0, z0)];
    };

    double best = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : best)
#endif
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            for (int iz = 0; iz < nz; ++iz) {
                if (!map.inside[map.index(ix, iy, iz)]) continue;
                const int x0 = std::max(0, ix - half);
                const int x1 = std::min(nx - 1, ix + half);
                const int y0 = std::max(0, iy - half);
                const int y1 = std::min(ny - 1, iy + half);
                const int z0 = std::max(0, iz - half);
                const int z1 = std::min(nz - 1, iz + half);
                const double cnt = box(pcount, x0, x1, y0, y1, z0, z1);
                if (cnt < 0.5) continue;
                const double avg = box(psum, x0, x1, y0, y1, z0, z1) / cnt;
                best = std::max(best, avg);
            }
        }
    }
    return best;
}

double max_compliant_current(const ExposurePeaks& peaks, const ExposureLimits& limits) {
    if (!(peaks.i_ref > 0.0)) {
        throw std::domain_error("max_compliant_current: i_ref must be > 0");
    }
    if (peaks.sar_10g < 0.0 || peaks.e_peak < 0.0 || peaks.j_peak < 0.0) {
        throw std::domain_error("max_compliant_current: peaks must be >= 0");
    }
    const double rt2 = std::numbers::sqrt2;
    double best = std::numeric_limits<double>::infinity();
    if (peaks.j_peak > 0.0) {
        best = std::min(best, peaks.i_ref * limits.j_limit_rms / (peaks.j_peak / rt2));
    }
    if (peaks.e_peak > 0.0) {
        best = std::min(best, peaks.i_ref * limits.e_limit_rms / (peaks.e_peak / rt2));
    }
    if (peaks.sar_10g > 0.0) {
        best = std::min(best, peaks.i_ref * std::sqrt(limits.sar_10g_limit / peaks.sar_10g));
    }
    return best;
}

std::string fieldmap_to_csv(const FieldMap& map) {
    std::string out = "x_m,y_m,z_m,e_vpm,j_apm2,b_t\n";
    char line[200];
    for (int ix = 0; ix < map.dims[0]; ++ix) {
        for (int iy = 0; iy < map.dims[1]; ++iy) {
            for (int iz = 0; iz < map.dims[2]; ++iz) {
                const size_t i = map.index(ix, iy, iz);
                if (!map.inside[i]) continue;
                const Vec3 p = map.point(ix, iy, iz);
                std::snprintf(line, sizeof(line), "%.6e,%.6e,%.6e,%.9e,%.9e,%.9e\n", p.x,
                              p.y, p.z, map.e_peak[i], map.j_peak[i], map.b_peak[i]);
                out += line;
            }
        }
    }
    return out;
}

} // namespace wpt
