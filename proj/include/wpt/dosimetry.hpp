#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wpt/magnetics.hpp"

namespace wpt {

// Homogeneous tissue cylinder standing in for the limb. The axis runs along
// x; the coil sits above the curved surface on the +z side.
struct TissuePhantom {
    double radius = 0.040;   // m
    double length = 0.650;   // m
    double sigma = 0.082078; // S/m
    double eps_r = 12960.0;
    double rho = 1100.0; // kg/m^3

    void validate() const;
};

struct ExposureLimits {
    double sar_10g_limit = 2.0;  // W/kg
    double e_limit_rms = 17.1;   // V/m
    double j_limit_rms = 0.254;  // A/m^2
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct FieldOptions {
    bool complex_admittivity = false; // J = |sigma + j*w*eps0*eps_r| * E instead of sigma*E
    bool parallel = true;             // OpenMP over grid nodes; serial path kept for reference
    int quadrature_segments = 128;    // per-loop discretization of the vector potential
};

// Peak-field samples on a regular lattice clipped to the phantom. Values are
// stored densely per lattice node; nodes outside the phantom carry zeros and
// inside[] = 0.
struct FieldMap {
    double spacing = 0.0;
    std::array<double, 3> origin{};
    std::array<int, 3> dims{};
    std::vector<std::uint8_t> inside;
    std::vector<double> e_peak; // V/m
    std::vector<double> j_peak; // A/m^2
    std::vector<double> b_peak; // T
    double i_ref = 0.0;         // A, coil current the map was computed at
    double frequency = 0.0;     // Hz
    int excluded_points = 0;

    size_t index(int ix, int iy, int iz) const {
        return (static_cast<size_t>(ix) * dims[1] + iy) * dims[2] + iz;
    }
    size_t size() const {
        return static_cast<size_t>(dims[0]) * dims[1] * dims[2];
    }
    Vec3 point(int ix, int iy, int iz) const {
        return {origin[0] + ix * spacing, origin[1] + iy * spacing, origin[2] + iz * spacing};
    }
    double max_e() const;
    double max_j() const;
    double max_b() const;
};

// Field of one circular filament (radius a, current i, loop in the z = 0
// plane centered at the origin) at an arbitrary point, via the complete
// elliptic integrals. Throws std::domain_error on the filament itself.
Vec3 b_field_loop(double radius, double current, const Vec3& point);

// Quasi-static induced fields inside the phantom for the coil placed with
// its plane at surface_gap above the surface (axis through the cylinder
// axis). E_peak = w*|A| with A from per-loop quadrature; J from the
// conduction current; B from the elliptic kernel.
FieldMap induced_fields(const TissuePhantom& phantom, const CoilSpec& coil,
                        double surface_gap, double i_peak, double frequency,
                        double spacing, const FieldOptions& opts = {});

// Maximum over grid nodes of the 10-g cube average of local SAR
// sigma*(E_peak/sqrt(2))^2/rho, the cube clipped to the phantom with
// renormalized mass.
double sar_10g(const FieldMap& map, const TissuePhantom& phantom);

struct ExposurePeaks {
    double sar_10g = 0.0; // W/kg
    double e_peak = 0.0;  // V/m
    double j_peak = 0.0;  // A/m^2
    double i_ref = 0.0;   // A
};

// Largest coil current that keeps every quantity at or below its limit.
// Fields scale linearly with current and SAR quadratically; peak-to-RMS
// conversion assumes sinusoidal excitation. Non-binding (zero) peaks are
// skipped; all-zero peaks return +infinity.
double max_compliant_current(const ExposurePeaks& peaks, const ExposureLimits& limits);

// CSV with columns x_m,y_m,z_m,e_vpm,j_apm2,b_t over the inside nodes.
std::string fieldmap_to_csv(const FieldMap& map);

} // namespace wpt
