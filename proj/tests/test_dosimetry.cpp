#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "wpt/dosimetry.hpp"
#include "wpt/errors.hpp"
#include "wpt/magnetics.hpp"

using namespace wpt;

namespace {

// short phantom keeps the grids small in unit tests
TissuePhantom small_phantom() {
    TissuePhantom p;
    p.length = 0.12;
    return p;
}

} // namespace

TEST_CASE("loop field at the center and along the axis") {
    // mu0 * I / (2a) at the center of a 25 mm loop
    const Vec3 b = b_field_loop(25e-3, 1.0, {0.0, 0.0, 0.0});
    CHECK(b.x == 0.0);
    CHECK(b.y == 0.0);
    CHECK(b.z == doctest::Approx(2.5132741228718e-5).epsilon(1e-10));

    // zero current gives the zero vector
    const Vec3 z = b_field_loop(25e-3, 0.0, {5e-3, 2e-3, 7e-3});
    CHECK(z.x == 0.0);
    CHECK(z.y == 0.0);
    CHECK(z.z == 0.0);

    // far on-axis point approaches the dipole law within 1.5%
    const double a = 25e-3;
    const double zz = 10.0 * a;
    const Vec3 far = b_field_loop(a, 1.0, {0.0, 0.0, zz});
    const double dipole = k_mu0 * 1.0 * a * a / (2.0 * zz * zz * zz);
    CHECK(std::abs(far.z - dipole) / dipole < 0.015);

    // the elliptic-integral branch agrees with the on-axis closed form
    const Vec3 off = b_field_loop(a, 1.0, {1e-9, 0.0, 10e-3});
    const Vec3 on = b_field_loop(a, 1.0, {0.0, 0.0, 10e-3});
    CHECK(off.z == doctest::Approx(on.z).epsilon(1e-9));

    CHECK_THROWS_AS(b_field_loop(a, 1.0, {a, 0.0, 0.0}), std::domain_error);
}

TEST_CASE("on-axis field decays monotonically with distance") {
    double prev = b_field_loop(25e-3, 1.0, {0.0, 0.0, 1e-3}).z;
    for (double z = 2e-3; z <= 100e-3; z += 1e-3) {
        const double bz = b_field_loop(25e-3, 1.0, {0.0, 0.0, z}).z;
        REQUIRE(bz < prev);
        REQUIRE(bz > 0.0);
        prev = bz;
    }
}

TEST_CASE("induced field map basics") {
    const TissuePhantom phantom = small_phantom();
    const CoilSpec coil = CoilSpec::uniform(24e-6, 0.15, 25e-3);

    SUBCASE("zero current gives an all-zero map") {
        const FieldMap map = induced_fields(phantom, coil, 6e-3, 0.0, 127e3, 2e-3);
        CHECK(map.max_e() == 0.0);
        CHECK(map.max_j() == 0.0);
        CHECK(map.max_b() == 0.0);
    }

    SUBCASE("linearity in the coil current to 1e-12") {
        const FieldMap m1 = induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 2e-3);
        const FieldMap m3 = induced_fields(phantom, coil, 6e-3, 3.0, 127e3, 2e-3);
        REQUIRE(m1.size() == m3.size());
        for (size_t i = 0; i < m1.size(); ++i) {
            if (!m1.inside[i]) continue;
            if (m1.e_peak[i] > 0.0) {
                REQUIRE(m3.e_peak[i] / m1.e_peak[i] == doctest::Approx(3.0).epsilon(1e-12));
                REQUIRE(m3.j_peak[i] / m1.j_peak[i] == doctest::Approx(3.0).epsilon(1e-12));
            }
        }
    }

    SUBCASE("grid points lie inside the phantom") {
        const FieldMap map = induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 2e-3);
        int inside_count = 0;
        for (int ix = 0; ix < map.dims[0]; ++ix) {
            for (int iy = 0; iy < map.dims[1]; ++iy) {
                for (int iz = 0; iz < map.dims[2]; ++iz) {
                    if (!map.inside[map.index(ix, iy, iz)]) continue;
                    const Vec3 p = map.point(ix, iy, iz);
                    REQUIRE(p.y * p.y + p.z * p.z <= phantom.radius * phantom.radius + 1e-12);
                    REQUIRE(std::abs(p.x) <= phantom.length / 2 + 1e-12);
                    ++inside_count;
                }
            }
        }
        CHECK(inside_count > 1000);
        CHECK(map.excluded_points == 0);
    }

    SUBCASE("serial and parallel fills are bitwise identical") {
        FieldOptions ser;
        ser.parallel = false;
        FieldOptions par;
        par.parallel = true;
        const FieldMap ms = induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 2e-3, ser);
        const FieldMap mp = induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 2e-3, par);
        REQUIRE(ms.size() == mp.size());
        for (size_t i = 0; i < ms.size(); ++i) {
            REQUIRE(ms.e_peak[i] == mp.e_peak[i]);
            REQUIRE(ms.j_peak[i] == mp.j_peak[i]);
            REQUIRE(ms.b_peak[i] == mp.b_peak[i]);
        }
    }

    SUBCASE("conduction vs complex-admittivity current density") {
        FieldOptions adm;
        adm.complex_admittivity = true;
        const FieldMap mc = induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 2e-3);
        const FieldMap ma = induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 2e-3, adm);
        // |sigma + jw eps| > sigma at 127 kHz for this permittivity
        CHECK(ma.max_j() > mc.max_j());
        CHECK(mc.max_j() == doctest::Approx(phantom.sigma * mc.max_e()).epsilon(1e-12));
    }

    SUBCASE("preconditions") {
        CHECK_THROWS_AS(induced_fields(phantom, coil, -1e-3, 1.0, 127e3, 2e-3),
                        std::domain_error);
        CHECK_THROWS_AS(induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 3e-3),
                        std::domain_error);
    }
}

TEST_CASE("sar_10g properties") {
    const TissuePhantom phantom = small_phantom();
    const CoilSpec coil = CoilSpec::uniform(24e-6, 0.15, 25e-3);
    const FieldMap map = induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 2e-3);

    SUBCASE("zero map gives zero SAR") {
        FieldMap zero = map;
        std::fill(zero.e_peak.begin(), zero.e_peak.end(), 0.0);
        CHECK(sar_10g(zero, phantom) == 0.0);
    }

    SUBCASE("uniform field makes the average the identity") {
        FieldMap flat = map;
        for (size_t i = 0; i < flat.size(); ++i) flat.e_peak[i] = flat.inside[i] ? 10.0 : 0.0;
        const double want = phantom.sigma * (10.0 / std::numbers::sqrt2) *
                            (10.0 / std::numbers::sqrt2) / phantom.rho;
        CHECK(sar_10g(flat, phantom) == doctest::Approx(want).epsilon(1e-12));
    }

    SUBCASE("quadratic scaling in current to 1e-9") {
        const FieldMap m2 = induced_fields(phantom, coil, 6e-3, 2.0, 127e3, 2e-3);
        const double s1 = sar_10g(map, phantom);
        const double s2 = sar_10g(m2, phantom);
        CHECK(s2 / s1 == doctest::Approx(4.0).epsilon(1e-9));
    }

    SUBCASE("averaging smooths below the raw peak") {
        double raw_peak = 0.0;
        for (size_t i = 0; i < map.size(); ++i) {
            if (!map.inside[i]) continue;
            const double e = map.e_peak[i];
            raw_peak = std::max(raw_peak, phantom.sigma * e * e / (2.0 * phantom.rho));
        }
        CHECK(sar_10g(map, phantom) < raw_peak);
        CHECK(sar_10g(map, phantom) > 0.0);
    }

    SUBCASE("cube larger than the phantom is a geometry error") {
        TissuePhantom thin = phantom;
        thin.radius = 8e-3; // 16 mm diameter < ~21 mm cube side
        FieldMap small = induced_fields(thin, coil, 6e-3, 1.0, 127e3, 2e-3);
        CHECK_THROWS_AS(sar_10g(small, thin), std::domain_error);
    }
}

TEST_CASE("max compliant current") {
    const ExposureLimits limits;

    SUBCASE("published peak set reproduces the 1.74 A bound") {
        const ExposurePeaks peaks{0.326e-3, 3.46, 0.206, 1.0};
        const double i = max_compliant_current(peaks, limits);
        CHECK(i == doctest::Approx(1.7437).epsilon(1e-4));
        CHECK(i == doctest::Approx(1.744).epsilon(0.005));
    }

    SUBCASE("all-zero peaks are unbounded") {
        const ExposurePeaks peaks{0.0, 0.0, 0.0, 1.0};
        CHECK(std::isinf(max_compliant_current(peaks, limits)));
    }

    SUBCASE("zero entries are non-binding, not errors") {
        const ExposurePeaks peaks{0.0, 0.0, 0.206, 1.0};
        CHECK(max_compliant_current(peaks, limits) == doctest::Approx(1.7437).epsilon(1e-4));
    }

    SUBCASE("scale invariance") {
        const ExposurePeaks a{0.326e-3, 3.46, 0.206, 1.0};
        const ExposurePeaks b{4 * 0.326e-3, 2 * 3.46, 2 * 0.206, 2.0};
        CHECK(max_compliant_current(a, limits) ==
              doctest::Approx(max_compliant_current(b, limits)).epsilon(1e-12));
    }

    SUBCASE("rescaling a map to its own compliant current meets every limit") {
        const TissuePhantom phantom = small_phantom();
        const CoilSpec coil = CoilSpec::uniform(24e-6, 0.15, 25e-3);
        const FieldMap map = induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 2e-3);
        const ExposurePeaks peaks{sar_10g(map, phantom), map.max_e(), map.max_j(), map.i_ref};
        const double i_max = max_compliant_current(peaks, limits);
        const double scale = i_max / peaks.i_ref;
        CHECK(peaks.j_peak * scale / std::numbers::sqrt2 <= limits.j_limit_rms * (1 + 1e-9));
        CHECK(peaks.e_peak * scale / std::numbers::sqrt2 <= limits.e_limit_rms * (1 + 1e-9));
        CHECK(peaks.sar_10g * scale * scale <= limits.sar_10g_limit * (1 + 1e-9));
    }

    CHECK_THROWS_AS(max_compliant_current({0.1, 1.0, 0.1, 0.0}, limits), std::domain_error);
}

TEST_CASE("field map CSV starts with the canonical header") {
    const TissuePhantom phantom = small_phantom();
    const CoilSpec coil = CoilSpec::uniform(24e-6, 0.15, 25e-3);
    FieldOptions opts;
    const FieldMap map = induced_fields(phantom, coil, 6e-3, 1.0, 127e3, 2e-3, opts);
    const std::string csv = fieldmap_to_csv(map);
    CHECK(csv.rfind("x_m,y_m,z_m,e_vpm,j_apm2,b_t\n", 0) == 0);
}
