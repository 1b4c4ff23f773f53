#include "wpt/magnetics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "wpt/elliptic.hpp"
#include "wpt/errors.hpp"

namespace wpt {

CoilSpec CoilSpec::uniform(double inductance, double esr, double outer_radius,
                           int n_filaments) {
    if (n_filaments < 1) {
        throw std::invalid_argument("CoilSpec::uniform: need at least one filament");
    }
    CoilSpec coil;
    coil.inductance = inductance;
    coil.esr = esr;
    coil.outer_radius = outer_radius;
    coil.filaments.reserve(static_cast<size_t>(n_filaments));
    const double r_lo = 0.4 * outer_radius;
    for (int i = 0; i < n_filaments; ++i) {
        const double f = n_filaments == 1 ? 1.0
                                          : static_cast<double>(i) / (n_filaments - 1);
        coil.filaments.push_back({r_lo + f * (outer_radius - r_lo), 0.0});
    }
    coil.validate("coil");
    return coil;
}

void CoilSpec::validate(const char* label) const {
    std::vector<std::string> bad;
    const std::string p = std::string(label) + ".";
    if (!(inductance > 0.0)) bad.push_back(p + "inductance: must be > 0");
    if (!(esr >= 0.0)) bad.push_back(p + "esr: must be >= 0");
    if (!(outer_radius > 0.0)) bad.push_back(p + "outer_radius: must be > 0");
    if (filaments.empty()) bad.push_back(p + "filaments: at least one required");
    for (const auto& f : filaments) {
        if (!(f.radius > 0.0) || f.radius > outer_radius) {
            bad.push_back(p + "filaments: radius must lie in (0, outer_radius]");
            break;
        }
    }
    if (!bad.empty()) throw validation_error(std::move(bad));
}

void CouplingModel::validate() const {
    std::vector<std::string> bad;
    if (mode == CouplingMode::tabulated) {
        if (table.empty()) bad.push_back("coupling.table: empty in tabulated mode");
        for (size_t i = 0; i < table.size(); ++i) {
            if (!(table[i].second >= 0.0) || table[i].second >= 1.0) {
                bad.push_back("coupling.table: k values must lie in [0, 1)");
                break;
            }
        }
        for (size_t i = 1; i < table.size(); ++i) {
            if (!(table[i].first > table[i - 1].first)) {
                bad.push_back("coupling.table: distances must be strictly increasing");
                break;
            }
        }
    }
    if (!(k_scale > 0.0)) bad.push_back("coupling.k_scale: must be > 0");
    if (!bad.empty()) throw validation_error(std::move(bad));
}

double resonant_frequency(double inductance, double capacitance) {
    if (!(inductance > 0.0) || !(capacitance > 0.0)) {
        throw std::domain_error("resonant_frequency: L and C must be > 0");
    }
    return 1.0 / (2.0 * std::numbers::pi * std::sqrt(inductance * capacitance));
}

double resonance_capacitance(double inductance, double f_target) {
    if (!(inductance > 0.0) || !(f_target > 0.0)) {
        throw std::domain_error("resonance_capacitance: L and f must be > 0");
    }
    const double w = 2.0 * std::numbers::pi * f_target;
    return 1.0 / (w * w * inductance);
}

double mutual_inductance_loops(double radius_a, double radius_b, double separation) {
    if (!(radius_a > 0.0) || !(radius_b > 0.0) || !(separation >= 0.0)) {
        throw std::domain_error("mutual_inductance_loops: radii must be > 0 and d >= 0");
    }
    const double sum = radius_a + radius_b;
    const double m = 4.0 * radius_a * radius_b / (sum * sum + separation * separation);
    if (m >= 1.0) {
        // only reachable for d = 0, a = b
        throw std::domain_error("mutual_inductance_loops: coincident filaments");
    }
    const auto [kk, ee] = elliptic_ke(m);
    const double kappa = std::sqrt(m);
    return k_mu0 * std::sqrt(radius_a * radius_b) *
           ((2.0 / kappa - kappa) * kk - (2.0 / kappa) * ee);
}

double coil_mutual(const CoilSpec& tx, const CoilSpec& rx, double distance,
                   const CouplingModel& model) {
    if (!(distance > 0.0)) {
        throw std::domain_error("coil_mutual: distance must be > 0");
    }
    if (model.mode == CouplingMode::tabulated) {
        const auto& t = model.table;
        if (t.empty() || distance < t.front().first || distance > t.back().first) {
            throw std::out_of_range("coil_mutual: distance outside coupling table");
        }
        auto hi = std::lower_bound(t.begin(), t.end(), distance,
                                   [](const auto& row, double d) { return row.first < d; });
        double k;
        if (hi == t.begin()) {
            k = hi->second;
        } else {
            auto lo = std::prev(hi);
            const double f = (distance - lo->first) / (hi->first - lo->first);
            k = lo->second + f * (hi->second - lo->second);
        }
        return k * std::sqrt(tx.inductance * rx.inductance);
    }
    double sum = 0.0;
    for (const auto& ft : tx.filaments) {
        for (const auto& fr : rx.filaments) {
            const double d = std::abs(distance + fr.axial_offset - ft.axial_offset);
            sum += mutual_inductance_loops(ft.radius, fr.radius, d);
        }
    }
    return model.k_scale * tx.turns_scale * rx.turns_scale * sum;
}

double coupling_coefficient(double mutual, double l1, double l2) {
    if (!(l1 > 0.0) || !(l2 > 0.0) || !(mutual >= 0.0)) {
        throw std::domain_error("coupling_coefficient: need L1, L2 > 0 and M >= 0");
    }
    const double k = mutual / std::sqrt(l1 * l2);
    if (k >= 1.0) {
        throw std::domain_error("coupling_coefficient: k >= 1 is not physical");
    }
    return k;
}

} // namespace wpt
