#include "leofl/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "leofl/constants.hpp"

namespace leofl {

Constellation::Constellation(std::vector<ShellSpec> shells) : shells_(std::move(shells)) {
    if (shells_.empty()) throw std::invalid_argument("constellation: at least one shell required");
    for (size_t s = 0; s < shells_.size(); ++s) {
        ShellSpec& sp = shells_[s];
        if (!(sp.altitude_m > 0.0))
            throw std::invalid_argument("constellation: altitude must be > 0");
        if (sp.num_orbits < 1 || sp.sats_per_orbit < 1)
            throw std::invalid_argument("constellation: orbits and satellites must be >= 1");
        if (sp.inclination_deg < 0.0 || sp.inclination_deg > 90.0)
            throw std::invalid_argument("constellation: inclination must be in [0, 90]");
        if (sp.raan_offsets_deg.empty()) {
            for (int j = 0; j < sp.num_orbits; ++j)
                sp.raan_offsets_deg.push_back(360.0 * j / sp.num_orbits);
        } else if (static_cast<int>(sp.raan_offsets_deg.size()) != sp.num_orbits) {
            throw std::invalid_argument("constellation: raan_offsets length must equal num_orbits");
        }
        if (sp.phase_offset_deg < 0.0)
            sp.phase_offset_deg = 360.0 / (sp.num_orbits * sp.sats_per_orbit);  // Walker F=1
        for (int j = 0; j < sp.num_orbits; ++j)
            for (int k = 0; k < sp.sats_per_orbit; ++k)
                sats_.push_back({static_cast<int>(s), j, k});
    }
    std::sort(sats_.begin(), sats_.end());
}

double Constellation::orbital_speed(int shell) const {
    double r = kEarthRadius + shells_.at(shell).altitude_m;
    return std::sqrt(kEarthMu / r);
}

double Constellation::orbital_period(int shell) const {
    double r = kEarthRadius + shells_.at(shell).altitude_m;
    return 2.0 * kPi * r / orbital_speed(shell);
}

StateVector Constellation::propagate(const SatelliteId& id, double t) const {
    if (t < 0.0) throw std::invalid_argument("propagate: t must be >= 0");
    const ShellSpec& sp = shells_.at(id.shell);
    double r = kEarthRadius + sp.altitude_m;
    double v = orbital_speed(id.shell);
    double period = orbital_period(id.shell);

    double u0 = deg2rad(360.0 * id.slot / sp.sats_per_orbit + sp.phase_offset_deg * id.orbit);
    // Reduce t modulo the period before forming the angle so that
    // state(t + T) reproduces state(t) to full precision.
    double frac = std::fmod(t, period) / period;
    double u = u0 + 2.0 * kPi * frac;

    double raan = deg2rad(sp.raan_offsets_deg.at(id.orbit));
    double inc = deg2rad(sp.inclination_deg);

    double cu = std::cos(u), su = std::sin(u);
    double co = std::cos(raan), so = std::sin(raan);
    double ci = std::cos(inc), si = std::sin(inc);

    // R_z(raan) * R_x(inc) applied to r [cos u, sin u, 0].
    Vec3 pos{r * (co * cu - so * ci * su), r * (so * cu + co * ci * su), r * (si * su)};
    // Velocity is the in-plane tangent scaled by the circular speed.
    Vec3 vel{v * (-co * su - so * ci * cu), v * (-so * su + co * ci * cu), v * (si * cu)};
    return {pos, vel, t};
}

SatelliteId Constellation::ring_neighbor(const SatelliteId& id, int step) const {
    const ShellSpec& sp = shells_.at(id.shell);
    int k = sp.sats_per_orbit;
    int slot = ((id.slot + step) % k + k) % k;
    return {id.shell, id.orbit, slot};
}

Vec3 node_position(const GroundNode& node, double t) {
    double r = kEarthRadius + node.altitude_m;
    double lat = deg2rad(node.latitude_deg);
    // Keep the rotation angle reduced so node(t + sidereal day) == node(t).
    double frac = std::fmod(t, kSiderealDay) / kSiderealDay;
    double lon = deg2rad(node.longitude_deg) + 2.0 * kPi * frac;
    return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon),
            r * std::sin(lat)};
}

double elevation_deg(const Constellation& c, const SatelliteId& sat, const GroundNode& node,
                     double t) {
    Vec3 np = node_position(node, t);
    Vec3 sp = c.propagate(sat, t).position;
    Vec3 rel = sp - np;
    double elev_horizontal = 90.0 - rad2deg(angle_between(np, rel));
    double rn = norm(np);
    double dip = rn > kEarthRadius ? rad2deg(std::acos(kEarthRadius / rn)) : 0.0;
    return elev_horizontal + dip;
}

bool is_visible(const Constellation& c, const SatelliteId& sat, const GroundNode& node, double t) {
    return elevation_deg(c, sat, node, t) >= node.min_elevation_deg;
}

double slant_range(const Constellation& c, const SatelliteId& sat, const GroundNode& node,
                   double t) {
    return norm(c.propagate(sat, t).position - node_position(node, t));
}

namespace {

// Invisible at t_out, visible at t_in. Refines the crossing to within 1 s;
// lo tracks the invisible side, hi the visible side, in either time order.
double bisect_boundary(const Constellation& c, const SatelliteId& sat, const GroundNode& node,
                       double t_out, double t_in) {
    double lo = t_out, hi = t_in;
    while (std::abs(hi - lo) > 1.0) {
        double mid = 0.5 * (lo + hi);
        if (is_visible(c, sat, node, mid)) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<VisibilityWindow> visibility_windows(const Constellation& c, const GroundNode& node,
                                                 double t0, double t1, double dt) {
    if (!(t0 < t1) || !(dt > 0.0))
        throw std::invalid_argument("visibility_windows: need t0 < t1 and dt > 0");
    std::vector<VisibilityWindow> out;
    for (const SatelliteId& sat : c.satellites()) {
        bool prev = is_visible(c, sat, node, t0);
        double win_start = prev ? t0 : -1.0;
        for (double t = t0 + dt; t <= t1 + dt * 0.5; t += dt) {
            double tc = std::min(t, t1);
            bool cur = is_visible(c, sat, node, tc);
            if (cur && !prev) {
                win_start = bisect_boundary(c, sat, node, tc - dt, tc);
            } else if (!cur && prev) {
                double end = bisect_boundary(c, sat, node, tc, tc - dt);
                out.push_back({sat, node.name, win_start, end});
                win_start = -1.0;
            }
            prev = cur;
            if (tc >= t1) break;
        }
        if (win_start >= 0.0) out.push_back({sat, node.name, win_start, t1});
    }
    std::sort(out.begin(), out.end(), [](const VisibilityWindow& a, const VisibilityWindow& b) {
        if (a.start_s != b.start_s) return a.start_s < b.start_s;
        return a.sat < b.sat;
    });
    return out;
}

}  // namespace leofl
