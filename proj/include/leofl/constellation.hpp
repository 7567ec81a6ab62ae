#pragma once

#include <compare>
#include <string>
#include <vector>

#include "leofl/geometry.hpp"

namespace leofl {

// One Walker-delta shell: num_orbits planes at a common altitude and
// inclination. RAAN offsets default to equal spacing over 360 degrees and the
// in-plane phase offset between adjacent planes defaults to Walker phasing
// F=1, i.e. 360 / (num_orbits * sats_per_orbit) degrees.
struct ShellSpec {
    double altitude_m = 500e3;
    double inclination_deg = 70.0;
    int num_orbits = 1;
    int sats_per_orbit = 1;
    std::vector<double> raan_offsets_deg;  // empty -> equal spacing
    double phase_offset_deg = -1.0;        // negative -> Walker F=1 default
};

struct SatelliteId {
    int shell = 0;
    int orbit = 0;
    int slot = 0;
    auto operator<=>(const SatelliteId&) const = default;
};

enum class NodeKind { GS, HAP };

struct GroundNode {
    std::string name;
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;
    double altitude_m = 0.0;
    double min_elevation_deg = 10.0;
    NodeKind kind = NodeKind::GS;
};

struct StateVector {
    Vec3 position;  // meters, inertial frame
    Vec3 velocity;  // m/s
    double epoch_s = 0.0;
};

struct VisibilityWindow {
    SatelliteId sat;
    std::string node;
    double start_s = 0.0;
    double end_s = 0.0;
};

class Constellation {
  public:
    // Builds the Walker-delta constellation; satellites are equally spaced in
    // true anomaly within each orbit. Rejects shells with zero orbits or
    // satellites and RAAN lists of the wrong length.
    explicit Constellation(std::vector<ShellSpec> shells);

    const std::vector<ShellSpec>& shells() const { return shells_; }
    const std::vector<SatelliteId>& satellites() const { return sats_; }
    size_t size() const { return sats_.size(); }

    double orbital_speed(int shell) const;   // sqrt(mu / (r_E + d))
    double orbital_period(int shell) const;  // 2 pi (r_E + d) / v

    // Circular two-body propagation (no J2, no drag).
    StateVector propagate(const SatelliteId& id, double t) const;

    // Intra-orbit ring neighbor in the configured direction (+1 or -1 slot).
    SatelliteId ring_neighbor(const SatelliteId& id, int step) const;

  private:
    std::vector<ShellSpec> shells_;
    std::vector<SatelliteId> sats_;
};

// Earth-fixed node rotated into the inertial frame at the sidereal rate.
// At t=0 the Greenwich meridian lies along the inertial x-axis.
Vec3 node_position(const GroundNode& node, double t);

// Elevation of the satellite above the node's local horizon, degrees. For an
// elevated node the horizon dips below the horizontal plane by
// acos(r_E / r_node); the dip is what lets a HAP see more sky than a ground
// station at the same site.
double elevation_deg(const Constellation& c, const SatelliteId& sat, const GroundNode& node,
                     double t);

bool is_visible(const Constellation& c, const SatelliteId& sat, const GroundNode& node, double t);

double slant_range(const Constellation& c, const SatelliteId& sat, const GroundNode& node,
                   double t);

// Maximal disjoint visibility windows per (satellite, node) over [t0, t1],
// sampled at dt and refined at the boundaries by bisection to within 1 s.
// Sorted by start time, then satellite id.
std::vector<VisibilityWindow> visibility_windows(const Constellation& c, const GroundNode& node,
                                                 double t0, double t1, double dt);

}  // namespace leofl
