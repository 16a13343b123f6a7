#pragma once

#include <cmath>
#include <numbers>

namespace smzca {

/// Mean Earth radius used by all planar projections, in meters.
inline constexpr double kEarthRadiusM = 6'371'000.0;

/// WGS-84 position, degrees.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Displacement or velocity in the local east/north plane. Meters for
/// displacements, m/s for velocities.
struct PlanarVector {
    double east = 0.0;
    double north = 0.0;

    friend bool operator==(const PlanarVector&, const PlanarVector&) = default;
};

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline bool valid(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) &&
           p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

inline bool valid(const PlanarVector& v) {
    return std::isfinite(v.east) && std::isfinite(v.north);
}

/// East/north displacement from one point to another: equirectangular
/// projection, longitude scaled by the cosine of the midpoint latitude.
inline PlanarVector displacement(const GeoPoint& from, const GeoPoint& to) {
    const double mid_lat = deg_to_rad((from.lat + to.lat) / 2.0);
    return {deg_to_rad(to.lon - from.lon) * kEarthRadiusM * std::cos(mid_lat),
            deg_to_rad(to.lat - from.lat) * kEarthRadiusM};
}

inline double magnitude(const PlanarVector& v) { return std::hypot(v.east, v.north); }

inline double dot(const PlanarVector& a, const PlanarVector& b) {
    return a.east * b.east + a.north * b.north;
}

/// Great-circle-grade distance in meters via the same equirectangular
/// projection, so that distance(a, b) == magnitude(displacement(a, b)).
inline double distance(const GeoPoint& a, const GeoPoint& b) {
    return magnitude(displacement(a, b));
}

}  // namespace smzca
