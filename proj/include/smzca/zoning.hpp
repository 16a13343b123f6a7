#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "smzca/geo.hpp"

namespace smzca {

using ZoneId = int;

/// Uniform rectangular grid over the padded study box. Zone IDs are 0-based
/// and row-major: zone 0 sits at the southwest corner, IDs grow eastward
/// within a row and then northward row by row.
struct ZoneGrid {
    GeoPoint sw;  // padded box corners
    GeoPoint ne;
    int n_r = 1;       // rows (north-south count)
    int n_c = 1;       // columns (east-west count)
    double w_z_km = 0.0;  // zone north-south extent
    double l_z_km = 0.0;  // zone east-west extent
    double alpha_km = 0.0;
    int pad_rows = 0;  // boundary rows per side that belong to the padding frame
    int pad_cols = 0;

    int zone_count() const { return n_r * n_c; }
    double lat_step() const { return (ne.lat - sw.lat) / n_r; }
    double lon_step() const { return (ne.lon - sw.lon) / n_c; }
};

/// Search window of the divide-and-conquer zone lookup. Boundaries are
/// 1-based row/column indices; SB/WB are the south/west edges.
struct SearchState {
    int nb = 1;
    int sb = 1;
    int wb = 1;
    int eb = 1;
    ZoneId c = 0;
    int m = 0;
};

struct LocateResult {
    ZoneId zone = 0;
    int iterations = 0;
};

namespace detail {

// Authoritative cell boundary along one axis; endpoints are exact.
inline double axis_bound(double lo, double hi, int n, int i) {
    if (i <= 0) return lo;
    if (i >= n) return hi;
    return lo + i * ((hi - lo) / n);
}

// 0-based cell index along one axis. Cells are half-open [b(i), b(i+1))
// except the last, which is closed at hi.
inline int axis_index(double coord, double lo, double hi, int n, const char* axis) {
    if (!(coord >= lo && coord <= hi)) {
        throw std::out_of_range(std::string("point outside padded box (") + axis + ")");
    }
    const double step = (hi - lo) / n;
    int i = std::clamp(static_cast<int>(std::floor((coord - lo) / step)), 0, n - 1);
    // settle float ties against the boundary predicate itself
    while (i > 0 && coord < axis_bound(lo, hi, n, i)) --i;
    while (i + 1 < n && coord >= axis_bound(lo, hi, n, i + 1)) ++i;
    return i;
}

}  // namespace detail

/// Builds the zone grid over an already-padded bounding box. Box extents are
/// measured with the equirectangular projection; the row/column counts come
/// from flooring extent / alpha, and cell sizes absorb the remainder.
inline ZoneGrid build_grid(const GeoPoint& sw, const GeoPoint& ne, double alpha_km,
                           int pad_rows = 2, int pad_cols = 2) {
    if (!valid(sw) || !valid(ne)) throw std::invalid_argument("build_grid: invalid corner");
    if (!(ne.lat > sw.lat) || !(ne.lon > sw.lon)) {
        throw std::invalid_argument("build_grid: degenerate bounding box");
    }
    if (!(alpha_km > 0.0)) throw std::invalid_argument("build_grid: alpha must be > 0");
    if (pad_rows < 0 || pad_cols < 0) throw std::invalid_argument("build_grid: negative padding");

    const PlanarVector extent = displacement(sw, ne);
    const double w_a_km = extent.north / 1000.0;  // north-south
    const double l_a_km = extent.east / 1000.0;   // east-west
    const int n_r = static_cast<int>(std::floor(w_a_km / alpha_km));
    const int n_c = static_cast<int>(std::floor(l_a_km / alpha_km));
    if (n_r < 1 || n_c < 1) {
        throw std::invalid_argument("build_grid: alpha exceeds a padded box extent");
    }

    ZoneGrid g;
    g.sw = sw;
    g.ne = ne;
    g.n_r = n_r;
    g.n_c = n_c;
    g.w_z_km = w_a_km / n_r;
    g.l_z_km = l_a_km / n_c;
    g.alpha_km = alpha_km;
    g.pad_rows = pad_rows;
    g.pad_cols = pad_cols;
    return g;
}

/// Row-major zone ID from 1-based row/column.
inline ZoneId zone_id(const ZoneGrid& g, int row, int col) {
    if (row < 1 || row > g.n_r || col < 1 || col > g.n_c) {
        throw std::out_of_range("zone_id: row/col outside grid");
    }
    return g.n_c * (row - 1) + col - 1;
}

inline void check_zone(const ZoneGrid& g, ZoneId z) {
    if (z < 0 || z >= g.zone_count()) throw std::out_of_range("invalid zone ID");
}

inline int zone_row(const ZoneGrid& g, ZoneId z) {
    check_zone(g, z);
    return z / g.n_c + 1;
}

inline int zone_col(const ZoneGrid& g, ZoneId z) {
    check_zone(g, z);
    return z % g.n_c + 1;
}

/// Southwest / northeast corners of a zone cell.
inline std::pair<GeoPoint, GeoPoint> zone_bounds(const ZoneGrid& g, ZoneId z) {
    const int row = zone_row(g, z);
    const int col = zone_col(g, z);
    GeoPoint cell_sw{detail::axis_bound(g.sw.lat, g.ne.lat, g.n_r, row - 1),
                     detail::axis_bound(g.sw.lon, g.ne.lon, g.n_c, col - 1)};
    GeoPoint cell_ne{detail::axis_bound(g.sw.lat, g.ne.lat, g.n_r, row),
                     detail::axis_bound(g.sw.lon, g.ne.lon, g.n_c, col)};
    return {cell_sw, cell_ne};
}

inline GeoPoint zone_centroid(const ZoneGrid& g, ZoneId z) {
    const auto [cell_sw, cell_ne] = zone_bounds(g, z);
    return {(cell_sw.lat + cell_ne.lat) / 2.0, (cell_sw.lon + cell_ne.lon) / 2.0};
}

/// Direct index-arithmetic lookup; the oracle the search is checked against.
inline ZoneId locate_linear(const ZoneGrid& g, const GeoPoint& p) {
    const int row = detail::axis_index(p.lat, g.sw.lat, g.ne.lat, g.n_r, "lat") + 1;
    const int col = detail::axis_index(p.lon, g.sw.lon, g.ne.lon, g.n_c, "lon") + 1;
    return zone_id(g, row, col);
}

/// Warm-start window: a 1x1 window at the given zone.
inline SearchState warm_start(const ZoneGrid& g, ZoneId z) {
    SearchState s;
    s.nb = s.sb = zone_row(g, z);
    s.eb = s.wb = zone_col(g, z);
    s.c = z;
    return s;
}

/// Divide-and-conquer zone lookup. Each iteration probes the window center
/// zone, then shrinks the boundaries that the point violates. A warm-start
/// window that turns out not to bracket the point is reopened to the grid rim
/// on the violated side, which keeps the iteration count within
/// ceil(log2(max(n_r, n_c))) + 1 for cold and warm starts alike.
inline LocateResult locate_search(const ZoneGrid& g, const GeoPoint& p,
                                  std::optional<SearchState> warm = std::nullopt) {
    // validate the point up front (also yields the out-of-box error)
    (void)detail::axis_index(p.lat, g.sw.lat, g.ne.lat, g.n_r, "lat");
    (void)detail::axis_index(p.lon, g.sw.lon, g.ne.lon, g.n_c, "lon");

    int nb = g.n_r, sb = 1, wb = 1, eb = g.n_c;
    if (warm) {
        nb = std::clamp(warm->nb, 1, g.n_r);
        sb = std::clamp(warm->sb, 1, nb);
        eb = std::clamp(warm->eb, 1, g.n_c);
        wb = std::clamp(warm->wb, 1, eb);
    }

    int iterations = 0;
    while (true) {
        const int beta_ns = (nb + sb + 1) / 2;  // ceil((NB+SB)/2)
        const int beta_ew = (eb + wb + 1) / 2;  // round((EB+WB)/2), half-up
        const ZoneId c = zone_id(g, beta_ns, beta_ew);
        ++iterations;

        const auto [cell_sw, cell_ne] = zone_bounds(g, c);
        const bool south = p.lat < cell_sw.lat;
        const bool north = !south && p.lat >= cell_ne.lat && beta_ns < g.n_r;
        const bool west = p.lon < cell_sw.lon;
        const bool east = !west && p.lon >= cell_ne.lon && beta_ew < g.n_c;

        if (!south && !north && !west && !east) return {c, iterations};

        if (south) {
            nb = beta_ns - 1;
            if (nb < sb) sb = 1;  // warm window missed; reopen southward
        } else if (north) {
            sb = beta_ns + 1;
            if (sb > nb) nb = g.n_r;
        }
        if (west) {
            eb = beta_ew - 1;
            if (eb < wb) wb = 1;
        } else if (east) {
            wb = beta_ew + 1;
            if (wb > eb) eb = g.n_c;
        }
    }
}

/// Iteration ceiling guaranteed by locate_search.
inline int locate_iteration_bound(const ZoneGrid& g) {
    const int n = std::max(g.n_r, g.n_c);
    return static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
}

}  // namespace smzca
