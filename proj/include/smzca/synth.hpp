#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "smzca/geo.hpp"
#include "smzca/trace.hpp"

namespace smzca {

/// Parameters of the synthetic grid-road trace generator. Roads are evenly
/// spaced straight lines inside the bounding box: `ew_roads` running
/// east-west and `ns_roads` running north-south. Buses shuttle end to end
/// along a fixed road; cars pick random roads and may turn at intersections.
struct SynthSpec {
    GeoPoint sw{43.85, -79.47};
    GeoPoint ne{43.88, -79.42};
    int ew_roads = 3;
    int ns_roads = 3;
    int cars = 20;
    int buses = 2;
    double car_speed_min_mps = 8.0;
    double car_speed_max_mps = 14.0;
    double bus_speed_mps = 10.0;
    double turn_prob = 0.3;
    double car_tr_m = 100.0;
    double bus_tr_m = 800.0;
    int ticks = 60;
    std::int64_t tick_ms = 1000;
};

namespace detail {

struct Mover {
    std::string id;
    VehicleKind kind;
    bool on_ew;      // travelling along an east-west road
    int road;        // index into the ew or ns road list
    double pos_m;    // coordinate along the road (x for ew, y for ns)
    int dir;         // +1 toward east/north
    double speed_mps;
    double tr_m;
    bool can_turn;
};

}  // namespace detail

/// Deterministic synthetic trace: same spec + seed => byte-identical output.
inline Trace synth_trace(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.ew_roads < 0 || spec.ns_roads < 0 || spec.ew_roads + spec.ns_roads == 0) {
        throw std::invalid_argument("synth_trace: road grid is empty");
    }
    if (spec.cars < 0 || spec.buses < 0) throw std::invalid_argument("synth_trace: negative count");
    if (!(spec.car_speed_min_mps > 0.0) || spec.car_speed_min_mps > spec.car_speed_max_mps ||
        !(spec.bus_speed_mps > 0.0)) {
        throw std::invalid_argument("synth_trace: bad speed range");
    }
    if (!(spec.car_tr_m > 0.0) || !(spec.bus_tr_m > 0.0)) {
        throw std::invalid_argument("synth_trace: transmission range must be > 0");
    }
    if (spec.ticks < 1 || spec.tick_ms < 1) throw std::invalid_argument("synth_trace: bad duration");
    if (!(spec.ne.lat > spec.sw.lat) || !(spec.ne.lon > spec.sw.lon)) {
        throw std::invalid_argument("synth_trace: degenerate bounding box");
    }
    if (spec.turn_prob < 0.0 || spec.turn_prob > 1.0) {
        throw std::invalid_argument("synth_trace: turn_prob outside [0, 1]");
    }

    const PlanarVector extent = displacement(spec.sw, spec.ne);
    const double width_m = extent.east;
    const double height_m = extent.north;
    const double mid_lat_rad = deg_to_rad((spec.sw.lat + spec.ne.lat) / 2.0);

    std::vector<double> ew_y(spec.ew_roads), ns_x(spec.ns_roads);
    for (int j = 0; j < spec.ew_roads; ++j) ew_y[j] = height_m * (j + 1) / (spec.ew_roads + 1);
    for (int k = 0; k < spec.ns_roads; ++k) ns_x[k] = width_m * (k + 1) / (spec.ns_roads + 1);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int total_roads = spec.ew_roads + spec.ns_roads;
    std::vector<detail::Mover> movers;
    movers.reserve(static_cast<std::size_t>(spec.buses + spec.cars));
    for (int b = 0; b < spec.buses; ++b) {
        const int r = b % total_roads;
        detail::Mover m;
        m.id = "bus" + std::to_string(b);
        m.kind = VehicleKind::bus;
        m.on_ew = r < spec.ew_roads;
        m.road = m.on_ew ? r : r - spec.ew_roads;
        m.pos_m = 0.0;
        m.dir = +1;
        m.speed_mps = spec.bus_speed_mps;
        m.tr_m = spec.bus_tr_m;
        m.can_turn = false;
        movers.push_back(std::move(m));
    }
    for (int c = 0; c < spec.cars; ++c) {
        const int r = static_cast<int>(unit(rng) * total_roads) % total_roads;
        detail::Mover m;
        m.id = "car" + std::to_string(c);
        m.kind = VehicleKind::car;
        m.on_ew = r < spec.ew_roads;
        m.road = m.on_ew ? r : r - spec.ew_roads;
        const double len = m.on_ew ? width_m : height_m;
        m.pos_m = unit(rng) * len;
        m.dir = unit(rng) < 0.5 ? +1 : -1;
        m.speed_mps =
            spec.car_speed_min_mps + unit(rng) * (spec.car_speed_max_mps - spec.car_speed_min_mps);
        m.tr_m = spec.car_tr_m;
        m.can_turn = true;
        movers.push_back(std::move(m));
    }

    const auto to_geo = [&](double x_m, double y_m) {
        GeoPoint p;
        p.lat = spec.sw.lat + rad_to_deg(y_m / kEarthRadiusM);
        p.lon = spec.sw.lon + rad_to_deg(x_m / (kEarthRadiusM * std::cos(mid_lat_rad)));
        return p;
    };

    Trace trace;
    trace.tick_ms = spec.tick_ms;
    const double dt_s = static_cast<double>(spec.tick_ms) / 1000.0;

    for (int tick = 0; tick < spec.ticks; ++tick) {
        TraceSnapshot snap;
        snap.t_ms = static_cast<std::int64_t>(tick) * spec.tick_ms;
        for (auto& m : movers) {
            const double x = m.on_ew ? m.pos_m : ns_x[m.road];
            const double y = m.on_ew ? ew_y[m.road] : m.pos_m;
            VehicleRecord rec;
            rec.id = m.id;
            rec.kind = m.kind;
            rec.loc = to_geo(x, y);
            rec.vel = m.on_ew ? PlanarVector{m.dir * m.speed_mps, 0.0}
                              : PlanarVector{0.0, m.dir * m.speed_mps};
            rec.tr_m = m.tr_m;
            snap.records.push_back(std::move(rec));

            // advance to the next tick
            const double prev = m.pos_m;
            double next = prev + m.dir * m.speed_mps * dt_s;

            bool turned = false;
            if (m.can_turn) {
                const auto& crossings = m.on_ew ? ns_x : ew_y;
                for (std::size_t i = 0; i < crossings.size(); ++i) {
                    const double c = crossings[i];
                    const bool crossed = (prev < c && next >= c) || (prev > c && next <= c);
                    if (!crossed) continue;
                    if (unit(rng) < spec.turn_prob) {
                        // stop at the intersection and continue on the crossing road
                        const double stay = m.on_ew ? ew_y[m.road] : ns_x[m.road];
                        m.on_ew = !m.on_ew;
                        m.road = static_cast<int>(i);
                        m.pos_m = stay;
                        m.dir = unit(rng) < 0.5 ? +1 : -1;
                        turned = true;
                    }
                    break;  // at most one intersection per tick
                }
            }
            if (!turned) {
                const double len = m.on_ew ? width_m : height_m;
                if (next < 0.0) {
                    next = -next;
                    m.dir = +1;
                } else if (next > len) {
                    next = 2.0 * len - next;
                    m.dir = -1;
                }
                m.pos_m = std::clamp(next, 0.0, len);
            }
        }
        trace.snapshots.push_back(std::move(snap));
    }
    return trace;
}

}  // namespace smzca
