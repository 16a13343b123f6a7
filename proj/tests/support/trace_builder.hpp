#pragma once

// Test-only helpers for scripting traces in a local planar frame (meters east
// and north of an anchor point), so scenario geometry stays readable.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "smzca/geo.hpp"
#include "smzca/trace.hpp"

namespace smzca::testing {

class TraceBuilder {
  public:
    explicit TraceBuilder(GeoPoint anchor = {43.8650, -79.4500}, std::int64_t tick_ms = 1000)
        : anchor_(anchor), tick_ms_(tick_ms), cos_lat_(std::cos(deg_to_rad(anchor.lat))) {}

    GeoPoint to_geo(double x_m, double y_m) const {
        return {anchor_.lat + rad_to_deg(y_m / kEarthRadiusM),
                anchor_.lon + rad_to_deg(x_m / (kEarthRadiusM * cos_lat_))};
    }

    /// One record at an explicit tick.
    TraceBuilder& at(int tick, const std::string& id, VehicleKind kind, double x_m, double y_m,
                     double vx_mps = 0.0, double vy_mps = 0.0, double tr_m = 100.0) {
        VehicleRecord rec;
        rec.id = id;
        rec.kind = kind;
        rec.loc = to_geo(x_m, y_m);
        rec.vel = {vx_mps, vy_mps};
        rec.tr_m = tr_m;
        rows_[tick].push_back(std::move(rec));
        return *this;
    }

    /// Constant-velocity vehicle present for [first_tick, last_tick].
    TraceBuilder& linear(const std::string& id, VehicleKind kind, double x0_m, double y0_m,
                         double vx_mps, double vy_mps, double tr_m, int first_tick,
                         int last_tick) {
        const double dt = static_cast<double>(tick_ms_) / 1000.0;
        for (int t = first_tick; t <= last_tick; ++t) {
            const double el = (t - first_tick) * dt;
            at(t, id, kind, x0_m + vx_mps * el, y0_m + vy_mps * el, vx_mps, vy_mps, tr_m);
        }
        return *this;
    }

    /// Builds contiguous snapshots from the lowest to the highest scripted
    /// tick; ticks nobody populated become empty snapshots.
    Trace build() const {
        Trace trace;
        trace.tick_ms = tick_ms_;
        if (rows_.empty()) return trace;
        const int lo = rows_.begin()->first;
        const int hi = rows_.rbegin()->first;
        for (int tick = lo; tick <= hi; ++tick) {
            TraceSnapshot snap;
            snap.t_ms = static_cast<std::int64_t>(tick) * tick_ms_;
            if (auto it = rows_.find(tick); it != rows_.end()) snap.records = it->second;
            trace.snapshots.push_back(std::move(snap));
        }
        return trace;
    }

    const GeoPoint& anchor() const { return anchor_; }

  private:
    GeoPoint anchor_;
    std::int64_t tick_ms_;
    double cos_lat_;
    std::map<int, std::vector<VehicleRecord>> rows_;
};

}  // namespace smzca::testing
