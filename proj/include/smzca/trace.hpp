#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "smzca/geo.hpp"

namespace smzca {

enum class VehicleKind { car, bus, rsu };  // rsu never appears in trace files

inline const char* to_string(VehicleKind k) {
    switch (k) {
        case VehicleKind::car: return "car";
        case VehicleKind::bus: return "bus";
        case VehicleKind::rsu: return "rsu";
    }
    return "?";
}

struct VehicleRecord {
    std::string id;
    VehicleKind kind = VehicleKind::car;
    GeoPoint loc;
    PlanarVector vel;  // m/s
    double tr_m = 0.0;

    friend bool operator==(const VehicleRecord&, const VehicleRecord&) = default;
};

struct TraceSnapshot {
    std::int64_t t_ms = 0;
    std::vector<VehicleRecord> records;

    friend bool operator==(const TraceSnapshot&, const TraceSnapshot&) = default;
};

/// Time-ordered mobility trace with uniform snapshot spacing. Vehicles may
/// appear and disappear between snapshots as they enter or leave the area.
struct Trace {
    std::vector<TraceSnapshot> snapshots;
    std::int64_t tick_ms = 0;

    std::int64_t span_ms() const {
        return snapshots.empty() ? 0 : snapshots.back().t_ms - snapshots.front().t_ms;
    }

    friend bool operator==(const Trace&, const Trace&) = default;
};

class TraceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double parse_double(const std::string& tok, int line_no, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw TraceError("line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(v)) {
        throw TraceError("line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
    }
    return v;
}

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Parses the line-delimited trace format:
///   t_ms id kind lat long vel_east vel_north tr_m
/// `#` starts a comment; snapshots are contiguous runs of equal t_ms in
/// nondecreasing order.
inline Trace parse_trace(std::istream& in) {
    Trace trace;
    std::unordered_set<std::string> ids_in_snapshot;
    std::string line;
    int line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string t_tok, id, kind_tok, lat_tok, lon_tok, ve_tok, vn_tok, tr_tok;
        if (!(ls >> t_tok)) continue;  // blank / comment-only line
        if (!(ls >> id >> kind_tok >> lat_tok >> lon_tok >> ve_tok >> vn_tok >> tr_tok)) {
            throw TraceError("line " + std::to_string(line_no) + ": expected 8 fields");
        }
        std::string extra;
        if (ls >> extra) {
            throw TraceError("line " + std::to_string(line_no) + ": trailing token '" + extra + "'");
        }

        VehicleRecord rec;
        rec.id = id;
        if (kind_tok == "car") {
            rec.kind = VehicleKind::car;
        } else if (kind_tok == "bus") {
            rec.kind = VehicleKind::bus;
        } else {
            throw TraceError("line " + std::to_string(line_no) + ": unknown kind '" + kind_tok + "'");
        }
        std::int64_t t = 0;
        try {
            t = std::stoll(t_tok);
        } catch (const std::exception&) {
            throw TraceError("line " + std::to_string(line_no) + ": bad timestamp '" + t_tok + "'");
        }
        rec.loc.lat = detail::parse_double(lat_tok, line_no, "latitude");
        rec.loc.lon = detail::parse_double(lon_tok, line_no, "longitude");
        rec.vel.east = detail::parse_double(ve_tok, line_no, "vel_east");
        rec.vel.north = detail::parse_double(vn_tok, line_no, "vel_north");
        rec.tr_m = detail::parse_double(tr_tok, line_no, "tr_m");
        if (!valid(rec.loc)) {
            throw TraceError("line " + std::to_string(line_no) + ": lat/long out of range");
        }
        if (!(rec.tr_m > 0.0)) {
            throw TraceError("line " + std::to_string(line_no) + ": tr_m must be > 0");
        }

        if (trace.snapshots.empty() || t != trace.snapshots.back().t_ms) {
            if (!trace.snapshots.empty() && t < trace.snapshots.back().t_ms) {
                throw TraceError("line " + std::to_string(line_no) + ": timestamp " +
                                 std::to_string(t) + " decreases");
            }
            trace.snapshots.push_back({t, {}});
            ids_in_snapshot.clear();
        }
        if (!ids_in_snapshot.insert(rec.id).second) {
            throw TraceError("line " + std::to_string(line_no) + ": duplicate id '" + rec.id +
                             "' at t=" + std::to_string(t));
        }
        trace.snapshots.back().records.push_back(std::move(rec));
    }

    if (trace.snapshots.size() >= 2) {
        const std::int64_t tick = trace.snapshots[1].t_ms - trace.snapshots[0].t_ms;
        for (std::size_t i = 1; i < trace.snapshots.size(); ++i) {
            if (trace.snapshots[i].t_ms - trace.snapshots[i - 1].t_ms != tick) {
                throw TraceError("non-uniform snapshot spacing at t=" +
                                 std::to_string(trace.snapshots[i].t_ms));
            }
        }
        trace.tick_ms = tick;
    }
    return trace;
}

inline void serialize_trace(const Trace& trace, std::ostream& out) {
    for (const auto& snap : trace.snapshots) {
        for (const auto& rec : snap.records) {
            out << snap.t_ms << ' ' << rec.id << ' ' << to_string(rec.kind) << ' '
                << detail::fmt_double(rec.loc.lat) << ' ' << detail::fmt_double(rec.loc.lon) << ' '
                << detail::fmt_double(rec.vel.east) << ' ' << detail::fmt_double(rec.vel.north)
                << ' ' << detail::fmt_double(rec.tr_m) << '\n';
        }
    }
}

/// Sub-trace covering [start_s, end_s] (inclusive), timestamps re-based so
/// the first selected snapshot lands at 0.
inline Trace window(const Trace& trace, double start_s, double end_s) {
    if (!(start_s < end_s)) throw std::invalid_argument("window: start must precede end");
    const auto lo = static_cast<std::int64_t>(start_s * 1000.0);
    const auto hi = static_cast<std::int64_t>(end_s * 1000.0);

    Trace out;
    out.tick_ms = trace.tick_ms;
    for (const auto& snap : trace.snapshots) {
        if (snap.t_ms < lo || snap.t_ms > hi) continue;
        out.snapshots.push_back(snap);
    }
    if (out.snapshots.empty()) throw std::invalid_argument("window: no snapshots in range");
    const std::int64_t base = out.snapshots.front().t_ms;
    for (auto& snap : out.snapshots) snap.t_ms -= base;
    return out;
}

}  // namespace smzca
