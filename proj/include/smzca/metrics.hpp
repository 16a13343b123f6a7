#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "smzca/membership_log.hpp"
#include "smzca/state.hpp"

namespace smzca {

/// Clustering stability in (0, 1]: mean over vehicles that were ever cluster
/// members of (time spent in clusters / attendance time), divided by the
/// number of clusters the vehicle joined. 1 means every member vehicle stayed
/// in a single cluster for its whole attendance.
inline std::optional<double> vcsm(const MembershipLog& log) {
    double sum = 0.0;
    int n_vm = 0;
    for (const auto& e : log.entries()) {
        if (e.gamma() == 0) continue;
        if (e.t_out_ms == MembershipInterval::kOpen) {
            throw std::invalid_argument("vcsm: open attendance for '" + e.vehicle_id + "'");
        }
        const double attendance = static_cast<double>(e.attendance_ms());
        if (attendance <= 0.0) continue;  // degenerate single-snapshot visit
        sum += static_cast<double>(e.time_in_clusters_ms()) / (e.gamma() * attendance);
        ++n_vm;
    }
    if (n_vm == 0) return std::nullopt;
    return sum / n_vm;
}

/// Coefficient of variation in percent (sample standard deviation over mean).
inline double cv_percent(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("cv_percent: need at least 2 values");
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (!(mean > 0.0)) throw std::invalid_argument("cv_percent: mean must be positive");
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return sd / mean * 100.0;
}

class DisjointSet {
  public:
    explicit DisjointSet(int n) : parent_(n), components_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        parent_[b] = a;
        --components_;
    }

    int components() const { return components_; }

  private:
    std::vector<int> parent_;
    int components_;
};

/// Connected components of the cluster overlay graph: member-head links plus
/// head-head links within range. Unclustered SAVs count as singletons.
inline int connected_components(const World& world) {
    std::vector<const NodeState*> nodes;
    std::map<std::string, int> index;
    nodes.reserve(world.nodes.size());
    for (const auto& [id, n] : world.nodes) {
        index[id] = static_cast<int>(nodes.size());
        nodes.push_back(&n);
    }
    DisjointSet dsu(static_cast<int>(nodes.size()));
    for (const auto& [id, n] : world.nodes) {
        if (n.cm && n.cluster_head) {
            auto it = index.find(*n.cluster_head);
            if (it != index.end()) dsu.unite(index[id], it->second);
        }
        if (n.ch) {
            auto adj = world.adjacency.find(id);
            if (adj == world.adjacency.end()) continue;
            for (const auto& other : adj->second) {
                const NodeState* o = world.find(other);
                if (o && o->ch) dsu.unite(index[id], index[other]);
            }
        }
    }
    return dsu.components();
}

struct TickStats {
    std::int64_t t_ms = 0;
    int n_vehicles = 0;
    int n_buses = 0;
    int n_ch = 0;
    int n_sav = 0;
    int n_cm = 0;
    int n_components = 0;
};

inline TickStats tick_stats(const World& world) {
    TickStats s;
    s.t_ms = world.t_ms;
    for (const auto& [id, n] : world.nodes) {
        ++s.n_vehicles;
        if (n.kind == VehicleKind::bus) ++s.n_buses;
        if (n.ch) {
            ++s.n_ch;
        } else if (n.cm) {
            ++s.n_cm;
        } else {
            ++s.n_sav;
        }
    }
    s.n_components = connected_components(world);
    return s;
}

/// Echo of the knobs a run was executed with.
struct RunSettings {
    double alpha_km = 0.5;
    EngineConfig engine;
    int n_rsus = 0;
};

struct RunReport {
    RunSettings settings;
    std::vector<TickStats> ticks;
    std::optional<double> vcsm;
    double avg_ch = 0.0;
    double avg_sav = 0.0;
    double avg_cm = 0.0;
    double avg_components = 0.0;
};

inline RunReport summarize(std::vector<TickStats> ticks, std::optional<double> stability,
                           RunSettings settings) {
    RunReport r;
    r.settings = std::move(settings);
    r.ticks = std::move(ticks);
    r.vcsm = stability;
    if (!r.ticks.empty()) {
        const double n = static_cast<double>(r.ticks.size());
        for (const auto& t : r.ticks) {
            r.avg_ch += t.n_ch;
            r.avg_sav += t.n_sav;
            r.avg_cm += t.n_cm;
            r.avg_components += t.n_components;
        }
        r.avg_ch /= n;
        r.avg_sav /= n;
        r.avg_cm /= n;
        r.avg_components /= n;
    }
    return r;
}

/// Box-plot summary (min, lower quartile, median, upper quartile, max) with
/// linearly interpolated quantiles.
struct Quantiles {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

inline Quantiles quantiles(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("quantiles: empty input");
    std::sort(values.begin(), values.end());
    const auto at = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = static_cast<std::size_t>(std::ceil(pos));
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + (values[hi] - values[lo]) * frac;
    };
    return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

}  // namespace smzca
