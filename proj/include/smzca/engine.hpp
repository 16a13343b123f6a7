#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "smzca/clustering.hpp"
#include "smzca/metrics.hpp"
#include "smzca/state.hpp"
#include "smzca/trace.hpp"
#include "smzca/zoning.hpp"

namespace smzca {

/// Stationary infrastructure head injected into a run.
struct RsuSpec {
    GeoPoint loc;
    double tr_m = 800.0;
};

/// Disk-model links: two nodes hear each other iff their distance does not
/// exceed the smaller of the two transmission ranges.
inline std::map<std::string, std::set<std::string>> neighbor_discovery(
    const std::map<std::string, NodeState>& nodes) {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& [id, n] : nodes) adj[id];
    for (auto i = nodes.begin(); i != nodes.end(); ++i) {
        auto j = i;
        for (++j; j != nodes.end(); ++j) {
            const double d = distance(i->second.loc, j->second.loc);
            if (d <= std::min(i->second.tr_m, j->second.tr_m)) {
                adj[i->first].insert(j->first);
                adj[j->first].insert(i->first);
            }
        }
    }
    return adj;
}

inline World make_world(ZoneGrid grid, EngineConfig config, std::int64_t first_snapshot_t_ms,
                        const std::vector<RsuSpec>& rsus = {}) {
    validate(config);
    World w;
    w.grid = std::move(grid);
    w.config = std::move(config);
    w.t_ms = first_snapshot_t_ms - w.config.tau_ms;
    int idx = 0;
    for (const auto& r : rsus) {
        NodeState n;
        n.id = "rsu" + std::to_string(idx++);
        n.kind = VehicleKind::rsu;
        n.ch = true;
        n.loc = r.loc;
        n.tr_m = r.tr_m;
        n.z = locate_linear(w.grid, r.loc);
        w.nodes.emplace(n.id, std::move(n));
    }
    return w;
}

namespace detail {

inline double effective_tr(const VehicleRecord& rec, const EngineConfig& cfg) {
    if (rec.kind == VehicleKind::bus) return cfg.dru_tr_m;
    return cfg.common_tr_m.value_or(rec.tr_m);
}

// phase 1: apply the snapshot — move survivors, add entrants, retire leavers
inline void apply_snapshot(World& world, const TraceSnapshot& snap) {
    std::set<std::string> seen;
    for (const auto& rec : snap.records) {
        // records outside the padded box are out of the study area
        if (rec.loc.lat < world.grid.sw.lat || rec.loc.lat > world.grid.ne.lat ||
            rec.loc.lon < world.grid.sw.lon || rec.loc.lon > world.grid.ne.lon) {
            continue;
        }
        seen.insert(rec.id);
        if (NodeState* n = world.find(rec.id)) {
            n->loc = rec.loc;
            n->vel = rec.vel;
            n->tr_m = effective_tr(rec, world.config);
            continue;
        }
        NodeState n;
        n.id = rec.id;
        n.kind = rec.kind;
        n.loc = rec.loc;
        n.vel = rec.vel;
        n.tr_m = effective_tr(rec, world.config);
        if (rec.kind == VehicleKind::bus) {
            n.ch = true;
            n.d = true;
        }
        n.z = locate_linear(world.grid, n.loc);
        world.log.enter(n.id, snap.t_ms);
        world.nodes.emplace(n.id, std::move(n));
    }

    // retire vehicles that left; their last-seen tick ends the attendance
    const std::int64_t t_out = world.t_ms;
    for (auto it = world.nodes.begin(); it != world.nodes.end();) {
        NodeState& n = it->second;
        if (n.kind == VehicleKind::rsu || seen.count(n.id)) {
            ++it;
            continue;
        }
        if (n.cm && n.cluster_head) {
            if (NodeState* head = world.find(*n.cluster_head)) head->members.erase(n.id);
        }
        world.log.exit(n.id, t_out);
        it = world.nodes.erase(it);
    }
}

// phase 4: beacons and ACKs; heads acknowledge only while they have capacity
inline void beacon_exchange(World& world) {
    for (auto& [id, n] : world.nodes) {
        n.v_dack.clear();
        n.v_chack.clear();
        n.v_cmack.clear();
        n.v_saack.clear();
        for (const auto& other : world.adjacency[id]) {
            const NodeState& o = *world.find(other);
            if (o.ch) {
                if (!ack_policy(o, world.config)) continue;
                (o.d ? n.v_dack : n.v_chack).insert(other);
            } else if (o.cm) {
                n.v_cmack.insert(other);
            } else {
                n.v_saack.insert(other);
            }
        }
        n.v_ov = n.v_cmack;
        n.v_ov.insert(n.v_saack.begin(), n.v_saack.end());
    }
}

}  // namespace detail

/// Advances the world by one beacon period using the given snapshot.
inline void step(World& world, const TraceSnapshot& snap) {
    if (snap.t_ms != world.t_ms + world.config.tau_ms) {
        throw std::invalid_argument("step: snapshot at t=" + std::to_string(snap.t_ms) +
                                    " does not follow world time " + std::to_string(world.t_ms));
    }

    detail::apply_snapshot(world, snap);
    world.t_ms = snap.t_ms;

    // zone updates, warm-started from the previous zone
    for (auto& [id, n] : world.nodes) {
        const ZoneId next = locate_search(world.grid, n.loc, warm_start(world.grid, n.z)).zone;
        n.zone_changed = next != n.z;
        if (n.zone_changed) {
            n.pz = n.z;
            n.z = next;
        }
    }

    world.adjacency = neighbor_discovery(world.nodes);
    detail::beacon_exchange(world);
    maintain(world);

    // CH selection for unclustered SAVs, ascending id
    std::vector<std::string> formation_pool;
    for (auto& [id, n] : world.nodes) {
        if (!is_sav(n)) continue;
        if (auto head = select_ch(world, n)) {
            apply_join(world, n, *head);
            continue;
        }
        ++n.sav_timer;
        if (n.sav_timer >= world.config.lambda) {
            if (n.v_saack.empty()) {
                n.ch = true;  // nobody around to cluster with
                n.sav_timer = 0;
                n.pch.reset();
            } else {
                formation_pool.push_back(id);
            }
        }
    }

    if (!formation_pool.empty()) form_sav_clusters(world, formation_pool);
}

struct SimResult {
    RunReport report;
    World world;
};

/// Runs the full trace through the engine and aggregates the report.
/// Deterministic: identical trace + config yield identical results.
inline SimResult simulate(const ZoneGrid& grid, const Trace& trace, const EngineConfig& config,
                          const std::vector<RsuSpec>& rsus = {}) {
    std::vector<TickStats> ticks;
    ticks.reserve(trace.snapshots.size());

    World world = make_world(grid, config, trace.snapshots.empty() ? 0 : trace.snapshots.front().t_ms,
                             rsus);
    for (const auto& snap : trace.snapshots) {
        step(world, snap);
        ticks.push_back(tick_stats(world));
    }
    world.log.close_all(world.t_ms);

    RunSettings settings;
    settings.alpha_km = grid.alpha_km;
    settings.engine = config;
    settings.n_rsus = static_cast<int>(rsus.size());

    SimResult result{summarize(std::move(ticks), vcsm(world.log), std::move(settings)),
                     std::move(world)};
    return result;
}

}  // namespace smzca
