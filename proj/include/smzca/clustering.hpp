#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smzca/state.hpp"

namespace smzca {

/// Overall-direction vector: from the centroid of the previous zone to the
/// current position. Nodes without a usable previous zone fall back to their
/// velocity vector; a near-zero velocity leaves the direction undefined
/// (zero vector).
inline PlanarVector overall_direction(const NodeState& n, const ZoneGrid& grid) {
    if (n.pz && *n.pz != n.z) return displacement(zone_centroid(grid, *n.pz), n.loc);
    if (magnitude(n.vel) > 0.1) return n.vel;
    return {0.0, 0.0};
}

/// Angle between two overall-direction vectors, radians in [0, pi].
/// An undefined direction on either side yields the neutral pi/2.
inline double zotsim(const PlanarVector& o_i, const PlanarVector& o_j) {
    const double mi = magnitude(o_i);
    const double mj = magnitude(o_j);
    if (mi == 0.0 || mj == 0.0) return std::numbers::pi / 2.0;
    const double phi = std::clamp(dot(o_i, o_j) / (mi * mj), -1.0, 1.0);
    return std::acos(phi);
}

/// Relative features between a vehicle and a cluster-head candidate, raw and
/// normalized to dimensionless [0, 1] (the direction component tops out at
/// 0.5 because angles are normalized by 2*pi).
struct RelativeFeatureVector {
    double zotsim_rad = 0.0;
    double dspeed_mps = 0.0;
    double dist_m = 0.0;
    double n_zotsim = 0.0;
    double n_dspeed = 0.0;
    double n_dist = 0.0;
};

inline RelativeFeatureVector rfv(const NodeState& node, const NodeState& head,
                                 const ZoneGrid& grid, double epsilon) {
    const double dist = distance(node.loc, head.loc);
    const double min_tr = std::min(node.tr_m, head.tr_m);
    if (dist > min_tr) {
        throw std::invalid_argument("rfv: '" + node.id + "' and '" + head.id +
                                    "' are not within range");
    }
    const double speed_i = magnitude(node.vel);
    const double speed_j = magnitude(head.vel);

    RelativeFeatureVector f;
    f.zotsim_rad = zotsim(overall_direction(node, grid), overall_direction(head, grid));
    f.dspeed_mps = std::abs(speed_i - speed_j);
    f.dist_m = dist;
    f.n_zotsim = f.zotsim_rad / (2.0 * std::numbers::pi);
    f.n_dspeed = f.dspeed_mps / (std::max(speed_i, speed_j) + epsilon);
    f.n_dist = f.dist_m / min_tr;
    return f;
}

/// Cluster-head eligibility score: weighted sum of the normalized features.
/// Lower is better.
inline double chec(const WeightVector& w, const RelativeFeatureVector& f) {
    return w.w1 * f.n_zotsim + w.w2 * f.n_dspeed + w.w3 * f.n_dist;
}

inline std::vector<double> chec(const WeightVector& w,
                                const std::vector<RelativeFeatureVector>& columns) {
    std::vector<double> scores;
    scores.reserve(columns.size());
    for (const auto& f : columns) scores.push_back(chec(w, f));
    return scores;
}

namespace detail {

struct ScoredCandidate {
    double score;
    std::string id;

    bool operator<(const ScoredCandidate& o) const {
        return score != o.score ? score < o.score : id < o.id;
    }
};

inline std::vector<ScoredCandidate> score_candidates(const World& world, const NodeState& node,
                                                     const std::set<std::string>& candidates) {
    std::vector<ScoredCandidate> scored;
    scored.reserve(candidates.size());
    for (const auto& id : candidates) {
        const NodeState* cand = world.find(id);
        if (!cand) continue;
        scored.push_back(
            {chec(world.config.weights, rfv(node, *cand, world.grid, world.config.epsilon)), id});
    }
    std::sort(scored.begin(), scored.end());
    return scored;
}

}  // namespace detail

/// One CH-selection round for an unclustered SAV: DRUs in range take absolute
/// priority, otherwise ordinary heads compete; candidates are proposed to in
/// ascending score order (ties to the lowest id) and the first one that still
/// acknowledges wins. Returns the accepted head, or nullopt when the round
/// failed.
inline std::optional<std::string> select_ch(const World& world, const NodeState& node) {
    const std::set<std::string>& pool = !node.v_dack.empty() ? node.v_dack : node.v_chack;
    for (const auto& cand : detail::score_candidates(world, node, pool)) {
        const NodeState* head = world.find(cand.id);
        if (head && ack_policy(*head, world.config)) return cand.id;
    }
    return std::nullopt;
}

/// Applies a join decided this tick: links both sides and logs the event.
inline void apply_join(World& world, NodeState& node, const std::string& head_id) {
    NodeState& head = *world.find(head_id);
    node.cm = true;
    node.cluster_head = head_id;
    node.sav_timer = 0;
    node.pch.reset();
    node.pending_disconnect.clear();
    head.members.insert(node.id);
    node.v_och = node.v_dack;
    node.v_och.insert(node.v_chack.begin(), node.v_chack.end());
    node.v_och.erase(head_id);
    if (node.kind != VehicleKind::rsu) world.log.join(node.id, head_id, world.t_ms);
}

/// Cluster formation among SAVs that exhausted their CH-selection rounds.
/// Every participant announces itself as a potential cluster head along with
/// its SAV-neighbor count; participants then adopt announcements from
/// in-range neighbors whose count is at least their own and propose to the
/// best-scoring one. Isolated announcers and mutually-exclusive pairs promote
/// themselves instead.
inline void form_sav_clusters(World& world, const std::vector<std::string>& savs) {
    const std::set<std::string> eligible(savs.begin(), savs.end());

    // announcement round: v_PCH starts as the announcer's own id
    for (const auto& id : savs) {
        if (NodeState* n = world.find(id)) n->pch = id;
    }

    const auto neighbor_count = [&](const std::string& id) {
        const NodeState* n = world.find(id);
        return n ? n->v_saack.size() : std::size_t{0};
    };

    // exactly two SAVs alone within each other's range: both become heads
    for (const auto& id : savs) {
        NodeState* n = world.find(id);
        if (!n || !is_sav(*n) || n->v_saack.size() != 1) continue;
        const std::string& other = *n->v_saack.begin();
        if (!eligible.count(other)) continue;
        NodeState* o = world.find(other);
        if (o && is_sav(*o) && o->v_saack.size() == 1 && *o->v_saack.begin() == id) {
            n->ch = true;
            o->ch = true;
            n->pch.reset();
            o->pch.reset();
            n->sav_timer = 0;
            o->sav_timer = 0;
        }
    }

    // collect adopted announcements per participant
    std::map<std::string, std::set<std::string>> pch_sets;
    for (const auto& id : savs) {
        NodeState* n = world.find(id);
        if (!n || !is_sav(*n)) continue;
        std::set<std::string>& pchs = pch_sets[id];
        for (const auto& k : n->v_saack) {
            if (!eligible.count(k)) continue;  // only participants announced
            const NodeState* peer = world.find(k);
            if (!peer || !peer->pch) continue;
            const std::string& announced = *peer->pch;
            if (!world.adjacent(id, announced)) continue;  // discard out-of-range ids
            if (neighbor_count(announced) >= n->v_saack.size()) pchs.insert(announced);
        }
    }

    // nobody better in range: promote self
    for (const auto& id : savs) {
        NodeState* n = world.find(id);
        if (!n || !is_sav(*n)) continue;
        if (pch_sets[id].empty()) {
            n->ch = true;
            n->pch.reset();
            n->sav_timer = 0;
        }
    }

    // proposal round, ascending proposer id
    for (const auto& id : savs) {
        NodeState* n = world.find(id);
        if (!n || !is_sav(*n)) continue;
        for (const auto& cand : detail::score_candidates(world, *n, pch_sets[id])) {
            NodeState* head = world.find(cand.id);
            if (!head || head->cm) continue;  // a member cannot head a cluster
            if (head->ch && !ack_policy(*head, world.config)) continue;
            if (!head->ch) {
                head->ch = true;
                head->pch.reset();
                head->sav_timer = 0;
            }
            apply_join(world, *n, cand.id);
            break;
        }
        // exhausted proposals leave the node an SAV; it retries next tick
    }
}

/// Maintenance transitions, run before CH selection each tick:
///  - a member whose head stayed out of range for a full update period leaves
///    (one-tick blips survive);
///  - a memberless non-bus head that changed zone reverts to SAV;
///  - heads refresh their head-to-head link sets.
inline void maintain(World& world) {
    // member-side disconnection confirmation
    for (auto& [id, n] : world.nodes) {
        if (!n.cm) continue;
        const std::string head_id = *n.cluster_head;
        NodeState* head = world.find(head_id);
        const bool connected = head && world.adjacent(id, head_id);
        if (connected) {
            n.pending_disconnect.erase(head_id);
            continue;
        }
        if (++n.pending_disconnect[head_id] < 2) continue;  // not yet confirmed
        n.cm = false;
        n.cluster_head.reset();
        n.pending_disconnect.erase(head_id);
        n.sav_timer = 0;
        if (head) head->members.erase(id);
        if (n.kind != VehicleKind::rsu) world.log.leave(id, world.t_ms);
    }

    // memberless non-bus heads revert on zone change
    for (auto& [id, n] : world.nodes) {
        if (n.ch && n.kind != VehicleKind::bus && n.members.empty() && n.zone_changed) {
            n.ch = false;
            n.sav_timer = 0;
            n.pch.reset();
        }
    }

    // head-to-head links
    for (auto& [id, n] : world.nodes) {
        if (!n.ch) continue;
        n.v_och.clear();
        auto it = world.adjacency.find(id);
        if (it == world.adjacency.end()) continue;
        for (const auto& other : it->second) {
            const NodeState* o = world.find(other);
            if (o && o->ch) n.v_och.insert(other);
        }
    }
}

}  // namespace smzca
