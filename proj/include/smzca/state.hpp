#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "smzca/geo.hpp"
#include "smzca/membership_log.hpp"
#include "smzca/trace.hpp"
#include "smzca/zoning.hpp"

namespace smzca {

/// CHEC weights (direction, speed difference, distance). Each in [0, 1],
/// summing to 1.
struct WeightVector {
    double w1 = 1.0 / 3.0;
    double w2 = 1.0 / 3.0;
    double w3 = 1.0 / 3.0;

    friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

inline WeightVector make_weights(double w1, double w2, double w3) {
    const auto in_unit = [](double w) { return std::isfinite(w) && w >= 0.0 && w <= 1.0; };
    if (!in_unit(w1) || !in_unit(w2) || !in_unit(w3)) {
        throw std::invalid_argument("weights must lie in [0, 1]");
    }
    if (std::abs(w1 + w2 + w3 - 1.0) > 1e-9) {
        throw std::invalid_argument("weights must sum to 1");
    }
    return {w1, w2, w3};
}

struct EngineConfig {
    std::int64_t tau_ms = 1000;           // beacon / update period
    int lambda = 4;                       // rounds before self-promotion / SAV formation
    std::optional<double> common_tr_m;    // overrides car transmission ranges
    double dru_tr_m = 800.0;              // applied to every bus
    int cap_dru = 30;                     // member cap for bus cluster heads
    int cap_ch = 20;                      // member cap for other cluster heads
    WeightVector weights;
    double epsilon = 1e-6;                // speed-normalization regularizer
    std::uint64_t seed = 0;
};

inline void validate(const EngineConfig& c) {
    if (c.tau_ms <= 0) throw std::invalid_argument("tau_ms must be > 0");
    if (c.lambda < 1) throw std::invalid_argument("lambda must be >= 1");
    if (c.cap_dru < 1 || c.cap_ch < 1) throw std::invalid_argument("member caps must be >= 1");
    if (!(c.dru_tr_m > 0.0)) throw std::invalid_argument("dru_tr_m must be > 0");
    if (c.common_tr_m && !(*c.common_tr_m > 0.0)) {
        throw std::invalid_argument("common_tr_m must be > 0");
    }
    if (!(c.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    (void)make_weights(c.weights.w1, c.weights.w2, c.weights.w3);
}

/// Full per-node clustering state. `d` marks dynamic road units (buses),
/// which are permanent, prioritized cluster heads.
struct NodeState {
    std::string id;
    VehicleKind kind = VehicleKind::car;
    bool ch = false;
    bool cm = false;
    bool d = false;
    GeoPoint loc;
    PlanarVector vel;
    double tr_m = 0.0;
    ZoneId z = 0;
    std::optional<ZoneId> pz;
    bool zone_changed = false;  // during the current tick

    std::optional<std::string> cluster_head;  // set iff cm
    std::set<std::string> members;            // non-empty only if ch

    // ACK memory refreshed every beacon phase
    std::set<std::string> v_dack;   // reachable DRU heads with capacity
    std::set<std::string> v_chack;  // reachable non-DRU heads with capacity
    std::set<std::string> v_cmack;  // reachable cluster members
    std::set<std::string> v_saack;  // reachable stand-alone vehicles
    std::set<std::string> v_och;    // other reachable cluster heads
    std::set<std::string> v_ov;     // other reachable vehicles (CMs + SAVs)

    std::optional<std::string> pch;  // announced potential cluster head
    int sav_timer = 0;               // ticks spent as an unclustered SAV
    std::map<std::string, int> pending_disconnect;  // head id -> ticks out of range
};

inline bool is_sav(const NodeState& n) { return !n.ch && !n.cm; }

inline int member_cap(const NodeState& head, const EngineConfig& cfg) {
    return head.d ? cfg.cap_dru : cfg.cap_ch;
}

/// A head ACKs join requests only while it has spare member capacity.
inline bool ack_policy(const NodeState& head, const EngineConfig& cfg) {
    return head.ch && static_cast<int>(head.members.size()) < member_cap(head, cfg);
}

/// Whole simulation state for one run.
struct World {
    ZoneGrid grid;
    EngineConfig config;
    std::map<std::string, NodeState> nodes;  // ordered: id order is the processing order
    std::int64_t t_ms = 0;
    std::map<std::string, std::set<std::string>> adjacency;
    MembershipLog log;

    const NodeState* find(const std::string& id) const {
        auto it = nodes.find(id);
        return it == nodes.end() ? nullptr : &it->second;
    }
    NodeState* find(const std::string& id) {
        auto it = nodes.find(id);
        return it == nodes.end() ? nullptr : &it->second;
    }
    bool adjacent(const std::string& a, const std::string& b) const {
        auto it = adjacency.find(a);
        return it != adjacency.end() && it->second.count(b) > 0;
    }
};

}  // namespace smzca
