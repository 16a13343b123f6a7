#include "smzca/engine.hpp"

#include <gtest/gtest.h>

#include "smzca/synth.hpp"
#include "support/invariants.hpp"
#include "support/trace_builder.hpp"

namespace {

using smzca::EngineConfig;
using smzca::NodeState;
using smzca::Trace;
using smzca::VehicleKind;
using smzca::World;
using smzca::testing::TraceBuilder;

// grid cells are ~556 m x ~534 m; the anchor sits mid-cell
const smzca::GeoPoint kAnchor{43.8675, -79.4367};

smzca::ZoneGrid test_grid() {
    return smzca::build_grid({43.86, -79.46}, {43.88, -79.42}, 0.5);
}

TraceBuilder builder() { return TraceBuilder(kAnchor); }

EngineConfig config(smzca::WeightVector w = {1.0 / 3, 1.0 / 3, 1.0 / 3}) {
    EngineConfig c;
    c.weights = w;
    return c;
}

/// Steps the whole trace, checking protocol invariants after every tick.
World run_trace(const Trace& trace, const EngineConfig& cfg,
                const std::vector<smzca::RsuSpec>& rsus = {}) {
    World world = smzca::make_world(test_grid(), cfg, trace.snapshots.front().t_ms, rsus);
    for (const auto& snap : trace.snapshots) {
        smzca::step(world, snap);
        const auto violations = smzca::testing::protocol_violations(world);
        EXPECT_TRUE(violations.empty()) << "t=" << world.t_ms << ": " << violations.front();
    }
    return world;
}

TEST(NeighborDiscovery, MinRangeRule) {
    std::map<std::string, NodeState> nodes;
    const auto mk = [&](const std::string& id, double x, double tr) {
        NodeState n;
        n.id = id;
        n.loc = builder().to_geo(x, 0.0);
        n.tr_m = tr;
        nodes[id] = n;
    };
    mk("a", 0.0, 100.0);
    mk("b", 150.0, 800.0);
    auto adj = smzca::neighbor_discovery(nodes);
    EXPECT_FALSE(adj["a"].count("b"));  // min(100, 800) < 150

    nodes["a"].tr_m = 200.0;
    adj = smzca::neighbor_discovery(nodes);
    EXPECT_TRUE(adj["a"].count("b"));
    EXPECT_TRUE(adj["b"].count("a"));
    EXPECT_FALSE(adj["a"].count("a"));
}

TEST(NeighborDiscovery, CoLocatedNodesFormCompleteGraph) {
    std::map<std::string, NodeState> nodes;
    for (int i = 0; i < 5; ++i) {
        NodeState n;
        n.id = "n" + std::to_string(i);
        n.loc = kAnchor;
        n.tr_m = 100.0;
        nodes[n.id] = n;
    }
    const auto adj = smzca::neighbor_discovery(nodes);
    for (const auto& [id, peers] : adj) EXPECT_EQ(peers.size(), 4u);
}

TEST(AckPolicy, CapacityCaps) {
    EngineConfig cfg = config();
    NodeState dru;
    dru.ch = true;
    dru.d = true;
    for (int i = 0; i < 29; ++i) dru.members.insert("m" + std::to_string(i));
    EXPECT_TRUE(smzca::ack_policy(dru, cfg));
    dru.members.insert("m29");
    EXPECT_FALSE(smzca::ack_policy(dru, cfg));

    NodeState car_head;
    car_head.ch = true;
    for (int i = 0; i < 20; ++i) car_head.members.insert("m" + std::to_string(i));
    EXPECT_FALSE(smzca::ack_policy(car_head, cfg));
    car_head.members.erase("m0");
    EXPECT_TRUE(smzca::ack_policy(car_head, cfg));
}

TEST(Step, CarJoinsAdjacentBusOnFirstTick) {
    auto tb = builder();
    tb.linear("bus0", VehicleKind::bus, 50.0, 0.0, 10.0, 0.0, 800.0, 0, 2);
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 10.0, 0.0, 100.0, 0, 2);
    const World w = run_trace(tb.build(), config());
    const NodeState& car = *w.find("car0");
    EXPECT_TRUE(car.cm);
    EXPECT_EQ(car.cluster_head, "bus0");
    EXPECT_TRUE(w.find("bus0")->members.count("car0"));
    EXPECT_TRUE(w.log.is_member("car0"));
}

TEST(Step, IsolatedCarSelfPromotesAfterLambdaRounds) {
    auto tb = builder();
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0, 0, 5);
    const Trace trace = tb.build();
    EngineConfig cfg = config();

    World world = smzca::make_world(test_grid(), cfg, 0);
    for (int t = 0; t < 3; ++t) smzca::step(world, trace.snapshots[t]);
    EXPECT_TRUE(smzca::is_sav(*world.find("car0"))) << "promoted too early";
    smzca::step(world, trace.snapshots[3]);  // 4th round
    EXPECT_TRUE(world.find("car0")->ch);
}

TEST(Step, TwoMutuallyReachableSavsBothBecomeHeads) {
    auto tb = builder();
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0, 0, 4);
    tb.linear("car1", VehicleKind::car, 50.0, 0.0, 0.0, 0.0, 100.0, 0, 4);
    const World w = run_trace(tb.build(), config());
    EXPECT_TRUE(w.find("car0")->ch);
    EXPECT_TRUE(w.find("car1")->ch);
    EXPECT_TRUE(w.find("car0")->members.empty());
    EXPECT_TRUE(w.find("car1")->members.empty());
}

TEST(Step, ThreeInLineElectTheMiddle) {
    auto tb = builder();
    tb.linear("carA", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0, 0, 4);
    tb.linear("carB", VehicleKind::car, 80.0, 0.0, 0.0, 0.0, 100.0, 0, 4);
    tb.linear("carC", VehicleKind::car, 160.0, 0.0, 0.0, 0.0, 100.0, 0, 4);
    const World w = run_trace(tb.build(), config());
    EXPECT_TRUE(w.find("carB")->ch);
    EXPECT_EQ(w.find("carA")->cluster_head, "carB");
    EXPECT_EQ(w.find("carC")->cluster_head, "carB");
    EXPECT_EQ(w.find("carB")->members.size(), 2u);
}

TEST(Step, EmptyHeadRevertsOnlyOnZoneChange) {
    auto tb = builder();
    // alone: self-promotes at tick 3; wanders inside its zone at tick 4;
    // crosses a zone boundary at tick 5
    for (int t = 0; t <= 3; ++t) tb.at(t, "car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0);
    tb.at(4, "car0", VehicleKind::car, 120.0, 0.0, 0.0, 0.0, 100.0);
    tb.at(5, "car0", VehicleKind::car, 700.0, 0.0, 0.0, 0.0, 100.0);
    const Trace trace = tb.build();

    World world = smzca::make_world(test_grid(), config(), 0);
    for (int t = 0; t <= 4; ++t) smzca::step(world, trace.snapshots[t]);
    EXPECT_TRUE(world.find("car0")->ch) << "reverted without a zone change";
    smzca::step(world, trace.snapshots[5]);
    EXPECT_FALSE(world.find("car0")->ch);
    EXPECT_TRUE(smzca::is_sav(*world.find("car0")));
}

TEST(Step, HeadWithMembersKeepsRoleAcrossZones) {
    auto tb = builder();
    tb.linear("bus0", VehicleKind::bus, 0.0, 0.0, 100.0, 0.0, 800.0, 0, 8);
    tb.linear("car0", VehicleKind::car, 10.0, 0.0, 100.0, 0.0, 100.0, 0, 8);
    const World w = run_trace(tb.build(), config());
    EXPECT_TRUE(w.find("bus0")->ch);  // buses never revert
    EXPECT_EQ(w.find("car0")->cluster_head, "bus0");
}

TEST(Step, OneTickRangeBlipDoesNotBreakTheLink) {
    auto tb = builder();
    tb.at(0, "car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0);
    tb.at(0, "bus0", VehicleKind::bus, 50.0, 0.0, 0.0, 0.0, 800.0);
    tb.at(1, "car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0);
    tb.at(1, "bus0", VehicleKind::bus, 200.0, 0.0, 0.0, 0.0, 800.0);  // out of range
    tb.at(2, "car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0);
    tb.at(2, "bus0", VehicleKind::bus, 50.0, 0.0, 0.0, 0.0, 800.0);  // back before confirmation
    const World w = run_trace(tb.build(), config());
    EXPECT_EQ(w.find("car0")->cluster_head, "bus0");
    EXPECT_TRUE(w.find("car0")->pending_disconnect.empty());
}

TEST(Step, TwoTicksOutOfRangeConfirmTheLoss) {
    auto tb = builder();
    tb.at(0, "car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0);
    tb.at(0, "bus0", VehicleKind::bus, 50.0, 0.0, 0.0, 0.0, 800.0);
    for (int t = 1; t <= 2; ++t) {
        tb.at(t, "car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0);
        tb.at(t, "bus0", VehicleKind::bus, 400.0, 0.0, 0.0, 0.0, 800.0);
    }
    const World w = run_trace(tb.build(), config());
    const NodeState& car = *w.find("car0");
    EXPECT_FALSE(car.cm);
    EXPECT_TRUE(w.find("bus0")->members.empty());
    EXPECT_FALSE(w.log.is_member("car0"));
}

TEST(Step, DepartedHeadFreesMembersNextTick) {
    auto tb = builder();
    tb.linear("bus0", VehicleKind::bus, 50.0, 0.0, 0.0, 0.0, 800.0, 0, 1);
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0, 0, 4);
    const Trace trace = tb.build();

    World world = smzca::make_world(test_grid(), config(), 0);
    smzca::step(world, trace.snapshots[0]);
    smzca::step(world, trace.snapshots[1]);
    ASSERT_EQ(world.find("car0")->cluster_head, "bus0");

    smzca::step(world, trace.snapshots[2]);  // bus gone; loss observed
    EXPECT_TRUE(world.find("car0")->cm);
    smzca::step(world, trace.snapshots[3]);  // confirmed
    EXPECT_TRUE(smzca::is_sav(*world.find("car0")));
}

TEST(Step, DruBeatsCloserNonBusHead) {
    auto tb = builder();
    // carH is alone long enough to promote itself, then the contenders appear
    for (int t = 0; t <= 3; ++t) tb.at(t, "carH", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0);
    for (int t = 4; t <= 5; ++t) {
        tb.at(t, "carH", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0);
        tb.at(t, "carX", VehicleKind::car, 10.0, 0.0, 0.0, 0.0, 100.0);
        tb.at(t, "bus0", VehicleKind::bus, 90.0, 0.0, 0.0, 0.0, 800.0);
    }
    const Trace trace = tb.build();
    World world = smzca::make_world(test_grid(), config({0.0, 0.0, 1.0}), 0);
    for (int t = 0; t <= 3; ++t) smzca::step(world, trace.snapshots[t]);
    ASSERT_TRUE(world.find("carH")->ch);
    smzca::step(world, trace.snapshots[4]);
    // distance strongly favors carH (10 m vs 90 m), yet the DRU wins
    EXPECT_EQ(world.find("carX")->cluster_head, "bus0");
}

TEST(Step, ArgminPicksLowestScoreThenLowestId) {
    auto tb = builder();
    // two buses in range; equal direction and speed, nearer one must win
    tb.linear("busFar", VehicleKind::bus, 80.0, 0.0, 5.0, 0.0, 800.0, 0, 1);
    tb.linear("busNear", VehicleKind::bus, 30.0, 0.0, 5.0, 0.0, 800.0, 0, 1);
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 5.0, 0.0, 100.0, 0, 1);
    const World w = run_trace(tb.build(), config({0.0, 0.0, 1.0}));
    EXPECT_EQ(w.find("car0")->cluster_head, "busNear");
}

TEST(Step, FullHeadSendsNoAckSoTheSavSelfPromotes) {
    auto tb = builder();
    tb.linear("bus0", VehicleKind::bus, 40.0, 0.0, 0.0, 0.0, 800.0, 0, 5);
    tb.linear("carM", VehicleKind::car, 35.0, 0.0, 0.0, 0.0, 100.0, 0, 5);
    tb.linear("carX", VehicleKind::car, 80.0, 0.0, 0.0, 0.0, 100.0, 0, 5);
    EngineConfig cfg = config();
    cfg.cap_dru = 1;  // carM fills the only seat on tick 0
    const Trace trace = tb.build();

    World world = smzca::make_world(test_grid(), cfg, 0);
    smzca::step(world, trace.snapshots[0]);
    ASSERT_EQ(world.find("carM")->cluster_head, "bus0");
    ASSERT_TRUE(smzca::is_sav(*world.find("carX")));
    for (int t = 1; t <= 2; ++t) smzca::step(world, trace.snapshots[t]);
    EXPECT_TRUE(smzca::is_sav(*world.find("carX")));
    smzca::step(world, trace.snapshots[3]);
    // carX saw no ACKs and no stand-alone neighbors for lambda rounds
    EXPECT_TRUE(world.find("carX")->ch);
}

TEST(Step, EqualScoresFallToLowestId) {
    auto tb = builder();
    tb.linear("busA", VehicleKind::bus, -50.0, 0.0, 5.0, 0.0, 800.0, 0, 1);
    tb.linear("busB", VehicleKind::bus, 50.0, 0.0, 5.0, 0.0, 800.0, 0, 1);
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 5.0, 0.0, 100.0, 0, 1);
    const World w = run_trace(tb.build(), config());
    EXPECT_EQ(w.find("car0")->cluster_head, "busA");
}

TEST(Step, PureGivenIdenticalInputs) {
    smzca::SynthSpec spec;
    spec.cars = 20;
    spec.buses = 2;
    spec.ticks = 12;
    const Trace trace = smzca::synth_trace(spec, 14);
    const auto grid = smzca::build_grid(spec.sw, spec.ne, 0.5);
    World world = smzca::make_world(grid, config(), 0);
    for (int t = 0; t < 8; ++t) smzca::step(world, trace.snapshots[t]);

    World copy = world;  // value-semantic state: stepping a copy must agree
    smzca::step(world, trace.snapshots[8]);
    smzca::step(copy, trace.snapshots[8]);
    for (const auto& [id, n] : world.nodes) {
        const NodeState* o = copy.find(id);
        ASSERT_NE(o, nullptr);
        EXPECT_EQ(n.ch, o->ch);
        EXPECT_EQ(n.cm, o->cm);
        EXPECT_EQ(n.cluster_head, o->cluster_head);
        EXPECT_EQ(n.members, o->members);
        EXPECT_EQ(n.z, o->z);
        EXPECT_EQ(n.sav_timer, o->sav_timer);
    }
}

TEST(Step, ReappearingVehicleResumesAsFreshSav) {
    auto tb = builder();
    tb.linear("bus0", VehicleKind::bus, 40.0, 0.0, 0.0, 0.0, 800.0, 0, 8);
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0, 0, 2);
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0, 5, 8);  // back after a gap
    const Trace trace = tb.build();

    World world = smzca::make_world(test_grid(), config(), 0);
    for (int t = 0; t <= 4; ++t) smzca::step(world, trace.snapshots[t]);
    EXPECT_EQ(world.find("car0"), nullptr);  // out of the area
    smzca::step(world, trace.snapshots[5]);
    // fresh attendance: rejoined the bus from a clean slate
    EXPECT_EQ(world.find("car0")->cluster_head, "bus0");
    EXPECT_FALSE(world.find("car0")->pz.has_value());
    int entries_for_car = 0;
    for (const auto& e : world.log.entries()) {
        if (e.vehicle_id == "car0") ++entries_for_car;
    }
    EXPECT_EQ(entries_for_car, 2);
}

TEST(EngineConfig, Validation) {
    EngineConfig bad = config();
    bad.tau_ms = 0;
    EXPECT_THROW(smzca::validate(bad), std::invalid_argument);
    bad = config();
    bad.lambda = 0;
    EXPECT_THROW(smzca::validate(bad), std::invalid_argument);
    bad = config();
    bad.cap_ch = 0;
    EXPECT_THROW(smzca::validate(bad), std::invalid_argument);
    bad = config();
    bad.weights = {0.5, 0.5, 0.5};
    EXPECT_THROW(smzca::validate(bad), std::invalid_argument);
    EXPECT_NO_THROW(smzca::validate(config()));
}

TEST(Step, RejectsOutOfOrderSnapshot) {
    auto tb = builder();
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0, 0, 2);
    const Trace trace = tb.build();
    World world = smzca::make_world(test_grid(), config(), 0);
    smzca::step(world, trace.snapshots[0]);
    EXPECT_THROW(smzca::step(world, trace.snapshots[2]), std::invalid_argument);
}

TEST(Step, BusesAlwaysHeadsAndDru) {
    smzca::SynthSpec spec;
    spec.cars = 30;
    spec.buses = 4;
    spec.ticks = 40;
    const Trace trace = smzca::synth_trace(spec, 11);
    smzca::EngineConfig cfg = config();
    cfg.common_tr_m = 200.0;

    World world = smzca::make_world(smzca::build_grid(spec.sw, spec.ne, 0.5), cfg, 0);
    for (const auto& snap : trace.snapshots) {
        smzca::step(world, snap);
        for (const auto& [id, n] : world.nodes) {
            if (n.kind == VehicleKind::bus) {
                EXPECT_TRUE(n.ch && n.d) << id;
            } else {
                EXPECT_FALSE(n.d) << id;
            }
        }
    }
}

TEST(Step, InvariantsHoldAcrossSyntheticRuns) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        smzca::SynthSpec spec;
        spec.cars = 40;
        spec.buses = 4;
        spec.ticks = 50;
        const Trace trace = smzca::synth_trace(spec, seed);
        smzca::EngineConfig cfg = config({0.5, 0.2, 0.3});
        cfg.common_tr_m = 150.0;
        cfg.seed = seed;

        World world = smzca::make_world(smzca::build_grid(spec.sw, spec.ne, 0.5), cfg, 0);
        for (const auto& snap : trace.snapshots) {
            smzca::step(world, snap);
            const auto violations = smzca::testing::protocol_violations(world);
            ASSERT_TRUE(violations.empty())
                << "seed " << seed << " t=" << world.t_ms << ": " << violations.front();
        }
    }
}

TEST(Simulate, DeterministicEventStreams) {
    smzca::SynthSpec spec;
    spec.cars = 35;
    spec.buses = 3;
    spec.ticks = 45;
    const Trace trace = smzca::synth_trace(spec, 5);
    const auto grid = smzca::build_grid(spec.sw, spec.ne, 0.5);
    smzca::EngineConfig cfg = config({0.4, 0.3, 0.3});
    cfg.common_tr_m = 200.0;

    const auto a = smzca::simulate(grid, trace, cfg);
    const auto b = smzca::simulate(grid, trace, cfg);
    ASSERT_EQ(a.report.ticks.size(), b.report.ticks.size());
    for (std::size_t i = 0; i < a.report.ticks.size(); ++i) {
        EXPECT_EQ(a.report.ticks[i].n_ch, b.report.ticks[i].n_ch);
        EXPECT_EQ(a.report.ticks[i].n_sav, b.report.ticks[i].n_sav);
        EXPECT_EQ(a.report.ticks[i].n_cm, b.report.ticks[i].n_cm);
        EXPECT_EQ(a.report.ticks[i].n_components, b.report.ticks[i].n_components);
    }
    EXPECT_EQ(a.report.vcsm.has_value(), b.report.vcsm.has_value());
    if (a.report.vcsm) EXPECT_EQ(*a.report.vcsm, *b.report.vcsm);
    for (const auto& [id, n] : a.world.nodes) {
        const NodeState* other = b.world.find(id);
        ASSERT_NE(other, nullptr);
        EXPECT_EQ(n.ch, other->ch);
        EXPECT_EQ(n.cm, other->cm);
        EXPECT_EQ(n.cluster_head, other->cluster_head);
    }
}

TEST(Simulate, PopulationIdentityEveryTick) {
    smzca::SynthSpec spec;
    spec.cars = 25;
    spec.buses = 3;
    spec.ticks = 30;
    const Trace trace = smzca::synth_trace(spec, 8);
    const auto grid = smzca::build_grid(spec.sw, spec.ne, 0.5);
    const auto sim = smzca::simulate(grid, trace, config());
    for (const auto& t : sim.report.ticks) {
        EXPECT_EQ(t.n_ch + t.n_sav + t.n_cm, t.n_vehicles);
        EXPECT_EQ(t.n_buses, 3);
    }
}

TEST(Simulate, RsusArePermanentStationaryHeads) {
    auto tb = builder();
    tb.linear("car0", VehicleKind::car, 0.0, 0.0, 0.0, 0.0, 100.0, 0, 5);
    const Trace trace = tb.build();
    smzca::RsuSpec rsu;
    rsu.loc = builder().to_geo(40.0, 0.0);
    const auto sim = smzca::simulate(test_grid(), trace, config(), {rsu});
    const NodeState* r = sim.world.find("rsu0");
    ASSERT_NE(r, nullptr);
    EXPECT_TRUE(r->ch);
    EXPECT_FALSE(r->d);  // no DRU priority for infrastructure
    EXPECT_EQ(sim.world.find("car0")->cluster_head, "rsu0");
    EXPECT_EQ(sim.report.ticks.front().n_vehicles, 2);
}

}  // namespace
