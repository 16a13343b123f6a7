// Generates deterministic synthetic mobility traces on a grid road layout,
// for experiments without an external traffic simulator.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smzca/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Synthetic mobility-trace generator"};

    smzca::SynthSpec spec;
    std::string out_path = "trace.txt";
    std::uint64_t seed = 1;
    std::vector<double> bbox;

    app.add_option("--out", out_path, "output trace file");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--cars", spec.cars, "number of cars");
    app.add_option("--buses", spec.buses, "number of buses");
    app.add_option("--ticks", spec.ticks, "number of snapshots");
    app.add_option("--tick-ms", spec.tick_ms, "snapshot spacing (ms)");
    app.add_option("--bbox", bbox, "lat_min long_min lat_max long_max")->expected(4);
    app.add_option("--ew-roads", spec.ew_roads, "east-west roads");
    app.add_option("--ns-roads", spec.ns_roads, "north-south roads");
    app.add_option("--car-speed-min", spec.car_speed_min_mps, "m/s");
    app.add_option("--car-speed-max", spec.car_speed_max_mps, "m/s");
    app.add_option("--bus-speed", spec.bus_speed_mps, "m/s");
    app.add_option("--turn-prob", spec.turn_prob, "turn probability per intersection");
    app.add_option("--car-tr", spec.car_tr_m, "car transmission range (m)");
    app.add_option("--bus-tr", spec.bus_tr_m, "bus transmission range (m)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!bbox.empty()) {
            spec.sw = {bbox[0], bbox[1]};
            spec.ne = {bbox[2], bbox[3]};
        }
        const smzca::Trace trace = smzca::synth_trace(spec, seed);
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open '" + out_path + "'");
        smzca::serialize_trace(trace, out);
        std::cout << "wrote " << trace.snapshots.size() << " snapshots ("
                  << spec.cars + spec.buses << " vehicles) to " << out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
