#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smzca/engine.hpp"
#include "smzca/metrics.hpp"
#include "smzca/trace.hpp"

namespace smzca {

/// Everything a single run or a weight sweep needs. Mirrors the JSON config
/// schema key for key.
struct RunConfig {
    std::string trace;
    std::optional<double> start_s;
    std::optional<double> end_s;
    std::optional<GeoPoint> bbox_sw;  // post-padding box; derived from the trace when absent
    std::optional<GeoPoint> bbox_ne;
    double alpha_km = 0.5;
    int pad_rows = 2;
    int pad_cols = 2;
    std::int64_t tau_ms = 1000;
    int lambda = 4;
    double epsilon = 1e-6;
    std::optional<double> common_tr_m;
    double dru_tr_m = 800.0;
    int cap_dru = 30;
    int cap_ch = 20;
    std::optional<WeightVector> weights;
    bool sweep = false;
    std::vector<RsuSpec> rsus;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end()) {
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
        }
    }
}

inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_w(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(
        j,
        {"trace", "start_s", "end_s", "bbox", "alpha_km", "pad_rows", "pad_cols", "tau_ms",
         "lambda", "epsilon", "common_tr_m", "dru_tr_m", "cap_dru", "cap_ch", "weights", "sweep",
         "rsus", "seed", "out_dir"},
        "top level");

    RunConfig c;
    if (j.contains("trace")) c.trace = j.at("trace").get<std::string>();
    if (j.contains("start_s")) c.start_s = j.at("start_s").get<double>();
    if (j.contains("end_s")) c.end_s = j.at("end_s").get<double>();
    if (j.contains("bbox")) {
        const auto& b = j.at("bbox");
        detail::reject_unknown_keys(b, {"lat_min", "long_min", "lat_max", "long_max"}, "bbox");
        c.bbox_sw = GeoPoint{b.at("lat_min").get<double>(), b.at("long_min").get<double>()};
        c.bbox_ne = GeoPoint{b.at("lat_max").get<double>(), b.at("long_max").get<double>()};
    }
    if (j.contains("alpha_km")) c.alpha_km = j.at("alpha_km").get<double>();
    if (j.contains("pad_rows")) c.pad_rows = j.at("pad_rows").get<int>();
    if (j.contains("pad_cols")) c.pad_cols = j.at("pad_cols").get<int>();
    if (j.contains("tau_ms")) c.tau_ms = j.at("tau_ms").get<std::int64_t>();
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<int>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("common_tr_m")) c.common_tr_m = j.at("common_tr_m").get<double>();
    if (j.contains("dru_tr_m")) c.dru_tr_m = j.at("dru_tr_m").get<double>();
    if (j.contains("cap_dru")) c.cap_dru = j.at("cap_dru").get<int>();
    if (j.contains("cap_ch")) c.cap_ch = j.at("cap_ch").get<int>();
    if (j.contains("weights")) {
        const auto& w = j.at("weights");
        if (!w.is_array() || w.size() != 3) {
            throw std::invalid_argument("config: weights must be an array of 3 numbers");
        }
        c.weights = make_weights(w[0].get<double>(), w[1].get<double>(), w[2].get<double>());
    }
    if (j.contains("sweep")) c.sweep = j.at("sweep").get<bool>();
    if (j.contains("rsus")) {
        for (const auto& r : j.at("rsus")) {
            detail::reject_unknown_keys(r, {"lat", "long", "tr_m"}, "rsus");
            RsuSpec spec;
            spec.loc = {r.at("lat").get<double>(), r.at("long").get<double>()};
            if (r.contains("tr_m")) spec.tr_m = r.at("tr_m").get<double>();
            c.rsus.push_back(spec);
        }
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["trace"] = c.trace;
    if (c.start_s) j["start_s"] = *c.start_s;
    if (c.end_s) j["end_s"] = *c.end_s;
    if (c.bbox_sw && c.bbox_ne) {
        j["bbox"] = {{"lat_min", c.bbox_sw->lat},
                     {"long_min", c.bbox_sw->lon},
                     {"lat_max", c.bbox_ne->lat},
                     {"long_max", c.bbox_ne->lon}};
    }
    j["alpha_km"] = c.alpha_km;
    j["pad_rows"] = c.pad_rows;
    j["pad_cols"] = c.pad_cols;
    j["tau_ms"] = c.tau_ms;
    j["lambda"] = c.lambda;
    j["epsilon"] = c.epsilon;
    if (c.common_tr_m) j["common_tr_m"] = *c.common_tr_m;
    j["dru_tr_m"] = c.dru_tr_m;
    j["cap_dru"] = c.cap_dru;
    j["cap_ch"] = c.cap_ch;
    if (c.weights) j["weights"] = {c.weights->w1, c.weights->w2, c.weights->w3};
    j["sweep"] = c.sweep;
    if (!c.rsus.empty()) {
        j["rsus"] = nlohmann::json::array();
        for (const auto& r : c.rsus) {
            j["rsus"].push_back({{"lat", r.loc.lat}, {"long", r.loc.lon}, {"tr_m", r.tr_m}});
        }
    }
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    return j;
}

/// Zone-size guidance by common transmission range. Returns a warning string
/// when alpha strays from the recommended value; configs are never rejected
/// for it.
inline std::optional<std::string> alpha_guidance_warning(const RunConfig& c) {
    if (!c.common_tr_m) return std::nullopt;
    const double tr = *c.common_tr_m;
    double suggested = 0.0;
    if (tr >= 100.0 && tr <= 300.0) {
        suggested = 0.5;
    } else if (tr >= 400.0 && tr <= 500.0) {
        suggested = 0.8;
    } else if (tr >= 600.0 && tr <= 1000.0) {
        suggested = 1.0;
    } else {
        return std::nullopt;
    }
    if (std::abs(c.alpha_km - suggested) <= 1e-9) return std::nullopt;
    std::ostringstream msg;
    msg << "alpha_km " << c.alpha_km << " differs from the suggested " << suggested
        << " for common TR " << tr << " m";
    return msg.str();
}

/// All weight triples with components in {0.0, 0.1, ..., 1.0} summing to 1.
inline std::vector<WeightVector> weight_sweep_triples() {
    std::vector<WeightVector> out;
    for (int a = 0; a <= 10; ++a) {
        for (int b = 0; a + b <= 10; ++b) {
            const int c = 10 - a - b;
            out.push_back(make_weights(a / 10.0, b / 10.0, c / 10.0));
        }
    }
    return out;
}

inline ZoneGrid grid_for(const RunConfig& cfg, const Trace& trace) {
    if (cfg.bbox_sw && cfg.bbox_ne) {
        return build_grid(*cfg.bbox_sw, *cfg.bbox_ne, cfg.alpha_km, cfg.pad_rows, cfg.pad_cols);
    }
    // derive the padded box from the data extent plus the padding frame
    bool any = false;
    GeoPoint lo{90.0, 180.0}, hi{-90.0, -180.0};
    const auto absorb = [&](const GeoPoint& p) {
        lo.lat = std::min(lo.lat, p.lat);
        lo.lon = std::min(lo.lon, p.lon);
        hi.lat = std::max(hi.lat, p.lat);
        hi.lon = std::max(hi.lon, p.lon);
        any = true;
    };
    for (const auto& snap : trace.snapshots) {
        for (const auto& rec : snap.records) absorb(rec.loc);
    }
    for (const auto& rsu : cfg.rsus) absorb(rsu.loc);
    if (!any) throw std::invalid_argument("cannot derive a bounding box from an empty trace");

    const double pad_ns_m = cfg.pad_rows * cfg.alpha_km * 1000.0;
    const double pad_ew_m = cfg.pad_cols * cfg.alpha_km * 1000.0;
    const double mid_lat = deg_to_rad((lo.lat + hi.lat) / 2.0);
    const double dlat = rad_to_deg(pad_ns_m / kEarthRadiusM);
    const double dlon = rad_to_deg(pad_ew_m / (kEarthRadiusM * std::cos(mid_lat)));
    return build_grid({lo.lat - dlat, lo.lon - dlon}, {hi.lat + dlat, hi.lon + dlon}, cfg.alpha_km,
                      cfg.pad_rows, cfg.pad_cols);
}

inline EngineConfig engine_config_for(const RunConfig& cfg, const WeightVector& w) {
    EngineConfig e;
    e.tau_ms = cfg.tau_ms;
    e.lambda = cfg.lambda;
    e.common_tr_m = cfg.common_tr_m;
    e.dru_tr_m = cfg.dru_tr_m;
    e.cap_dru = cfg.cap_dru;
    e.cap_ch = cfg.cap_ch;
    e.weights = w;
    e.epsilon = cfg.epsilon;
    e.seed = cfg.seed;
    return e;
}

inline Trace load_windowed_trace(const RunConfig& cfg) {
    std::ifstream in(cfg.trace);
    if (!in) throw std::runtime_error("cannot open trace '" + cfg.trace + "'");
    Trace trace = parse_trace(in);
    if (cfg.start_s || cfg.end_s) {
        const double lo = cfg.start_s.value_or(0.0);
        const double hi =
            cfg.end_s.value_or(static_cast<double>(trace.snapshots.back().t_ms) / 1000.0);
        trace = window(trace, lo, hi);
    }
    if (trace.tick_ms != 0 && trace.tick_ms != cfg.tau_ms) {
        throw std::invalid_argument("trace tick " + std::to_string(trace.tick_ms) +
                                    " ms does not match tau " + std::to_string(cfg.tau_ms) + " ms");
    }
    return trace;
}

// ---- report serialization ----------------------------------------------

inline nlohmann::json report_to_json(const RunReport& r) {
    nlohmann::json j;
    j["settings"] = {
        {"alpha_km", r.settings.alpha_km},
        {"tau_ms", r.settings.engine.tau_ms},
        {"lambda", r.settings.engine.lambda},
        {"epsilon", r.settings.engine.epsilon},
        {"dru_tr_m", r.settings.engine.dru_tr_m},
        {"cap_dru", r.settings.engine.cap_dru},
        {"cap_ch", r.settings.engine.cap_ch},
        {"weights",
         {r.settings.engine.weights.w1, r.settings.engine.weights.w2, r.settings.engine.weights.w3}},
        {"seed", r.settings.engine.seed},
        {"n_rsus", r.settings.n_rsus},
    };
    if (r.settings.engine.common_tr_m) j["settings"]["common_tr_m"] = *r.settings.engine.common_tr_m;
    j["ticks"] = nlohmann::json::array();
    for (const auto& t : r.ticks) {
        j["ticks"].push_back({{"t_ms", t.t_ms},
                              {"n_vehicles", t.n_vehicles},
                              {"n_buses", t.n_buses},
                              {"n_ch", t.n_ch},
                              {"n_sav", t.n_sav},
                              {"n_cm", t.n_cm},
                              {"n_components", t.n_components}});
    }
    j["averages"] = {{"n_ch", r.avg_ch},
                     {"n_sav", r.avg_sav},
                     {"n_cm", r.avg_cm},
                     {"n_components", r.avg_components}};
    if (r.vcsm) {
        j["vcsm"] = *r.vcsm;
    } else {
        j["vcsm"] = nullptr;
    }
    return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
    RunReport r;
    const auto& s = j.at("settings");
    r.settings.alpha_km = s.at("alpha_km").get<double>();
    r.settings.engine.tau_ms = s.at("tau_ms").get<std::int64_t>();
    r.settings.engine.lambda = s.at("lambda").get<int>();
    r.settings.engine.epsilon = s.at("epsilon").get<double>();
    r.settings.engine.dru_tr_m = s.at("dru_tr_m").get<double>();
    r.settings.engine.cap_dru = s.at("cap_dru").get<int>();
    r.settings.engine.cap_ch = s.at("cap_ch").get<int>();
    r.settings.engine.weights = make_weights(s.at("weights")[0].get<double>(),
                                             s.at("weights")[1].get<double>(),
                                             s.at("weights")[2].get<double>());
    r.settings.engine.seed = s.at("seed").get<std::uint64_t>();
    r.settings.n_rsus = s.at("n_rsus").get<int>();
    if (s.contains("common_tr_m")) r.settings.engine.common_tr_m = s.at("common_tr_m").get<double>();
    for (const auto& t : j.at("ticks")) {
        TickStats ts;
        ts.t_ms = t.at("t_ms").get<std::int64_t>();
        ts.n_vehicles = t.at("n_vehicles").get<int>();
        ts.n_buses = t.at("n_buses").get<int>();
        ts.n_ch = t.at("n_ch").get<int>();
        ts.n_sav = t.at("n_sav").get<int>();
        ts.n_cm = t.at("n_cm").get<int>();
        ts.n_components = t.at("n_components").get<int>();
        r.ticks.push_back(ts);
    }
    r.avg_ch = j.at("averages").at("n_ch").get<double>();
    r.avg_sav = j.at("averages").at("n_sav").get<double>();
    r.avg_cm = j.at("averages").at("n_cm").get<double>();
    r.avg_components = j.at("averages").at("n_components").get<double>();
    if (!j.at("vcsm").is_null()) r.vcsm = j.at("vcsm").get<double>();
    return r;
}

// ---- plot-ready series ---------------------------------------------------

inline void write_ticks_csv(const RunReport& r, std::ostream& out) {
    out << "t,n_ch,n_sav,n_cm,components\n";
    for (const auto& t : r.ticks) {
        out << t.t_ms << ',' << t.n_ch << ',' << t.n_sav << ',' << t.n_cm << ','
            << t.n_components << '\n';
    }
}

inline std::vector<TickStats> parse_ticks_csv(std::istream& in) {
    std::vector<TickStats> out;
    std::string line;
    if (!std::getline(in, line) || line != "t,n_ch,n_sav,n_cm,components") {
        throw std::runtime_error("ticks csv: bad header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TickStats t;
        char comma;
        std::istringstream ls(line);
        if (!(ls >> t.t_ms >> comma >> t.n_ch >> comma >> t.n_sav >> comma >> t.n_cm >> comma >>
              t.n_components)) {
            throw std::runtime_error("ticks csv: bad row '" + line + "'");
        }
        out.push_back(t);
    }
    return out;
}

struct SweepEntry {
    WeightVector w;
    std::optional<double> vcsm;
};

struct SweepReport {
    std::vector<SweepEntry> entries;   // enumeration order
    WeightVector best_w;               // highest stability
    WeightVector worst_w;              // lowest stability
    double best_vcsm = 0.0;
    double worst_vcsm = 0.0;
    double cv = 0.0;                   // CV% across the sweep
    Quantiles box;
};

inline void write_sweep_csv(const SweepReport& r, std::ostream& out) {
    out << "w1,w2,w3,vcsm\n";
    for (const auto& e : r.entries) {
        out << detail::fmt_w(e.w.w1) << ',' << detail::fmt_w(e.w.w2) << ',' << detail::fmt_w(e.w.w3)
            << ',' << (e.vcsm ? detail::fmt_g17(*e.vcsm) : "nan") << '\n';
    }
}

inline std::vector<SweepEntry> parse_sweep_csv(std::istream& in) {
    std::vector<SweepEntry> out;
    std::string line;
    if (!std::getline(in, line) || line != "w1,w2,w3,vcsm") {
        throw std::runtime_error("sweep csv: bad header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        double vals[3];
        for (double& v : vals) {
            if (!std::getline(ls, tok, ',')) throw std::runtime_error("sweep csv: bad row");
            v = std::stod(tok);
        }
        if (!std::getline(ls, tok)) throw std::runtime_error("sweep csv: bad row");
        SweepEntry e;
        e.w = make_weights(vals[0], vals[1], vals[2]);
        if (tok != "nan") e.vcsm = std::stod(tok);
        out.push_back(e);
    }
    return out;
}

inline nlohmann::json sweep_to_json(const SweepReport& r) {
    nlohmann::json j;
    j["triples"] = nlohmann::json::array();
    for (const auto& e : r.entries) {
        nlohmann::json row = {{"w", {e.w.w1, e.w.w2, e.w.w3}}};
        if (e.vcsm) {
            row["vcsm"] = *e.vcsm;
        } else {
            row["vcsm"] = nullptr;
        }
        j["triples"].push_back(row);
    }
    j["best"] = {{"w", {r.best_w.w1, r.best_w.w2, r.best_w.w3}}, {"vcsm", r.best_vcsm}};
    j["worst"] = {{"w", {r.worst_w.w1, r.worst_w.w2, r.worst_w.w3}}, {"vcsm", r.worst_vcsm}};
    j["cv_percent"] = r.cv;
    j["quantiles"] = {{"min", r.box.min},
                      {"q1", r.box.q1},
                      {"median", r.box.median},
                      {"q3", r.box.q3},
                      {"max", r.box.max}};
    return j;
}

// ---- entry points ----------------------------------------------------------

/// Executes a single run and writes report.json + ticks.csv to out_dir.
inline RunReport run(const RunConfig& cfg) {
    if (!cfg.weights) throw std::invalid_argument("run: weights are required (or use sweep)");
    const Trace trace = load_windowed_trace(cfg);
    const ZoneGrid grid = grid_for(cfg, trace);
    const SimResult sim = simulate(grid, trace, engine_config_for(cfg, *cfg.weights), cfg.rsus);

    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream out(std::filesystem::path(cfg.out_dir) / "report.json");
        out << report_to_json(sim.report).dump(2) << '\n';
    }
    {
        std::ofstream out(std::filesystem::path(cfg.out_dir) / "ticks.csv");
        write_ticks_csv(sim.report, out);
    }
    return sim.report;
}

/// Runs every weight triple of the sweep grid and writes sweep.csv +
/// sweep.json to out_dir.
inline SweepReport sweep(const RunConfig& cfg) {
    const Trace trace = load_windowed_trace(cfg);
    const ZoneGrid grid = grid_for(cfg, trace);

    SweepReport report;
    std::vector<double> values;
    for (const WeightVector& w : weight_sweep_triples()) {
        const SimResult sim = simulate(grid, trace, engine_config_for(cfg, w), cfg.rsus);
        report.entries.push_back({w, sim.report.vcsm});
        if (sim.report.vcsm) values.push_back(*sim.report.vcsm);
    }

    if (!values.empty()) {
        const SweepEntry* best = nullptr;
        const SweepEntry* worst = nullptr;
        for (const auto& e : report.entries) {
            if (!e.vcsm) continue;
            if (!best || *e.vcsm > *best->vcsm) best = &e;
            if (!worst || *e.vcsm < *worst->vcsm) worst = &e;
        }
        report.best_w = best->w;
        report.best_vcsm = *best->vcsm;
        report.worst_w = worst->w;
        report.worst_vcsm = *worst->vcsm;
        report.box = quantiles(values);
        report.cv = values.size() >= 2 ? cv_percent(values) : 0.0;
    }

    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream out(std::filesystem::path(cfg.out_dir) / "sweep.csv");
        write_sweep_csv(report, out);
    }
    {
        std::ofstream out(std::filesystem::path(cfg.out_dir) / "sweep.json");
        out << sweep_to_json(report).dump(2) << '\n';
    }
    return report;
}

}  // namespace smzca
