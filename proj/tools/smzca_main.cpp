// Command-line front end: one clustering run or a full weight sweep over a
// mobility trace, emitting machine-readable reports.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smzca/runner.hpp"

namespace {

std::vector<double> parse_csv_doubles(const std::string& s, std::size_t expect_min,
                                      std::size_t expect_max, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (out.size() < expect_min || out.size() > expect_max) {
        throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zone-based single-hop clustering simulator for vehicular networks"};

    std::string config_path, trace_path, out_dir;
    double start_s = 0.0, end_s = 0.0, alpha = 0.0, tr = 0.0, dru_tr = 0.0;
    std::int64_t tau = 0;
    int lambda = 0;
    std::string weights_arg;
    std::vector<std::string> rsu_args;
    std::uint64_t seed = 0;
    bool sweep_flag = false;

    auto* config_opt = app.add_option("--config", config_path, "JSON config file");
    auto* trace_opt = app.add_option("--trace", trace_path, "trace file");
    auto* start_opt = app.add_option("--start", start_s, "window start (s)");
    auto* end_opt = app.add_option("--end", end_s, "window end (s)");
    auto* alpha_opt = app.add_option("--alpha", alpha, "zone scaling factor (km)");
    auto* tr_opt = app.add_option("--tr", tr, "common transmission range for cars (m)");
    auto* dru_tr_opt = app.add_option("--dru-tr", dru_tr, "transmission range for buses (m)");
    auto* tau_opt = app.add_option("--tau", tau, "beacon period (ms)");
    auto* lambda_opt = app.add_option("--lambda", lambda, "rounds before self-promotion");
    auto* weights_opt = app.add_option("--weights", weights_arg, "CHEC weights w1,w2,w3");
    auto* sweep_opt = app.add_flag("--sweep", sweep_flag, "run the full 0.1-step weight sweep");
    auto* rsu_opt =
        app.add_option("--rsu", rsu_args, "stationary head at lat,long[,tr_m] (repeatable)");
    auto* seed_opt = app.add_option("--seed", seed, "run seed (echoed into reports)");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        smzca::RunConfig cfg;
        if (config_opt->count() > 0) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config '" + config_path + "'");
            nlohmann::json j;
            in >> j;
            cfg = smzca::config_from_json(j);
        }
        // flags override config-file values
        if (trace_opt->count() > 0) cfg.trace = trace_path;
        if (start_opt->count() > 0) cfg.start_s = start_s;
        if (end_opt->count() > 0) cfg.end_s = end_s;
        if (alpha_opt->count() > 0) cfg.alpha_km = alpha;
        if (tr_opt->count() > 0) cfg.common_tr_m = tr;
        if (dru_tr_opt->count() > 0) cfg.dru_tr_m = dru_tr;
        if (tau_opt->count() > 0) cfg.tau_ms = tau;
        if (lambda_opt->count() > 0) cfg.lambda = lambda;
        if (weights_opt->count() > 0) {
            const auto w = parse_csv_doubles(weights_arg, 3, 3, "--weights");
            cfg.weights = smzca::make_weights(w[0], w[1], w[2]);
        }
        if (sweep_opt->count() > 0) cfg.sweep = true;
        if (rsu_opt->count() > 0) {
            cfg.rsus.clear();
            for (const auto& arg : rsu_args) {
                const auto v = parse_csv_doubles(arg, 2, 3, "--rsu");
                smzca::RsuSpec rsu;
                rsu.loc = {v[0], v[1]};
                if (v.size() == 3) rsu.tr_m = v[2];
                cfg.rsus.push_back(rsu);
            }
        }
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (out_opt->count() > 0) cfg.out_dir = out_dir;

        if (cfg.trace.empty()) throw std::invalid_argument("no trace given (--trace or config)");
        if (auto warning = smzca::alpha_guidance_warning(cfg)) {
            std::cerr << "warning: " << *warning << "\n";
        }

        if (cfg.sweep) {
            const smzca::SweepReport report = smzca::sweep(cfg);
            std::cout << "sweep: " << report.entries.size() << " weight triples\n";
            std::printf("best  w=[%.1f, %.1f, %.1f]  vcsm=%.6f\n", report.best_w.w1,
                        report.best_w.w2, report.best_w.w3, report.best_vcsm);
            std::printf("worst w=[%.1f, %.1f, %.1f]  vcsm=%.6f\n", report.worst_w.w1,
                        report.worst_w.w2, report.worst_w.w3, report.worst_vcsm);
            std::printf("cv=%.3f%%  median=%.6f\n", report.cv, report.box.median);
        } else {
            const smzca::RunReport report = smzca::run(cfg);
            std::cout << "ticks: " << report.ticks.size() << "\n";
            if (report.vcsm) {
                std::printf("vcsm=%.6f\n", *report.vcsm);
            } else {
                std::cout << "vcsm=undefined (no vehicle ever joined a cluster)\n";
            }
            std::printf("avg: ch=%.2f sav=%.2f cm=%.2f components=%.2f\n", report.avg_ch,
                        report.avg_sav, report.avg_cm, report.avg_components);
        }
        std::cout << "reports written to " << cfg.out_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
