// thermolap: reduced-order transient engine thermal boundary conditions and
// network solver. Pipeline: synth-lap (demo inputs) -> build-pdf -> gen-bc ->
// steady -> simulate -> report; sensor-correct is a standalone utility.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "thermolap/config.hpp"
#include "thermolap/pipeline.hpp"
#include "thermolap/pipeline_stages.hpp"
#include "thermolap/synth.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("THERMOLAP_LOG");
    if (env == nullptr) return 1;
    std::string v(env);
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[thermolap] %s\n", msg.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduced-order transient engine thermal boundary conditions and network solver"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    double dt_override = 0.0;
    int threads = 1;
    std::uint64_t seed = 1;

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        if (needs_config) cmd->add_option("--config", config_path, "pipeline config (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--dt", dt_override, "simulation time step [s] (overrides config)");
        cmd->add_option("--threads", threads, "worker threads for per-speed analysis");
    };

    auto* c_build = app.add_subcommand("build-pdf", "build HTC/ACT PDF tables from pressure traces");
    add_common(c_build);
    auto* c_gen = app.add_subcommand("gen-bc", "generate per-zone boundary-condition series");
    add_common(c_gen);
    auto* c_steady = app.add_subcommand("steady", "quasistationary expectation field");
    add_common(c_steady);
    auto* c_sim = app.add_subcommand("simulate", "transient thermal network run");
    add_common(c_sim);
    auto* c_report = app.add_subcommand("report", "probe summary and water heat-flow balance");
    add_common(c_report);

    std::string sc_input, sc_output = "corrected.csv";
    double sc_tau = 2.0;
    auto* c_sensor = app.add_subcommand("sensor-correct", "inverse first-order sensor lag filter");
    c_sensor->add_option("--input", sc_input, "water channel CSV")->required();
    c_sensor->add_option("--output", sc_output, "corrected CSV path");
    c_sensor->add_option("--tau", sc_tau, "sensor time constant [s]");

    std::string synth_dir = "workspace";
    double synth_duration = 180.0;
    auto* c_synth = app.add_subcommand("synth-lap", "generate a synthetic demo workspace");
    c_synth->add_option("--out", synth_dir, "workspace directory");
    c_synth->add_option("--duration", synth_duration, "lap duration [s]");
    c_synth->add_option("--seed", seed, "random seed for cycle scatter");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_synth->parsed()) {
            thermolap::synth::SynthOptions opt;
            opt.duration = synth_duration;
            opt.seed = seed;
            auto cfg = thermolap::synth::generate_workspace(synth_dir, opt);
            info("workspace written, config at " + cfg.string());
            return 0;
        }
        if (c_sensor->parsed()) {
            thermolap::cmd_sensor_correct(sc_input, sc_tau, sc_output);
            info("corrected channel written to " + sc_output);
            return 0;
        }

        auto cfg = thermolap::load_config(config_path);
        if (dt_override > 0.0) cfg.dt_sim = dt_override;

        if (c_build->parsed()) {
            auto r = thermolap::cmd_build_pdf(cfg, out_dir, threads);
            info("tables for " + std::to_string(r.tables.speeds.size()) + " speed points; " +
                 "full-load fraction " + std::to_string(r.lap.full_load_fraction) +
                 ", coasting fraction " + std::to_string(r.lap.coasting_fraction));
        } else if (c_gen->parsed()) {
            auto r = thermolap::cmd_gen_bc(cfg, out_dir);
            info(std::to_string(r.zones.size()) + " BC series over " + std::to_string(r.n_steps) +
                 " steps at dt=" + std::to_string(r.dt) + " s");
        } else if (c_steady->parsed()) {
            auto r = thermolap::cmd_steady(cfg, out_dir);
            info("expectation field for " + std::to_string(r.node_ids.size()) + " nodes");
        } else if (c_sim->parsed()) {
            auto r = thermolap::cmd_simulate(cfg, out_dir);
            info("transient run: " + std::to_string(r.history.times.size() - 1) + " steps, " +
                 "cumulative energy residual " + std::to_string(r.history.cumulative_residual) +
                 " J");
        } else if (c_report->parsed()) {
            thermolap::cmd_report(cfg, out_dir);
            info("report written to " + out_dir);
        }
        return 0;
    } catch (const thermolap::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
