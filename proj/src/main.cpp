#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmoqc/harness.hpp"

namespace {

using namespace fmoqc;

// Flags land on top of whatever --config loaded, so the file mirrors the
// command line and explicit flags win.
void attach_run_flags(CLI::App* cmd, RunConfig& config, std::string& measured_side,
                      std::string& grid_kind, std::string& measures,
                      std::string& ree_window) {
    cmd->add_option("--model", config.model_path, "model file (JSON)");
    cmd->add_option("--temp", config.temperature, "temperature in kelvin");
    cmd->add_option("--init", config.initial_state,
                    "site1, site6, mixture, or a custom state file");
    cmd->add_option("--cut", config.cut, "bipartite cut, e.g. 'A=3;B=1,6'");
    cmd->add_option("--measured-side", measured_side, "measured side: A or B");
    cmd->add_option("--tmax", config.t_max, "final time in ps");
    cmd->add_option("--points", config.points, "number of grid points (first is t=0)");
    cmd->add_option("--grid", grid_kind, "time grid spacing: log or linear");
    cmd->add_option("--measures", measures,
                    "comma list from MI, discord, ree_single, ree_full");
    cmd->add_option("--ree-window", ree_window,
                    "full-REE evaluation window 'lo:hi' in ps");
    cmd->add_option("--seed", config.seed, "optimizer seed (recorded in output)");
    cmd->add_option("--out", config.out_path, "output CSV path");
}

void apply_string_flags(RunConfig& config, const std::string& measured_side,
                        const std::string& grid_kind, const std::string& measures,
                        const std::string& ree_window) {
    if (!measured_side.empty()) config.measured_side = side_from_string(measured_side);
    if (!grid_kind.empty()) config.grid = grid_kind_from_string(grid_kind);
    if (!measures.empty()) config.measures = measures_from_string(measures);
    if (!ree_window.empty()) {
        const size_t colon = ree_window.find(':');
        if (colon == std::string::npos) {
            throw ValidationError("--ree-window must look like 'lo:hi'");
        }
        config.ree_window_lo = std::stod(ree_window.substr(0, colon));
        config.ree_window_hi = std::stod(ree_window.substr(colon + 1));
    }
}

int do_run(const RunConfig& config) {
    const CorrelationTrace trace = run(config);
    if (!config.out_path.empty()) {
        emit_plotdata(trace, config.out_path + ".series");
        std::cout << "wrote " << config.out_path << " (" << trace.rows.size()
                  << " rows)\n";
    } else {
        std::cout << "t_ps,MI,discord,ree_single,ree_full,flags\n";
        for (const TraceRow& row : trace.rows) {
            std::printf("%.12g,%.12g,%.12g,%.12g,%.12g,%s\n", row.t_ps, row.mutual_info,
                        row.discord, row.ree_single, row.ree_full, row.flags.c_str());
        }
    }
    return 0;
}

int do_grid(const std::string& model_path, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<RunConfig> configs = paper_grid();
    for (RunConfig& config : configs) {
        if (!model_path.empty()) config.model_path = model_path;
        config.out_path = out_dir + "/" + config_slug(config) + ".csv";
    }
    std::vector<std::string> failures(configs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (size_t i = 0; i < configs.size(); ++i) {
        try {
            run(configs[i]);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    }
    int bad = 0;
    for (size_t i = 0; i < configs.size(); ++i) {
        if (failures[i].empty()) {
            std::cout << config_slug(configs[i]) << ": ok\n";
        } else {
            ++bad;
            std::cerr << config_slug(configs[i]) << ": " << failures[i] << "\n";
        }
    }
    if (bad > 0) {
        std::cerr << bad << " of " << configs.size() << " configurations failed\n";
        return 2;
    }
    std::cout << "completed " << configs.size() << " configurations\n";
    return 0;
}

int do_validate(const std::string& model_path) {
    const FmoModel model = load_model(model_path);
    std::cout << model_path << ": valid\n";
    std::cout << "  site energies (rad/ps):";
    for (double e : model.hamiltonian.site_energies) std::printf(" %.6g", e);
    std::cout << "\n  recombination rate: " << model.recomb_rate << " 1/ps\n";
    std::cout << "  sink rate: " << model.sink_rate << " 1/ps\n";
    if (model.dephasing.mode == DephasingSpec::Mode::kTemperature) {
        std::cout << "  dephasing: " << model.dephasing.rate_ref << " 1/ps at "
                  << model.dephasing.t_ref_kelvin << " K (linear in T)\n";
    } else {
        std::cout << "  dephasing: " << model.dephasing.direct_value << " 1/ps (fixed)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FMO exciton correlation simulator"};
    app.require_subcommand(1);

    RunConfig run_config;
    std::string config_path, measured_side, grid_kind, measures, ree_window;
    CLI::App* cmd_run = app.add_subcommand("run", "simulate one configuration");
    cmd_run->add_option("--config", config_path, "JSON config file mirroring the flags");
    attach_run_flags(cmd_run, run_config, measured_side, grid_kind, measures, ree_window);

    std::string grid_model, grid_out = ".";
    CLI::App* cmd_grid = app.add_subcommand("grid", "run the full simulation batch");
    cmd_grid->add_option("--model", grid_model, "model file overriding the default");
    cmd_grid->add_option("--out", grid_out, "output directory for per-config CSVs");

    std::string validate_model = "data/fmo_default.model";
    CLI::App* cmd_validate =
        app.add_subcommand("validate-model", "check a model file and report its contents");
    cmd_validate->add_option("model", validate_model, "model file to check");

    // The config file provides defaults; explicit flags override them, so the
    // file is pre-loaded before flag values are applied.
    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            return app.exit(e);
        }
        if (cmd_run->parsed()) {
            if (!config_path.empty()) {
                // Start from the file, then re-apply any flags the user passed.
                RunConfig merged = load_run_config(config_path);
                if (cmd_run->count("--model")) merged.model_path = run_config.model_path;
                if (cmd_run->count("--temp")) merged.temperature = run_config.temperature;
                if (cmd_run->count("--init")) merged.initial_state = run_config.initial_state;
                if (cmd_run->count("--cut")) merged.cut = run_config.cut;
                if (cmd_run->count("--tmax")) merged.t_max = run_config.t_max;
                if (cmd_run->count("--points")) merged.points = run_config.points;
                if (cmd_run->count("--seed")) merged.seed = run_config.seed;
                if (cmd_run->count("--out")) merged.out_path = run_config.out_path;
                run_config = merged;
            }
            apply_string_flags(run_config, measured_side, grid_kind, measures, ree_window);
            return do_run(run_config);
        }
        if (cmd_grid->parsed()) return do_grid(grid_model, grid_out);
        if (cmd_validate->parsed()) return do_validate(validate_model);
        return 0;
    } catch (const fmoqc::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const fmoqc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
