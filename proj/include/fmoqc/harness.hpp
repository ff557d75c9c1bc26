#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fmoqc/correlations.hpp"
#include "fmoqc/cut.hpp"
#include "fmoqc/dynamics.hpp"
#include "fmoqc/fmo_model.hpp"
#include "fmoqc/ree_full.hpp"

namespace fmoqc {

enum class GridKind { kLog, kLinear };

enum class Measure { kMutualInfo, kDiscord, kReeSingle, kReeFull };

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& text);
std::string to_string(Side side);
Side side_from_string(const std::string& text);
std::string measures_to_string(const std::vector<Measure>& measures);
std::vector<Measure> measures_from_string(const std::string& text);

struct RunConfig {
    std::string model_path = "data/fmo_default.model";
    double temperature = 77.0;
    // "site1", "site6", "mixture", or a path to a custom state matrix file.
    std::string initial_state = "site1";
    std::string cut = "A=3;B=1,6";
    Side measured_side = Side::kA;
    double t_max = 100.0;
    GridKind grid = GridKind::kLog;
    int points = 200;
    std::vector<Measure> measures{Measure::kMutualInfo, Measure::kDiscord,
                                  Measure::kReeSingle};
    // Full-REE evaluation window in ps; rows outside it carry no ree_full value.
    double ree_window_lo = 0.0;
    double ree_window_hi = std::numeric_limits<double>::infinity();
    unsigned long long seed = 20120510;
    std::string out_path;  // empty: no file emission
};

void validate_run_config(const RunConfig& config);

// Reads a JSON file whose keys mirror the command-line flags
// (model, temp, init, cut, measured_side, tmax, grid, points, measures,
// ree_window, seed, out).
RunConfig load_run_config(const std::string& path);

// First point is always t = 0; the remaining points are spaced linearly up to
// t_max, or logarithmically from 1 fs (or t_max if smaller) to t_max.
std::vector<double> time_grid(const RunConfig& config);

struct TraceRow {
    double t_ps = 0.0;
    double mutual_info = std::numeric_limits<double>::quiet_NaN();
    double discord = std::numeric_limits<double>::quiet_NaN();
    double ree_single = std::numeric_limits<double>::quiet_NaN();
    double ree_full = std::numeric_limits<double>::quiet_NaN();
    // Semicolon-joined tokens ("-" when clean): equality_gap when
    // |discord - ree_single| > 1e-6, discord_spread / ree_full_spread when the
    // corresponding multi-start search lacked corroboration.
    std::string flags = "-";
};

struct CorrelationTrace {
    RunConfig config;
    std::vector<TraceRow> rows;
};

// Per-row sanity: 0 <= discord <= MI + 1e-7 and ree_single >= 0 wherever the
// values are present.  Throws NumericalError on violation.
void validate_trace(const CorrelationTrace& trace);

// Evolves the model, reduces each snapshot to the cut, and evaluates the
// requested measures per snapshot.  Deterministic for a fixed config.
CorrelationTrace run(const RunConfig& config);

// Comma-separated table with a '#' header echoing the config and seed.
// Values print with 12 significant digits; absent values print as "nan".
void emit_csv(const CorrelationTrace& trace, const std::string& path);
CorrelationTrace parse_csv(const std::string& path);

// One whitespace-separated (t, value) series file per computed measure,
// named <stem>_<measure>.dat.  Returns the paths written.
std::vector<std::string> emit_plotdata(const CorrelationTrace& trace,
                                       const std::string& stem);

// The simulation batch behind the figures: 3 cuts x 2 temperatures x 3
// initial states with single-excitation measures, plus the one full-REE
// configuration (77 K, A={1,6}, B={3}).
std::vector<RunConfig> paper_grid();

// Stable file-name fragment identifying a config within the batch.
std::string config_slug(const RunConfig& config);

}  // namespace fmoqc
