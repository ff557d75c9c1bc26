#include "fmoqc/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fmoqc {

namespace {

constexpr double kEqualityGapTol = 1e-6;
constexpr double kRowNegativeTol = 1e-7;
constexpr double kLogGridStartPs = 1e-3;  // 1 fs

std::string fmt(double value) {
    if (std::isnan(value)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

double parse_double(const std::string& text, const std::string& what) {
    try {
        size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw ValidationError("cannot parse " + what + " from '" + text + "'");
    }
}

std::string window_to_string(const RunConfig& config) {
    return fmt(config.ree_window_lo) + ":" + fmt(config.ree_window_hi);
}

void window_from_string(const std::string& text, RunConfig& config) {
    const size_t colon = text.find(':');
    if (colon == std::string::npos) {
        throw ValidationError("ree_window must look like 'lo:hi', got '" + text + "'");
    }
    config.ree_window_lo = parse_double(text.substr(0, colon), "ree_window low edge");
    config.ree_window_hi = parse_double(text.substr(colon + 1), "ree_window high edge");
}

FmoState resolve_initial_state(const std::string& spec) {
    if (spec == "site1") return initial_site_state(1);
    if (spec == "site6") return initial_site_state(6);
    if (spec == "mixture") return initial_mixture_state();
    return load_custom_state(spec);
}

bool wants(const RunConfig& config, Measure m) {
    return std::find(config.measures.begin(), config.measures.end(), m) !=
           config.measures.end();
}

// Values in [-1e-7, 0) are round-off around zero; emit them as clean zeros.
double clamp_tiny_negative(double value) {
    return (value < 0.0 && value >= -kRowNegativeTol) ? 0.0 : value;
}

std::string join_flags(const std::vector<std::string>& tokens) {
    if (tokens.empty()) return "-";
    std::string joined = tokens[0];
    for (size_t i = 1; i < tokens.size(); ++i) joined += ";" + tokens[i];
    return joined;
}

[[noreturn]] void rethrow_at_time(double t_ps, const std::exception& e, bool numerical) {
    std::ostringstream os;
    os << "t=" << t_ps << " ps: " << e.what();
    if (numerical) throw NumericalError(os.str());
    throw ValidationError(os.str());
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) fields.push_back(field);
    return fields;
}

}  // namespace

std::string to_string(GridKind kind) {
    return kind == GridKind::kLog ? "log" : "linear";
}

GridKind grid_kind_from_string(const std::string& text) {
    if (text == "log") return GridKind::kLog;
    if (text == "linear") return GridKind::kLinear;
    throw ValidationError("grid must be 'log' or 'linear', got '" + text + "'");
}

std::string to_string(Side side) { return side == Side::kA ? "A" : "B"; }

Side side_from_string(const std::string& text) {
    if (text == "A") return Side::kA;
    if (text == "B") return Side::kB;
    throw ValidationError("measured_side must be 'A' or 'B', got '" + text + "'");
}

namespace {

const std::vector<std::pair<Measure, std::string>>& measure_names() {
    static const std::vector<std::pair<Measure, std::string>> names = {
        {Measure::kMutualInfo, "MI"},
        {Measure::kDiscord, "discord"},
        {Measure::kReeSingle, "ree_single"},
        {Measure::kReeFull, "ree_full"},
    };
    return names;
}

}  // namespace

std::string measures_to_string(const std::vector<Measure>& measures) {
    std::string joined;
    for (const auto& [measure, name] : measure_names()) {
        if (std::find(measures.begin(), measures.end(), measure) == measures.end()) {
            continue;
        }
        if (!joined.empty()) joined += ",";
        joined += name;
    }
    return joined;
}

std::vector<Measure> measures_from_string(const std::string& text) {
    std::vector<Measure> measures;
    for (const std::string& token : split(text, ',')) {
        bool known = false;
        for (const auto& [measure, name] : measure_names()) {
            if (token == name) {
                if (std::find(measures.begin(), measures.end(), measure) ==
                    measures.end()) {
                    measures.push_back(measure);
                }
                known = true;
                break;
            }
        }
        if (!known) {
            throw ValidationError(
                "unknown measure '" + token +
                "' (expected MI, discord, ree_single, or ree_full)");
        }
    }
    if (measures.empty()) throw ValidationError("measures list is empty");
    // Canonical order keeps emitted config echoes byte-stable.
    std::sort(measures.begin(), measures.end(), [](Measure a, Measure b) {
        return static_cast<int>(a) < static_cast<int>(b);
    });
    return measures;
}

void validate_run_config(const RunConfig& config) {
    if (config.model_path.empty()) throw ValidationError("RunConfig: model path is empty");
    if (config.temperature <= 0.0) {
        throw ValidationError("RunConfig: temperature must be positive kelvin");
    }
    if (config.initial_state.empty()) {
        throw ValidationError("RunConfig: initial_state is empty");
    }
    parse_cut(config.cut);
    if (config.t_max <= 0.0) throw ValidationError("RunConfig: t_max must be positive");
    if (config.points < 2) throw ValidationError("RunConfig: need at least 2 grid points");
    if (config.measures.empty()) throw ValidationError("RunConfig: measures list is empty");
    if (config.ree_window_lo < 0.0 || config.ree_window_lo > config.ree_window_hi) {
        throw ValidationError("RunConfig: ree_window must satisfy 0 <= lo <= hi");
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config file '" + path + "': " + e.what());
    }
    RunConfig config;
    for (const auto& [key, value] : j.items()) {
        if (key == "model") {
            config.model_path = value.get<std::string>();
        } else if (key == "temp") {
            config.temperature = value.get<double>();
        } else if (key == "init") {
            config.initial_state = value.get<std::string>();
        } else if (key == "cut") {
            config.cut = value.get<std::string>();
        } else if (key == "measured_side") {
            config.measured_side = side_from_string(value.get<std::string>());
        } else if (key == "tmax") {
            config.t_max = value.get<double>();
        } else if (key == "grid") {
            config.grid = grid_kind_from_string(value.get<std::string>());
        } else if (key == "points") {
            config.points = value.get<int>();
        } else if (key == "measures") {
            config.measures = measures_from_string(value.get<std::string>());
        } else if (key == "ree_window") {
            window_from_string(value.get<std::string>(), config);
        } else if (key == "seed") {
            config.seed = value.get<unsigned long long>();
        } else if (key == "out") {
            config.out_path = value.get<std::string>();
        } else {
            throw ValidationError("config file '" + path + "': unknown key '" + key + "'");
        }
    }
    validate_run_config(config);
    return config;
}

std::vector<double> time_grid(const RunConfig& config) {
    validate_run_config(config);
    std::vector<double> grid;
    grid.reserve(config.points);
    grid.push_back(0.0);
    const int n = config.points;
    if (config.grid == GridKind::kLinear) {
        for (int k = 1; k < n; ++k) grid.push_back(config.t_max * k / (n - 1));
    } else if (n == 2) {
        grid.push_back(config.t_max);
    } else {
        const double lo = std::min(kLogGridStartPs, config.t_max);
        if (config.t_max <= lo) {
            throw ValidationError(
                "log grid needs t_max above 1 fs when using more than 2 points");
        }
        const double ratio = config.t_max / lo;
        for (int k = 0; k + 1 < n; ++k) {
            grid.push_back(lo * std::pow(ratio, static_cast<double>(k) / (n - 2)));
        }
        grid.back() = config.t_max;  // guard the endpoint against pow round-off
    }
    return grid;
}

void validate_trace(const CorrelationTrace& trace) {
    for (const TraceRow& row : trace.rows) {
        const bool has_mi = !std::isnan(row.mutual_info);
        const bool has_discord = !std::isnan(row.discord);
        std::ostringstream os;
        os << "trace row at t=" << row.t_ps << " ps: ";
        if (has_discord && row.discord < 0.0) {
            os << "discord " << row.discord << " is negative";
            throw NumericalError(os.str());
        }
        if (has_discord && has_mi && row.discord > row.mutual_info + kRowNegativeTol) {
            os << "discord " << row.discord << " exceeds mutual information "
               << row.mutual_info;
            throw NumericalError(os.str());
        }
        if (!std::isnan(row.ree_single) && row.ree_single < 0.0) {
            os << "single-excitation divergence " << row.ree_single << " is negative";
            throw NumericalError(os.str());
        }
    }
}

CorrelationTrace run(const RunConfig& config) {
    validate_run_config(config);
    const FmoModel model = load_model(config.model_path);
    const DecoherenceRates rates = rates_at_temperature(model, config.temperature);
    const FmoState rho0 = resolve_initial_state(config.initial_state);
    const BipartiteCut cut = parse_cut(config.cut);
    const std::vector<double> grid = time_grid(config);

    const Trajectory traj =
        evolve(rho0, model.hamiltonian, rates, grid, EvolveMethod::kRk4);

    CorrelationTrace trace;
    trace.config = config;
    const int n = static_cast<int>(grid.size());
    trace.rows.resize(n);
    std::vector<std::vector<std::string>> row_flags(n);
    std::vector<std::exception_ptr> errors(n);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        TraceRow& row = trace.rows[i];
        row.t_ps = grid[i];
        try {
            const CutState chi = reduce_to_cut(traj.states[i], cut);
            if (wants(config, Measure::kMutualInfo)) {
                row.mutual_info = clamp_tiny_negative(mutual_information(chi));
            }
            if (wants(config, Measure::kDiscord)) {
                OptimizerConfig oc;
                oc.seed = config.seed;
                const DiscordResult dr = quantum_discord(chi, config.measured_side, oc);
                row.discord = clamp_tiny_negative(dr.discord);
                if (!dr.optimizer_trace.converged) {
                    row_flags[i].push_back("discord_spread");
                }
            }
            if (wants(config, Measure::kReeSingle)) {
                row.ree_single = clamp_tiny_negative(single_excitation_ree(chi));
            }
            if (!std::isnan(row.discord) && !std::isnan(row.ree_single) &&
                std::abs(row.discord - row.ree_single) > kEqualityGapTol) {
                row_flags[i].push_back("equality_gap");
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const NumericalError& e) {
            rethrow_at_time(grid[i], e, true);
        } catch (const ValidationError& e) {
            rethrow_at_time(grid[i], e, false);
        } catch (const std::exception& e) {
            rethrow_at_time(grid[i], e, true);
        }
    }

    if (wants(config, Measure::kReeFull)) {
        // Sequential pass so each point can warm-start from its predecessor.
        SeparableAnsatz warm;
        for (int i = 0; i < n; ++i) {
            if (grid[i] < config.ree_window_lo || grid[i] > config.ree_window_hi) {
                continue;
            }
            try {
                const CutState chi = reduce_to_cut(traj.states[i], cut);
                FullReeConfig fc;
                fc.seed = config.seed;
                // A 16-component mixture reproduces the Caratheodory-sized
                // search to ~1e-7 bits on these states at a fraction of the
                // cost; the deeper iteration cap lets the shallow valley
                // around the optimum actually converge.
                fc.k = 16;
                fc.max_iters = 500;
                const FullReeResult res = warm.components() > 0
                                              ? full_ree(chi, warm, fc)
                                              : full_ree(chi, fc);
                trace.rows[i].ree_full = clamp_tiny_negative(res.value);
                if (!res.converged) row_flags[i].push_back("ree_full_spread");
                warm = res.ansatz;
            } catch (const NumericalError& e) {
                rethrow_at_time(grid[i], e, true);
            } catch (const ValidationError& e) {
                rethrow_at_time(grid[i], e, false);
            }
        }
    }

    for (int i = 0; i < n; ++i) trace.rows[i].flags = join_flags(row_flags[i]);
    validate_trace(trace);
    if (!config.out_path.empty()) emit_csv(trace, config.out_path);
    return trace;
}

void emit_csv(const CorrelationTrace& trace, const std::string& path) {
    if (trace.rows.empty()) throw ValidationError("emit_csv: empty trace");
    std::ofstream out(path);
    if (!out) throw ValidationError("emit_csv: cannot write '" + path + "'");
    const RunConfig& c = trace.config;
    out << "# model: " << c.model_path << "\n";
    out << "# temp: " << fmt(c.temperature) << "\n";
    out << "# init: " << c.initial_state << "\n";
    out << "# cut: " << c.cut << "\n";
    out << "# measured_side: " << to_string(c.measured_side) << "\n";
    out << "# tmax: " << fmt(c.t_max) << "\n";
    out << "# grid: " << to_string(c.grid) << "\n";
    out << "# points: " << c.points << "\n";
    out << "# measures: " << measures_to_string(c.measures) << "\n";
    out << "# ree_window: " << window_to_string(c) << "\n";
    out << "# seed: " << c.seed << "\n";
    out << "t_ps,MI,discord,ree_single,ree_full,flags\n";
    for (const TraceRow& row : trace.rows) {
        out << fmt(row.t_ps) << ',' << fmt(row.mutual_info) << ',' << fmt(row.discord)
            << ',' << fmt(row.ree_single) << ',' << fmt(row.ree_full) << ','
            << row.flags << "\n";
    }
    if (!out) throw ValidationError("emit_csv: write failed for '" + path + "'");
}

CorrelationTrace parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("parse_csv: cannot open '" + path + "'");
    CorrelationTrace trace;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const size_t colon = line.find(": ");
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(2, colon - 2);
            const std::string value = line.substr(colon + 2);
            RunConfig& c = trace.config;
            if (key == "model") c.model_path = value;
            else if (key == "temp") c.temperature = parse_double(value, "temp");
            else if (key == "init") c.initial_state = value;
            else if (key == "cut") c.cut = value;
            else if (key == "measured_side") c.measured_side = side_from_string(value);
            else if (key == "tmax") c.t_max = parse_double(value, "tmax");
            else if (key == "grid") c.grid = grid_kind_from_string(value);
            else if (key == "points") c.points = static_cast<int>(parse_double(value, "points"));
            else if (key == "measures") c.measures = measures_from_string(value);
            else if (key == "ree_window") window_from_string(value, c);
            else if (key == "seed") {
                try {
                    c.seed = std::stoull(value);
                } catch (const std::exception&) {
                    throw ValidationError("parse_csv: bad seed '" + value + "'");
                }
            }
            continue;
        }
        if (!saw_header) {
            if (line != "t_ps,MI,discord,ree_single,ree_full,flags") {
                throw ValidationError("parse_csv: unexpected header '" + line + "'");
            }
            saw_header = true;
            continue;
        }
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 6) {
            throw ValidationError("parse_csv: expected 6 fields, got line '" + line + "'");
        }
        TraceRow row;
        row.t_ps = parse_double(fields[0], "t_ps");
        row.mutual_info = parse_double(fields[1], "MI");
        row.discord = parse_double(fields[2], "discord");
        row.ree_single = parse_double(fields[3], "ree_single");
        row.ree_full = parse_double(fields[4], "ree_full");
        row.flags = fields[5];
        trace.rows.push_back(std::move(row));
    }
    if (!saw_header) throw ValidationError("parse_csv: no header row in '" + path + "'");
    return trace;
}

std::vector<std::string> emit_plotdata(const CorrelationTrace& trace,
                                       const std::string& stem) {
    if (trace.rows.empty()) throw ValidationError("emit_plotdata: empty trace");
    std::vector<std::string> written;
    for (const auto& [measure, name] : measure_names()) {
        if (std::find(trace.config.measures.begin(), trace.config.measures.end(),
                      measure) == trace.config.measures.end()) {
            continue;
        }
        const std::string path = stem + "_" + name + ".dat";
        std::ofstream out(path);
        if (!out) throw ValidationError("emit_plotdata: cannot write '" + path + "'");
        for (const TraceRow& row : trace.rows) {
            double value = 0.0;
            switch (measure) {
                case Measure::kMutualInfo: value = row.mutual_info; break;
                case Measure::kDiscord: value = row.discord; break;
                case Measure::kReeSingle: value = row.ree_single; break;
                case Measure::kReeFull: value = row.ree_full; break;
            }
            if (std::isnan(value)) continue;  // e.g. outside the full-REE window
            out << fmt(row.t_ps) << ' ' << fmt(value) << "\n";
        }
        written.push_back(path);
    }
    return written;
}

std::vector<RunConfig> paper_grid() {
    std::vector<RunConfig> grid;
    const std::vector<std::string> cuts = {"A=3;B=1,6", "A=3;B=1,2",
                                           "A=3;B=1,2,4,5,6,7"};
    const std::vector<double> temperatures = {77.0, 300.0};
    const std::vector<std::string> inits = {"site1", "site6", "mixture"};
    for (const std::string& cut : cuts) {
        for (double temperature : temperatures) {
            for (const std::string& init : inits) {
                RunConfig config;
                config.cut = cut;
                config.temperature = temperature;
                config.initial_state = init;
                grid.push_back(std::move(config));
            }
        }
    }
    RunConfig full;
    full.cut = "A=1,6;B=3";
    full.temperature = 77.0;
    full.initial_state = "site1";
    full.measures = {Measure::kMutualInfo, Measure::kReeSingle, Measure::kReeFull};
    // The unrestricted search only needs to cover the window where the
    // divergence curves live; outside it the rows keep their cheap measures.
    full.ree_window_lo = 0.05;
    full.ree_window_hi = 1.0;
    grid.push_back(std::move(full));
    return grid;
}

std::string config_slug(const RunConfig& config) {
    const BipartiteCut cut = parse_cut(config.cut);
    std::string slug = "A";
    for (int site : cut.a_sites) slug += std::to_string(site);
    slug += "-B";
    for (int site : cut.b_sites) slug += std::to_string(site);
    slug += "_T" + fmt(config.temperature) + "_";
    for (char ch : config.initial_state) {
        slug += (std::isalnum(static_cast<unsigned char>(ch)) ? ch : '-');
    }
    return slug;
}

}  // namespace fmoqc
