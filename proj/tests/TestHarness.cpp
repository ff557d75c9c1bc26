#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fmoqc/harness.hpp"

using namespace fmoqc;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(static_cast<bool>(in));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    REQUIRE(static_cast<bool>(out));
    out << content;
}

int data_line_count(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(static_cast<bool>(in));
    int count = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++count;
    }
    return count;
}

RunConfig small_run_config() {
    RunConfig config;
    config.t_max = 0.5;
    config.grid = GridKind::kLinear;
    config.points = 4;
    return config;
}

}  // namespace

TEST_CASE("time grid shapes and guards") {
    RunConfig config;

    // Default published layout: 200 log points from 1 fs to 100 ps.
    config.grid = GridKind::kLog;
    config.points = 200;
    config.t_max = 100.0;
    const std::vector<double> log_grid = time_grid(config);
    REQUIRE(static_cast<int>(log_grid.size()) == 200);
    CHECK(log_grid[0] == 0.0);
    CHECK(log_grid[1] == 1e-3);
    CHECK(log_grid.back() == 100.0);
    for (std::size_t i = 0; i + 1 < log_grid.size(); ++i) {
        CHECK(log_grid[i] < log_grid[i + 1]);
    }
    // Constant ratio between interior points.
    CHECK(log_grid[3] / log_grid[2] ==
          doctest::Approx(log_grid[2] / log_grid[1]).epsilon(1e-12));

    config.grid = GridKind::kLinear;
    config.points = 5;
    config.t_max = 2.0;
    const std::vector<double> linear = time_grid(config);
    CHECK(linear == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});

    // Two points always means the endpoints, even below the log-grid start.
    config.grid = GridKind::kLog;
    config.points = 2;
    config.t_max = 5e-4;
    CHECK(time_grid(config) == std::vector<double>{0.0, 5e-4});

    config.points = 3;
    config.t_max = 1e-3;
    CHECK_THROWS_WITH_AS(time_grid(config), doctest::Contains("log grid"),
                         ValidationError);
}

TEST_CASE("enum and measure string round trips") {
    CHECK(to_string(GridKind::kLog) == "log");
    CHECK(to_string(GridKind::kLinear) == "linear");
    CHECK(grid_kind_from_string("log") == GridKind::kLog);
    CHECK(grid_kind_from_string("linear") == GridKind::kLinear);
    CHECK_THROWS_AS(grid_kind_from_string("cubic"), ValidationError);

    CHECK(to_string(Side::kA) == "A");
    CHECK(side_from_string("B") == Side::kB);
    CHECK_THROWS_AS(side_from_string("C"), ValidationError);

    // Parsing canonicalizes order and drops duplicates.
    const std::vector<Measure> parsed = measures_from_string("discord,MI,MI");
    CHECK(parsed == std::vector<Measure>{Measure::kMutualInfo, Measure::kDiscord});
    CHECK(measures_to_string(parsed) == "MI,discord");
    CHECK(measures_to_string({Measure::kMutualInfo, Measure::kDiscord,
                              Measure::kReeSingle, Measure::kReeFull}) ==
          "MI,discord,ree_single,ree_full");
    CHECK_THROWS_WITH_AS(measures_from_string("MI,entropy"),
                         doctest::Contains("unknown measure"), ValidationError);
    CHECK_THROWS_AS(measures_from_string(""), ValidationError);
}

TEST_CASE("run config validation and JSON loading") {
    CHECK_NOTHROW(validate_run_config(RunConfig{}));

    RunConfig bad = RunConfig{};
    bad.temperature = 0.0;
    CHECK_THROWS_WITH_AS(validate_run_config(bad), doctest::Contains("kelvin"),
                         ValidationError);
    bad = RunConfig{};
    bad.points = 1;
    CHECK_THROWS_WITH_AS(validate_run_config(bad), doctest::Contains("at least 2"),
                         ValidationError);
    bad = RunConfig{};
    bad.t_max = -1.0;
    CHECK_THROWS_AS(validate_run_config(bad), ValidationError);
    bad = RunConfig{};
    bad.cut = "A=3;B=3";
    CHECK_THROWS_AS(validate_run_config(bad), ValidationError);
    bad = RunConfig{};
    bad.measures.clear();
    CHECK_THROWS_AS(validate_run_config(bad), ValidationError);
    bad = RunConfig{};
    bad.ree_window_lo = 2.0;
    bad.ree_window_hi = 1.0;
    CHECK_THROWS_WITH_AS(validate_run_config(bad), doctest::Contains("ree_window"),
                         ValidationError);

    const std::string path = "build/test_harness_config.json";
    write_file(path, R"({"model":"data/fmo_default.model","temp":300.0,)"
                     R"("init":"site6","cut":"A=3;B=1,2","measured_side":"B",)"
                     R"("tmax":10.0,"grid":"linear","points":50,)"
                     R"("measures":"discord,MI","ree_window":"0.2:0.8",)"
                     R"("seed":777,"out":"build/out.csv"})");
    const RunConfig loaded = load_run_config(path);
    CHECK(loaded.temperature == 300.0);
    CHECK(loaded.initial_state == "site6");
    CHECK(loaded.cut == "A=3;B=1,2");
    CHECK(loaded.measured_side == Side::kB);
    CHECK(loaded.t_max == 10.0);
    CHECK(loaded.grid == GridKind::kLinear);
    CHECK(loaded.points == 50);
    CHECK(loaded.measures ==
          std::vector<Measure>{Measure::kMutualInfo, Measure::kDiscord});
    CHECK(loaded.ree_window_lo == 0.2);
    CHECK(loaded.ree_window_hi == 0.8);
    CHECK(loaded.seed == 777);
    CHECK(loaded.out_path == "build/out.csv");

    write_file(path, R"({"temp":77.0,"voltage":3})");
    CHECK_THROWS_WITH_AS(load_run_config(path), doctest::Contains("unknown key"),
                         ValidationError);
    write_file(path, "{nope");
    CHECK_THROWS_AS(load_run_config(path), ValidationError);
    write_file(path, R"({"points":1})");
    CHECK_THROWS_AS(load_run_config(path), ValidationError);
    CHECK_THROWS_AS(load_run_config("build/no_such_config.json"), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("trivial two-point run has an uncorrelated first row") {
    RunConfig config;
    config.t_max = 0.001;
    config.points = 2;
    const CorrelationTrace trace = run(config);
    REQUIRE(trace.rows.size() == 2);
    const TraceRow& first = trace.rows[0];
    CHECK(first.t_ps == 0.0);
    CHECK(first.mutual_info == 0.0);  // product initial state
    CHECK(first.discord >= 0.0);
    CHECK(first.discord <= 1e-12);
    CHECK(first.ree_single == 0.0);
    CHECK(first.flags == "-");
    CHECK(std::isnan(first.ree_full));  // not requested
    CHECK_NOTHROW(validate_trace(trace));

    CorrelationTrace tampered = trace;
    tampered.rows[1].discord = -0.1;
    CHECK_THROWS_WITH_AS(validate_trace(tampered), doctest::Contains("negative"),
                         NumericalError);
    tampered = trace;
    tampered.rows[1].discord = tampered.rows[1].mutual_info + 1.0;
    CHECK_THROWS_WITH_AS(validate_trace(tampered), doctest::Contains("exceeds"),
                         NumericalError);
}

TEST_CASE("run is deterministic and CSV round trips byte for byte") {
    const RunConfig config = small_run_config();
    const CorrelationTrace first = run(config);
    const CorrelationTrace second = run(config);
    REQUIRE(first.rows.size() == 4);

    const std::string path_a = "build/test_harness_a.csv";
    const std::string path_b = "build/test_harness_b.csv";
    emit_csv(first, path_a);
    emit_csv(second, path_b);
    CHECK(slurp(path_a) == slurp(path_b));

    const CorrelationTrace parsed = parse_csv(path_a);
    CHECK(parsed.config.model_path == config.model_path);
    CHECK(parsed.config.temperature == config.temperature);
    CHECK(parsed.config.initial_state == config.initial_state);
    CHECK(parsed.config.cut == config.cut);
    CHECK(parsed.config.points == config.points);
    CHECK(parsed.config.grid == config.grid);
    CHECK(parsed.config.measures == config.measures);
    CHECK(parsed.config.seed == config.seed);
    CHECK(std::isinf(parsed.config.ree_window_hi));
    REQUIRE(parsed.rows.size() == first.rows.size());
    for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
        CHECK(parsed.rows[i].t_ps == doctest::Approx(first.rows[i].t_ps).epsilon(1e-11));
        CHECK(parsed.rows[i].mutual_info ==
              doctest::Approx(first.rows[i].mutual_info).epsilon(1e-11));
        CHECK(parsed.rows[i].flags == first.rows[i].flags);
    }

    // Emission of the parsed trace reproduces the file exactly.
    emit_csv(parsed, path_b);
    CHECK(slurp(path_a) == slurp(path_b));

    CHECK_THROWS_AS(parse_csv("build/no_such_trace.csv"), ValidationError);
    write_file(path_b, "t_ps,MI\n0,0\n");
    CHECK_THROWS_WITH_AS(parse_csv(path_b), doctest::Contains("header"),
                         ValidationError);
    std::remove(path_a.c_str());
    std::remove(path_b.c_str());
}

TEST_CASE("plot data emission, one file per computed measure") {
    RunConfig config = small_run_config();
    config.measures = {Measure::kMutualInfo, Measure::kDiscord};
    const CorrelationTrace trace = run(config);

    const std::string stem = "build/test_harness_plot";
    const std::vector<std::string> written = emit_plotdata(trace, stem);
    REQUIRE(written.size() == 2);
    CHECK(written[0] == stem + "_MI.dat");
    CHECK(written[1] == stem + "_discord.dat");
    for (const std::string& path : written) {
        CHECK(data_line_count(path) == 4);
        std::ifstream in(path);
        double t = -1.0, value = -1.0;
        REQUIRE(static_cast<bool>(in >> t >> value));
        CHECK(t == 0.0);
        CHECK(value == 0.0);
        std::remove(path.c_str());
    }
}

TEST_CASE("full-REE window restricts evaluation and warm starts chain") {
    RunConfig config;
    config.cut = "A=3;B=1";
    config.t_max = 1.0;
    config.grid = GridKind::kLinear;
    config.points = 4;
    config.measures = {Measure::kMutualInfo, Measure::kReeSingle, Measure::kReeFull};
    config.ree_window_lo = 0.3;
    config.ree_window_hi = 0.7;
    const CorrelationTrace trace = run(config);
    REQUIRE(trace.rows.size() == 4);
    CHECK(std::isnan(trace.rows[0].ree_full));
    CHECK(std::isnan(trace.rows[3].ree_full));
    for (int i : {1, 2}) {
        const TraceRow& row = trace.rows[i];
        REQUIRE_FALSE(std::isnan(row.ree_full));
        CHECK(row.ree_full >= 0.0);
        // The pinched seed guarantees the search never lands above the
        // single-excitation closed form.
        CHECK(row.ree_full <= row.ree_single + 1e-6);
    }

    const std::vector<std::string> written =
        emit_plotdata(trace, "build/test_harness_window");
    REQUIRE(written.size() == 3);
    CHECK(data_line_count(written[2]) == 2);  // only in-window rows have values
    for (const std::string& path : written) std::remove(path.c_str());
}

TEST_CASE("figure batch enumerates the published configurations") {
    const std::vector<RunConfig> batch = paper_grid();
    REQUIRE(static_cast<int>(batch.size()) == 19);

    std::set<std::string> slugs;
    int count_300_site6 = 0;
    for (const RunConfig& config : batch) {
        CHECK_NOTHROW(validate_run_config(config));
        slugs.insert(config_slug(config));
        if (config.temperature == 300.0 && config.initial_state == "site6") {
            ++count_300_site6;
        }
    }
    CHECK(static_cast<int>(slugs.size()) == 19);  // slugs identify configs uniquely
    CHECK(count_300_site6 == 3);                  // one per cut

    CHECK(config_slug(batch[0]) == "A3-B16_T77_site1");

    // The one full-REE entry closes the batch.
    const RunConfig& full = batch.back();
    CHECK(full.cut == "A=1,6;B=3");
    CHECK(full.temperature == 77.0);
    CHECK(full.initial_state == "site1");
    CHECK(std::count(full.measures.begin(), full.measures.end(), Measure::kReeFull) ==
          1);
    const auto single_only = [](const RunConfig& config) {
        return std::count(config.measures.begin(), config.measures.end(),
                          Measure::kReeFull) == 0;
    };
    for (std::size_t i = 0; i + 1 < batch.size(); ++i) CHECK(single_only(batch[i]));
}
