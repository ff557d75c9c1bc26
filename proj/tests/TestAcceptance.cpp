// Acceptance harness: evaluates the ten release criteria and prints one
// [PASS]/[FAIL] line each, with the measured numbers and the pinned
// tolerances.  Exits nonzero when any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fmoqc/correlations.hpp"
#include "fmoqc/cut.hpp"
#include "fmoqc/dynamics.hpp"
#include "fmoqc/fmo_model.hpp"
#include "fmoqc/harness.hpp"
#include "fmoqc/ree_full.hpp"
#include "test_support.hpp"

using namespace fmoqc;

namespace {

int failures = 0;

void report(int index, bool pass, const std::string& detail) {
    std::printf("[%s] C%d: %s\n", pass ? "PASS" : "FAIL", index, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void progress(const std::string& message) {
    std::fprintf(stderr, "  .. %s\n", message.c_str());
    std::fflush(stderr);
}

std::string num(double value, const char* format = "%.3g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, value);
    return buf;
}

struct PeakInfo {
    double value = 0.0;
    double t_ps = 0.0;
};

PeakInfo peak_of(const std::vector<double>& t, const std::vector<double>& y) {
    PeakInfo peak;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > peak.value) {
            peak.value = y[i];
            peak.t_ps = t[i];
        }
    }
    return peak;
}

// ---- shared data ----------------------------------------------------------

struct TraceSet {
    std::vector<RunConfig> configs;          // the 18 single-excitation configs
    std::vector<CorrelationTrace> traces;    // aligned
};

TraceSet compute_traces() {
    TraceSet set;
    const std::vector<RunConfig> batch = paper_grid();
    for (std::size_t i = 0; i + 1 < batch.size(); ++i) {  // skip the full-REE entry
        set.configs.push_back(batch[i]);
        progress("trace " + config_slug(batch[i]));
        set.traces.push_back(run(batch[i]));
    }
    return set;
}

const CorrelationTrace* find_trace(const TraceSet& set, const std::string& cut,
                                   double temperature, const std::string& init) {
    for (std::size_t i = 0; i < set.configs.size(); ++i) {
        const RunConfig& c = set.configs[i];
        if (c.cut == cut && c.temperature == temperature && c.initial_state == init) {
            return &set.traces[i];
        }
    }
    return nullptr;
}

PeakInfo mi_peak(const CorrelationTrace& trace) {
    std::vector<double> t, mi;
    for (const TraceRow& row : trace.rows) {
        t.push_back(row.t_ps);
        mi.push_back(row.mutual_info);
    }
    return peak_of(t, mi);
}

// ---- criteria -------------------------------------------------------------

void criterion_equality(const TraceSet& set) {
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < set.traces.size(); ++i) {
        for (const TraceRow& row : set.traces[i].rows) {
            const double gap = std::abs(row.discord - row.ree_single);
            if (gap > worst) {
                worst = gap;
                where = config_slug(set.configs[i]) + " t=" + num(row.t_ps);
            }
        }
    }
    report(1, worst <= 1e-6,
           "discord vs single-excitation divergence on 18 configs x 200 points: "
           "max gap " + num(worst) + " bits at " + where + " (tolerance 1e-6)");
}

void criterion_closed_form_oracle() {
    std::mt19937_64 rng(20120510);
    const std::vector<BipartiteCut> cuts = {make_cut({3}, {1}), make_cut({3}, {1, 6}),
                                            make_cut({1, 2}, {5}),
                                            make_cut({1, 2}, {5, 7})};
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const CutState chi =
            testsupport::random_cut_state(cuts[trial % cuts.size()], rng, 0.05);
        const double gap = std::abs(single_excitation_ree(chi) -
                                    testsupport::separable_family_minimum(chi));
        worst = std::max(worst, gap);
    }
    report(2, worst <= 1e-5,
           "closed form vs direct block-diagonal-family minimization on 100 random "
           "states (dims 3-5): max gap " + num(worst) + " bits (tolerance 1e-5)");
}

void criterion_integrator_oracle() {
    const FmoModel model = load_model("data/fmo_default.model");
    const DecoherenceRates rates = rates_at_temperature(model, 77.0);
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(5.0 * k / 100.0);
    double worst = 0.0;
    for (const FmoState& rho0 :
         {initial_site_state(1), initial_site_state(6), initial_mixture_state()}) {
        const Trajectory rk4 = evolve(rho0, model.hamiltonian, rates, grid,
                                      EvolveMethod::kRk4);
        const Trajectory expm = evolve(rho0, model.hamiltonian, rates, grid,
                                       EvolveMethod::kExpm);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            worst = std::max(worst, (rk4.states[i].rho.entries -
                                     expm.states[i].rho.entries)
                                        .cwiseAbs()
                                        .maxCoeff());
        }
    }
    report(3, worst <= 1e-7,
           "rk4 vs matrix-exponential over 5 ps, three initial states: max entry "
           "difference " + num(worst) + " (tolerance 1e-7)");
}

void criterion_peak_timing(const TraceSet& set) {
    bool pass = true;
    std::string detail = "77 K A=3;B=1,6 peak times:";
    for (const std::string& init : {"site1", "site6", "mixture"}) {
        const CorrelationTrace* trace = find_trace(set, "A=3;B=1,6", 77.0, init);
        const PeakInfo peak = mi_peak(*trace);
        pass = pass && peak.t_ps >= 2.0 && peak.t_ps <= 4.0;
        detail += " " + init + "=" + num(peak.t_ps) + " ps";
    }
    report(4, pass, detail + " (window [2, 4] ps)");
}

void criterion_temperature_shrink(const TraceSet& set) {
    bool pass = true;
    std::string detail = "peak MI 77 K / 300 K on A=3;B=1,6:";
    for (const std::string& init : {"site1", "site6", "mixture"}) {
        const double cold = mi_peak(*find_trace(set, "A=3;B=1,6", 77.0, init)).value;
        const double warm = mi_peak(*find_trace(set, "A=3;B=1,6", 300.0, init)).value;
        const double ratio = cold / warm;
        pass = pass && ratio >= 1.0 && ratio <= 3.0;
        detail += " " + init + "=" + num(ratio, "%.3f");
    }
    report(5, pass, detail + " (factor 2 +/- 50%, window [1, 3])");
}

void criterion_early_quantumness() {
    // The average is over time, so it needs uniform spacing; the default log
    // grid would weight the sub-fs rows (where discord/MI ~ 1) far too much.
    RunConfig config;
    config.temperature = 77.0;
    config.initial_state = "site6";
    config.cut = "A=3;B=1,2";
    config.grid = GridKind::kLinear;
    config.t_max = 1.0;
    config.points = 201;
    const CorrelationTrace trace = run(config);
    double ratio_sum = 0.0;
    double discord_sum = 0.0;
    double mi_sum = 0.0;
    int n = 0;
    for (const TraceRow& row : trace.rows) {
        if (row.t_ps <= 0.0 || row.t_ps > 1.0) continue;
        ratio_sum += row.discord / row.mutual_info;
        discord_sum += row.discord;
        mi_sum += row.mutual_info;
        ++n;
    }
    const double mean_ratio = ratio_sum / n;
    const double ratio_of_means = discord_sum / mi_sum;
    report(6, mean_ratio >= 0.9,
           "77 K site6 A=3;B=1,2 discord/MI averaged uniformly over (0,1] ps: "
           "mean ratio " + num(mean_ratio, "%.3f") + " (ratio of means " +
           num(ratio_of_means, "%.3f") + "; threshold 0.9 over " +
           std::to_string(n) + " points)");
}

struct FullReeScan {
    std::vector<double> t;
    std::vector<double> restricted;
    std::vector<double> full;
    std::vector<double> fraction;
};

FullReeScan scan_full_ree() {
    const FmoModel model = load_model("data/fmo_default.model");
    const DecoherenceRates rates = rates_at_temperature(model, 77.0);
    const BipartiteCut cut = make_cut({1, 6}, {3});
    FullReeScan scan;
    std::vector<double> grid{0.0};
    for (int i = 0; i <= 8; ++i) {
        grid.push_back(0.05 * std::pow(20.0, i / 8.0));  // [0.05, 1.0] ps
    }
    const Trajectory traj = evolve(initial_site_state(1), model.hamiltonian, rates,
                                   grid, EvolveMethod::kRk4);
    SeparableAnsatz warm;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const CutState chi = reduce_to_cut(traj.states[i], cut);
        FullReeConfig fc;
        fc.k = 16;
        fc.max_iters = 500;
        const FullReeResult res =
            warm.components() > 0 ? full_ree(chi, warm, fc) : full_ree(chi, fc);
        warm = res.ansatz;
        scan.t.push_back(grid[i]);
        scan.restricted.push_back(single_excitation_ree(chi));
        scan.full.push_back(res.value);
        scan.fraction.push_back(res.fraction.value_or(0.0));
        progress("full divergence t=" + num(grid[i]) + ": restricted " +
                 num(scan.restricted.back()) + ", full " + num(scan.full.back()) +
                 ", fraction " + num(scan.fraction.back()));
    }
    return scan;
}

void criterion_full_ree_ratio(const FullReeScan& scan) {
    const PeakInfo res = peak_of(scan.t, scan.restricted);
    const PeakInfo full = peak_of(scan.t, scan.full);
    const double ratio = res.value / full.value;
    const double dt = std::abs(res.t_ps - full.t_ps);
    const bool pass = ratio >= 3.0 && ratio <= 7.0 && dt <= 0.5;
    report(7, pass,
           "77 K A=1,6;B=3 peak restricted " + num(res.value) + " at " +
           num(res.t_ps) + " ps vs peak full " + num(full.value) + " at " +
           num(full.t_ps) + " ps: ratio " + num(ratio, "%.2f") +
           " (window [3, 7]), peak-time gap " + num(dt) + " ps (max 0.5)");
}

void criterion_doubly_excited(const FullReeScan& scan) {
    const PeakInfo res = peak_of(scan.t, scan.restricted);
    const PeakInfo full = peak_of(scan.t, scan.full);
    bool pass = true;
    std::string detail = "doubly/singly excited population of the optimal separable "
                         "state at the peak samples:";
    for (const double t_peak : {res.t_ps, full.t_ps}) {
        for (std::size_t i = 0; i < scan.t.size(); ++i) {
            if (scan.t[i] == t_peak) {
                const double fraction = scan.fraction[i];
                pass = pass && fraction >= 1e-5 && fraction <= 1e-3;
                detail += " t=" + num(t_peak) + " -> " + num(fraction);
                break;
            }
        }
        if (res.t_ps == full.t_ps) break;
    }
    report(8, pass, detail + " (window [1e-5, 1e-3])");
}

void criterion_decay(const TraceSet& set) {
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < set.traces.size(); ++i) {
        const PeakInfo peak = mi_peak(set.traces[i]);
        const double tail = set.traces[i].rows.back().mutual_info;
        const double ratio = tail / peak.value;
        if (ratio > worst) {
            worst = ratio;
            where = config_slug(set.configs[i]);
        }
    }
    report(9, worst <= 0.10,
           "MI at 100 ps relative to its peak, worst of 18 configs: " +
           num(worst) + " at " + where + " (threshold 0.10)");
}

// C10 components ------------------------------------------------------------

bool property_trajectory_invariants(std::string& detail) {
    const FmoModel model = load_model("data/fmo_default.model");
    const DecoherenceRates rates = rates_at_temperature(model, 77.0);
    std::vector<double> grid;
    for (int k = 0; k <= 50; ++k) grid.push_back(10.0 * k / 50.0);
    int states = 0;
    for (const FmoState& rho0 :
         {initial_site_state(1), initial_site_state(6), initial_mixture_state()}) {
        const Trajectory traj = evolve(rho0, model.hamiltonian, rates, grid,
                                       EvolveMethod::kRk4);
        double sink = -1.0;
        for (const FmoState& state : traj.states) {
            validate_fmo_state(state, 1e-8, 1e-8, 1e-8);
            const double now = state.rho.entries(8, 8).real();
            if (now < sink - 1e-10) {
                detail += "sink population decreased; ";
                return false;
            }
            sink = now;
            ++states;
        }
    }
    detail += "trajectory invariants on " + std::to_string(states) + " states; ";
    return true;
}

bool property_discord_bounds(const TraceSet& set, std::string& detail) {
    int rows = 0;
    for (const CorrelationTrace& trace : set.traces) {
        for (const TraceRow& row : trace.rows) {
            if (row.discord < 0.0 || row.discord > row.mutual_info + 1e-7) {
                detail += "discord bound violated at t=" + num(row.t_ps) + "; ";
                return false;
            }
            ++rows;
        }
    }
    detail += "discord within [0, MI] on " + std::to_string(rows) + " rows; ";
    return true;
}

bool property_klein(std::string& detail) {
    std::mt19937_64 rng(97531);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int dim = 2 + trial % 5;
        const DensityOperator rho =
            make_density_operator(testsupport::random_density_matrix(dim, rng));
        const DensityOperator sigma =
            make_density_operator(testsupport::random_density_matrix(dim, rng, 0.01));
        const double d = relative_entropy(rho, sigma);
        if (is_infinite_divergence(d)) {
            detail += "unexpected infinite divergence; ";
            return false;
        }
        worst = std::min(worst, d);
    }
    if (worst < -1e-9) {
        detail += "negative divergence " + num(worst) + "; ";
        return false;
    }
    detail += "divergence nonnegative on 1000 pairs (min " + num(worst) + "); ";
    return true;
}

// The two-qubit sample state 1/2 |0><0| (x) |+><+| + 1/2 |-><-| (x) |1><1|.
DensityOperator sample_two_qubit_state() {
    ComplexVector zero(2), one(2), plus(2), minus(2);
    zero << 1, 0;
    one << 0, 1;
    const double s = 1.0 / std::sqrt(2.0);
    plus << s, s;
    minus << s, -s;
    auto pure = [](const ComplexVector& a, const ComplexVector& b) {
        ComplexVector joint(4);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) joint(2 * i + j) = a(i) * b(j);
        }
        return Matrix(joint * joint.adjoint());
    };
    return make_density_operator(0.5 * pure(zero, plus) + 0.5 * pure(minus, one));
}

bool property_sample_state_discord(std::string& detail) {
    const DensityOperator rho = sample_two_qubit_state();
    const double mi = mutual_information(rho, 2, 2);
    const double h_b = von_neumann_entropy(
        partial_trace_full(rho, {1}));

    // Dense brute-force scan over rank-1 projective measurements on A.
    double best = 0.0;
    for (int it = 0; it <= 720; ++it) {
        const double theta = std::numbers::pi * it / 720.0;
        for (int ip = 0; ip < 72; ++ip) {
            const double phi = 2.0 * std::numbers::pi * ip / 72.0;
            const Complex phase = std::polar(1.0, phi);
            ComplexVector x(2), y(2);
            x << std::cos(theta / 2), phase * std::sin(theta / 2);
            y << -std::conj(phase) * std::sin(theta / 2), std::cos(theta / 2);
            double conditional = 0.0;
            for (const ComplexVector& dir : {x, y}) {
                Matrix branch = Matrix::Zero(2, 2);
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) {
                        branch += std::conj(dir(i)) * dir(j) *
                                  rho.entries.block(i * 2, j * 2, 2, 2);
                    }
                }
                const double px = branch.trace().real();
                if (px <= 1e-15) continue;
                const EigResult eig = eig_hermitian(branch);
                for (int i = 0; i < 2; ++i) {
                    const double lambda = eig.eigenvalues(i);
                    if (lambda > 0.0) conditional -= lambda * std::log2(lambda);
                }
                conditional += px * std::log2(px);
            }
            best = std::max(best, h_b - conditional);
        }
    }
    const double discord_grid = mi - best;
    const DiscordResult result = quantum_discord(rho, 2, 2, Side::kA);
    const double gap = std::abs(result.discord - discord_grid);
    if (result.discord <= 0.0 || gap > 1e-6) {
        detail += "sample-state discord " + num(result.discord) + " vs grid " +
                  num(discord_grid) + "; ";
        return false;
    }
    detail += "sample-state discord " + num(result.discord, "%.6f") +
              " matches dense grid within " + num(gap) + "; ";
    return true;
}

bool property_second_order(std::string& detail) {
    std::mt19937_64 rng(86420);
    const BipartiteCut cut = make_cut({1, 2}, {5});
    const int p = cut.a_size();
    for (int trial = 0; trial < 20; ++trial) {
        const CutState chi = testsupport::random_cut_state(cut, rng, 0.2);
        const CutState pinched = delta_bar(chi);
        const Matrix& omega = pinched.restricted.entries;
        const EigResult block = eig_hermitian(Matrix(omega.block(1, 1, p, p)));
        ComplexVector u_a = ComplexVector::Zero(cut.dim());
        u_a.segment(1, p) = block.eigenvectors.col(0);
        ComplexVector u_b = ComplexVector::Zero(cut.dim());
        u_b(p + 1) = 1.0;
        for (const ComplexVector& u : {u_a, u_b}) {
            Matrix shift = Matrix::Zero(cut.dim(), cut.dim());
            shift.col(0) = u;
            shift.row(0) = u.adjoint();
            shift(0, 0) = 0.0;
            auto divergence = [&](double eps) {
                return relative_entropy(chi.restricted,
                                        make_density_operator(omega + eps * shift,
                                                              pinched.restricted
                                                                  .basis_labels));
            };
            const double f0 = divergence(0.0);
            for (const double eps : {1e-3, 1e-4}) {
                const double fp = divergence(eps);
                const double fm = divergence(-eps);
                if (std::abs(fp - fm) / (2.0 * eps) > 1e-9 ||
                    fp - f0 < -50.0 * eps * eps || fm - f0 < -50.0 * eps * eps) {
                    detail += "second-order stability failed on trial " +
                              std::to_string(trial) + "; ";
                    return false;
                }
            }
        }
    }
    detail += "border shifts enter at second order on 20 states";
    return true;
}

void criterion_properties(const TraceSet& set) {
    std::string detail;
    bool pass = property_trajectory_invariants(detail);
    pass = property_discord_bounds(set, detail) && pass;
    pass = property_klein(detail) && pass;
    pass = property_sample_state_discord(detail) && pass;
    pass = property_second_order(detail) && pass;
    report(10, pass, detail);
}

}  // namespace

int main() {
    std::printf("acceptance criteria, calibrated model data/fmo_default.model\n");
    const TraceSet set = compute_traces();
    criterion_equality(set);
    criterion_closed_form_oracle();
    criterion_integrator_oracle();
    criterion_peak_timing(set);
    criterion_temperature_shrink(set);
    criterion_early_quantumness();
    const FullReeScan scan = scan_full_ree();
    criterion_full_ree_ratio(scan);
    criterion_doubly_excited(scan);
    criterion_decay(set);
    criterion_properties(set);
    if (failures > 0) {
        std::printf("%d of 10 criteria failed\n", failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}
