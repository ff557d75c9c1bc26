#pragma once

#include <cstdint>

#include "fmoqc/cut.hpp"

namespace fmoqc {

// Rank-1 projective measurement on the measured side's support subspace
// (dimension side size + 1): columns of `directions` are the orthonormal
// measurement vectors.
struct MeasurementBasis {
    Matrix directions;
};

void validate_measurement_basis(const MeasurementBasis& basis);

struct OptimizerConfig {
    double grid_step_deg = 0.5;  // Bloch-grid step for dim-2 supports
    int starts = 32;             // multi-start count for dim > 2 supports
    int max_iters = 300;         // local-search iterations per start
    double tol = 1e-12;          // local-search f-spread termination
    std::uint64_t seed = 20120510;
};

struct OptimizerTrace {
    int evaluations = 0;
    int iterations = 0;  // local-search iterations summed over restarts
    int restarts = 0;
    // Cleared when fewer than two restarts land within 1e-5 of the best value
    // (multi-start path only); the result is still returned.
    bool converged = true;
    double restart_spread = 0.0;
};

struct ClassicalCorrelationResult {
    double value = 0.0;  // bits
    MeasurementBasis basis;
    OptimizerTrace trace;
};

struct DiscordResult {
    double mutual_info = 0.0;
    double classical_corr = 0.0;
    double discord = 0.0;
    MeasurementBasis optimal_basis;
    OptimizerTrace optimizer_trace;
};

// I(A;B) = H(A) + H(B) - H(AB), marginals through the embedding route.
double mutual_information(const CutState& chi);

// I(other > measured) = H(measured marginal) - H(AB); can be negative.
double coherent_information(const CutState& chi, Side measured = Side::kA);

// Maximum over rank-1 projective measurements on the measured side's support
// of the post-measurement mutual information H(other) - sum_x p_x H(rho_x).
// dim-2 support: exhaustive Bloch grid (step <= grid_step_deg) plus local
// refinement; larger supports: multi-start derivative-free search over the
// unitary parameterization.
ClassicalCorrelationResult classical_correlation(const CutState& chi, Side measured,
                                                 const OptimizerConfig& config = {});

// Discord = I - I_c.  The difference form is cross-checked against the
// conditional-entropy form I(other > measured) + sum_x p_x H(rho_x) at the
// same basis (must agree to 1e-8); the reported value comes from whichever
// path yields the larger classical correlation, and must be >= -1e-7.
DiscordResult quantum_discord(const CutState& chi, Side measured = Side::kA,
                              const OptimizerConfig& config = {});

// Single-excitation restricted relative entropy of entanglement,
// R_e = H(delta_bar(chi)) - H(chi).  Requires the zero/single-excitation
// coherence hypothesis (no ground-excited coherences).
double single_excitation_ree(const CutState& chi);

// --- General bipartite states ---------------------------------------------
// Overloads for an arbitrary bipartite state with an explicit dim_a x dim_b
// tensor split (A factor leftmost).  Unlike the CutState forms, measurements
// run over the full measured factor, so these handle states outside the
// zero/single-excitation subspace.  The dim-2 measured path uses the full
// two-angle Bloch grid (no azimuth collapse without the cut structure).
double mutual_information(const DensityOperator& rho, int dim_a, int dim_b);

ClassicalCorrelationResult classical_correlation(const DensityOperator& rho, int dim_a,
                                                 int dim_b, Side measured,
                                                 const OptimizerConfig& config = {});

DiscordResult quantum_discord(const DensityOperator& rho, int dim_a, int dim_b,
                              Side measured = Side::kA, const OptimizerConfig& config = {});

// Measurement branch states rho_x (unnormalized, trace p_x) for a basis on
// the measured side; exposed for tests and the discord dual form.
std::vector<Matrix> measurement_branches(const CutState& chi, Side measured,
                                         const MeasurementBasis& basis);

}  // namespace fmoqc
