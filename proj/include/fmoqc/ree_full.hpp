#pragma once

#include <optional>
#include <vector>

#include "fmoqc/common.hpp"
#include "fmoqc/cut.hpp"
#include "fmoqc/density_operator.hpp"

namespace fmoqc {

// Convex mixture of product pure states on the full embedded space:
// sigma = sum_n weights(n) |factors_a[n]><factors_a[n]| (x) |factors_b[n]><factors_b[n]|.
struct SeparableAnsatz {
    RealVector weights;                    // nonnegative, sums to one
    std::vector<ComplexVector> factors_a;  // unit vectors, dim 2^|A|
    std::vector<ComplexVector> factors_b;  // unit vectors, dim 2^|B|

    int components() const { return static_cast<int>(weights.size()); }
};

void validate_ansatz(const SeparableAnsatz& ansatz);

// Builds the density matrix the ansatz describes (dim 2^|A| * 2^|B|,
// A factors leftmost, matching the embedding order).
Matrix assemble(const SeparableAnsatz& ansatz);

struct FullReeConfig {
    int k = 0;               // mixture size; 0 means (2^|A| * 2^|B|)^2
    int starts = 8;          // independent optimizer starts (minimum)
    int max_iters = 200;     // gradient iterations per start
    double grad_step = 1e-6;    // central finite-difference step
    double floor_delta = 1e-9;  // white-noise floor mixed into sigma during search
    double tol = 1e-10;      // stop when per-iteration improvement falls below this
    unsigned long long seed = 20120510;
};

struct FullReeResult {
    double value = 0.0;              // divergence in bits, floor removed when possible
    DensityOperator optimal_sigma;   // best separable state found, assembled
    SeparableAnsatz ansatz;          // its mixture decomposition
    std::optional<double> fraction;  // doubly-excited diagnostic of optimal_sigma
    bool converged = true;           // false when starts fail to corroborate the optimum
    double start_spread = 0.0;       // worst final value minus best, across starts
    int iterations = 0;              // gradient iterations spent on the winning start
    int evaluations = 0;             // objective evaluations across all starts
    std::vector<double> descent_history;  // accepted objective values, winning start
};

// Minimizes S(chi || sigma) over mixtures of product states on the embedded
// two-sided space.  Requires |A| + |B| <= 4.  One start is seeded from the
// block-diagonal pinching of the input (whose divergence from the input equals
// the zero/single-excitation value, so the result can only improve on it);
// the optional warm start is added as a further start.
FullReeResult full_ree(const CutState& chi, const FullReeConfig& config = {});
FullReeResult full_ree(const CutState& chi, const SeparableAnsatz& warm_start,
                       const FullReeConfig& config = {});

// Population with two or more excitations divided by the single-excitation
// population of a state on the embedded product space (labels 'g'/'e' per
// factor).  Empty when the single-excitation population vanishes.
std::optional<double> doubly_excited_fraction(const DensityOperator& full_state);

}  // namespace fmoqc
