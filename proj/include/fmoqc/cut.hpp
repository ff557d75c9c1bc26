#pragma once

#include <string>
#include <vector>

#include "fmoqc/dynamics.hpp"

namespace fmoqc {

// Disjoint non-empty site subsets defining a bipartite cut.  Sites are kept in
// ascending order on each side.
struct BipartiteCut {
    std::vector<int> a_sites;
    std::vector<int> b_sites;

    int a_size() const { return static_cast<int>(a_sites.size()); }
    int b_size() const { return static_cast<int>(b_sites.size()); }
    int dim() const { return 1 + a_size() + b_size(); }
};

void validate_cut(const BipartiteCut& cut);
BipartiteCut make_cut(std::vector<int> a_sites, std::vector<int> b_sites);

// Cut string format "A=3;B=1,6" (either side may come first).
BipartiteCut parse_cut(const std::string& text);
std::string cut_to_string(const BipartiteCut& cut);

// Reduced joint state on the ordered basis (G_AB, A-sites..., B-sites...).
// The first row/column holds no coherences (exactly zero after reduction; at
// most 1e-9 for externally constructed states).
struct CutState {
    DensityOperator restricted;
    BipartiteCut cut;
};

void validate_cut_state(const CutState& chi);
CutState make_cut_state(Matrix entries, BipartiteCut cut);

std::vector<std::string> cut_basis_labels(const BipartiteCut& cut);

// Ground-absorbing reduction: kept-site entries copy over, and the G_AB
// population collects rho_GG + rho_SS + the populations of all dropped sites.
CutState reduce_to_cut(const FmoState& rho, const BipartiteCut& cut);

// The pieces of chi = alpha*Pi_g + rho_e_A (+) rho_e_B (+) tau:
// alpha is the ground population, rho_e_A/rho_e_B the single-excitation
// diagonal blocks, tau the A-B cross block.
struct BlockDecomposition {
    double alpha = 0.0;
    Matrix rho_e_a;
    Matrix rho_e_b;
    Matrix tau;  // a_size x b_size
};

BlockDecomposition block_decompose(const CutState& chi);
CutState reassemble(const BlockDecomposition& blocks, const BipartiteCut& cut);

// chi with the cross block tau zeroed (entropy-nondecreasing pinching).
CutState delta_bar(const CutState& chi);

// Full qubit-tensor embedding of a cut state: factor order is A-sites
// ascending then B-sites ascending, leftmost factor = most significant bit;
// basis index 0 is the all-ground string and site factors map to single-e
// strings.  Population outside the zero/single-excitation span is zero.
struct EmbeddedCutState {
    DensityOperator full;
    BipartiteCut cut;
};

EmbeddedCutState embed_full(const CutState& chi);

// Inverse of embed_full on its image (projects onto the zero/single-excitation
// basis of the cut).
CutState project_to_cut(const EmbeddedCutState& embedded);

enum class Side { kA, kB };
Side opposite(Side side);

// Marginal of one side, computed through the embedding route
// (embed_full -> partial_trace_full -> compress to the support basis), on the
// ordered basis (G_side, side sites...).
DensityOperator marginal_state(const CutState& chi, Side side);

// Support-basis compression helper: keeps the all-ground and single-e strings
// of a qubit-factor state whose labels were produced by partial_trace_full.
// Residual population outside that span must stay below 1e-12.
DensityOperator compress_to_single_excitation(const DensityOperator& rho,
                                              const std::vector<std::string>& site_labels);

}  // namespace fmoqc
