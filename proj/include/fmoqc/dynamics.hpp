#pragma once

#include <string>
#include <vector>

#include "fmoqc/density_operator.hpp"
#include "fmoqc/fmo_model.hpp"

namespace fmoqc {

inline constexpr int kFmoDim = 9;  // basis (G, 1..7, S)

// Nine-level state of the FMO model.  Beyond the DensityOperator invariants,
// ground/sink coherences are forbidden: |rho_{iG}|, |rho_{iS}|, |rho_{GS}|
// below 1e-9 for constructed states.  Trajectory states are checked against
// 1e-8 failure bounds, though the generator never creates these coherences,
// so they stay at round-off level in practice.
struct FmoState {
    DensityOperator rho;
};

std::vector<std::string> fmo_basis_labels();

void validate_fmo_state(const FmoState& state, double coherence_tol = kCoherenceTol,
                        double trace_tol = kTraceTol, double psd_tol = kPsdTol);

FmoState make_fmo_state(Matrix entries, double coherence_tol = kCoherenceTol);

// |1><1|, |6><6|, and their equal mixture.
FmoState initial_site_state(int site);
FmoState initial_mixture_state();

// Reads a 9x9 complex matrix (rows of whitespace-separated "re im" pairs or
// plain reals) and validates it as an FmoState.
FmoState load_custom_state(const std::string& path);

struct Trajectory {
    std::vector<double> t_ps;       // strictly increasing, starts at 0
    std::vector<FmoState> states;   // aligned with t_ps
};

// Full 9x9 Hamiltonian: the 7-site block embedded with zero energy on G and S.
Matrix full_hamiltonian(const FmoHamiltonian& h);

// Dense 81x81 superoperator on column-major-vectorized states:
// L(rho) = -i[H~, rho] + L_diss + L_sink + L_deph, each channel in diagonal
// Lindblad form D[A](rho) = A rho A† - {A†A, rho}/2 with jump operators
// A_m = sqrt(2 G_rec)|G><m|, A_S = sqrt(2 G_sink)|S><3|,
// A_m^phi = sqrt(2 gamma)|m><m|.
Matrix liouvillian(const FmoHamiltonian& h, const DecoherenceRates& rates);

// Matrix-free evaluation of the same generator (independent closed-form route;
// the integrator uses this, the expm oracle uses the dense matrix).
void apply_liouvillian(const Matrix& h_full, const DecoherenceRates& rates,
                       const Matrix& rho, Matrix& out);

enum class EvolveMethod { kRk4, kExpm };

// Integrates rho' = L(rho) on the given grid.  kRk4 uses a fixed internal
// step h <= 1 fs with sub-stepping between grid points; kExpm applies the
// matrix exponential of the vectorized Liouvillian per interval (oracle).
// Every emitted state is re-validated; an eigenvalue dip below -1e-8 or trace
// drift beyond 1e-7 is a hard NumericalError.
Trajectory evolve(const FmoState& rho0, const FmoHamiltonian& h,
                  const DecoherenceRates& rates, const std::vector<double>& t_grid,
                  EvolveMethod method);

}  // namespace fmoqc
