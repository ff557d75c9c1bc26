#pragma once

#include <string>
#include <vector>

#include "fmoqc/common.hpp"

namespace fmoqc {

// Labeled Hermitian PSD trace-one complex matrix; the universal state carrier.
// Invariants (checked by validate_density_operator):
//   max |M - M†| entry <= 1e-12, |Tr M - 1| <= 1e-10, min eigenvalue >= -1e-10.
struct DensityOperator {
    Matrix entries;
    std::vector<std::string> basis_labels;

    int dim() const { return static_cast<int>(entries.rows()); }
};

// Hermitian observable/Hamiltonian carrier (Hermitian to 1e-12, no trace or
// positivity requirement).
struct HermitianOperator {
    Matrix entries;

    int dim() const { return static_cast<int>(entries.rows()); }
};

void validate_hermitian(const Matrix& m, const std::string& what);
void validate_density_operator(const DensityOperator& rho);

// Validating constructors.  Labels default to "0", "1", ... when omitted.
DensityOperator make_density_operator(Matrix entries,
                                      std::vector<std::string> basis_labels = {});
HermitianOperator make_hermitian_operator(Matrix entries);

std::vector<std::string> default_labels(int dim);

// Eigendecomposition of a Hermitian matrix with eigenvalues sorted descending
// and orthonormal eigenvector columns: M = V diag(lambda) V†.
struct EigResult {
    RealVector eigenvalues;   // descending
    Matrix eigenvectors;      // columns aligned with eigenvalues
};

EigResult eig_hermitian(const Matrix& m);
inline EigResult eig_hermitian(const HermitianOperator& m) { return eig_hermitian(m.entries); }
inline EigResult eig_hermitian(const DensityOperator& rho) { return eig_hermitian(rho.entries); }

// Von Neumann entropy in bits: H = -sum lambda_i log2 lambda_i, 0 log 0 = 0,
// eigenvalues in [-1e-10, 0) clamped to zero.
double von_neumann_entropy(const DensityOperator& rho);

// Quantum relative entropy in bits: D = Tr{rho log2 rho} - Tr{rho log2 sigma}.
// Returns kInfiniteDivergence when rho has support outside supp(sigma): some
// rho-eigenvector with eigenvalue > 1e-10 has squared overlap > 1e-10 with the
// sigma null space (eigenvalues below 1e-14).
double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);

// Partial trace over qubit tensor factors.  The state dimension must be a
// power of two; factor 0 is the leftmost (most significant) qubit.  `keep`
// lists the retained factor indices in strictly increasing order.
DensityOperator partial_trace_full(const DensityOperator& rho,
                                   const std::vector<int>& keep);

}  // namespace fmoqc
