#include "fmoqc/density_operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fmoqc {

namespace {

double log2_clamped(double x) { return std::log2(x); }

int integer_log2(int n) {
    int bits = 0;
    while ((1 << bits) < n) ++bits;
    return bits;
}

}  // namespace

std::vector<std::string> default_labels(int dim) {
    std::vector<std::string> labels(dim);
    for (int i = 0; i < dim; ++i) labels[i] = std::to_string(i);
    return labels;
}

void validate_hermitian(const Matrix& m, const std::string& what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ValidationError(what + ": matrix must be square and non-empty");
    }
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > kHermitianTol) {
        std::ostringstream os;
        os << what << ": not Hermitian, max |M - M†| = " << dev;
        throw ValidationError(os.str());
    }
}

void validate_density_operator(const DensityOperator& rho) {
    validate_hermitian(rho.entries, "DensityOperator");
    if (rho.basis_labels.size() != static_cast<size_t>(rho.dim())) {
        throw ValidationError("DensityOperator: basis label count does not match dimension");
    }
    const double trace_dev = std::abs(rho.entries.trace() - Complex(1.0, 0.0));
    if (trace_dev > kTraceTol) {
        std::ostringstream os;
        os << "DensityOperator: |Tr - 1| = " << trace_dev;
        throw ValidationError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.entries, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < -kPsdTol) {
        std::ostringstream os;
        os << "DensityOperator: not PSD, min eigenvalue = " << min_eig;
        throw ValidationError(os.str());
    }
}

DensityOperator make_density_operator(Matrix entries, std::vector<std::string> basis_labels) {
    DensityOperator rho;
    rho.entries = std::move(entries);
    rho.basis_labels = basis_labels.empty() ? default_labels(static_cast<int>(rho.entries.rows()))
                                            : std::move(basis_labels);
    validate_density_operator(rho);
    return rho;
}

HermitianOperator make_hermitian_operator(Matrix entries) {
    validate_hermitian(entries, "HermitianOperator");
    HermitianOperator h;
    h.entries = std::move(entries);
    return h;
}

EigResult eig_hermitian(const Matrix& m) {
    validate_hermitian(m, "eig_hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eig_hermitian: eigensolver failed to converge");
    }
    const int n = static_cast<int>(m.rows());
    EigResult out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    // Eigen sorts ascending; flip to descending.
    for (int i = 0; i < n; ++i) {
        out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
        out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

double von_neumann_entropy(const DensityOperator& rho) {
    validate_density_operator(rho);
    const EigResult eig = eig_hermitian(rho.entries);
    double h = 0.0;
    for (int i = 0; i < eig.eigenvalues.size(); ++i) {
        double lambda = eig.eigenvalues(i);
        if (lambda < 0.0) {
            if (lambda < -kEntropyClampTol) {
                std::ostringstream os;
                os << "von_neumann_entropy: eigenvalue " << lambda << " below clamp threshold";
                throw ValidationError(os.str());
            }
            lambda = 0.0;
        }
        if (lambda > 0.0) h -= lambda * log2_clamped(lambda);
    }
    return h;
}

double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.dim() != sigma.dim()) {
        throw ValidationError("relative_entropy: dimension mismatch");
    }
    if (rho.basis_labels != sigma.basis_labels) {
        throw ValidationError("relative_entropy: basis labels differ");
    }
    const EigResult er = eig_hermitian(rho.entries);
    const EigResult es = eig_hermitian(sigma.entries);
    const int n = rho.dim();

    // Support test: any rho eigendirection with weight > kSupportTol that
    // leaks more than kSupportTol (squared overlap) into the sigma null space
    // makes the divergence infinite.
    std::vector<int> sigma_null;
    for (int j = 0; j < n; ++j) {
        if (es.eigenvalues(j) <= kNullSpaceTol) sigma_null.push_back(j);
    }
    // Overlap matrix |<v_i|w_j>|^2 reused by both the support test and the
    // cross term.
    Matrix overlap = er.eigenvectors.adjoint() * es.eigenvectors;
    for (int i = 0; i < n; ++i) {
        if (er.eigenvalues(i) <= kSupportTol) continue;
        double leak = 0.0;
        for (int j : sigma_null) leak += std::norm(overlap(i, j));
        if (leak > kSupportTol) return kInfiniteDivergence;
    }

    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        double p = er.eigenvalues(i);
        if (p < 0.0) p = 0.0;
        if (p > 0.0) d += p * log2_clamped(p);
    }
    for (int i = 0; i < n; ++i) {
        const double p = std::max(er.eigenvalues(i), 0.0);
        if (p == 0.0) continue;
        for (int j = 0; j < n; ++j) {
            const double q = es.eigenvalues(j);
            if (q <= kNullSpaceTol) continue;  // overlap bounded by the support test
            d -= p * std::norm(overlap(i, j)) * log2_clamped(q);
        }
    }
    return d;
}

DensityOperator partial_trace_full(const DensityOperator& rho, const std::vector<int>& keep) {
    const int dim = rho.dim();
    const int n_factors = integer_log2(dim);
    if ((1 << n_factors) != dim) {
        throw ValidationError("partial_trace_full: dimension is not a power of two");
    }
    if (keep.empty()) {
        throw ValidationError("partial_trace_full: keep set must be non-empty");
    }
    for (size_t k = 0; k < keep.size(); ++k) {
        if (keep[k] < 0 || keep[k] >= n_factors) {
            throw ValidationError("partial_trace_full: keep index out of range");
        }
        if (k > 0 && keep[k] <= keep[k - 1]) {
            throw ValidationError("partial_trace_full: keep indices must be strictly increasing");
        }
    }

    const int n_keep = static_cast<int>(keep.size());
    const int out_dim = 1 << n_keep;
    std::vector<int> traced;
    for (int f = 0; f < n_factors; ++f) {
        if (std::find(keep.begin(), keep.end(), f) == keep.end()) traced.push_back(f);
    }
    const int n_traced = static_cast<int>(traced.size());

    Matrix out = Matrix::Zero(out_dim, out_dim);
    for (int a = 0; a < out_dim; ++a) {
        for (int b = 0; b < out_dim; ++b) {
            Complex sum = 0.0;
            for (int t = 0; t < (1 << n_traced); ++t) {
                int row = 0, col = 0;
                for (int k = 0; k < n_keep; ++k) {
                    const int bit_a = (a >> (n_keep - 1 - k)) & 1;
                    const int bit_b = (b >> (n_keep - 1 - k)) & 1;
                    row |= bit_a << (n_factors - 1 - keep[k]);
                    col |= bit_b << (n_factors - 1 - keep[k]);
                }
                for (int k = 0; k < n_traced; ++k) {
                    const int bit_t = (t >> (n_traced - 1 - k)) & 1;
                    row |= bit_t << (n_factors - 1 - traced[k]);
                    col |= bit_t << (n_factors - 1 - traced[k]);
                }
                sum += rho.entries(row, col);
            }
            out(a, b) = sum;
        }
    }

    // Labels: excitation strings over the kept factors ('g'/'e', leftmost =
    // lowest kept factor index).
    std::vector<std::string> labels(out_dim);
    for (int a = 0; a < out_dim; ++a) {
        std::string s(n_keep, 'g');
        for (int k = 0; k < n_keep; ++k) {
            if ((a >> (n_keep - 1 - k)) & 1) s[k] = 'e';
        }
        labels[a] = s;
    }
    DensityOperator result;
    result.entries = std::move(out);
    result.basis_labels = std::move(labels);
    validate_density_operator(result);
    return result;
}

}  // namespace fmoqc
