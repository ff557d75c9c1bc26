#include "fmoqc/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

namespace fmoqc {

namespace {

constexpr double kBasisOrthoTol = 1e-10;
constexpr double kFormAgreementTol = 1e-8;
constexpr double kDiscordFloor = -1e-7;
constexpr double kRestartAgreementTol = 1e-5;

double entropy_of_spectrum(const RealVector& eigenvalues) {
    double h = 0.0;
    for (int i = 0; i < eigenvalues.size(); ++i) {
        double lambda = eigenvalues(i);
        if (lambda < 0.0) lambda = 0.0;  // clamp integrator round-off
        if (lambda > 0.0) h -= lambda * std::log2(lambda);
    }
    return h;
}

double entropy_of_matrix(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return entropy_of_spectrum(solver.eigenvalues());
}

// Cut-basis indices spanning the measured side's support (ground + sites).
std::vector<int> support_indices(const BipartiteCut& cut, Side side) {
    std::vector<int> idx{0};
    if (side == Side::kA) {
        for (int f = 0; f < cut.a_size(); ++f) idx.push_back(1 + f);
    } else {
        for (int f = 0; f < cut.b_size(); ++f) idx.push_back(1 + cut.a_size() + f);
    }
    return idx;
}

// Contraction isometry T_x mapping the cut basis to the unmeasured side's
// support basis, for a measurement direction x on the measured support.
// Branch state: rho_x = T_x chi T_x†, with p_x = Tr rho_x.
Matrix branch_for_direction(const CutState& chi, Side measured, const ComplexVector& x) {
    const int p = chi.cut.a_size();
    const int q = chi.cut.b_size();
    const int other_dim = (measured == Side::kA ? q : p) + 1;
    const int dim = chi.cut.dim();

    Matrix t = Matrix::Zero(other_dim, dim);
    if (measured == Side::kA) {
        t(0, 0) = std::conj(x(0));
        for (int i = 0; i < p; ++i) t(0, 1 + i) = std::conj(x(1 + i));
        for (int j = 0; j < q; ++j) t(1 + j, 1 + p + j) = std::conj(x(0));
    } else {
        t(0, 0) = std::conj(x(0));
        for (int j = 0; j < q; ++j) t(0, 1 + p + j) = std::conj(x(1 + j));
        for (int i = 0; i < p; ++i) t(1 + i, 1 + i) = std::conj(x(0));
    }
    return t * chi.restricted.entries * t.adjoint();
}

// Maps a measurement direction x on the measured side to the unnormalized
// branch state on the other side; the cut path and the general tensor path
// plug in different contractions.
using BranchFn = std::function<Matrix(const ComplexVector&)>;

// Branch of a plain tensor-product state: (<x| (x) I) rho (|x> (x) I), or the
// mirrored contraction when B is measured.
Matrix tensor_branch(const Matrix& rho, int dim_a, int dim_b, Side measured,
                     const ComplexVector& x) {
    if (measured == Side::kA) {
        Matrix out = Matrix::Zero(dim_b, dim_b);
        for (int a = 0; a < dim_a; ++a) {
            for (int ap = 0; ap < dim_a; ++ap) {
                out += std::conj(x(a)) * x(ap) * rho.block(a * dim_b, ap * dim_b, dim_b, dim_b);
            }
        }
        return out;
    }
    Matrix out(dim_a, dim_a);
    for (int a = 0; a < dim_a; ++a) {
        for (int ap = 0; ap < dim_a; ++ap) {
            out(a, ap) = (x.adjoint() * rho.block(a * dim_b, ap * dim_b, dim_b, dim_b) * x)(0, 0);
        }
    }
    return out;
}

Matrix partial_trace_dims(const Matrix& rho, int dim_a, int dim_b, Side keep) {
    if (keep == Side::kA) {
        Matrix out(dim_a, dim_a);
        for (int a = 0; a < dim_a; ++a) {
            for (int ap = 0; ap < dim_a; ++ap) {
                out(a, ap) = rho.block(a * dim_b, ap * dim_b, dim_b, dim_b).trace();
            }
        }
        return out;
    }
    Matrix out = Matrix::Zero(dim_b, dim_b);
    for (int a = 0; a < dim_a; ++a) {
        out += rho.block(a * dim_b, a * dim_b, dim_b, dim_b);
    }
    return out;
}

// Post-measurement mutual information for a full basis:
// J = H(other) - sum_x p_x H(rho_x / p_x)
//   = H(other) - sum_x [H(rho_x unnormalized) + p_x log2 p_x].
double post_measurement_information(const BranchFn& branch, const Matrix& directions,
                                    double h_other, int* evaluations) {
    double conditional = 0.0;
    for (int c = 0; c < directions.cols(); ++c) {
        const Matrix rho_x = branch(directions.col(c));
        const double px = rho_x.trace().real();
        if (px <= 1e-15) continue;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_x, Eigen::EigenvaluesOnly);
        double h_branch = 0.0;
        for (int i = 0; i < solver.eigenvalues().size(); ++i) {
            const double lambda = solver.eigenvalues()(i);
            if (lambda > 0.0) h_branch -= lambda * std::log2(lambda);
        }
        // H of the unnormalized branch relates to the normalized one via
        // H(rho/p) = (H_unnorm(rho) - p log2 p) / p ... folded directly:
        conditional += h_branch + px * std::log2(px);
    }
    if (evaluations) ++*evaluations;
    return h_other - conditional;
}

Matrix qubit_basis(double theta, double phi) {
    Matrix u(2, 2);
    const Complex phase = std::polar(1.0, phi);
    u(0, 0) = std::cos(theta / 2);
    u(1, 0) = phase * std::sin(theta / 2);
    u(0, 1) = -std::conj(phase) * std::sin(theta / 2);
    u(1, 1) = std::cos(theta / 2);
    return u;
}

// Hermitian matrix from d^2 - 1 real coordinates (traceless part).
Matrix hermitian_from_params(const RealVector& x, int d) {
    Matrix h = Matrix::Zero(d, d);
    int k = 0;
    for (int i = 0; i + 1 < d; ++i) h(i, i) = x(k++);
    Complex trace = h.trace();
    h(d - 1, d - 1) = -trace;  // keep traceless: global phase is irrelevant
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            h(i, j) = Complex(x(k), x(k + 1));
            h(j, i) = std::conj(h(i, j));
            k += 2;
        }
    }
    return h;
}

Matrix unitary_from_params(const Matrix& u0, const RealVector& x) {
    const int d = static_cast<int>(u0.rows());
    const Matrix h = hermitian_from_params(x, d);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    Matrix exp_ih = solver.eigenvectors();
    for (int i = 0; i < d; ++i) {
        exp_ih.col(i) *= std::polar(1.0, solver.eigenvalues()(i));
    }
    return u0 * (exp_ih * solver.eigenvectors().adjoint());
}

// Standard Nelder-Mead minimization.  Returns the best point found.
struct NelderMeadResult {
    RealVector x;
    double value = 0.0;
    int iterations = 0;
};

NelderMeadResult nelder_mead(const std::function<double(const RealVector&)>& f,
                             const RealVector& x0, double scale, int max_iters, double tol) {
    const int n = static_cast<int>(x0.size());
    std::vector<RealVector> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (int i = 0; i < n; ++i) pts[i + 1](i) += scale;
    for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]);

    auto order = [&] {
        std::vector<int> idx(n + 1);
        for (int i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        std::vector<RealVector> p2(n + 1);
        std::vector<double> v2(n + 1);
        for (int i = 0; i <= n; ++i) {
            p2[i] = pts[idx[i]];
            v2[i] = vals[idx[i]];
        }
        pts.swap(p2);
        vals.swap(v2);
    };

    int iter = 0;
    for (; iter < max_iters; ++iter) {
        order();
        if (vals[n] - vals[0] < tol) break;
        RealVector centroid = RealVector::Zero(n);
        for (int i = 0; i < n; ++i) centroid += pts[i];
        centroid /= n;

        RealVector reflected = centroid + (centroid - pts[n]);
        const double fr = f(reflected);
        if (fr < vals[0]) {
            RealVector expanded = centroid + 2.0 * (centroid - pts[n]);
            const double fe = f(expanded);
            if (fe < fr) {
                pts[n] = expanded;
                vals[n] = fe;
            } else {
                pts[n] = reflected;
                vals[n] = fr;
            }
        } else if (fr < vals[n - 1]) {
            pts[n] = reflected;
            vals[n] = fr;
        } else {
            RealVector contracted = centroid + 0.5 * (pts[n] - centroid);
            const double fc = f(contracted);
            if (fc < vals[n]) {
                pts[n] = contracted;
                vals[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    NelderMeadResult out;
    out.x = pts[0];
    out.value = vals[0];
    out.iterations = iter;
    return out;
}

Matrix haar_unitary(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) g(i, j) = Complex(normal(rng), normal(rng));
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        const Complex diag = r(i, i);
        if (std::abs(diag) > 0) q.col(i) *= diag / std::abs(diag);
    }
    return q;
}

Matrix fourier_basis(int d) {
    Matrix f(d, d);
    const double w = 2.0 * std::numbers::pi / d;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            f(i, j) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), w * i * j);
        }
    }
    return f;
}

// Shared measurement optimizer.  d = dimension of the measured space;
// theta_only_grid selects the cut-state fast path where the azimuth provably
// drops out of the objective (zero ground-excited border), so the Bloch grid
// collapses to its theta axis; general bipartite states scan both angles.
ClassicalCorrelationResult optimize_measurement(int d, double h_other, const BranchFn& branch,
                                                const OptimizerConfig& config,
                                                bool theta_only_grid) {
    ClassicalCorrelationResult result;
    OptimizerTrace& trace = result.trace;

    if (d == 1) {  // degenerate split: the single direction learns nothing
        result.basis.directions = Matrix::Identity(1, 1);
        trace.restarts = 1;
        return result;
    }

    if (d == 2) {
        const double step_rad = config.grid_step_deg * std::numbers::pi / 180.0;
        const int n_theta = static_cast<int>(std::ceil(std::numbers::pi / step_rad)) + 1;
        const int n_phi =
            theta_only_grid ? 1 : static_cast<int>(std::ceil(2.0 * std::numbers::pi / step_rad));
        double best_theta = 0.0;
        double best_phi = 0.0;
        double best_value = -1.0;
        for (int k = 0; k < n_theta; ++k) {
            const double theta = std::min(std::numbers::pi, k * step_rad);
            for (int l = 0; l < n_phi; ++l) {
                const double phi = l * step_rad;
                const double j = post_measurement_information(branch, qubit_basis(theta, phi),
                                                              h_other, &trace.evaluations);
                if (j > best_value) {
                    best_value = j;
                    best_theta = theta;
                    best_phi = phi;
                }
            }
        }
        RealVector start(2);
        start << best_theta, best_phi;
        auto f = [&](const RealVector& x) {
            return -post_measurement_information(branch, qubit_basis(x(0), x(1)), h_other,
                                                 &trace.evaluations);
        };
        const NelderMeadResult refined =
            nelder_mead(f, start, step_rad, config.max_iters, config.tol);
        trace.restarts = 1;
        trace.iterations = refined.iterations;
        if (-refined.value >= best_value) {
            best_value = -refined.value;
            result.basis.directions = qubit_basis(refined.x(0), refined.x(1));
        } else {
            result.basis.directions = qubit_basis(best_theta, best_phi);
        }
        result.value = best_value;
        return result;
    }

    // Multi-start derivative-free search over the unitary parameterization.
    const int n_params = d * d - 1;
    std::mt19937_64 rng(config.seed);
    std::vector<Matrix> starts;
    starts.push_back(Matrix::Identity(d, d));
    starts.push_back(fourier_basis(d));
    while (static_cast<int>(starts.size()) < std::max(config.starts, 32)) {
        starts.push_back(haar_unitary(d, rng));
    }

    double best_value = -1.0;
    Matrix best_u;
    std::vector<double> finals;
    for (const Matrix& u0 : starts) {
        auto f = [&](const RealVector& x) {
            return -post_measurement_information(branch, unitary_from_params(u0, x), h_other,
                                                 &trace.evaluations);
        };
        const NelderMeadResult local = nelder_mead(f, RealVector::Zero(n_params), 0.35,
                                                   config.max_iters, config.tol);
        trace.iterations += local.iterations;
        finals.push_back(-local.value);
        if (-local.value > best_value) {
            best_value = -local.value;
            best_u = unitary_from_params(u0, local.x);
        }
    }
    // Polish the winner with a tighter local pass.
    {
        auto f = [&](const RealVector& x) {
            return -post_measurement_information(branch, unitary_from_params(best_u, x), h_other,
                                                 &trace.evaluations);
        };
        const NelderMeadResult polish =
            nelder_mead(f, RealVector::Zero(n_params), 0.02, config.max_iters, config.tol);
        trace.iterations += polish.iterations;
        if (-polish.value > best_value) {
            best_value = -polish.value;
            best_u = unitary_from_params(best_u, polish.x);
        }
    }

    trace.restarts = static_cast<int>(starts.size());
    int close = 0;
    double spread = 0.0;
    for (double v : finals) {
        if (best_value - v <= kRestartAgreementTol) ++close;
        spread = std::max(spread, best_value - v);
    }
    trace.converged = close >= 2;
    trace.restart_spread = spread;

    result.value = best_value;
    result.basis.directions = best_u;
    return result;
}

// Shared discord assembly: cross-checks the difference form against the
// conditional-entropy form at the optimal basis, reports the better path.
DiscordResult assemble_discord(double mutual_info, double i_coherent,
                               ClassicalCorrelationResult cc, const BranchFn& branch) {
    DiscordResult out;
    out.mutual_info = mutual_info;
    out.optimizer_trace = cc.trace;

    // Independent conditional-entropy form evaluated at the same basis:
    // D = I(other > measured) + sum_x p_x H(rho_x).
    double conditional = 0.0;
    for (int c = 0; c < cc.basis.directions.cols(); ++c) {
        const Matrix rho_x = branch(cc.basis.directions.col(c));
        const double px = rho_x.trace().real();
        if (px <= 1e-15) continue;
        conditional += entropy_of_matrix(rho_x) + px * std::log2(px);
    }
    const double direct = mutual_info - cc.value;
    const double alt = i_coherent + conditional;
    if (std::abs(alt - direct) > kFormAgreementTol) {
        std::ostringstream os;
        os << "quantum_discord: difference form " << direct
           << " and conditional-entropy form " << alt << " disagree";
        throw NumericalError(os.str());
    }
    // The forms agree within tolerance; keep whichever credits more of the
    // correlation as classical, so round-off never inflates the discord.
    out.classical_corr = std::max(cc.value, mutual_info - alt);
    out.discord = mutual_info - out.classical_corr;
    out.optimal_basis = std::move(cc.basis);
    if (out.discord < kDiscordFloor) {
        std::ostringstream os;
        os << "quantum_discord: negative discord " << out.discord;
        throw NumericalError(os.str());
    }
    return out;
}

void check_bipartite_dims(const DensityOperator& rho, int dim_a, int dim_b) {
    if (dim_a < 1 || dim_b < 1 || dim_a * dim_b != rho.dim()) {
        std::ostringstream os;
        os << "bipartite split " << dim_a << "x" << dim_b << " does not match state dimension "
           << rho.dim();
        throw ValidationError(os.str());
    }
}

}  // namespace

void validate_measurement_basis(const MeasurementBasis& basis) {
    const Matrix& u = basis.directions;
    if (u.rows() != u.cols() || u.rows() == 0) {
        throw ValidationError("MeasurementBasis: directions must form a square matrix");
    }
    const Matrix gram = u.adjoint() * u;
    const double dev =
        (gram - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
    if (dev > kBasisOrthoTol) {
        std::ostringstream os;
        os << "MeasurementBasis: columns not orthonormal, deviation " << dev;
        throw ValidationError(os.str());
    }
}

double mutual_information(const CutState& chi) {
    validate_cut_state(chi);
    const double h_a = entropy_of_matrix(marginal_state(chi, Side::kA).entries);
    const double h_b = entropy_of_matrix(marginal_state(chi, Side::kB).entries);
    const double h_ab = entropy_of_matrix(chi.restricted.entries);
    return h_a + h_b - h_ab;
}

double coherent_information(const CutState& chi, Side measured) {
    validate_cut_state(chi);
    const double h_measured = entropy_of_matrix(marginal_state(chi, measured).entries);
    const double h_ab = entropy_of_matrix(chi.restricted.entries);
    return h_measured - h_ab;
}

std::vector<Matrix> measurement_branches(const CutState& chi, Side measured,
                                         const MeasurementBasis& basis) {
    validate_cut_state(chi);
    validate_measurement_basis(basis);
    const int d = static_cast<int>(support_indices(chi.cut, measured).size());
    if (basis.directions.rows() != d) {
        throw ValidationError("measurement_branches: basis dimension mismatch with support");
    }
    std::vector<Matrix> branches;
    for (int c = 0; c < d; ++c) {
        branches.push_back(branch_for_direction(chi, measured, basis.directions.col(c)));
    }
    return branches;
}

ClassicalCorrelationResult classical_correlation(const CutState& chi, Side measured,
                                                 const OptimizerConfig& config) {
    validate_cut_state(chi);
    const int d = static_cast<int>(support_indices(chi.cut, measured).size());
    const double h_other = entropy_of_matrix(marginal_state(chi, opposite(measured)).entries);
    // For a cut state the azimuth enters the objective only through the phase
    // of the ground-excited border (zero by construction, <= 1e-9 for external
    // states), so the dim-2 Bloch grid collapses to its theta axis; the local
    // refinement reoptimizes both angles and absorbs any border residue.
    const BranchFn branch = [&](const ComplexVector& x) {
        return branch_for_direction(chi, measured, x);
    };
    return optimize_measurement(d, h_other, branch, config, /*theta_only_grid=*/true);
}

DiscordResult quantum_discord(const CutState& chi, Side measured, const OptimizerConfig& config) {
    const double mi = mutual_information(chi);
    ClassicalCorrelationResult cc = classical_correlation(chi, measured, config);
    const BranchFn branch = [&](const ComplexVector& x) {
        return branch_for_direction(chi, measured, x);
    };
    return assemble_discord(mi, coherent_information(chi, measured), std::move(cc), branch);
}

double mutual_information(const DensityOperator& rho, int dim_a, int dim_b) {
    validate_density_operator(rho);
    check_bipartite_dims(rho, dim_a, dim_b);
    const double h_a = entropy_of_matrix(partial_trace_dims(rho.entries, dim_a, dim_b, Side::kA));
    const double h_b = entropy_of_matrix(partial_trace_dims(rho.entries, dim_a, dim_b, Side::kB));
    return h_a + h_b - entropy_of_matrix(rho.entries);
}

ClassicalCorrelationResult classical_correlation(const DensityOperator& rho, int dim_a,
                                                 int dim_b, Side measured,
                                                 const OptimizerConfig& config) {
    validate_density_operator(rho);
    check_bipartite_dims(rho, dim_a, dim_b);
    const int d = measured == Side::kA ? dim_a : dim_b;
    const double h_other = entropy_of_matrix(
        partial_trace_dims(rho.entries, dim_a, dim_b, opposite(measured)));
    const BranchFn branch = [&](const ComplexVector& x) {
        return tensor_branch(rho.entries, dim_a, dim_b, measured, x);
    };
    return optimize_measurement(d, h_other, branch, config, /*theta_only_grid=*/false);
}

DiscordResult quantum_discord(const DensityOperator& rho, int dim_a, int dim_b, Side measured,
                              const OptimizerConfig& config) {
    const double mi = mutual_information(rho, dim_a, dim_b);
    const double h_measured = entropy_of_matrix(
        partial_trace_dims(rho.entries, dim_a, dim_b, measured));
    const double i_coherent = h_measured - entropy_of_matrix(rho.entries);
    ClassicalCorrelationResult cc = classical_correlation(rho, dim_a, dim_b, measured, config);
    const BranchFn branch = [&](const ComplexVector& x) {
        return tensor_branch(rho.entries, dim_a, dim_b, measured, x);
    };
    return assemble_discord(mi, i_coherent, std::move(cc), branch);
}

double single_excitation_ree(const CutState& chi) {
    // Check the closed form's own precondition first so its violation is
    // named, not reported as a generic cut-state failure.
    for (int i = 1; i < chi.restricted.dim(); ++i) {
        if (std::abs(chi.restricted.entries(0, i)) > kCoherenceTol) {
            throw ValidationError(
                "single_excitation_ree: zero/single-excitation coherence hypothesis violated "
                "(ground-excited coherence present)");
        }
    }
    validate_cut_state(chi);
    const CutState pinched = delta_bar(chi);
    return entropy_of_matrix(pinched.restricted.entries) -
           entropy_of_matrix(chi.restricted.entries);
}

}  // namespace fmoqc
