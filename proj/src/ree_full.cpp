#include "fmoqc/ree_full.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <random>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace fmoqc {

namespace {

constexpr int kMaxCutSites = 4;
constexpr double kAnsatzTol = 1e-10;
constexpr double kStartAgreementTol = 1e-4;
constexpr double kVanishingPopulation = 1e-15;

// Flat parameter layout: K logits, then K blocks of (re, im) pairs for the A
// factors, then K blocks for the B factors.  Softmax and normalization are
// applied on unpack so every real vector maps to a valid ansatz.
struct ParamLayout {
    int k;
    int dim_a;
    int dim_b;

    int total() const { return k * (1 + 2 * dim_a + 2 * dim_b); }
    int logit(int n) const { return n; }
    int factor_a(int n) const { return k + n * 2 * dim_a; }
    int factor_b(int n) const { return k + k * 2 * dim_a + n * 2 * dim_b; }
};

ComplexVector unpack_factor(const RealVector& params, int offset, int dim) {
    ComplexVector v(dim);
    for (int i = 0; i < dim; ++i) {
        v(i) = Complex(params(offset + 2 * i), params(offset + 2 * i + 1));
    }
    const double norm = v.norm();
    if (norm < 1e-12) {
        v.setZero();
        v(0) = 1.0;
        return v;
    }
    return v / norm;
}

SeparableAnsatz unpack(const RealVector& params, const ParamLayout& layout) {
    SeparableAnsatz ansatz;
    ansatz.weights.resize(layout.k);
    double max_logit = params.head(layout.k).maxCoeff();
    double z = 0.0;
    for (int n = 0; n < layout.k; ++n) {
        ansatz.weights(n) = std::exp(params(layout.logit(n)) - max_logit);
        z += ansatz.weights(n);
    }
    ansatz.weights /= z;
    for (int n = 0; n < layout.k; ++n) {
        ansatz.factors_a.push_back(unpack_factor(params, layout.factor_a(n), layout.dim_a));
        ansatz.factors_b.push_back(unpack_factor(params, layout.factor_b(n), layout.dim_b));
    }
    return ansatz;
}

RealVector pack(const SeparableAnsatz& ansatz, const ParamLayout& layout) {
    RealVector params = RealVector::Zero(layout.total());
    for (int n = 0; n < layout.k; ++n) {
        params(layout.logit(n)) = std::log(std::max(ansatz.weights(n), 1e-20));
        for (int i = 0; i < layout.dim_a; ++i) {
            params(layout.factor_a(n) + 2 * i) = ansatz.factors_a[n](i).real();
            params(layout.factor_a(n) + 2 * i + 1) = ansatz.factors_a[n](i).imag();
        }
        for (int i = 0; i < layout.dim_b; ++i) {
            params(layout.factor_b(n) + 2 * i) = ansatz.factors_b[n](i).real();
            params(layout.factor_b(n) + 2 * i + 1) = ansatz.factors_b[n](i).imag();
        }
    }
    return params;
}

// -Tr rho log2 sigma, with sigma mixed toward white noise by delta so the
// logarithm stays finite throughout the search.
double cross_term(const Matrix& rho, const Matrix& sigma, double delta) {
    const int dim = static_cast<int>(sigma.rows());
    Matrix floored = (1.0 - delta) * sigma;
    floored.diagonal().array() += delta / dim;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(floored);
    const Matrix overlap = solver.eigenvectors().adjoint() * rho * solver.eigenvectors();
    double value = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double lambda = std::max(solver.eigenvalues()(i), 1e-300);
        value -= overlap(i, i).real() * std::log2(lambda);
    }
    return value;
}

// Decomposes the pinched target into product pure states: the zero-excitation
// weight plus each side's excited-block eigenvectors paired with the other
// side's ground state.  assemble() of the seed reproduces the pinched state.
SeparableAnsatz pinched_seed(const CutState& chi, const ParamLayout& layout,
                             std::mt19937_64& rng) {
    const BlockDecomposition blocks = block_decompose(chi);
    const int p = chi.cut.a_size();
    const int q = chi.cut.b_size();

    std::vector<double> weights;
    std::vector<ComplexVector> fa;
    std::vector<ComplexVector> fb;

    ComplexVector ground_a = ComplexVector::Zero(layout.dim_a);
    ground_a(0) = 1.0;
    ComplexVector ground_b = ComplexVector::Zero(layout.dim_b);
    ground_b(0) = 1.0;

    weights.push_back(std::max(blocks.alpha, 1e-12));
    fa.push_back(ground_a);
    fb.push_back(ground_b);

    const EigResult eig_a = eig_hermitian(blocks.rho_e_a);
    for (int i = 0; i < p; ++i) {
        if (eig_a.eigenvalues(i) <= 0.0) continue;
        ComplexVector site = ComplexVector::Zero(layout.dim_a);
        for (int f = 0; f < p; ++f) site(1 << (p - 1 - f)) = eig_a.eigenvectors(f, i);
        weights.push_back(eig_a.eigenvalues(i));
        fa.push_back(site);
        fb.push_back(ground_b);
    }
    const EigResult eig_b = eig_hermitian(blocks.rho_e_b);
    for (int i = 0; i < q; ++i) {
        if (eig_b.eigenvalues(i) <= 0.0) continue;
        ComplexVector site = ComplexVector::Zero(layout.dim_b);
        for (int f = 0; f < q; ++f) site(1 << (q - 1 - f)) = eig_b.eigenvectors(f, i);
        weights.push_back(eig_b.eigenvalues(i));
        fa.push_back(ground_a);
        fb.push_back(site);
    }

    // Pad to K components with negligible-weight random products so the
    // optimizer has spare mixture slots to recruit.
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_unit = [&](int dim) {
        ComplexVector v(dim);
        for (int i = 0; i < dim; ++i) v(i) = Complex(normal(rng), normal(rng));
        return ComplexVector(v / v.norm());
    };
    while (static_cast<int>(weights.size()) < layout.k) {
        weights.push_back(1e-12);
        fa.push_back(random_unit(layout.dim_a));
        fb.push_back(random_unit(layout.dim_b));
    }

    SeparableAnsatz seed;
    seed.weights.resize(layout.k);
    double total = 0.0;
    for (int n = 0; n < layout.k; ++n) total += weights[n];
    for (int n = 0; n < layout.k; ++n) seed.weights(n) = weights[n] / total;
    seed.factors_a = std::move(fa);
    seed.factors_b = std::move(fb);
    return seed;
}

// Seeds the structure the optimum takes when the target carries an A-B cross
// block tau = sum_r s_r u_r v_r†: a four-phase mixture of weakly excited
// products (|g> + eps*theta*|u>) (x) (|g> + delta*theta*|v>), theta in
// {1, i, -1, -i}, reproduces the cross block with amplitude eps*delta while
// the phase average cancels every border and ground-to-double coherence; the
// only extra cost is a doubly excited population of order (eps*delta)^2.
// Empty when the cross block vanishes or the mixture would not fit in K.
std::optional<SeparableAnsatz> coherent_seed(const CutState& chi, const ParamLayout& layout,
                                             std::mt19937_64& rng) {
    const BlockDecomposition blocks = block_decompose(chi);
    const int p = chi.cut.a_size();
    const int q = chi.cut.b_size();
    const Eigen::JacobiSVD<Matrix> svd(blocks.tau,
                                       Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double s_total = svd.singularValues().sum();
    if (s_total < 1e-10 || blocks.alpha < 1e-10) return std::nullopt;

    ComplexVector ground_a = ComplexVector::Zero(layout.dim_a);
    ground_a(0) = 1.0;
    ComplexVector ground_b = ComplexVector::Zero(layout.dim_b);
    ground_b(0) = 1.0;
    const auto lift = [](const ComplexVector& sites, int count, int dim) {
        ComplexVector v = ComplexVector::Zero(dim);
        for (int f = 0; f < count; ++f) v(1 << (count - 1 - f)) = sites(f);
        return v;
    };

    std::vector<double> weights;
    std::vector<ComplexVector> fa;
    std::vector<ComplexVector> fb;
    Matrix a_rem = blocks.rho_e_a;
    Matrix b_rem = blocks.rho_e_b;
    double alpha_left = blocks.alpha;
    const Complex phases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

    for (int r = 0; r < svd.singularValues().size(); ++r) {
        double s = svd.singularValues()(r);
        if (s < 1e-12) continue;
        const ComplexVector u = svd.matrixU().col(r);
        const ComplexVector v = svd.matrixV().col(r);
        const double lambda = (u.adjoint() * a_rem * u)(0, 0).real();
        const double mu = (v.adjoint() * b_rem * v)(0, 0).real();
        if (lambda < 1e-14 || mu < 1e-14) continue;
        // Positivity of the target bounds s by sqrt(lambda*mu); stay inside.
        s = std::min(s, std::sqrt(lambda * mu) * (1.0 - 1e-9));
        const double c_a = s * std::sqrt(lambda / mu);
        const double c_b = s * std::sqrt(mu / lambda);
        const double c_g = alpha_left * (svd.singularValues()(r) / s_total);
        if (c_g < 1e-14) continue;
        const double eps = std::sqrt(c_a / c_g);
        const double delta = std::sqrt(c_b / c_g);
        const double component_weight =
            c_g * (1.0 + eps * eps) * (1.0 + delta * delta) / 4.0;
        const ComplexVector ua = lift(u, p, layout.dim_a);
        const ComplexVector vb = lift(v, q, layout.dim_b);
        for (const Complex& theta : phases) {
            weights.push_back(component_weight);
            fa.push_back(ComplexVector((ground_a + eps * theta * ua).normalized()));
            fb.push_back(ComplexVector((ground_b + delta * theta * vb).normalized()));
        }
        a_rem -= c_a * u * u.adjoint();
        b_rem -= c_b * v * v.adjoint();
        alpha_left -= c_g;
    }
    if (weights.empty()) return std::nullopt;

    if (alpha_left > 1e-14) {
        weights.push_back(alpha_left);
        fa.push_back(ground_a);
        fb.push_back(ground_b);
    }
    const EigResult eig_a = eig_hermitian(a_rem);
    for (int i = 0; i < p; ++i) {
        if (eig_a.eigenvalues(i) <= 1e-14) continue;
        weights.push_back(eig_a.eigenvalues(i));
        fa.push_back(lift(eig_a.eigenvectors.col(i), p, layout.dim_a));
        fb.push_back(ground_b);
    }
    const EigResult eig_b = eig_hermitian(b_rem);
    for (int i = 0; i < q; ++i) {
        if (eig_b.eigenvalues(i) <= 1e-14) continue;
        weights.push_back(eig_b.eigenvalues(i));
        fa.push_back(ground_a);
        fb.push_back(lift(eig_b.eigenvectors.col(i), q, layout.dim_b));
    }
    if (static_cast<int>(weights.size()) > layout.k) return std::nullopt;

    std::normal_distribution<double> normal(0.0, 1.0);
    while (static_cast<int>(weights.size()) < layout.k) {
        ComplexVector ra(layout.dim_a), rb(layout.dim_b);
        for (int i = 0; i < layout.dim_a; ++i) ra(i) = Complex(normal(rng), normal(rng));
        for (int i = 0; i < layout.dim_b; ++i) rb(i) = Complex(normal(rng), normal(rng));
        weights.push_back(1e-12);
        fa.push_back(ComplexVector(ra.normalized()));
        fb.push_back(ComplexVector(rb.normalized()));
    }

    SeparableAnsatz seed;
    seed.weights.resize(layout.k);
    double total = 0.0;
    for (double w : weights) total += w;
    for (int n = 0; n < layout.k; ++n) seed.weights(n) = weights[n] / total;
    seed.factors_a = std::move(fa);
    seed.factors_b = std::move(fb);
    return seed;
}

struct StartOutcome {
    RealVector params;
    double value = 0.0;
    int iterations = 0;
    std::vector<double> history;
};

}  // namespace

void validate_ansatz(const SeparableAnsatz& ansatz) {
    const int k = ansatz.components();
    if (k <= 0) throw ValidationError("SeparableAnsatz: needs at least one component");
    if (static_cast<int>(ansatz.factors_a.size()) != k ||
        static_cast<int>(ansatz.factors_b.size()) != k) {
        throw ValidationError("SeparableAnsatz: factor count does not match weight count");
    }
    double total = 0.0;
    for (int n = 0; n < k; ++n) {
        if (ansatz.weights(n) < -kAnsatzTol) {
            throw ValidationError("SeparableAnsatz: negative weight");
        }
        total += ansatz.weights(n);
        if (ansatz.factors_a[n].size() != ansatz.factors_a[0].size() ||
            ansatz.factors_b[n].size() != ansatz.factors_b[0].size()) {
            throw ValidationError("SeparableAnsatz: inconsistent factor dimensions");
        }
        if (std::abs(ansatz.factors_a[n].norm() - 1.0) > kAnsatzTol ||
            std::abs(ansatz.factors_b[n].norm() - 1.0) > kAnsatzTol) {
            throw ValidationError("SeparableAnsatz: factors must be unit vectors");
        }
    }
    if (std::abs(total - 1.0) > kAnsatzTol) {
        throw ValidationError("SeparableAnsatz: weights must sum to one");
    }
}

Matrix assemble(const SeparableAnsatz& ansatz) {
    const int dim_a = static_cast<int>(ansatz.factors_a[0].size());
    const int dim_b = static_cast<int>(ansatz.factors_b[0].size());
    Matrix sigma = Matrix::Zero(dim_a * dim_b, dim_a * dim_b);
    for (int n = 0; n < ansatz.components(); ++n) {
        const ComplexVector product =
            Eigen::kroneckerProduct(ansatz.factors_a[n], ansatz.factors_b[n]);
        sigma.noalias() += ansatz.weights(n) * product * product.adjoint();
    }
    return sigma;
}

FullReeResult full_ree(const CutState& chi, const FullReeConfig& config) {
    return full_ree(chi, SeparableAnsatz{}, config);
}

FullReeResult full_ree(const CutState& chi, const SeparableAnsatz& warm_start,
                       const FullReeConfig& config) {
    validate_cut_state(chi);
    const int p = chi.cut.a_size();
    const int q = chi.cut.b_size();
    if (p + q > kMaxCutSites) {
        std::ostringstream os;
        os << "full_ree: cut has " << p + q << " sites; the embedded-space search "
           << "supports at most " << kMaxCutSites;
        throw ValidationError(os.str());
    }

    const int dim_a = 1 << p;
    const int dim_b = 1 << q;
    const int k = config.k > 0 ? config.k : (dim_a * dim_b) * (dim_a * dim_b);
    const ParamLayout layout{k, dim_a, dim_b};

    const EmbeddedCutState embedded = embed_full(chi);
    const Matrix& rho = embedded.full.entries;
    const double rho_log_rho = -von_neumann_entropy(embedded.full);

    int evaluations = 0;
    auto objective = [&](const RealVector& params) {
        ++evaluations;
        return rho_log_rho + cross_term(rho, assemble(unpack(params, layout)),
                                        config.floor_delta);
    };

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const SeparableAnsatz seed = pinched_seed(chi, layout, rng);
    const auto jittered = [&](const SeparableAnsatz& base, double scale) {
        SeparableAnsatz copy = base;
        for (int n = 0; n < layout.k; ++n) {
            copy.weights(n) = 0.95 * copy.weights(n) + 0.05 / layout.k;
            for (int i = 0; i < layout.dim_a; ++i) {
                copy.factors_a[n](i) += scale * Complex(normal(rng), normal(rng));
            }
            for (int i = 0; i < layout.dim_b; ++i) {
                copy.factors_b[n](i) += scale * Complex(normal(rng), normal(rng));
            }
            copy.factors_a[n].normalize();
            copy.factors_b[n].normalize();
        }
        return pack(copy, layout);
    };

    std::vector<RealVector> starts;
    starts.push_back(pack(seed, layout));
    if (warm_start.components() > 0) {
        validate_ansatz(warm_start);
        if (static_cast<int>(warm_start.factors_a[0].size()) != layout.dim_a ||
            static_cast<int>(warm_start.factors_b[0].size()) != layout.dim_b ||
            warm_start.components() != layout.k) {
            throw ValidationError(
                "full_ree: warm start shaped for a different cut or mixture size");
        }
        starts.push_back(pack(warm_start, layout));
    }
    // The pinched seed is a stationary point whenever the target carries an
    // A-B cross block: reproducing that block needs components excited on both
    // sides at once, which enters the objective only bilinearly in the factor
    // amplitudes, so the gradient along those directions vanishes there.  The
    // coherent seed starts inside the basin that resolves the cross block;
    // jittered copies of both seeds and one fully random start cover the rest.
    if (const auto coherent = coherent_seed(chi, layout, rng)) {
        starts.push_back(pack(*coherent, layout));
        starts.push_back(jittered(*coherent, 0.02));
        starts.push_back(jittered(*coherent, 0.05));
    }
    const double jitter_scales[] = {0.02, 0.05, 0.1, 0.2, 0.4};
    std::size_t scale_index = 0;
    while (static_cast<int>(starts.size()) + 1 < std::max(config.starts, 8)) {
        starts.push_back(
            jittered(seed, jitter_scales[scale_index % std::size(jitter_scales)]));
        ++scale_index;
    }
    {
        RealVector params(layout.total());
        for (int i = 0; i < layout.total(); ++i) params(i) = normal(rng);
        starts.push_back(std::move(params));
    }

    std::vector<StartOutcome> outcomes;
    for (RealVector params : starts) {
        StartOutcome outcome;
        double f0 = objective(params);
        outcome.history.push_back(f0);
        double step = 0.5;
        RealVector gradient(layout.total());
        RealVector prev_params;
        RealVector prev_gradient;
        for (; outcome.iterations < config.max_iters; ++outcome.iterations) {
            for (int i = 0; i < layout.total(); ++i) {
                const double saved = params(i);
                params(i) = saved + config.grad_step;
                const double plus = objective(params);
                params(i) = saved - config.grad_step;
                const double minus = objective(params);
                params(i) = saved;
                gradient(i) = (plus - minus) / (2.0 * config.grad_step);
            }
            const double slope = gradient.squaredNorm();
            if (std::sqrt(slope) < 1e-8) break;

            // Barzilai-Borwein trial step from the last accepted move; the
            // plain-descent valley here is shallow enough that a fixed step
            // crawls, while the quotient below adapts to the local curvature.
            // Backtracking still guards the actual acceptance.
            if (prev_params.size() == params.size()) {
                const RealVector dx = params - prev_params;
                const RealVector dg = gradient - prev_gradient;
                const double denom = dg.squaredNorm();
                const double bb = denom > 0.0 ? std::abs(dx.dot(dg)) / denom : 0.0;
                if (std::isfinite(bb) && bb > 0.0) {
                    step = std::clamp(bb, 1e-6, 16.0);
                }
            }
            prev_params = params;
            prev_gradient = gradient;

            double t = step;
            double f_new = f0;
            bool improved = false;
            for (int back = 0; back < 40; ++back) {
                f_new = objective(params - t * gradient);
                if (f_new <= f0 - 1e-4 * t * slope) {
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if (!improved) break;
            params -= t * gradient;
            step = std::min(2.0 * t, 16.0);
            const double gain = f0 - f_new;
            f0 = f_new;
            outcome.history.push_back(f0);
            if (gain < config.tol) break;
        }
        outcome.params = std::move(params);
        outcome.value = f0;
        outcomes.push_back(std::move(outcome));
    }

    auto best = std::min_element(
        outcomes.begin(), outcomes.end(),
        [](const StartOutcome& a, const StartOutcome& b) { return a.value < b.value; });
    if (!std::isfinite(best->value)) {
        throw NumericalError("full_ree: every start diverged despite the support floor");
    }

    FullReeResult result;
    result.ansatz = unpack(best->params, layout);
    result.iterations = best->iterations;
    result.evaluations = evaluations;
    result.descent_history = std::move(best->history);
    int corroborating = 0;
    for (const StartOutcome& outcome : outcomes) {
        result.start_spread = std::max(result.start_spread, outcome.value - best->value);
        if (outcome.value - best->value <= kStartAgreementTol) ++corroborating;
    }
    result.converged = corroborating >= 2;

    result.optimal_sigma =
        make_density_operator(assemble(result.ansatz), embedded.full.basis_labels);
    result.fraction = doubly_excited_fraction(result.optimal_sigma);

    // Remove the white-noise floor for the reported value when the optimal
    // sigma's support covers the target; otherwise keep the floored value.
    const double unfloored = relative_entropy(embedded.full, result.optimal_sigma);
    result.value = is_infinite_divergence(unfloored) ? best->value : unfloored;
    return result;
}

std::optional<double> doubly_excited_fraction(const DensityOperator& full_state) {
    double single = 0.0;
    double multi = 0.0;
    for (int i = 0; i < full_state.dim(); ++i) {
        const std::string& label = full_state.basis_labels[i];
        const long excitations = std::count(label.begin(), label.end(), 'e');
        const double population = full_state.entries(i, i).real();
        if (excitations == 1) single += population;
        if (excitations >= 2) multi += population;
    }
    if (single <= kVanishingPopulation) return std::nullopt;
    return multi / single;
}

}  // namespace fmoqc
