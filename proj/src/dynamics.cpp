#include "fmoqc/dynamics.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace fmoqc {

namespace {

constexpr double kMaxInternalStepPs = 1e-3;  // 1 fs
constexpr double kTraceDriftTol = 1e-7;
// Failure bounds for emitted trajectory states.  These are looser than the
// construction-time invariants: integration error along a full trajectory is
// round-off scale in practice, but only drift past these bounds aborts a run.
constexpr double kTrajectoryCoherenceTol = 1e-8;
constexpr double kTrajectoryPsdTol = 1e-8;
constexpr double kTrajectoryTraceTol = 1e-8;

bool is_site(int i) { return i >= 1 && i <= 7; }

}  // namespace

std::vector<std::string> fmo_basis_labels() {
    return {"G", "1", "2", "3", "4", "5", "6", "7", "S"};
}

void validate_fmo_state(const FmoState& state, double coherence_tol, double trace_tol,
                        double psd_tol) {
    const Matrix& m = state.rho.entries;
    if (m.rows() != kFmoDim || m.cols() != kFmoDim) {
        throw ValidationError("FmoState: dimension must be 9");
    }
    if (state.rho.basis_labels != fmo_basis_labels()) {
        throw ValidationError("FmoState: basis labels must be (G, 1..7, S)");
    }
    validate_hermitian(m, "FmoState");
    const double trace_dev = std::abs(m.trace() - Complex(1.0, 0.0));
    if (trace_dev > trace_tol) {
        std::ostringstream os;
        os << "FmoState: |Tr - 1| = " << trace_dev;
        throw ValidationError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -psd_tol) {
        std::ostringstream os;
        os << "FmoState: min eigenvalue " << solver.eigenvalues().minCoeff();
        throw ValidationError(os.str());
    }
    for (int i = 1; i <= 7; ++i) {
        if (std::abs(m(i, 0)) > coherence_tol || std::abs(m(i, 8)) > coherence_tol) {
            throw ValidationError("FmoState: forbidden ground/sink coherence at site " +
                                  std::to_string(i));
        }
    }
    if (std::abs(m(0, 8)) > coherence_tol) {
        throw ValidationError("FmoState: forbidden G-S coherence");
    }
}

FmoState make_fmo_state(Matrix entries, double coherence_tol) {
    FmoState state;
    state.rho.entries = std::move(entries);
    state.rho.basis_labels = fmo_basis_labels();
    validate_fmo_state(state, coherence_tol);
    return state;
}

FmoState initial_site_state(int site) {
    if (!is_site(site)) {
        throw ValidationError("initial_site_state: site must be in 1..7");
    }
    Matrix m = Matrix::Zero(kFmoDim, kFmoDim);
    m(site, site) = 1.0;
    return make_fmo_state(std::move(m));
}

FmoState initial_mixture_state() {
    Matrix m = Matrix::Zero(kFmoDim, kFmoDim);
    m(1, 1) = 0.5;
    m(6, 6) = 0.5;
    return make_fmo_state(std::move(m));
}

FmoState load_custom_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("load_custom_state: cannot open '" + path + "'");
    }
    Matrix m = Matrix::Zero(kFmoDim, kFmoDim);
    for (int i = 0; i < kFmoDim; ++i) {
        std::string line;
        if (!std::getline(in, line)) {
            throw ValidationError("load_custom_state: expected 9 rows");
        }
        std::istringstream row(line);
        std::vector<double> values;
        double v;
        while (row >> v) values.push_back(v);
        if (values.size() == kFmoDim) {
            for (int j = 0; j < kFmoDim; ++j) m(i, j) = values[j];
        } else if (values.size() == 2 * kFmoDim) {
            for (int j = 0; j < kFmoDim; ++j) m(i, j) = Complex(values[2 * j], values[2 * j + 1]);
        } else {
            throw ValidationError("load_custom_state: row must hold 9 reals or 9 re/im pairs");
        }
    }
    return make_fmo_state(std::move(m));
}

Matrix full_hamiltonian(const FmoHamiltonian& h) {
    Matrix full = Matrix::Zero(kFmoDim, kFmoDim);
    for (int m = 0; m < kNumSites; ++m) {
        full(m + 1, m + 1) = h.site_energies[m];
        for (int n = 0; n < kNumSites; ++n) {
            if (m != n) full(m + 1, n + 1) = h.couplings(m, n);
        }
    }
    return full;
}

Matrix liouvillian(const FmoHamiltonian& h, const DecoherenceRates& rates) {
    const Matrix hf = full_hamiltonian(h);
    const Matrix id = Matrix::Identity(kFmoDim, kFmoDim);
    const Complex im(0.0, 1.0);

    Matrix l = Matrix::Zero(kFmoDim * kFmoDim, kFmoDim * kFmoDim);
    l -= im * (Eigen::kroneckerProduct(id, hf) - Eigen::kroneckerProduct(hf.transpose(), id));

    auto add_dissipator = [&l, &id](const Matrix& a) {
        const Matrix ada = a.adjoint() * a;
        l += Eigen::kroneckerProduct(a.conjugate(), a);
        l -= 0.5 * (Eigen::kroneckerProduct(id, ada) +
                    Eigen::kroneckerProduct(ada.transpose(), id));
    };

    for (int m = 1; m <= 7; ++m) {
        Matrix a = Matrix::Zero(kFmoDim, kFmoDim);
        a(0, m) = std::sqrt(2.0 * rates.recomb_rate);
        add_dissipator(a);
        Matrix d = Matrix::Zero(kFmoDim, kFmoDim);
        d(m, m) = std::sqrt(2.0 * rates.dephasing_rate);
        add_dissipator(d);
    }
    Matrix sink = Matrix::Zero(kFmoDim, kFmoDim);
    sink(8, 3) = std::sqrt(2.0 * rates.sink_rate);
    add_dissipator(sink);
    return l;
}

void apply_liouvillian(const Matrix& h_full, const DecoherenceRates& rates, const Matrix& rho,
                       Matrix& out) {
    const Complex im(0.0, 1.0);
    out.noalias() = -im * (h_full * rho - rho * h_full);

    const double g_rec = rates.recomb_rate;
    const double g_sink = rates.sink_rate;
    const double g_phi = rates.dephasing_rate;

    // Gain terms: recombination feeds G, the sink feeds S.
    double site_population = 0.0;
    for (int m = 1; m <= 7; ++m) site_population += rho(m, m).real();
    out(0, 0) += 2.0 * g_rec * site_population;
    out(8, 8) += 2.0 * g_sink * rho(3, 3).real();

    // Loss terms: -{A†A, rho}/2 summed over channels.  A†A is diagonal for
    // every jump operator, so each entry decays by the mean of its row/column
    // rates: r_i = 2*g_rec + 2*g_phi on sites (plus 2*g_sink on site 3), 0 on
    // G and S.  Dephasing cancels on site diagonals (gain 2*g_phi*rho_mm).
    std::array<double, kFmoDim> loss{};
    for (int i = 0; i < kFmoDim; ++i) {
        if (is_site(i)) loss[i] = 2.0 * g_rec + 2.0 * g_phi + (i == 3 ? 2.0 * g_sink : 0.0);
    }
    for (int i = 0; i < kFmoDim; ++i) {
        for (int j = 0; j < kFmoDim; ++j) {
            out(i, j) -= 0.5 * (loss[i] + loss[j]) * rho(i, j);
        }
    }
    // Dephasing gain restores the site diagonals.
    for (int m = 1; m <= 7; ++m) out(m, m) += 2.0 * g_phi * rho(m, m);
}

namespace {

FmoState emit_state(Matrix rho) {
    // RK4/expm round-off leaves ~1e-15 asymmetry; project back to Hermitian
    // before validating against the trajectory tolerances.
    Matrix sym = 0.5 * (rho + rho.adjoint());
    FmoState state;
    state.rho.entries = std::move(sym);
    state.rho.basis_labels = fmo_basis_labels();
    const double trace_dev = std::abs(state.rho.entries.trace() - Complex(1.0, 0.0));
    if (trace_dev > kTraceDriftTol) {
        std::ostringstream os;
        os << "evolve: trace drift " << trace_dev << " exceeds " << kTraceDriftTol
           << "; reduce the integration step";
        throw NumericalError(os.str());
    }
    try {
        validate_fmo_state(state, kTrajectoryCoherenceTol, kTrajectoryTraceTol,
                           kTrajectoryPsdTol);
    } catch (const ValidationError& e) {
        throw NumericalError(std::string("evolve: emitted state invalid: ") + e.what());
    }
    return state;
}

}  // namespace

Trajectory evolve(const FmoState& rho0, const FmoHamiltonian& h, const DecoherenceRates& rates,
                  const std::vector<double>& t_grid, EvolveMethod method) {
    if (t_grid.empty() || t_grid.front() != 0.0) {
        throw ValidationError("evolve: time grid must start at 0");
    }
    for (size_t k = 1; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > t_grid[k - 1])) {
            throw ValidationError("evolve: time grid must be strictly increasing");
        }
    }
    validate_fmo_state(rho0);

    Trajectory traj;
    traj.t_ps = t_grid;
    traj.states.reserve(t_grid.size());
    traj.states.push_back(rho0);

    const Matrix hf = full_hamiltonian(h);

    if (method == EvolveMethod::kRk4) {
        Matrix rho = rho0.rho.entries;
        Matrix k1(kFmoDim, kFmoDim), k2(kFmoDim, kFmoDim), k3(kFmoDim, kFmoDim),
            k4(kFmoDim, kFmoDim), scratch(kFmoDim, kFmoDim);
        for (size_t seg = 1; seg < t_grid.size(); ++seg) {
            const double dt = t_grid[seg] - t_grid[seg - 1];
            const int n_sub = std::max(1, static_cast<int>(std::ceil(dt / kMaxInternalStepPs)));
            const double hstep = dt / n_sub;
            for (int s = 0; s < n_sub; ++s) {
                apply_liouvillian(hf, rates, rho, k1);
                scratch = rho + 0.5 * hstep * k1;
                apply_liouvillian(hf, rates, scratch, k2);
                scratch = rho + 0.5 * hstep * k2;
                apply_liouvillian(hf, rates, scratch, k3);
                scratch = rho + hstep * k3;
                apply_liouvillian(hf, rates, scratch, k4);
                rho += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            traj.states.push_back(emit_state(rho));
        }
    } else {
        const Matrix l = liouvillian(h, rates);
        Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho0.rho.entries.data(),
                                                                kFmoDim * kFmoDim);
        for (size_t seg = 1; seg < t_grid.size(); ++seg) {
            const double dt = t_grid[seg] - t_grid[seg - 1];
            const Matrix propagator = (l * dt).exp();
            v = propagator * v;
            Matrix rho = Eigen::Map<const Matrix>(v.data(), kFmoDim, kFmoDim);
            traj.states.push_back(emit_state(std::move(rho)));
        }
    }
    return traj;
}

}  // namespace fmoqc
