#include "fmoqc/cut.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fmoqc {

namespace {

constexpr double kEmbeddingSupportTol = 1e-12;

std::vector<int> parse_site_list(const std::string& text, const std::string& context) {
    std::vector<int> sites;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            size_t used = 0;
            const int site = std::stoi(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            sites.push_back(site);
        } catch (const std::exception&) {
            throw ValidationError("parse_cut: bad site token '" + token + "' in " + context);
        }
    }
    if (sites.empty()) {
        throw ValidationError("parse_cut: empty site list in " + context);
    }
    return sites;
}

}  // namespace

void validate_cut(const BipartiteCut& cut) {
    if (cut.a_sites.empty() || cut.b_sites.empty()) {
        throw ValidationError("BipartiteCut: both sides must be non-empty");
    }
    auto check_side = [](const std::vector<int>& sites, const char* side) {
        for (size_t i = 0; i < sites.size(); ++i) {
            if (sites[i] < 1 || sites[i] > 7) {
                throw ValidationError(std::string("BipartiteCut: side ") + side +
                                      " has a site outside 1..7");
            }
            if (i > 0 && sites[i] <= sites[i - 1]) {
                throw ValidationError(std::string("BipartiteCut: side ") + side +
                                      " must be strictly ascending");
            }
        }
    };
    check_side(cut.a_sites, "A");
    check_side(cut.b_sites, "B");
    for (int site : cut.a_sites) {
        if (std::find(cut.b_sites.begin(), cut.b_sites.end(), site) != cut.b_sites.end()) {
            throw ValidationError("BipartiteCut: sides overlap at site " + std::to_string(site));
        }
    }
}

BipartiteCut make_cut(std::vector<int> a_sites, std::vector<int> b_sites) {
    BipartiteCut cut;
    cut.a_sites = std::move(a_sites);
    cut.b_sites = std::move(b_sites);
    std::sort(cut.a_sites.begin(), cut.a_sites.end());
    std::sort(cut.b_sites.begin(), cut.b_sites.end());
    validate_cut(cut);
    return cut;
}

BipartiteCut parse_cut(const std::string& text) {
    std::vector<int> a, b;
    bool have_a = false, have_b = false;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ';')) {
        if (part.rfind("A=", 0) == 0) {
            a = parse_site_list(part.substr(2), "A");
            have_a = true;
        } else if (part.rfind("B=", 0) == 0) {
            b = parse_site_list(part.substr(2), "B");
            have_b = true;
        } else {
            throw ValidationError("parse_cut: expected 'A=...' or 'B=...' segment, got '" +
                                  part + "'");
        }
    }
    if (!have_a || !have_b) {
        throw ValidationError("parse_cut: cut string must define both A and B");
    }
    return make_cut(std::move(a), std::move(b));
}

std::string cut_to_string(const BipartiteCut& cut) {
    std::ostringstream os;
    os << "A=";
    for (size_t i = 0; i < cut.a_sites.size(); ++i) {
        if (i) os << ',';
        os << cut.a_sites[i];
    }
    os << ";B=";
    for (size_t i = 0; i < cut.b_sites.size(); ++i) {
        if (i) os << ',';
        os << cut.b_sites[i];
    }
    return os.str();
}

std::vector<std::string> cut_basis_labels(const BipartiteCut& cut) {
    std::vector<std::string> labels;
    labels.reserve(cut.dim());
    labels.push_back("G");
    for (int site : cut.a_sites) labels.push_back("A" + std::to_string(site));
    for (int site : cut.b_sites) labels.push_back("B" + std::to_string(site));
    return labels;
}

void validate_cut_state(const CutState& chi) {
    validate_cut(chi.cut);
    if (chi.restricted.dim() != chi.cut.dim()) {
        throw ValidationError("CutState: dimension does not match cut");
    }
    validate_density_operator(chi.restricted);
    for (int i = 1; i < chi.restricted.dim(); ++i) {
        if (std::abs(chi.restricted.entries(0, i)) > kCoherenceTol) {
            throw ValidationError("CutState: ground-excited coherence above tolerance");
        }
    }
}

CutState make_cut_state(Matrix entries, BipartiteCut cut) {
    CutState chi;
    chi.restricted.entries = std::move(entries);
    chi.restricted.basis_labels = cut_basis_labels(cut);
    chi.cut = std::move(cut);
    validate_cut_state(chi);
    return chi;
}

CutState reduce_to_cut(const FmoState& rho, const BipartiteCut& cut) {
    validate_cut(cut);
    const Matrix& m = rho.rho.entries;

    std::vector<int> kept;  // site indices in cut order (A ascending, B ascending)
    kept.reserve(cut.a_size() + cut.b_size());
    for (int site : cut.a_sites) kept.push_back(site);
    for (int site : cut.b_sites) kept.push_back(site);

    const int dim = cut.dim();
    Matrix out = Matrix::Zero(dim, dim);
    double ground = m(0, 0).real() + m(8, 8).real();
    for (int site = 1; site <= 7; ++site) {
        if (std::find(kept.begin(), kept.end(), site) == kept.end()) {
            ground += m(site, site).real();
        }
    }
    out(0, 0) = ground;
    for (size_t i = 0; i < kept.size(); ++i) {
        for (size_t j = 0; j < kept.size(); ++j) {
            out(1 + i, 1 + j) = m(kept[i], kept[j]);
        }
        // Ground-excited coherences vanish under these dynamics; the reduction
        // writes exact zeros so downstream block algebra is lossless.
        out(0, 1 + i) = 0.0;
        out(1 + i, 0) = 0.0;
    }
    return make_cut_state(std::move(out), cut);
}

BlockDecomposition block_decompose(const CutState& chi) {
    validate_cut_state(chi);
    const Matrix& m = chi.restricted.entries;
    const int p = chi.cut.a_size();
    const int q = chi.cut.b_size();
    BlockDecomposition blocks;
    blocks.alpha = m(0, 0).real();
    blocks.rho_e_a = m.block(1, 1, p, p);
    blocks.rho_e_b = m.block(1 + p, 1 + p, q, q);
    blocks.tau = m.block(1, 1 + p, p, q);
    return blocks;
}

CutState reassemble(const BlockDecomposition& blocks, const BipartiteCut& cut) {
    const int p = cut.a_size();
    const int q = cut.b_size();
    Matrix m = Matrix::Zero(cut.dim(), cut.dim());
    m(0, 0) = blocks.alpha;
    m.block(1, 1, p, p) = blocks.rho_e_a;
    m.block(1 + p, 1 + p, q, q) = blocks.rho_e_b;
    m.block(1, 1 + p, p, q) = blocks.tau;
    m.block(1 + p, 1, q, p) = blocks.tau.adjoint();
    return make_cut_state(std::move(m), cut);
}

CutState delta_bar(const CutState& chi) {
    BlockDecomposition blocks = block_decompose(chi);
    blocks.tau.setZero();
    return reassemble(blocks, chi.cut);
}

EmbeddedCutState embed_full(const CutState& chi) {
    validate_cut_state(chi);
    const int p = chi.cut.a_size();
    const int q = chi.cut.b_size();
    const int n = p + q;
    const int full_dim = 1 << n;

    // Basis index of each cut-basis vector in the qubit space: all-ground for
    // G_AB, a single 1-bit for each site factor (factor f -> bit n-1-f).
    std::vector<int> position(chi.cut.dim());
    position[0] = 0;
    for (int f = 0; f < n; ++f) position[1 + f] = 1 << (n - 1 - f);

    Matrix full = Matrix::Zero(full_dim, full_dim);
    for (int i = 0; i < chi.cut.dim(); ++i) {
        for (int j = 0; j < chi.cut.dim(); ++j) {
            full(position[i], position[j]) = chi.restricted.entries(i, j);
        }
    }

    std::vector<std::string> labels(full_dim);
    for (int idx = 0; idx < full_dim; ++idx) {
        std::string s(n, 'g');
        for (int f = 0; f < n; ++f) {
            if ((idx >> (n - 1 - f)) & 1) s[f] = 'e';
        }
        labels[idx] = s;
    }

    EmbeddedCutState embedded;
    embedded.full.entries = std::move(full);
    embedded.full.basis_labels = std::move(labels);
    embedded.cut = chi.cut;
    validate_density_operator(embedded.full);
    return embedded;
}

CutState project_to_cut(const EmbeddedCutState& embedded) {
    const int p = embedded.cut.a_size();
    const int q = embedded.cut.b_size();
    const int n = p + q;
    std::vector<int> position(embedded.cut.dim());
    position[0] = 0;
    for (int f = 0; f < n; ++f) position[1 + f] = 1 << (n - 1 - f);

    double outside = embedded.full.entries.diagonal().real().sum();
    Matrix out = Matrix::Zero(embedded.cut.dim(), embedded.cut.dim());
    for (int i = 0; i < embedded.cut.dim(); ++i) {
        outside -= embedded.full.entries(position[i], position[i]).real();
        for (int j = 0; j < embedded.cut.dim(); ++j) {
            out(i, j) = embedded.full.entries(position[i], position[j]);
        }
    }
    if (std::abs(outside) > kEmbeddingSupportTol) {
        std::ostringstream os;
        os << "project_to_cut: population " << outside
           << " outside the zero/single-excitation span";
        throw ValidationError(os.str());
    }
    return make_cut_state(std::move(out), embedded.cut);
}

Side opposite(Side side) { return side == Side::kA ? Side::kB : Side::kA; }

DensityOperator compress_to_single_excitation(const DensityOperator& rho,
                                              const std::vector<std::string>& site_labels) {
    const int n = static_cast<int>(site_labels.size());
    if (rho.dim() != (1 << n)) {
        throw ValidationError("compress_to_single_excitation: dimension/label mismatch");
    }
    std::vector<int> support;
    support.push_back(0);
    for (int f = 0; f < n; ++f) support.push_back(1 << (n - 1 - f));

    double outside = rho.entries.diagonal().real().sum();
    Matrix out = Matrix::Zero(n + 1, n + 1);
    for (size_t i = 0; i < support.size(); ++i) {
        outside -= rho.entries(support[i], support[i]).real();
        for (size_t j = 0; j < support.size(); ++j) {
            out(i, j) = rho.entries(support[i], support[j]);
        }
    }
    if (std::abs(outside) > kEmbeddingSupportTol) {
        std::ostringstream os;
        os << "compress_to_single_excitation: population " << outside << " outside support";
        throw ValidationError(os.str());
    }
    std::vector<std::string> labels;
    labels.push_back("G");
    for (const auto& site : site_labels) labels.push_back(site);
    DensityOperator result;
    result.entries = std::move(out);
    result.basis_labels = std::move(labels);
    validate_density_operator(result);
    return result;
}

DensityOperator marginal_state(const CutState& chi, Side side) {
    const EmbeddedCutState embedded = embed_full(chi);
    const int p = chi.cut.a_size();
    const int q = chi.cut.b_size();

    std::vector<int> keep;
    std::vector<std::string> site_labels;
    if (side == Side::kA) {
        for (int f = 0; f < p; ++f) keep.push_back(f);
        for (int site : chi.cut.a_sites) site_labels.push_back("A" + std::to_string(site));
    } else {
        for (int f = p; f < p + q; ++f) keep.push_back(f);
        for (int site : chi.cut.b_sites) site_labels.push_back("B" + std::to_string(site));
    }
    const DensityOperator traced = partial_trace_full(embedded.full, keep);
    return compress_to_single_excitation(traced, site_labels);
}

}  // namespace fmoqc
