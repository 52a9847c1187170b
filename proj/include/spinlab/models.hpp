// models.hpp - interactions (maps from vertex subsets to local Hermitian terms),
// the named Hamiltonians, the weighted interaction norm and assembly.

#pragma once

#include "spinlab/core.hpp"
#include "spinlab/hilbert.hpp"
#include "spinlab/lattice.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spinlab {

/// Phi(X) for one support X (sorted ascending; matrix in that site order).
struct InteractionTerm {
    std::vector<Vertex> support;
    Matrix matrix;
};

class Interaction {
public:
    Interaction() = default;

    Interaction(std::string model, std::map<std::string, double> parameters, std::vector<InteractionTerm> terms)
        : model_(std::move(model)), parameters_(std::move(parameters)), terms_(std::move(terms)) {
        for (const auto& t : terms_) {
            if (t.support.empty()) throw DomainError(model_ + ": interaction term with empty support");
            if (!std::is_sorted(t.support.begin(), t.support.end()) ||
                std::adjacent_find(t.support.begin(), t.support.end()) != t.support.end()) {
                throw DomainError(model_ + ": term support must be strictly increasing");
            }
            if (t.matrix.rows() != t.matrix.cols()) throw DomainError(model_ + ": term matrix must be square");
            const double defect = (t.matrix - t.matrix.adjoint()).cwiseAbs().maxCoeff();
            if (defect >= kHermitianTol) {
                throw DomainError(model_ + ": non-Hermitian term (|Phi - Phi^*| = " + std::to_string(defect) + ")");
            }
        }
    }

    const std::string& model() const noexcept { return model_; }
    const std::map<std::string, double>& parameters() const noexcept { return parameters_; }
    const std::vector<InteractionTerm>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

    Interaction scaled(double c) const {
        auto t = terms_;
        for (auto& term : t) term.matrix *= c;
        return Interaction(model_, parameters_, std::move(t));
    }

    /// Union of the term lists (H_a + H_b).
    friend Interaction operator+(const Interaction& a, const Interaction& b) {
        auto t = a.terms_;
        t.insert(t.end(), b.terms_.begin(), b.terms_.end());
        auto p = a.parameters_;
        for (const auto& [k, v] : b.parameters_) p.emplace(b.model_ + "." + k, v);
        return Interaction(a.model_ + "+" + b.model_, std::move(p), std::move(t));
    }

    /// Term indices in canonical order: by support, then lexicographically by matrix entries.
    std::vector<std::size_t> canonical_order() const {
        std::vector<std::size_t> idx(terms_.size());
        std::iota(idx.begin(), idx.end(), 0);
        auto entries_less = [](const Matrix& a, const Matrix& b) {
            if (a.size() != b.size()) return a.size() < b.size();
            for (Eigen::Index i = 0; i < a.size(); ++i) {
                const cplx x = a.data()[i], y = b.data()[i];
                if (x.real() != y.real()) return x.real() < y.real();
                if (x.imag() != y.imag()) return x.imag() < y.imag();
            }
            return false;
        };
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
            const auto& a = terms_[i];
            const auto& b = terms_[j];
            if (a.support != b.support) return a.support < b.support;
            return entries_less(a.matrix, b.matrix);
        });
        return idx;
    }

    /// Terms as single-factor product terms, canonical order.
    std::vector<ProductTerm> product_terms() const {
        std::vector<ProductTerm> out;
        out.reserve(terms_.size());
        for (auto i : canonical_order()) out.push_back(ProductTerm{1.0, {LocalFactor{terms_[i].support, terms_[i].matrix}}});
        return out;
    }

private:
    std::string model_ = "empty";
    std::map<std::string, double> parameters_;
    std::vector<InteractionTerm> terms_;
};

// ------------------------------------------------------------ parameters

enum class XxzBoundary { OpenWithField, Periodic };

/// Spin-1/2 XXZ chain parameters; Delta = (q + 1/q)/2 with q in (0,1).
struct XxzParams {
    int L = 2;
    double Delta = 1.25;
    double J = 1.0;
    double q = 0.5;
    double A_Delta = 0.3;
    XxzBoundary boundary = XxzBoundary::OpenWithField;

    static XxzParams from_delta(int L, double Delta, double J = 1.0, XxzBoundary b = XxzBoundary::OpenWithField) {
        if (!(Delta > 1.0) || !std::isfinite(Delta)) throw DomainError("xxz: Delta must be > 1");
        return make(L, Delta, Delta - std::sqrt(Delta * Delta - 1.0), J, b);
    }

    static XxzParams from_q(int L, double q, double J = 1.0, XxzBoundary b = XxzBoundary::OpenWithField) {
        if (!(q > 0.0 && q < 1.0)) throw DomainError("xxz: q must lie in (0,1)");
        return make(L, 0.5 * (q + 1.0 / q), q, J, b);
    }

private:
    static XxzParams make(int L, double Delta, double q, double J, XxzBoundary b) {
        if (L < 2) throw DomainError("xxz: need L >= 2");
        if (b == XxzBoundary::Periodic && L < 3) throw DomainError("xxz: periodic chain needs L >= 3");
        if (!(J > 0.0)) throw DomainError("xxz: J must be > 0");
        XxzParams p;
        p.L = L;
        p.Delta = Delta;
        p.q = q;
        p.J = J;
        p.A_Delta = 0.5 * std::sqrt(1.0 - 1.0 / (Delta * Delta));
        p.boundary = b;
        return p;
    }
};

// ------------------------------------------------------------ local pieces

/// S_x . S_y on two sites of the given spins (x more significant).
inline Matrix spin_dot(HalfInteger sx, HalfInteger sy) {
    auto a = spin_matrices(sx);
    auto b = spin_matrices(sy);
    return kron(a.S1, b.S1) + kron(a.S2, b.S2) + kron(a.S3, b.S3);
}

/// AKLT bond term (1/2)S.S' + (1/6)(S.S')^2 + 1/3 on two spin-1 sites.
inline Matrix aklt_bond() {
    const Matrix d = spin_dot(half(2), half(2));
    return 0.5 * d + (1.0 / 6.0) * d * d + (1.0 / 3.0) * Matrix::Identity(9, 9);
}

// ------------------------------------------------------------ builders

/// H = -sum_edges J_xy S_x . S_y (J > 0 ferromagnetic).
inline Interaction heisenberg(const SpinGraph& g) {
    std::vector<InteractionTerm> terms;
    for (const auto& e : g.edges()) {
        auto [x, y] = std::minmax(e.x, e.y);
        terms.push_back({{x, y}, -e.weight * spin_dot(g.spin(x), g.spin(y))});
    }
    return Interaction("heisenberg", {}, std::move(terms));
}

inline SpinGraph aklt_graph(int L, bool periodic) {
    return periodic ? ring_graph(L, half(2)) : path_graph(L, half(2));
}

/// Spin-1 AKLT chain; every bond term is the projector onto total bond spin 2.
inline Interaction aklt(int L, bool periodic = false) {
    if (L < 2) throw DomainError("aklt: need L >= 2");
    if (periodic && L < 3) throw DomainError("aklt: periodic chain needs L >= 3");
    const Matrix P = aklt_bond();
    std::vector<InteractionTerm> terms;
    for (int x = 0; x + 1 < L; ++x) terms.push_back({{x, x + 1}, P});
    if (periodic) terms.push_back({{0, L - 1}, P});  // symmetric bond: site order irrelevant
    return Interaction(periodic ? "aklt_periodic" : "aklt", {{"L", L}}, std::move(terms));
}

inline SpinGraph xxz_graph(const XxzParams& p) {
    return p.boundary == XxzBoundary::Periodic ? ring_graph(p.L, half(1), p.J) : path_graph(p.L, half(1), p.J);
}

/// -J sum_x [Delta^{-1}(S1 S1 + S2 S2) + (S3 S3 - 1/4)], plus -A(Delta)(S3_L - S3_1)
/// on the open chain; the periodic variant closes the ring and has no field.
inline Interaction xxz(const XxzParams& p) {
    if (!(p.Delta > 1.0)) throw DomainError("xxz: Delta must be > 1");
    const auto s = spin_matrices(half(1));
    const Matrix bond = -p.J * ((kron(s.S1, s.S1) + kron(s.S2, s.S2)) / p.Delta + kron(s.S3, s.S3) -
                                0.25 * Matrix::Identity(4, 4));
    std::vector<InteractionTerm> terms;
    for (int x = 0; x + 1 < p.L; ++x) terms.push_back({{x, x + 1}, bond});
    const bool periodic = p.boundary == XxzBoundary::Periodic;
    if (periodic) {
        terms.push_back({{0, p.L - 1}, bond});
    } else {
        terms.push_back({{0}, p.A_Delta * s.S3});
        terms.push_back({{p.L - 1}, -p.A_Delta * s.S3});
    }
    return Interaction(periodic ? "xxz_periodic" : "xxz_open",
                       {{"L", p.L}, {"Delta", p.Delta}, {"J", p.J}, {"q", p.q}, {"A_Delta", p.A_Delta}},
                       std::move(terms));
}

/// Reorders the tensor factors of `m` (listed order `sites`) into ascending site order.
inline InteractionTerm canonical_term(const SpinSpace& space, std::vector<Vertex> sites, const Matrix& m) {
    const std::size_t k = sites.size();
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return sites[a] < sites[b]; });
    std::vector<int> dims(k);
    Eigen::Index total = 1;
    for (std::size_t i = 0; i < k; ++i) {
        if (sites[i] < 0 || sites[i] >= space.num_sites()) throw DomainError("custom: unknown site " + std::to_string(sites[i]));
        dims[i] = space.site_dim(sites[i]);
        total *= dims[i];
    }
    if (m.rows() != total || m.cols() != total) throw DomainError("custom: term matrix does not match its support dimension");
    auto old_strides = [&] {
        std::vector<Eigen::Index> st(k, 1);
        for (std::size_t i = k; i-- > 1;) st[i - 1] = st[i] * dims[i];
        return st;
    }();
    std::vector<Eigen::Index> new_strides(k, 1);
    for (std::size_t i = k; i-- > 1;) new_strides[i - 1] = new_strides[i] * dims[perm[i]];
    // map new index -> old index
    std::vector<Eigen::Index> to_old(static_cast<std::size_t>(total));
    for (Eigen::Index n = 0; n < total; ++n) {
        Eigen::Index old = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const Eigen::Index digit = (n / new_strides[i]) % dims[perm[i]];
            old += digit * old_strides[perm[i]];
        }
        to_old[static_cast<std::size_t>(n)] = old;
    }
    Matrix out(total, total);
    for (Eigen::Index r = 0; r < total; ++r)
        for (Eigen::Index c = 0; c < total; ++c) out(r, c) = m(to_old[r], to_old[c]);
    std::vector<Vertex> sorted(k);
    for (std::size_t i = 0; i < k; ++i) sorted[i] = sites[perm[i]];
    return {std::move(sorted), std::move(out)};
}

/// Verbatim user terms (site order arbitrary; canonicalized against `space`).
inline Interaction custom(const std::vector<std::pair<std::vector<Vertex>, Matrix>>& terms, const SpinSpace& space,
                          std::string name = "custom") {
    std::vector<InteractionTerm> out;
    for (const auto& [sites, m] : terms) {
        const double defect = m.rows() == m.cols() ? (m - m.adjoint()).cwiseAbs().maxCoeff() : 1.0;
        if (defect >= kHermitianTol) throw DomainError(name + ": non-Hermitian term");
        out.push_back(canonical_term(space, sites, m));
    }
    return Interaction(std::move(name), {}, std::move(out));
}

/// Phi translated along a chain: Phi_x acts on sites x..x+r (r+1 = number of sites in `phi`).
/// Periodic chains wrap around; open chains keep only fully contained translates.
inline Interaction translated_family(const Matrix& phi, int range_sites, int L, bool periodic, const SpinSpace& space,
                                     std::string name = "translated") {
    if (range_sites < 1 || range_sites > L) throw DomainError("translated_family: bad range");
    std::vector<std::pair<std::vector<Vertex>, Matrix>> terms;
    const int count = periodic ? L : L - range_sites + 1;
    for (int x = 0; x < count; ++x) {
        std::vector<Vertex> sites;
        for (int k = 0; k < range_sites; ++k) sites.push_back((x + k) % L);
        terms.emplace_back(std::move(sites), phi);
    }
    return custom(terms, space, std::move(name));
}

// ------------------------------------------------------------ norms

/// Largest singular value.
inline double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() < kHermitianTol) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

/// sup_x sum_{X containing x} |X| ||Phi(X)|| N^{2|X|} e^{lambda D(X)}, where terms
/// sharing a support are summed before taking the norm.
inline double lambda_norm(const Interaction& phi, double lambda, const SpinGraph& g) {
    if (!(lambda > 0.0)) throw DomainError("lambda_norm: lambda must be > 0");
    std::map<std::vector<Vertex>, Matrix> grouped;
    for (const auto& t : phi.terms()) {
        auto [it, inserted] = grouped.try_emplace(t.support, t.matrix);
        if (!inserted) it->second += t.matrix;
    }
    const double N = g.max_site_dim();
    std::vector<double> per_site(g.num_vertices(), 0.0);
    for (const auto& [X, m] : grouped) {
        for (Vertex x : X)
            if (x < 0 || x >= g.num_vertices()) throw DomainError("lambda_norm: support outside graph");
        const auto D = diameter(g, X);
        if (!D) throw DomainError("lambda_norm: support has infinite diameter (disconnected)");
        const double size = static_cast<double>(X.size());
        const double w = size * operator_norm(m) * std::pow(N, 2.0 * size) * std::exp(lambda * *D);
        for (Vertex x : X) per_site[x] += w;
    }
    return per_site.empty() ? 0.0 : *std::max_element(per_site.begin(), per_site.end());
}

// ------------------------------------------------------------ assembly

/// H = sum_X Phi(X) on the full space, or restricted to a sector it preserves.
inline SparseOperator assemble(const Interaction& phi, const SpinSpace& space, const SectorBasis* sector = nullptr) {
    for (const auto& t : phi.terms())
        for (Vertex x : t.support)
            if (x < 0 || x >= space.num_sites())
                throw DomainError("assemble: term support references site " + std::to_string(x) + " outside the space");
    const auto terms = phi.product_terms();
    return assemble_terms(space, terms, sector, true);
}

inline SparseOperator assemble(const Interaction& phi, const SpinSpace& space, const SectorBasis& sector) {
    return assemble(phi, space, &sector);
}

}  // namespace spinlab
