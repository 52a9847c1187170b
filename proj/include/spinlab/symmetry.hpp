// symmetry.hpp - SU(2) and SU_q(2) total operators and Casimirs, total-spin
// classification of eigenstates, the E(H,S) table and level-ordering verdicts.

#pragma once

#include "spinlab/core.hpp"
#include "spinlab/hilbert.hpp"
#include "spinlab/lattice.hpp"
#include "spinlab/models.hpp"
#include "spinlab/parallel.hpp"
#include "spinlab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spinlab {

/// Frobenius-norm relative commutator ||[A,B]|| / (||A|| ||B||); 0 if either vanishes.
inline double relative_commutator(const SparseOperator& a, const SparseOperator& b) {
    const double na = a.frobenius_norm(), nb = b.frobenius_norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return commutator(a, b).frobenius_norm() / (na * nb);
}

// ------------------------------------------------------------ SU(2)

struct Su2Totals {
    SparseOperator S1, S2, S3, C;
};

/// C = sum_x s_x(s_x+1) + 2 sum_{x<y} S_x.S_y as sector-assemblable product terms.
inline std::vector<ProductTerm> su2_casimir_terms(const SpinSpace& space) {
    std::vector<ProductTerm> terms;
    double diagonal = 0.0;
    for (int x = 0; x < space.num_sites(); ++x) {
        const double s = space.site_spin(x).value();
        diagonal += s * (s + 1.0);
    }
    const int n0 = space.site_dim(0);
    terms.push_back({diagonal, {LocalFactor{{0}, Matrix::Identity(n0, n0)}}});
    for (int x = 0; x < space.num_sites(); ++x)
        for (int y = x + 1; y < space.num_sites(); ++y)
            terms.push_back({2.0, {LocalFactor{{x, y}, spin_dot(space.site_spin(x), space.site_spin(y))}}});
    return terms;
}

inline std::vector<ProductTerm> su2_total_terms(const SpinSpace& space, Matrix SpinMatrices::*component) {
    std::vector<ProductTerm> terms;
    for (int x = 0; x < space.num_sites(); ++x)
        terms.push_back({1.0, {LocalFactor{{x}, spin_matrices(space.site_spin(x)).*component}}});
    return terms;
}

inline Su2Totals su2_totals(const SpinSpace& space) {
    Su2Totals t;
    t.S1 = assemble_terms(space, su2_total_terms(space, &SpinMatrices::S1), nullptr, true);
    t.S2 = assemble_terms(space, su2_total_terms(space, &SpinMatrices::S2), nullptr, true);
    t.S3 = assemble_terms(space, su2_total_terms(space, &SpinMatrices::S3), nullptr, true);
    t.C = assemble_terms(space, su2_casimir_terms(space), nullptr, true);
    return t;
}

// ------------------------------------------------------------ SU_q(2)

/// q-deformed generators of the open XXZ chain with boundary fields. With t = diag(q^-1, q):
///   S+ = sum_x 1 x..x S+_x x t_{x+1} x..x t_L,   S- = sum_x t^-1_1 x..x t^-1_{x-1} x S-_x x 1 x..x 1,
///   T = t x..x t,   C_q = S+S- + ((qT)^-1 + qT) / (q^-1 - q)^2.
struct SuqGenerators {
    double q = 0.5;
    int L = 0;
    std::vector<ProductTerm> S3, Splus, Sminus, T, Cq;
};

inline double suq_casimir_value(double q, HalfInteger S) {
    const double e = S.twice() + 1.0;
    const double d = 1.0 / q - q;
    return (std::pow(q, -e) + std::pow(q, e)) / (d * d);
}

inline SuqGenerators suq2_generators(const XxzParams& p) {
    if (!(p.q > 0.0 && p.q < 1.0)) throw DomainError("suq2_generators: q must lie in (0,1)");
    if (p.L < 2) throw DomainError("suq2_generators: L must be >= 2");
    const double q = p.q;
    const auto s = spin_matrices(half(1));
    Matrix t = Matrix::Zero(2, 2), tinv = Matrix::Zero(2, 2);
    t(0, 0) = 1.0 / q;
    t(1, 1) = q;
    tinv(0, 0) = q;
    tinv(1, 1) = 1.0 / q;

    SuqGenerators g;
    g.q = q;
    g.L = p.L;
    for (int x = 0; x < p.L; ++x) {
        g.S3.push_back({1.0, {LocalFactor{{x}, s.S3}}});
        ProductTerm plus{1.0, {LocalFactor{{x}, s.Splus}}};
        for (int y = x + 1; y < p.L; ++y) plus.factors.push_back({{y}, t});
        g.Splus.push_back(std::move(plus));
        ProductTerm minus{1.0, {}};
        for (int y = 0; y < x; ++y) minus.factors.push_back({{y}, tinv});
        minus.factors.push_back({{x}, s.Sminus});
        g.Sminus.push_back(std::move(minus));
    }
    ProductTerm T{1.0, {}}, Tinv{1.0, {}};
    for (int x = 0; x < p.L; ++x) {
        T.factors.push_back({{x}, t});
        Tinv.factors.push_back({{x}, tinv});
    }
    g.T.push_back(T);

    for (const auto& a : g.Splus)
        for (const auto& b : g.Sminus) g.Cq.push_back(multiply(a, b));
    const double d = 1.0 / q - q;
    Tinv.coeff = 1.0 / (q * d * d);
    T.coeff = q / (d * d);
    g.Cq.push_back(Tinv);
    g.Cq.push_back(T);
    return g;
}

inline SparseOperator assemble_full(const SpinSpace& space, const std::vector<ProductTerm>& terms, bool hermitian = false) {
    return assemble_terms(space, terms, nullptr, hermitian);
}

// ------------------------------------------------------------ classification

/// Casimir eigenvalue c(S) for a symmetry algebra.
struct CasimirSpec {
    std::string name;
    std::function<double(HalfInteger)> value;
};

inline CasimirSpec su2_casimir() {
    return {"SU(2)", [](HalfInteger S) { return S.value() * (S.value() + 1.0); }};
}

inline CasimirSpec suq2_casimir(double q) {
    return {"SU_q(2)", [q](HalfInteger S) { return suq_casimir_value(q, S); }};
}

struct LabeledLevel {
    double energy = 0.0;
    HalfInteger M;
    HalfInteger S;
    double casimir = 0.0;   // eigenvalue of the restricted Casimir
    double residual = 0.0;  // ||C v - c(S) v|| / max(1, c(S))
};

/// E(H,S) table built from Casimir-labelled eigenstates.
struct SpinResolvedLevels {
    HalfInteger S_max;
    std::vector<LabeledLevel> levels;  // sector order (M descending), ascending energy within a sector
    std::map<HalfInteger, double> min_energy;
    std::map<HalfInteger, double> max_energy;
    std::map<HalfInteger, double> casimir_residuals;  // largest per S
    std::map<HalfInteger, int> multiplet_counts;      // labels S observed in sector M = S
    std::map<HalfInteger, int> expected_counts;       // dim(M=S) - dim(M=S+1)

    /// Total-spin values that occur, from sector dimensions.
    std::vector<HalfInteger> grid() const {
        std::vector<HalfInteger> out;
        for (const auto& [S, n] : expected_counts)
            if (n > 0) out.push_back(S);
        return out;
    }

    double ground_energy() const {
        double e = std::numeric_limits<double>::infinity();
        for (const auto& [S, v] : min_energy) e = std::min(e, v);
        return e;
    }
};

enum class SectorSelection { NonNegative, All, Selected };

struct ClassifyOptions {
    SectorSelection sectors = SectorSelection::NonNegative;
    std::vector<HalfInteger> selected;  // magnetizations, for SectorSelection::Selected
    double degeneracy_tol = 1e-8;
    double residual_tol = 1e-8;
    double imaginary_tol = 1e-8;
    double win_ratio = 1e3;
    double commutator_tol = 1e-10;
    SolverOptions solver;
    int threads = 1;
};

namespace detail {

struct SectorLabels {
    std::vector<LabeledLevel> levels;
};

/// Labels every eigenvector of the sector block Hb by the Casimir block Cb.
inline SectorLabels classify_block(const SparseOperator& Hb, const SparseOperator& Cb, HalfInteger M, HalfInteger S_max,
                                   const CasimirSpec& cas, const ClassifyOptions& opt) {
    SectorLabels out;
    if (Hb.dim() == 0) return out;
    const double comm = relative_commutator(Hb, Cb);
    if (comm > opt.commutator_tol) {
        throw DomainError("classify_total_spin: H does not commute with the Casimir in sector M=" + M.str() +
                          " (relative commutator " + std::to_string(comm) + ")");
    }
    auto rep = full_spectrum(Hb, true, opt.solver);
    const Matrix& V = *rep.eigenvectors;
    const auto& E = rep.eigenvalues;
    const Eigen::Index n = V.cols();

    std::vector<HalfInteger> candidates;
    for (HalfInteger S = abs(M); S <= S_max; S = S + half(2)) candidates.push_back(S);
    std::vector<double> cvals;
    for (auto S : candidates) cvals.push_back(cas.value(S));

    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && E[end] - E[end - 1] <= opt.degeneracy_tol * std::max(1.0, std::abs(E[end]))) ++end;
        const Eigen::Index k = end - start;
        const Matrix Vc = V.middleCols(start, k);
        const Matrix CV = Cb.storage() * Vc;
        const Matrix Cc = Vc.adjoint() * CV;
        Eigen::ComplexEigenSolver<Matrix> ces(Cc, true);
        if (ces.info() != Eigen::Success) throw ClassificationError("classify_total_spin: Casimir eigensolver failed", INFINITY);
        for (Eigen::Index j = 0; j < k; ++j) {
            const cplx c = ces.eigenvalues()(j);
            if (std::abs(c.imag()) > opt.imaginary_tol * std::max(1.0, std::abs(c.real()))) {
                throw ClassificationError("classify_total_spin: complex Casimir eigenvalue " + std::to_string(c.real()) + " + " +
                                              std::to_string(c.imag()) + "i in sector M=" + M.str(),
                                          std::abs(c.imag()));
            }
            std::size_t best = 0;
            double d1 = INFINITY, d2 = INFINITY;
            for (std::size_t i = 0; i < cvals.size(); ++i) {
                const double d = std::abs(c.real() - cvals[i]);
                if (d < d1) {
                    d2 = d1;
                    d1 = d;
                    best = i;
                } else if (d < d2) {
                    d2 = d;
                }
            }
            if (cvals.empty() || (std::isfinite(d2) && d1 * opt.win_ratio > d2)) {
                throw ClassificationError("classify_total_spin: ambiguous Casimir eigenvalue " + std::to_string(c.real()) +
                                              " in sector M=" + M.str(),
                                          d1);
            }
            Vector v = Vc * ces.eigenvectors().col(j);
            v.normalize();
            const double cs = cvals[best];
            const double residual = (Cb.apply(v) - cs * v).norm() / std::max(1.0, std::abs(cs));
            if (residual > opt.residual_tol) {
                throw ClassificationError("classify_total_spin: Casimir residual " + std::to_string(residual) + " for S=" +
                                              candidates[best].str() + " in sector M=" + M.str(),
                                          residual);
            }
            out.levels.push_back({E[start + j], M, candidates[best], c.real(), residual});
        }
        start = end;
    }
    std::stable_sort(out.levels.begin(), out.levels.end(),
                     [](const LabeledLevel& a, const LabeledLevel& b) { return a.energy < b.energy; });
    return out;
}

inline std::vector<HalfInteger> selected_sectors(const SpinSpace& space, const ClassifyOptions& opt) {
    std::vector<HalfInteger> out;
    for (auto M : magnetization_values(space)) {
        if (opt.sectors == SectorSelection::All || (opt.sectors == SectorSelection::NonNegative && M.twice() >= 0)) {
            out.push_back(M);
        }
    }
    if (opt.sectors == SectorSelection::Selected) {
        for (auto M : opt.selected) {
            if (sector_dimension(space, M) == 0) throw EmptySectorError("classify_total_spin: no states with M=" + M.str());
            out.push_back(M);
        }
        std::sort(out.begin(), out.end(), std::greater<>());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
}

inline SpinResolvedLevels merge_labels(const SpinSpace& space, const std::vector<HalfInteger>& sectors,
                                       std::vector<SectorLabels>& parts) {
    SpinResolvedLevels r;
    r.S_max = space.max_magnetization();
    for (HalfInteger S = r.S_max; S.twice() >= 0; S = S - half(2)) {
        const auto count = sector_dimension(space, S) - sector_dimension(space, S + half(2));
        r.expected_counts[S] = static_cast<int>(count);
    }
    for (std::size_t i = 0; i < sectors.size(); ++i) {
        const HalfInteger M = sectors[i];
        int observed = 0;
        for (const auto& lv : parts[i].levels) {
            r.levels.push_back(lv);
            auto [lo, fresh] = r.min_energy.try_emplace(lv.S, lv.energy);
            if (!fresh) lo->second = std::min(lo->second, lv.energy);
            auto [hi, fresh_hi] = r.max_energy.try_emplace(lv.S, lv.energy);
            if (!fresh_hi) hi->second = std::max(hi->second, lv.energy);
            auto [res, fresh_res] = r.casimir_residuals.try_emplace(lv.S, lv.residual);
            if (!fresh_res) res->second = std::max(res->second, lv.residual);
            if (lv.S == M) ++observed;
        }
        if (M.twice() >= 0) {
            r.multiplet_counts[M] = observed;
            const int expected = r.expected_counts[M];
            if (observed != expected) {
                throw ClassificationError("classify_total_spin: sector M=" + M.str() + " holds " + std::to_string(observed) +
                                              " highest-weight labels, expected " + std::to_string(expected),
                                          std::abs(observed - expected));
            }
        }
    }
    return r;
}

}  // namespace detail

/// Classifies eigenstates of H by the Casimir C, assembling both directly in each
/// magnetization sector from product terms.
inline SpinResolvedLevels classify_total_spin(const SpinSpace& space, std::span<const ProductTerm> H_terms,
                                              std::span<const ProductTerm> C_terms, const CasimirSpec& cas,
                                              const ClassifyOptions& opt = {}) {
    const auto sectors = detail::selected_sectors(space, opt);
    const HalfInteger S_max = space.max_magnetization();
    auto parts = parallel_map(sectors.size(), opt.threads, [&](std::size_t i) {
        const auto basis = magnetization_sector(space, sectors[i]);
        const auto Hb = assemble_terms(space, H_terms, &basis, true);
        const auto Cb = assemble_terms(space, C_terms, &basis, false);
        return detail::classify_block(Hb, Cb, sectors[i], S_max, cas, opt);
    });
    return detail::merge_labels(space, sectors, parts);
}

/// Same, from full-space operators (restricted per sector).
inline SpinResolvedLevels classify_total_spin(const SpinSpace& space, const SparseOperator& H, const SparseOperator& C,
                                              const CasimirSpec& cas, const ClassifyOptions& opt = {}) {
    if (static_cast<StateIndex>(H.dim()) != space.total_dim() || C.dim() != H.dim()) {
        throw DomainError("classify_total_spin: operator dimensions do not match the space");
    }
    const auto sectors = detail::selected_sectors(space, opt);
    const HalfInteger S_max = space.max_magnetization();
    auto parts = parallel_map(sectors.size(), opt.threads, [&](std::size_t i) {
        const auto basis = magnetization_sector(space, sectors[i]);
        return detail::classify_block(restrict_to_sector(H, basis), restrict_to_sector(C, basis), sectors[i], S_max, cas, opt);
    });
    return detail::merge_labels(space, sectors, parts);
}

/// SU(2) classification of an interaction's Hamiltonian.
inline SpinResolvedLevels classify_su2(const Interaction& phi, const SpinSpace& space, const ClassifyOptions& opt = {}) {
    const auto h = phi.product_terms();
    const auto c = su2_casimir_terms(space);
    return classify_total_spin(space, h, c, su2_casimir(), opt);
}

/// SU_q(2) classification of the open XXZ chain.
inline SpinResolvedLevels classify_suq2(const XxzParams& p, const ClassifyOptions& opt = {}) {
    if (p.boundary != XxzBoundary::OpenWithField) throw DomainError("classify_suq2: requires the open chain with boundary fields");
    const auto g = suq2_generators(p);
    const auto h = xxz(p).product_terms();
    return classify_total_spin(SpinSpace(xxz_graph(p)), h, g.Cq, suq2_casimir(p.q), opt);
}

// ------------------------------------------------------------ ordering verdicts

enum class OrderingProperty { FOEL, LiebMattis };

struct OrderingWitness {
    HalfInteger S, S_prime;
    double E_S = 0.0, E_S_prime = 0.0;
};

struct OrderingVerdict {
    OrderingProperty property = OrderingProperty::FOEL;
    bool holds = true;
    std::optional<OrderingWitness> witness;
    double margin = INFINITY;  // smallest adjacent energy difference in the asserted direction
};

namespace detail {

inline void check_contiguous(const std::map<HalfInteger, double>& table, const char* who) {
    if (table.empty()) throw IncompleteTableError(std::string(who) + ": empty E(H,S) table");
    HalfInteger expect = table.begin()->first;
    for (const auto& [S, e] : table) {
        if (S != expect) throw IncompleteTableError(std::string(who) + ": missing E(H,S) entry for S=" + expect.str());
        expect = S + half(2);
    }
}

}  // namespace detail

/// E(S) < E(S') for S' < S, strict beyond `strict_tol`; witness is the first failing adjacent pair from the top.
inline OrderingVerdict foel_check(const std::map<HalfInteger, double>& table, double strict_tol = 1e-9) {
    detail::check_contiguous(table, "foel_check");
    OrderingVerdict v;
    v.property = OrderingProperty::FOEL;
    for (auto it = table.rbegin(); std::next(it) != table.rend(); ++it) {
        auto lower = std::next(it);
        const double diff = lower->second - it->second;
        v.margin = std::min(v.margin, diff);
        if (diff <= strict_tol && v.holds) {
            v.holds = false;
            v.witness = OrderingWitness{it->first, lower->first, it->second, lower->second};
        }
    }
    return v;
}

inline OrderingVerdict foel_check(const SpinResolvedLevels& levels, double strict_tol = 1e-9) {
    for (auto S : levels.grid()) {
        if (!levels.min_energy.contains(S)) throw IncompleteTableError("foel_check: no level labelled S=" + S.str());
    }
    return foel_check(levels.min_energy, strict_tol);
}

/// Increasing table E(S) for S >= S0 (strict), and E(S0) equal to the overall minimum.
inline OrderingVerdict increasing_from(const std::map<HalfInteger, double>& table, HalfInteger S0, double strict_tol = 1e-9) {
    detail::check_contiguous(table, "lieb_mattis_check");
    if (!table.contains(S0)) throw IncompleteTableError("lieb_mattis_check: missing E(H,S) entry for S=" + S0.str());
    OrderingVerdict v;
    v.property = OrderingProperty::LiebMattis;
    double ground = INFINITY;
    for (const auto& [S, e] : table) ground = std::min(ground, e);
    if (table.at(S0) > ground + strict_tol) {
        v.holds = false;
        for (const auto& [S, e] : table) {
            if (e == ground) {
                v.witness = OrderingWitness{S0, S, table.at(S0), e};
                break;
            }
        }
    }
    for (auto it = table.find(S0); std::next(it) != table.end(); ++it) {
        auto upper = std::next(it);
        const double diff = upper->second - it->second;
        v.margin = std::min(v.margin, diff);
        if (diff <= strict_tol && v.holds) {
            v.holds = false;
            v.witness = OrderingWitness{it->first, upper->first, it->second, upper->second};
        }
    }
    return v;
}

struct LiebMattisReport {
    OrderingVerdict verdict;
    SpinResolvedLevels levels;
    HalfInteger S_A, S_B, ground_spin;
    std::vector<Vertex> part_A, part_B;
};

/// H = -H_G + H_A + H_B with ferromagnetic Heisenberg pieces: the edges of the bipartite
/// graph g (antiferromagnetic after the sign flip) and optional intra-part edge lists.
inline LiebMattisReport lieb_mattis_check(const SpinGraph& g, const std::vector<Edge>& intra_A = {},
                                          const std::vector<Edge>& intra_B = {}, const ClassifyOptions& opt = {}) {
    auto parts = g.bipartition();
    if (!parts) throw DomainError("lieb_mattis_check: graph is not bipartite");
    LiebMattisReport r;
    r.part_A = parts->first;
    r.part_B = parts->second;
    auto in = [](const std::vector<Vertex>& set, Vertex x) { return std::binary_search(set.begin(), set.end(), x); };
    for (const auto& e : intra_A)
        if (!in(r.part_A, e.x) || !in(r.part_A, e.y)) throw DomainError("lieb_mattis_check: intra-A edge leaves part A");
    for (const auto& e : intra_B)
        if (!in(r.part_B, e.x) || !in(r.part_B, e.y)) throw DomainError("lieb_mattis_check: intra-B edge leaves part B");

    HalfInteger sa, sb;
    for (auto x : r.part_A) sa = sa + g.spin(x);
    for (auto x : r.part_B) sb = sb + g.spin(x);
    r.S_A = sa;
    r.S_B = sb;
    r.ground_spin = abs(sa - sb);

    Interaction H = heisenberg(g).scaled(-1.0);
    if (!intra_A.empty()) H = H + heisenberg(SpinGraph(g.num_vertices(), intra_A, g.spins()));
    if (!intra_B.empty()) H = H + heisenberg(SpinGraph(g.num_vertices(), intra_B, g.spins()));
    const SpinSpace space(g);
    r.levels = classify_su2(H, space, opt);
    r.verdict = increasing_from(r.levels.min_energy, r.ground_spin);
    return r;
}

/// Largest eigenvalue per label strictly decreasing in S for S >= S0 (the ordering of the
/// top of the spectrum expected for -H on a bipartite graph).
inline OrderingVerdict top_levels_decreasing(const SpinResolvedLevels& levels, HalfInteger S0, double strict_tol = 1e-9) {
    std::map<HalfInteger, double> negated;
    for (const auto& [S, e] : levels.max_energy) negated[S] = -e;
    detail::check_contiguous(negated, "top_levels_decreasing");
    OrderingVerdict v;
    v.property = OrderingProperty::LiebMattis;
    if (!negated.contains(S0)) throw IncompleteTableError("top_levels_decreasing: missing S=" + S0.str());
    for (auto it = negated.find(S0); std::next(it) != negated.end(); ++it) {
        auto upper = std::next(it);
        const double diff = upper->second - it->second;
        v.margin = std::min(v.margin, diff);
        if (diff <= strict_tol && v.holds) {
            v.holds = false;
            v.witness = OrderingWitness{it->first, upper->first, -it->second, -upper->second};
        }
    }
    return v;
}

/// S0 = |S_A - S_B| of the graph's bipartition.
inline HalfInteger bipartite_spin_imbalance(const SpinGraph& g) {
    auto parts = g.bipartition();
    if (!parts) throw DomainError("bipartite_spin_imbalance: graph is not bipartite");
    HalfInteger sa, sb;
    for (auto x : parts->first) sa = sa + g.spin(x);
    for (auto x : parts->second) sb = sb + g.spin(x);
    return abs(sa - sb);
}

}  // namespace spinlab
