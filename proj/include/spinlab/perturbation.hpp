// perturbation.hpp - frustration-free checks, relative-bound constants and gap sweeps
// of a gapped Hamiltonian under a translated perturbation.

#pragma once

#include "spinlab/core.hpp"
#include "spinlab/hilbert.hpp"
#include "spinlab/lattice.hpp"
#include "spinlab/models.hpp"
#include "spinlab/parallel.hpp"
#include "spinlab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spinlab {

struct FrustrationFreeReport {
    double ground_energy = 0.0;
    int zero_multiplicity = 0;        // levels within zero_tol of 0
    bool nonnegative = false;         // H >= 0
    bool annihilates = false;         // H Omega = 0
    double candidate_residual = NAN;  // ||H Omega_candidate|| when a candidate is given
    double c = 0.0;                   // first level above the zero-energy space
    int V0_size = 0;
    bool a0_holds = false;            // nonnegative, annihilates, unique and c >= |V0|
};

/// Checks H >= 0, H Omega = 0 and H >= c (1 - |Omega><Omega|) for the assembled interaction.
inline FrustrationFreeReport frustration_free_check(const Interaction& phi, const SpinSpace& space, int V0_size,
                                                    const std::optional<Vector>& candidate = std::nullopt,
                                                    bool claim_unique = true, const SolverOptions& opt = {},
                                                    double zero_tol = 1e-9, int max_levels = 16) {
    if (V0_size < 1) throw DomainError("frustration_free_check: |V0| must be >= 1");
    const auto H = assemble(phi, space);
    FrustrationFreeReport r;
    r.V0_size = V0_size;
    if (candidate) {
        if (candidate->size() != H.dim()) throw DomainError("frustration_free_check: candidate dimension mismatch");
        r.candidate_residual = H.apply(candidate->normalized()).norm();
    }
    const int k = static_cast<int>(std::min<Eigen::Index>(H.dim(), max_levels));
    int want = 2;
    SpectrumReport rep;
    for (;;) {
        rep = lowest_levels(H, std::min(want, k), false, opt);
        int zeros = 0;
        for (double e : rep.eigenvalues)
            if (std::abs(e) <= zero_tol) ++zeros;
        if (zeros < static_cast<int>(rep.size()) || want >= k) break;
        want *= 2;
    }
    r.ground_energy = rep.eigenvalues.front();
    r.nonnegative = r.ground_energy >= -zero_tol;
    for (double e : rep.eigenvalues)
        if (std::abs(e) <= zero_tol) ++r.zero_multiplicity;
    r.annihilates = r.zero_multiplicity > 0;
    if (r.zero_multiplicity == static_cast<int>(rep.size()))
        throw DegenerateSpectrumError("frustration_free_check: more than " + std::to_string(rep.size()) + " zero-energy states");
    if (claim_unique && r.zero_multiplicity > 1) {
        throw DegenerateSpectrumError("frustration_free_check: zero-energy ground state is " + std::to_string(r.zero_multiplicity) +
                                      "-fold degenerate");
    }
    r.c = rep.eigenvalues[r.zero_multiplicity] - std::max(r.ground_energy, 0.0);
    if (!r.annihilates) r.c = rep.eigenvalues[1] - rep.eigenvalues[0];
    r.a0_holds = r.nonnegative && r.annihilates && r.zero_multiplicity == 1 && r.c >= V0_size - zero_tol;
    return r;
}

/// Smallest alpha with |<psi, phi psi>| <= alpha ||h^{1/2} psi||^2 for all psi; infinity when
/// phi does not vanish on ker h.
inline double relative_bound_alpha(const Matrix& phi_r, const Matrix& h, double tol = 1e-12) {
    if (phi_r.rows() != h.rows() || phi_r.cols() != h.cols() || h.rows() != h.cols())
        throw DomainError("relative_bound_alpha: matrices must be square and of equal size");
    if ((phi_r - phi_r.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) throw DomainError("relative_bound_alpha: phi is not Hermitian");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) throw DomainError("relative_bound_alpha: h is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const auto& w = es.eigenvalues();
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    if (w(0) < -tol * scale) throw DomainError("relative_bound_alpha: h is not positive semidefinite");
    std::vector<Eigen::Index> kernel, range;
    for (Eigen::Index i = 0; i < w.size(); ++i) (w(i) > tol * scale ? range : kernel).push_back(i);
    const Matrix& U = es.eigenvectors();
    const double phi_scale = std::max(1.0, phi_r.cwiseAbs().maxCoeff());
    for (Eigen::Index i : kernel)
        if ((phi_r * U.col(i)).norm() > tol * phi_scale) return std::numeric_limits<double>::infinity();
    if (range.empty()) return 0.0;
    const Eigen::Index m = static_cast<Eigen::Index>(range.size());
    Matrix Ur(U.rows(), m);
    for (Eigen::Index j = 0; j < m; ++j) Ur.col(j) = U.col(range[j]) / std::sqrt(w(range[j]));
    const Matrix pencil = Ur.adjoint() * phi_r * Ur;
    Eigen::SelfAdjointEigenSolver<Matrix> ps(0.5 * (pencil + pencil.adjoint()), Eigen::EigenvaluesOnly);
    return ps.eigenvalues().cwiseAbs().maxCoeff();
}

/// max_x ||phi_b(x)||.
inline double relative_bound_beta(const std::vector<Matrix>& phi_b) {
    double b = 0.0;
    for (const auto& m : phi_b) b = std::max(b, operator_norm(m));
    return b;
}

/// H0 plus the perturbation family on one system size.
struct SweepSystem {
    int L = 0;
    SpinSpace space;
    Interaction base;
    Interaction perturbation;  // sum_x Phi_x
};

struct SweepRow {
    int L = 0;
    double lambda = 0.0;
    double ground_energy = 0.0;
    int degeneracy = 0;
    double gap = 0.0;
    std::vector<double> levels;
};

struct StabilitySweep {
    std::vector<int> Ls;
    std::vector<double> lambdas;
    std::vector<SweepRow> rows;                    // L-major, then lambda
    std::map<int, double> perturbation_norms;      // ||sum_x Phi_x|| per L
    bool all_gapped = true;
    bool weyl_holds = true;                        // tracked levels and gaps
    double weyl_worst_ratio = 0.0;                 // max |dE| / (|lambda| ||Phi||)
    bool continuity_holds = true;                  // adjacent lambdas
    std::optional<std::pair<double, double>> stability_range;  // at the largest L, gap >= gap(0)/2

    const SweepRow& at(int L, double lambda) const {
        for (const auto& r : rows)
            if (r.L == L && r.lambda == lambda) return r;
        throw DomainError("StabilitySweep: no row for L=" + std::to_string(L) + " lambda=" + std::to_string(lambda));
    }
};

/// Largest |eigenvalue| of a Hermitian operator from its two extremal levels.
inline double hermitian_operator_norm(const SparseOperator& A, const SolverOptions& opt = {}) {
    const double lo = lowest_levels(A, 1, false, opt).eigenvalues.front();
    const double hi = -lowest_levels(-1.0 * A, 1, false, opt).eigenvalues.front();
    return std::max(std::abs(lo), std::abs(hi));
}

inline StabilitySweep gap_sweep(const std::vector<SweepSystem>& systems, const std::vector<double>& lambdas, int tracked_levels = 4,
                                int threads = 1, const SolverOptions& opt = {}, double slack = 1e-8) {
    if (systems.empty() || lambdas.empty()) throw DomainError("gap_sweep: empty grid");
    if (tracked_levels < 2) throw DomainError("gap_sweep: need at least two tracked levels");
    if (std::find(lambdas.begin(), lambdas.end(), 0.0) == lambdas.end()) throw DomainError("gap_sweep: the grid must contain lambda = 0");
    if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw DomainError("gap_sweep: lambdas must be ascending");
    StabilitySweep s;
    s.lambdas = lambdas;
    for (const auto& sys : systems) s.Ls.push_back(sys.L);

    auto norms = parallel_map(systems.size(), threads, [&](std::size_t i) {
        return hermitian_operator_norm(assemble(systems[i].perturbation, systems[i].space), opt);
    });
    const std::size_t nl = lambdas.size();
    s.rows = parallel_map(systems.size() * nl, threads, [&](std::size_t idx) {
        const auto& sys = systems[idx / nl];
        const double lambda = lambdas[idx % nl];
        const auto H = lambda == 0.0 ? assemble(sys.base, sys.space) : assemble(sys.base + sys.perturbation.scaled(lambda), sys.space);
        const int k = static_cast<int>(std::min<Eigen::Index>(tracked_levels, H.dim()));
        const auto rep = lowest_levels(H, k, false, opt);
        const auto g = spectral_gap(rep, opt.degeneracy_tol);
        return SweepRow{sys.L, lambda, g.ground_energy, g.ground_degeneracy, g.gap, rep.eigenvalues};
    });

    for (std::size_t i = 0; i < systems.size(); ++i) {
        const int L = systems[i].L;
        const double norm = norms[i];
        s.perturbation_norms[L] = norm;
        const SweepRow* zero = nullptr;
        for (std::size_t j = 0; j < nl; ++j)
            if (lambdas[j] == 0.0) zero = &s.rows[i * nl + j];
        for (std::size_t j = 0; j < nl; ++j) {
            const auto& r = s.rows[i * nl + j];
            s.all_gapped = s.all_gapped && r.gap > opt.degeneracy_tol;
            const double allowance = std::abs(r.lambda) * norm;
            for (std::size_t lv = 0; lv < r.levels.size() && lv < zero->levels.size(); ++lv) {
                const double d = std::abs(r.levels[lv] - zero->levels[lv]);
                s.weyl_holds = s.weyl_holds && d <= allowance + slack;
                if (allowance > 0.0) s.weyl_worst_ratio = std::max(s.weyl_worst_ratio, d / allowance);
            }
            s.weyl_holds = s.weyl_holds && std::abs(r.gap - zero->gap) <= 2.0 * allowance + slack;
            if (j > 0) {
                const auto& p = s.rows[i * nl + j - 1];
                s.continuity_holds =
                    s.continuity_holds && std::abs(r.gap - p.gap) <= 2.0 * norm * std::abs(r.lambda - p.lambda) + slack;
            }
        }
    }

    // contiguous range around 0 at the largest L
    std::size_t big = 0;
    for (std::size_t i = 1; i < systems.size(); ++i)
        if (systems[i].L > systems[big].L) big = i;
    std::size_t j0 = 0;
    while (lambdas[j0] != 0.0) ++j0;
    const double half_gap = 0.5 * s.rows[big * nl + j0].gap;
    std::size_t lo = j0, hi = j0;
    while (lo > 0 && s.rows[big * nl + lo - 1].gap >= half_gap) --lo;
    while (hi + 1 < nl && s.rows[big * nl + hi + 1].gap >= half_gap) ++hi;
    s.stability_range = std::make_pair(lambdas[lo], lambdas[hi]);
    return s;
}

/// AKLT plus lambda sum_x S3_x S3_{x+1} on a periodic chain.
inline SweepSystem aklt_s3s3_system(int L) {
    const auto g = aklt_graph(L, true);
    SpinSpace space(g);
    const auto s = spin_matrices(half(2));
    return SweepSystem{L, space, aklt(L, true), translated_family(kron(s.S3, s.S3), 2, L, true, space, "s3s3")};
}

}  // namespace spinlab
