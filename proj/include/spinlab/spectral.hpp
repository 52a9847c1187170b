// spectral.hpp - dense and Lanczos Hermitian eigensolvers, sector-blocked
// spectra and spectral gaps.

#pragma once

#include "spinlab/core.hpp"
#include "spinlab/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace spinlab {

struct SolverOptions {
    Eigen::Index dense_cutoff = 4096;  // largest dimension handed to the dense solver
    double tol = 1e-10;                // Lanczos residual tolerance ||Hv - Ev||
    int max_iterations = 0;            // Lanczos basis cap; 0 = min(dim, 2000)
    double degeneracy_tol = 1e-8;
    std::uint64_t seed = 0x5eed'1e55'c0ffeeULL;
};

/// Ascending eigenvalues with optional eigenvector columns and per-pair residuals.
struct SpectrumReport {
    std::vector<double> eigenvalues;
    std::optional<Matrix> eigenvectors;
    std::optional<SectorLabel> sector;
    std::vector<double> residuals;

    std::size_t size() const noexcept { return eigenvalues.size(); }
    double max_residual() const {
        return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
    }
};

struct GapReport {
    double ground_energy = 0.0;
    int ground_degeneracy = 0;
    double gap = 0.0;
};

namespace detail {

inline std::vector<double> residuals_of(const SparseOperator& H, const std::vector<double>& values, const Matrix& vecs) {
    std::vector<double> r(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto col = vecs.col(static_cast<Eigen::Index>(i));
        r[i] = (H.storage() * col - values[i] * col).norm();
    }
    return r;
}

/// Re-orthonormalizes each degenerate block (modified Gram-Schmidt) and fixes the
/// phase of every column so its largest-magnitude entry is real positive.
inline void canonicalize_vectors(const std::vector<double>& values, Matrix& V, double tol) {
    const Eigen::Index n = V.cols();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && values[end] - values[start] <= tol) ++end;
        for (Eigen::Index j = start; j < end; ++j) {
            for (Eigen::Index i = start; i < j; ++i) V.col(j) -= V.col(i).dot(V.col(j)) * V.col(i);
            V.col(j).normalize();
        }
        start = end;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index arg = 0;
        V.col(j).cwiseAbs().maxCoeff(&arg);
        const cplx p = V(arg, j);
        if (std::abs(p) > 0) V.col(j) *= std::conj(p) / std::abs(p);
    }
}

/// Uniform double in [0,1) from raw 64-bit draws (platform-independent).
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = 2.0 * uniform01(rng) - 1.0;
    return v;
}

/// Removes components along the columns of `basis` (twice, for stability).
inline void orthogonalize(Vector& w, const std::vector<Vector>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) w -= b.dot(w) * b;
}

struct LanczosResult {
    std::vector<double> values;
    std::vector<Vector> vectors;
    double worst_estimate = 0.0;
    bool exhausted = false;  // Krylov basis plus locked vectors spans the whole space
};

/// One Lanczos run with full reorthogonalization on the complement of `locked`.
/// Invariant-subspace breakdowns restart from a fresh deterministic vector, so
/// degenerate copies are reachable.
inline LanczosResult lanczos_pass(const SparseOperator& H, int k, const std::vector<Vector>& locked,
                                  const SolverOptions& opt, std::mt19937_64& rng) {
    const Eigen::Index n = H.dim();
    const Eigen::Index room = n - static_cast<Eigen::Index>(locked.size());
    const Eigen::Index cap = std::min<Eigen::Index>(room, opt.max_iterations > 0 ? opt.max_iterations : std::min<Eigen::Index>(n, 2000));
    LanczosResult res;
    if (room <= 0 || cap <= 0) {
        res.exhausted = true;
        return res;
    }

    // all-ones blended with a fixed-seed perturbation: the bare all-ones vector lies in
    // the fully symmetric subspace and misses states outside it
    Vector q = Vector::Ones(n) / std::sqrt(static_cast<double>(n)) + 0.5 * random_vector(n, rng) / std::sqrt(static_cast<double>(n));
    orthogonalize(q, locked);
    q.normalize();

    std::vector<Vector> Q;
    std::vector<double> alpha, beta;  // beta[j] couples j and j+1 (0 at restarts)
    double scale = 0.0;
    Eigen::SelfAdjointEigenSolver<RealMatrix> tri;
    auto solve_tridiagonal = [&](Eigen::Index m) {
        RealVector d(m), e(std::max<Eigen::Index>(m - 1, 0));
        for (Eigen::Index i = 0; i < m; ++i) d(i) = alpha[i];
        for (Eigen::Index i = 0; i + 1 < m; ++i) e(i) = beta[i];
        if (m == 1) {
            tri.compute(RealMatrix::Constant(1, 1, d(0)));
        } else {
            tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        }
    };

    bool converged = false;
    double last_beta = 0.0;
    for (Eigen::Index j = 0; j < cap; ++j) {
        Q.push_back(q);
        Vector w = H.storage() * q;
        for (const auto& l : locked) w -= l.dot(w) * l;
        const double a = q.dot(w).real();
        alpha.push_back(a);
        w -= a * q;
        if (j > 0 && beta[j - 1] != 0.0) w -= beta[j - 1] * Q[j - 1];
        orthogonalize(w, Q);
        orthogonalize(w, locked);
        const double b = w.norm();
        scale = std::max({scale, std::abs(a), b});
        last_beta = b;

        const Eigen::Index m = j + 1;
        const bool check = m >= k && (m == cap || m <= 2 * k + 10 || m % std::max<Eigen::Index>(1, m / 10) == 0);
        if (check) {
            solve_tridiagonal(m);
            double worst = 0.0;
            const int kk = static_cast<int>(std::min<Eigen::Index>(k, m));
            for (int i = 0; i < kk; ++i) worst = std::max(worst, b * std::abs(tri.eigenvectors()(m - 1, i)));
            res.worst_estimate = worst;
            if (worst < opt.tol) {
                converged = true;
                break;
            }
        }
        if (m == cap) break;
        if (b <= 1e-13 * std::max(scale, 1.0)) {
            // invariant subspace reached: restart orthogonal to everything so far
            Vector r = random_vector(n, rng);
            orthogonalize(r, Q);
            orthogonalize(r, locked);
            if (r.norm() < 1e-8) {
                res.exhausted = true;
                break;
            }
            beta.push_back(0.0);
            q = r.normalized();
        } else {
            beta.push_back(b);
            q = w / b;
        }
    }
    const Eigen::Index m = static_cast<Eigen::Index>(Q.size());
    if (static_cast<Eigen::Index>(Q.size() + locked.size()) >= n) res.exhausted = true;
    solve_tridiagonal(m);
    if (!converged) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(k, m); ++i)
            worst = std::max(worst, last_beta * std::abs(tri.eigenvectors()(m - 1, i)));
        res.worst_estimate = res.exhausted ? 0.0 : worst;
    }
    const Eigen::Index kk = std::min<Eigen::Index>(k, m);
    for (Eigen::Index i = 0; i < kk; ++i) {
        res.values.push_back(tri.eigenvalues()(i));
        Vector v = Vector::Zero(n);
        for (Eigen::Index r = 0; r < m; ++r) v += tri.eigenvectors()(r, i) * Q[r];
        res.vectors.push_back(v.normalized());
    }
    return res;
}

}  // namespace detail

/// All eigenpairs by dense Hermitian tridiagonalization (real arithmetic when H is real).
inline SpectrumReport full_spectrum(const SparseOperator& H, bool want_vectors, const SolverOptions& opt = {}) {
    if (H.dim() > opt.dense_cutoff) {
        throw ResourceError("full_spectrum: dimension " + std::to_string(H.dim()) + " exceeds dense cutoff " +
                                std::to_string(opt.dense_cutoff) + "; use extremal_eigs",
                            static_cast<std::uint64_t>(H.dim()));
    }
    SpectrumReport rep;
    if (H.dim() == 0) return rep;
    const auto mode = want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
    RealVector values;
    Matrix vecs;
    if (H.is_real()) {
        const RealMatrix d = H.dense().real();
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(d, mode);
        if (es.info() != Eigen::Success) throw SolverError("full_spectrum: dense eigensolver failed", INFINITY);
        values = es.eigenvalues();
        if (want_vectors) vecs = es.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(H.dense(), mode);
        if (es.info() != Eigen::Success) throw SolverError("full_spectrum: dense eigensolver failed", INFINITY);
        values = es.eigenvalues();
        if (want_vectors) vecs = es.eigenvectors();
    }
    rep.eigenvalues.assign(values.data(), values.data() + values.size());
    if (want_vectors) {
        detail::canonicalize_vectors(rep.eigenvalues, vecs, opt.degeneracy_tol);
        rep.residuals = detail::residuals_of(H, rep.eigenvalues, vecs);
        rep.eigenvectors = std::move(vecs);
    }
    return rep;
}

/// k lowest eigenpairs by Lanczos with full reorthogonalization. After a first
/// converged run, further runs on the orthogonal complement of the accepted
/// vectors pick up missed degenerate copies until the k lowest are stable.
inline SpectrumReport extremal_eigs(const SparseOperator& H, int k, double tol, const SolverOptions& base = {}) {
    if (k < 1) throw DomainError("extremal_eigs: k must be >= 1");
    if (k > H.dim()) throw DomainError("extremal_eigs: k exceeds dimension");
    SolverOptions opt = base;
    opt.tol = tol;
    std::mt19937_64 rng(opt.seed);

    std::vector<double> values;
    std::vector<Vector> vectors;
    double worst = 0.0;
    for (int pass = 0; pass < 64; ++pass) {
        auto r = detail::lanczos_pass(H, k, vectors, opt, rng);
        if (!r.exhausted && r.worst_estimate >= tol) {
            throw SolverError("extremal_eigs: Lanczos did not converge within " + std::to_string(opt.max_iterations > 0 ? opt.max_iterations : 2000) +
                                  " iterations (best residual " + std::to_string(r.worst_estimate) + ")",
                              r.worst_estimate);
        }
        worst = std::max(worst, r.worst_estimate);
        if (r.values.empty()) break;
        const double kth = values.size() >= static_cast<std::size_t>(k) ? values[k - 1] : INFINITY;
        if (r.values.front() > kth + opt.degeneracy_tol) break;
        // keep every converged pair as locked so degenerate copies are not rediscovered
        std::vector<std::pair<double, Vector>> merged;
        for (std::size_t i = 0; i < values.size(); ++i) merged.emplace_back(values[i], std::move(vectors[i]));
        for (std::size_t i = 0; i < r.values.size(); ++i) merged.emplace_back(r.values[i], std::move(r.vectors[i]));
        std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        values.clear();
        vectors.clear();
        for (auto& [v, vec] : merged) {
            values.push_back(v);
            vectors.push_back(std::move(vec));
        }
        if (r.exhausted) break;
    }
    if (values.size() > static_cast<std::size_t>(k)) {
        values.resize(k);
        vectors.resize(k);
    }
    SpectrumReport rep;
    rep.eigenvalues = values;
    Matrix V(H.dim(), static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t i = 0; i < vectors.size(); ++i) V.col(static_cast<Eigen::Index>(i)) = vectors[i];
    detail::canonicalize_vectors(rep.eigenvalues, V, opt.degeneracy_tol);
    rep.residuals = detail::residuals_of(H, rep.eigenvalues, V);
    const double true_worst = rep.max_residual();
    if (true_worst > 10.0 * tol + 1e-14) {
        throw SolverError("extremal_eigs: final residual " + std::to_string(true_worst) + " above tolerance", true_worst);
    }
    rep.eigenvectors = std::move(V);
    return rep;
}

/// Dense when the dimension allows, Lanczos otherwise; `k` lowest levels (k <= 0: all, dense only).
inline SpectrumReport lowest_levels(const SparseOperator& H, int k, bool want_vectors, const SolverOptions& opt = {}) {
    if (k <= 0 || H.dim() <= opt.dense_cutoff) {
        auto rep = full_spectrum(H, want_vectors, opt);
        if (k > 0 && rep.size() > static_cast<std::size_t>(k)) {
            rep.eigenvalues.resize(k);
            if (rep.eigenvectors) rep.eigenvectors = Matrix(rep.eigenvectors->leftCols(k));
            if (!rep.residuals.empty()) rep.residuals.resize(k);
        }
        return rep;
    }
    auto rep = extremal_eigs(H, k, opt.tol, opt);
    if (!want_vectors) rep.eigenvectors.reset();
    return rep;
}

/// Spectrum of H restricted to a sector; H must not couple the sector to its complement.
inline SpectrumReport sector_spectrum(const SparseOperator& H, const SectorBasis& sector, int k, bool want_vectors = false,
                                      const SolverOptions& opt = {}) {
    const auto block = restrict_to_sector(H, sector);
    auto rep = lowest_levels(block, k, want_vectors, opt);
    rep.sector = sector.label();
    return rep;
}

/// Ground energy, its degeneracy and the distance to the next distinct level.
inline GapReport spectral_gap(const SpectrumReport& report, double degeneracy_tol = 1e-8) {
    const auto& ev = report.eigenvalues;
    if (ev.empty()) throw DegenerateSpectrumError("spectral_gap: empty spectrum");
    if (!std::is_sorted(ev.begin(), ev.end())) throw DomainError("spectral_gap: eigenvalues must be ascending");
    GapReport g;
    g.ground_energy = ev.front();
    std::size_t deg = 0;
    while (deg < ev.size() && ev[deg] <= g.ground_energy + degeneracy_tol) ++deg;
    if (deg == ev.size()) throw DegenerateSpectrumError("spectral_gap: fewer than two distinct levels");
    g.ground_degeneracy = static_cast<int>(deg);
    g.gap = ev[deg] - g.ground_energy;
    return g;
}

/// Multiset union of several (sector) spectra, ascending.
inline SpectrumReport merge_spectra(const std::vector<SpectrumReport>& parts) {
    SpectrumReport out;
    for (const auto& p : parts) out.eigenvalues.insert(out.eigenvalues.end(), p.eigenvalues.begin(), p.eigenvalues.end());
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
    return out;
}

}  // namespace spinlab
