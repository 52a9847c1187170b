// droplets.hpp - droplet energies of the XXZ ferromagnet: closed forms, sector ground
// energies on periodic and open chains, momentum-resolved bands and convergence tables.

#pragma once

#include "spinlab/core.hpp"
#include "spinlab/hilbert.hpp"
#include "spinlab/models.hpp"
#include "spinlab/parallel.hpp"
#include "spinlab/spectral.hpp"
#include "spinlab/symmetry.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinlab {

/// Fewer levels than a band estimate needs.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void check_q(double q, const char* who) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError(std::string(who) + ": q must lie in (0,1)");
}

/// E(n) = (1 - q^2)(1 - q^n) / ((1 + q^2)(1 + q^n)).
inline double droplet_energy_formula(double q, int n) {
    check_q(q, "droplet_energy_formula");
    if (n < 0) throw DomainError("droplet_energy_formula: n must be >= 0");
    const double qn = std::pow(q, n);
    return (1.0 - q * q) * (1.0 - qn) / ((1.0 + q * q) * (1.0 + qn));
}

/// 4 q^n (1 - q^2) / (1 - q^{2n}).
inline double bandwidth_formula(double q, int n) {
    check_q(q, "bandwidth_formula");
    if (n < 1) throw DomainError("bandwidth_formula: n must be >= 1");
    const double qn = std::pow(q, n);
    return 4.0 * qn * (1.0 - q * q) / (1.0 - qn * qn);
}

/// bandwidth_formula divided by Delta = (q + 1/q)/2.
inline double bandwidth_formula_over_delta(double q, int n) {
    return bandwidth_formula(q, n) / (0.5 * (q + 1.0 / q));
}

/// Exact one-magnon width 2/Delta.
inline double magnon_bandwidth(double q) {
    check_q(q, "magnon_bandwidth");
    return 4.0 * q / (1.0 + q * q);
}

enum class ChainVariant { Periodic, OpenSuq };

inline XxzParams droplet_params(double q, int L, ChainVariant v) {
    return XxzParams::from_q(L, q, 1.0, v == ChainVariant::Periodic ? XxzBoundary::Periodic : XxzBoundary::OpenWithField);
}

/// Magnetization M = L/2 - n of the n-down-spin sector.
inline HalfInteger droplet_sector(int L, int n) {
    if (n < 0 || n > L) throw DomainError("droplet sector: need 0 <= n <= L");
    return half(L - 2 * n);
}

/// Sector ground state on the periodic chain.
inline double periodic_sector_ground_energy(const XxzParams& p, int n, const SolverOptions& opt = {}) {
    if (p.boundary != XxzBoundary::Periodic) throw DomainError("periodic_sector_ground_energy: periodic chain required");
    const SpinSpace space(xxz_graph(p));
    const auto sector = magnetization_sector(space, droplet_sector(p.L, n));
    const auto H = assemble(xxz(p), space, sector);
    return lowest_levels(H, 1, false, opt).eigenvalues.front();
}

/// E(H_L, S_max - n) on the open chain, labelled by the q-Casimir.
inline double open_spin_ground_energy(const XxzParams& p, int n, const SolverOptions& opt = {}) {
    if (p.boundary != XxzBoundary::OpenWithField) throw DomainError("open_spin_ground_energy: open chain required");
    const HalfInteger S = droplet_sector(p.L, n);
    if (S.twice() < 0) throw DomainError("open_spin_ground_energy: S_max - n must be >= 0");
    ClassifyOptions copt;
    copt.sectors = SectorSelection::Selected;
    copt.selected = {S};
    copt.solver = opt;
    const auto levels = classify_suq2(p, copt);
    const auto it = levels.min_energy.find(S);
    if (it == levels.min_energy.end()) throw ClassificationError("open_spin_ground_energy: no level labelled S = " + S.str(), 0.0);
    return it->second;
}

inline double sector_ground_energy(const XxzParams& p, int n, const SolverOptions& opt = {}, StateIndex max_dim = 200000) {
    const StateIndex dim = sector_dimension(SpinSpace::uniform(p.L, half(1)), droplet_sector(p.L, n));
    if (dim > max_dim) throw ResourceError("sector_ground_energy: sector dimension " + std::to_string(dim) + " too large", dim);
    return p.boundary == XxzBoundary::Periodic ? periodic_sector_ground_energy(p, n, opt) : open_spin_ground_energy(p, n, opt);
}

// ------------------------------------------------------------ bands

/// Lowest-L-levels estimate with the separation to level L+1.
struct BandEstimate {
    double band_min = 0.0;
    double band_max = 0.0;
    double width = 0.0;
    double isolation = 0.0;
};

inline BandEstimate band_extract(const SpectrumReport& report, int L) {
    if (L < 1) throw DomainError("band_extract: L must be >= 1");
    if (report.size() < static_cast<std::size_t>(L) + 1) {
        throw InsufficientDataError("band_extract: need " + std::to_string(L + 1) + " levels, have " + std::to_string(report.size()));
    }
    BandEstimate b;
    b.band_min = report.eigenvalues.front();
    b.band_max = report.eigenvalues[L - 1];
    b.width = b.band_max - b.band_min;
    b.isolation = report.eigenvalues[L] - b.band_max;
    return b;
}

/// Site-translation x -> x+1 on a magnetization sector of a uniform ring, as a permutation.
inline std::vector<std::size_t> sector_translation(const SectorBasis& sector) {
    const auto& space = sector.parent();
    const int L = space.num_sites();
    std::vector<std::size_t> perm(sector.size());
    std::vector<int> rotated(L);
    for (std::size_t i = 0; i < sector.size(); ++i) {
        const auto digits = space.decode(sector.state(i));
        for (int x = 0; x < L; ++x) rotated[(x + 1) % L] = digits[x];
        perm[i] = *sector.index_of(space.encode(rotated));
    }
    return perm;
}

/// Lowest energy per crystal momentum 2 pi j / L.
struct MomentumBand {
    int L = 0;
    std::vector<double> energy_at_k;  // index j = 0..L-1
    double band_min = 0.0;
    double band_max = 0.0;
    double width = 0.0;
};

/// Diagonalizes the translation inside each degenerate eigenspace of H on the sector.
inline MomentumBand momentum_band(const XxzParams& p, int n, double degeneracy_tol = 1e-8, const SolverOptions& opt = {}) {
    if (p.boundary != XxzBoundary::Periodic) throw DomainError("momentum_band: periodic chain required");
    if (n < 1 || n > p.L - 1) throw DomainError("momentum_band: need 1 <= n <= L-1");
    const SpinSpace space(xxz_graph(p));
    const auto sector = magnetization_sector(space, droplet_sector(p.L, n));
    const auto H = assemble(xxz(p), space, sector);
    const auto rep = full_spectrum(H, true, opt);
    const Matrix& V = *rep.eigenvectors;
    const auto perm = sector_translation(sector);
    const Eigen::Index dim = V.rows();
    Matrix TV(dim, V.cols());
    for (Eigen::Index i = 0; i < dim; ++i) TV.row(static_cast<Eigen::Index>(perm[i])) = V.row(i);

    MomentumBand band;
    band.L = p.L;
    band.energy_at_k.assign(p.L, std::numeric_limits<double>::infinity());
    std::size_t start = 0;
    while (start < rep.size()) {
        std::size_t end = start + 1;
        while (end < rep.size() && rep.eigenvalues[end] - rep.eigenvalues[start] <= degeneracy_tol) ++end;
        const auto cols = static_cast<Eigen::Index>(end - start);
        const Matrix block = V.middleCols(static_cast<Eigen::Index>(start), cols).adjoint() * TV.middleCols(static_cast<Eigen::Index>(start), cols);
        Eigen::ComplexEigenSolver<Matrix> ces(block, false);
        for (Eigen::Index i = 0; i < cols; ++i) {
            const double phase = std::arg(ces.eigenvalues()(i));
            int j = static_cast<int>(std::lround(phase * p.L / (2.0 * std::numbers::pi)));
            j = ((j % p.L) + p.L) % p.L;
            band.energy_at_k[j] = std::min(band.energy_at_k[j], rep.eigenvalues[start]);
        }
        start = end;
    }
    for (double e : band.energy_at_k)
        if (!std::isfinite(e)) throw InsufficientDataError("momentum_band: a momentum sector is empty");
    band.band_min = *std::min_element(band.energy_at_k.begin(), band.energy_at_k.end());
    band.band_max = *std::max_element(band.energy_at_k.begin(), band.energy_at_k.end());
    band.width = band.band_max - band.band_min;
    return band;
}

enum class WidthMatch { Printed, PrintedOverDelta, Neither, Both };

inline const char* to_string(WidthMatch m) {
    switch (m) {
        case WidthMatch::Printed: return "printed";
        case WidthMatch::PrintedOverDelta: return "printed_over_delta";
        case WidthMatch::Both: return "both";
        default: return "neither";
    }
}

struct WidthVerdict {
    double measured = 0.0;
    double printed = 0.0;
    double printed_over_delta = 0.0;
    double rel_dev_printed = 0.0;
    double rel_dev_over_delta = 0.0;
    WidthMatch winner = WidthMatch::Neither;
};

/// Compares a measured width with both candidate closed forms at relative tolerance `rel`.
inline WidthVerdict compare_width(double q, int n, double measured, double rel = 0.15) {
    WidthVerdict v;
    v.measured = measured;
    v.printed = bandwidth_formula(q, n);
    v.printed_over_delta = bandwidth_formula_over_delta(q, n);
    v.rel_dev_printed = std::abs(measured - v.printed) / v.printed;
    v.rel_dev_over_delta = std::abs(measured - v.printed_over_delta) / v.printed_over_delta;
    const bool a = v.rel_dev_printed <= rel, b = v.rel_dev_over_delta <= rel;
    v.winner = a && b ? WidthMatch::Both : a ? WidthMatch::Printed : b ? WidthMatch::PrintedOverDelta : WidthMatch::Neither;
    return v;
}

// ------------------------------------------------------------ convergence

struct DropletRow {
    int L = 0;
    double E_periodic = 0.0;
    double E_open = 0.0;
    double dev_periodic = 0.0;
    double dev_open = 0.0;
    double band_width = 0.0;  // momentum-resolved, periodic; 0 for n = 0
};

struct DropletTable {
    double q = 0.5;
    int n = 0;
    double formula_E = 0.0;
    double formula_width = NAN;  // printed closed form; NaN for n = 0
    std::vector<DropletRow> rows;

    double tolerance(int L) const { return std::max(1e-3, 5.0 * std::pow(q, L)); }

    /// |E_L(n) - E(n)| non-increasing for L >= L_min, within `slack`.
    bool periodic_monotone_from(int L_min, double slack = 1e-12) const {
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i - 1].L >= L_min && rows[i].dev_periodic > rows[i - 1].dev_periodic + slack) return false;
        return true;
    }
    bool open_monotone_from(int L_min, double slack = 1e-12) const {
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i - 1].L >= L_min && rows[i].dev_open > rows[i - 1].dev_open + slack) return false;
        return true;
    }
};

inline DropletTable convergence_table(double q, int n, const std::vector<int>& Ls, int threads = 1, const SolverOptions& opt = {}) {
    check_q(q, "convergence_table");
    if (n < 0) throw DomainError("convergence_table: n must be >= 0");
    for (int L : Ls)
        if (L < std::max(3, n)) throw DomainError("convergence_table: need L >= max(3, n), got L=" + std::to_string(L));
    DropletTable t;
    t.q = q;
    t.n = n;
    t.formula_E = droplet_energy_formula(q, n);
    if (n >= 1) t.formula_width = bandwidth_formula(q, n);
    t.rows = parallel_map(Ls.size(), threads, [&](std::size_t i) {
        const int L = Ls[i];
        DropletRow r;
        r.L = L;
        r.E_periodic = periodic_sector_ground_energy(droplet_params(q, L, ChainVariant::Periodic), n, opt);
        r.E_open = open_spin_ground_energy(droplet_params(q, L, ChainVariant::OpenSuq), n, opt);
        r.dev_periodic = std::abs(r.E_periodic - t.formula_E);
        r.dev_open = std::abs(r.E_open - t.formula_E);
        if (n >= 1 && n <= L - 1) r.band_width = momentum_band(droplet_params(q, L, ChainVariant::Periodic), n, opt.degeneracy_tol, opt).width;
        return r;
    });
    return t;
}

}  // namespace spinlab
