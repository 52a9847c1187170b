// ssep.hpp - symmetric simple exclusion process: configuration spaces, generator,
// gaps per particle number, and the conjugacy to the spin-1/2 XXX chain.

#pragma once

#include "spinlab/core.hpp"
#include "spinlab/hilbert.hpp"
#include "spinlab/lattice.hpp"
#include "spinlab/models.hpp"
#include "spinlab/parallel.hpp"
#include "spinlab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace spinlab {

using Configuration = std::uint64_t;  // bit x set iff a particle sits at vertex x

/// Spectra of the exclusion generator and the spin Hamiltonian disagree.
class ConjugacyError : public std::runtime_error {
public:
    ConjugacyError(const std::string& what, double deviation) : std::runtime_error(what), deviation_(deviation) {}
    double deviation() const noexcept { return deviation_; }

private:
    double deviation_;
};

/// n-particle configurations on the graph's vertices, ascending as integers.
class ExclusionSpace {
public:
    ExclusionSpace(SpinGraph g, int n) : graph_(std::move(g)), n_(n) {
        const int V = graph_.num_vertices();
        if (V > 62) throw DomainError("ExclusionSpace: at most 62 vertices");
        if (n < 0 || n > V) throw DomainError("ExclusionSpace: particle number " + std::to_string(n) + " outside 0.." + std::to_string(V));
        for (const auto& e : graph_.edges())
            if (!(e.weight > 0.0)) throw DomainError("ExclusionSpace: rates must be strictly positive");
        if (n == 0) {
            configs_.push_back(0);
            return;
        }
        // successive n-subsets in increasing order
        Configuration c = (Configuration{1} << n) - 1;
        const Configuration limit = Configuration{1} << V;
        while (c < limit) {
            configs_.push_back(c);
            const Configuration low = c & (~c + 1);
            const Configuration ripple = c + low;
            c = (((ripple ^ c) >> 2) / low) | ripple;
        }
    }

    const SpinGraph& graph() const noexcept { return graph_; }
    int particles() const noexcept { return n_; }
    std::size_t size() const noexcept { return configs_.size(); }
    const std::vector<Configuration>& configs() const noexcept { return configs_; }

    std::size_t index_of(Configuration c) const {
        auto it = std::lower_bound(configs_.begin(), configs_.end(), c);
        if (it == configs_.end() || *it != c) throw DomainError("ExclusionSpace: configuration not in space");
        return static_cast<std::size_t>(it - configs_.begin());
    }

private:
    SpinGraph graph_;
    int n_;
    std::vector<Configuration> configs_;
};

/// (L f)(eta) = sum_{xy} r_xy (f(eta) - f(eta^{xy})), real symmetric.
inline SparseOperator ssep_generator(const ExclusionSpace& space) {
    std::vector<SparseOperator::Triplet> t;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const Configuration c = space.configs()[i];
        double diag = 0.0;
        for (const auto& e : space.graph().edges()) {
            const bool ox = (c >> e.x) & 1U, oy = (c >> e.y) & 1U;
            if (ox == oy) continue;
            const Configuration swapped = c ^ ((Configuration{1} << e.x) | (Configuration{1} << e.y));
            diag += e.weight;
            t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(space.index_of(swapped)), -e.weight);
        }
        if (diag != 0.0) t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), diag);
    }
    return SparseOperator::from_triplets(static_cast<Eigen::Index>(space.size()), t, true);
}

struct GeneratorReport {
    std::map<int, double> gaps;                // lambda(n), 1 <= n <= |V|-1
    std::map<int, std::size_t> dims;           // |Omega_n|
    std::map<int, double> stationary_checks;   // ||L 1|| per n
    double aldous_margin = 0.0;                // max_n |lambda(n) - lambda(1)|
};

/// Smallest eigenvalue above `zero_tol` of the generator on Omega_n.
inline double ssep_gap(const ExclusionSpace& space, const SolverOptions& opt = {}, double zero_tol = 1e-9) {
    const auto Lg = ssep_generator(space);
    const auto rep = full_spectrum(Lg, false, opt);
    for (double v : rep.eigenvalues)
        if (v > zero_tol) return v;
    throw DegenerateSpectrumError("ssep_gap: no positive eigenvalue (n=" + std::to_string(space.particles()) + ")");
}

inline GeneratorReport ssep_gaps(const SpinGraph& g, int threads = 1, const SolverOptions& opt = {}) {
    if (!g.is_connected()) throw DomainError("ssep_gaps: graph is disconnected, lambda(1) = 0");
    const int V = g.num_vertices();
    if (V < 2) throw DomainError("ssep_gaps: need at least 2 vertices");
    struct Row {
        double gap, stationary;
        std::size_t dim;
    };
    auto rows = parallel_map(static_cast<std::size_t>(V - 1), threads, [&](std::size_t i) {
        const ExclusionSpace space(g, static_cast<int>(i) + 1);
        const auto Lg = ssep_generator(space);
        const Vector ones = Vector::Ones(static_cast<Eigen::Index>(space.size()));
        return Row{ssep_gap(space, opt), Lg.apply(ones).norm(), space.size()};
    });
    GeneratorReport r;
    for (int n = 1; n < V; ++n) {
        const auto& row = rows[n - 1];
        r.gaps[n] = row.gap;
        r.dims[n] = row.dim;
        r.stationary_checks[n] = row.stationary;
    }
    for (const auto& [n, gap] : r.gaps) r.aldous_margin = std::max(r.aldous_margin, std::abs(gap - r.gaps.at(1)));
    return r;
}

/// Sum_{xy} [-2 r_xy S_x.S_y + r_xy/2] on spin-1/2 sites.
inline Interaction ssep_spin_hamiltonian(const SpinGraph& g) {
    std::vector<InteractionTerm> terms;
    const Matrix bond = -2.0 * spin_dot(half(1), half(1)) + 0.5 * Matrix::Identity(4, 4);
    for (const auto& e : g.edges()) terms.push_back({{std::min(e.x, e.y), std::max(e.x, e.y)}, e.weight * bond});
    return Interaction("ssep_xxx", {}, std::move(terms));
}

struct ConjugacyReport {
    std::map<int, double> spectral_deviation;  // per n, max |sorted eigenvalue difference|
    std::map<int, double> matrix_deviation;    // per n, max entry difference under eta -> |eta>
    std::map<int, double> uniform_rayleigh;    // <1, L 1> / <1, 1>
    double max_deviation = 0.0;
};

/// Compares L on Omega_n with the spin Hamiltonian in sector M = n - |V|/2 for every n;
/// a particle at x is the spin-up state at x.
inline ConjugacyReport xxx_conjugacy_check(const SpinGraph& g, double tol = 1e-10, const SolverOptions& opt = {}) {
    if (!g.is_connected()) throw DomainError("xxx_conjugacy_check: graph must be connected");
    const int V = g.num_vertices();
    SpinGraph half_spins(V, g.edges());
    const SpinSpace space(half_spins);
    const auto H = assemble(ssep_spin_hamiltonian(half_spins), space);
    ConjugacyReport r;
    for (int n = 0; n <= V; ++n) {
        const ExclusionSpace ex(half_spins, n);
        const auto Lg = ssep_generator(ex);
        const auto sector = magnetization_sector(space, half(2 * n - V));
        const auto block = restrict_to_sector(H, sector);
        const auto a = full_spectrum(Lg, false, opt).eigenvalues;
        const auto b = full_spectrum(block, false, opt).eigenvalues;
        if (a.size() != b.size()) throw ConjugacyError("xxx_conjugacy_check: dimension mismatch at n=" + std::to_string(n), INFINITY);
        double dev = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
        r.spectral_deviation[n] = dev;

        // explicit basis map
        std::vector<std::size_t> to_sector(ex.size());
        for (std::size_t i = 0; i < ex.size(); ++i) {
            StateIndex s = 0;
            for (int x = 0; x < V; ++x)
                if (!((ex.configs()[i] >> x) & 1U)) s += space.stride(x);
            to_sector[i] = *sector.index_of(s);
        }
        const Matrix Ld = Lg.dense(), Bd = block.dense();
        double mdev = 0.0;
        for (std::size_t i = 0; i < ex.size(); ++i)
            for (std::size_t j = 0; j < ex.size(); ++j)
                mdev = std::max(mdev, std::abs(Ld(i, j) - Bd(to_sector[i], to_sector[j])));
        r.matrix_deviation[n] = mdev;

        const Vector ones = Vector::Ones(static_cast<Eigen::Index>(ex.size()));
        r.uniform_rayleigh[n] = ones.dot(Lg.apply(ones)).real() / static_cast<double>(ex.size());
        r.max_deviation = std::max({r.max_deviation, dev, mdev});
    }
    if (r.max_deviation > tol) {
        throw ConjugacyError("xxx_conjugacy_check: spectra differ by " + std::to_string(r.max_deviation), r.max_deviation);
    }
    return r;
}

/// mu_t = exp(-t L) mu_0 by spectral decomposition of the symmetric generator.
inline std::vector<double> semigroup_evolve(const SparseOperator& Lgen, const std::vector<double>& mu0, double t) {
    if (!(t >= 0.0)) throw DomainError("semigroup_evolve: t must be >= 0");
    if (static_cast<Eigen::Index>(mu0.size()) != Lgen.dim()) throw DomainError("semigroup_evolve: dimension mismatch");
    double total = 0.0;
    for (double p : mu0) {
        if (p < 0.0) throw DomainError("semigroup_evolve: initial measure has a negative entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("semigroup_evolve: initial measure does not sum to 1");
    if (!Lgen.is_real()) throw DomainError("semigroup_evolve: generator must be real");
    if (t == 0.0) return mu0;
    const RealMatrix d = Lgen.dense().real();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(d);
    const RealVector m0 = Eigen::Map<const RealVector>(mu0.data(), static_cast<Eigen::Index>(mu0.size()));
    RealVector coeff = es.eigenvectors().transpose() * m0;
    for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) *= std::exp(-t * es.eigenvalues()(i));
    const RealVector mt = es.eigenvectors() * coeff;
    return std::vector<double>(mt.data(), mt.data() + mt.size());
}

}  // namespace spinlab
