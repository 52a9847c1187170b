#include "oracles.hpp"
#include "spinlab/ssep.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace spinlab;

namespace {

SpinGraph random_connected(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> rate(0.1, 2.0);
    std::vector<Edge> edges;
    // random spanning tree, then extra edges
    for (int x = 1; x < n; ++x) edges.push_back({static_cast<int>(rng() % x), x, rate(rng)});
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            bool present = false;
            for (const auto& e : edges) present |= (e.x == x && e.y == y);
            if (!present && rng() % 3 == 0) edges.push_back({x, y, rate(rng)});
        }
    return SpinGraph(n, edges);
}

SpinGraph random_path(int L, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> rate(0.1, 2.0);
    std::vector<Edge> edges;
    for (int x = 0; x + 1 < L; ++x) edges.push_back({x, x + 1, rate(rng)});
    return SpinGraph(L, edges);
}

/// Weighted graph Laplacian, the one-particle generator, built independently.
oracles::RealMatrix laplacian(const SpinGraph& g) {
    const int n = g.num_vertices();
    oracles::RealMatrix L = oracles::RealMatrix::Zero(n, n);
    for (const auto& e : g.edges()) {
        L(e.x, e.x) += e.weight;
        L(e.y, e.y) += e.weight;
        L(e.x, e.y) -= e.weight;
        L(e.y, e.x) -= e.weight;
    }
    return L;
}

}  // namespace

TEST(ExclusionSpace, CountsAndOrder) {
    auto g = path_graph(6);
    for (int n = 0; n <= 6; ++n) {
        ExclusionSpace s(g, n);
        long expected = 1;
        for (int i = 1; i <= n; ++i) expected = expected * (6 - n + i) / i;
        EXPECT_EQ(static_cast<long>(s.size()), expected);
        EXPECT_TRUE(std::is_sorted(s.configs().begin(), s.configs().end()));
        for (auto c : s.configs()) EXPECT_EQ(std::popcount(c), n);
    }
    EXPECT_THROW(ExclusionSpace(g, 7), DomainError);
    EXPECT_THROW(ExclusionSpace(g, -1), DomainError);
    EXPECT_THROW(ExclusionSpace(SpinGraph(2, {{0, 1, 0.0}}), 1), DomainError);
}

TEST(SsepGenerator, Examples) {
    auto two = ssep_generator(ExclusionSpace(path_graph(2), 1)).dense();
    Matrix expected(2, 2);
    expected << 1, -1, -1, 1;
    EXPECT_EQ((two - expected).cwiseAbs().maxCoeff(), 0.0);

    auto p3 = ssep_generator(ExclusionSpace(path_graph(3), 1));
    auto ev = full_spectrum(p3, false).eigenvalues;
    auto oracle = oracles::jacobi_eigenvalues(laplacian(path_graph(3)));
    ASSERT_EQ(ev.size(), 3u);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(ev[i], oracle[i], 1e-12);
    EXPECT_NEAR(ev[0], 0.0, 1e-12);
    EXPECT_NEAR(ev[1], 1.0, 1e-12);
    EXPECT_NEAR(ev[2], 3.0, 1e-12);
}

TEST(SsepGenerator, RowSumsSymmetryAndPositivity) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = random_connected(3 + static_cast<int>(rng() % 4), rng);
        for (int n = 0; n <= g.num_vertices(); ++n) {
            auto L = ssep_generator(ExclusionSpace(g, n)).dense();
            EXPECT_LT(L.rowwise().sum().cwiseAbs().maxCoeff(), 1e-14);
            EXPECT_EQ((L - L.transpose()).cwiseAbs().maxCoeff(), 0.0);
            auto ev = full_spectrum(SparseOperator::from_dense(L, true), false).eigenvalues;
            EXPECT_GT(ev.front(), -1e-12);
            // particle-hole symmetry
            auto hole = full_spectrum(ssep_generator(ExclusionSpace(g, g.num_vertices() - n)), false).eigenvalues;
            ASSERT_EQ(hole.size(), ev.size());
            for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], hole[i], 1e-12);
        }
    }
}

TEST(SsepGaps, Examples) {
    auto k3 = ssep_gaps(complete_graph(3));
    EXPECT_NEAR(k3.gaps.at(1), 3.0, 1e-12);
    EXPECT_NEAR(k3.gaps.at(2), 3.0, 1e-12);
    auto p3 = ssep_gaps(path_graph(3));
    EXPECT_NEAR(p3.gaps.at(1), 1.0, 1e-12);
    EXPECT_NEAR(p3.gaps.at(2), 1.0, 1e-12);
    EXPECT_LT(p3.aldous_margin, 1e-12);
    for (const auto& [n, s] : p3.stationary_checks) EXPECT_LT(s, 1e-14);
    EXPECT_THROW(ssep_gaps(SpinGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}})), DomainError);
}

TEST(SsepGaps, OneParticleGapIsLaplacianGap) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = random_connected(3 + static_cast<int>(rng() % 5), rng);
        auto oracle = oracles::jacobi_eigenvalues(laplacian(g));
        EXPECT_NEAR(ssep_gaps(g).gaps.at(1), oracle[1], 1e-10);
    }
}

// The identity lambda(n) = lambda(1) on chains, where it follows from FOEL.
TEST(SsepGaps, AldousOnRandomPaths) {
    std::mt19937_64 rng(12);
    for (int L = 3; L <= 8; ++L) {
        for (int trial = 0; trial < 3; ++trial) {
            auto r = ssep_gaps(random_path(L, rng));
            EXPECT_LT(r.aldous_margin, 1e-9) << "L=" << L;
        }
    }
}

TEST(SsepGaps, ParallelWidthDoesNotChangeResults) {
    std::mt19937_64 rng(4);
    auto g = random_connected(7, rng);
    auto a = ssep_gaps(g, 1), b = ssep_gaps(g, 4);
    for (const auto& [n, v] : a.gaps) EXPECT_EQ(v, b.gaps.at(n));
}

TEST(Conjugacy, Examples) {
    auto r = xxx_conjugacy_check(path_graph(2));
    EXPECT_LT(r.max_deviation, 1e-12);
    auto L = full_spectrum(ssep_generator(ExclusionSpace(path_graph(2), 1)), false).eigenvalues;
    EXPECT_NEAR(L[0], 0.0, 1e-14);
    EXPECT_NEAR(L[1], 2.0, 1e-14);
    for (const auto& [n, q] : r.uniform_rayleigh) EXPECT_NEAR(q, 0.0, 1e-14);
}

TEST(Conjugacy, PathFourAgainstDenseSpinOracle) {
    auto g = path_graph(4);
    auto r = xxx_conjugacy_check(g);
    EXPECT_LT(r.max_deviation, 1e-10);
    // union over n of the exclusion spectra = spectrum of the dense 16x16 spin Hamiltonian
    std::vector<std::tuple<int, int, double>> edges;
    for (const auto& e : g.edges()) edges.emplace_back(e.x, e.y, 2.0 * e.weight);
    oracles::Matrix H = oracles::heisenberg(4, 1, edges) + 0.5 * 3 * oracles::Matrix::Identity(16, 16);
    auto oracle = oracles::hermitian_eigenvalues(H);
    std::vector<double> all;
    for (int n = 0; n <= 4; ++n) {
        auto ev = full_spectrum(ssep_generator(ExclusionSpace(g, n)), false).eigenvalues;
        all.insert(all.end(), ev.begin(), ev.end());
    }
    std::sort(all.begin(), all.end());
    ASSERT_EQ(all.size(), oracle.size());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_NEAR(all[i], oracle[i], 1e-10);
}

TEST(Conjugacy, RandomRates) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        auto g = random_connected(5, rng);
        EXPECT_LT(xxx_conjugacy_check(g).max_deviation, 1e-10);
    }
}

TEST(Semigroup, TwoSiteClosedForm) {
    auto L = ssep_generator(ExclusionSpace(path_graph(2), 1));
    auto m0 = semigroup_evolve(L, {1.0, 0.0}, 0.0);
    EXPECT_EQ(m0, (std::vector<double>{1.0, 0.0}));
    for (double t : {0.1, 0.5, 2.0}) {
        auto m = semigroup_evolve(L, {1.0, 0.0}, t);
        EXPECT_NEAR(m[0], 0.5 + 0.5 * std::exp(-2 * t), 1e-14);
        EXPECT_NEAR(m[1], 0.5 - 0.5 * std::exp(-2 * t), 1e-14);
    }
    EXPECT_THROW(semigroup_evolve(L, {1.0, 0.0}, -1.0), DomainError);
    EXPECT_THROW(semigroup_evolve(L, {0.7, 0.7}, 1.0), DomainError);
}

TEST(Semigroup, PositivityMassAndRelaxation) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        auto g = random_connected(5, rng);
        const int n = 1 + static_cast<int>(rng() % 3);
        ExclusionSpace space(g, n);
        auto L = ssep_generator(space);
        const double lambda = ssep_gap(space);
        std::vector<double> mu0(space.size());
        double total = 0.0;
        for (auto& p : mu0) total += (p = u(rng));
        for (auto& p : mu0) p /= total;
        double s = 0.0;
        for (double p : mu0) s += p;
        mu0[0] += 1.0 - s;
        const double uni = 1.0 / static_cast<double>(space.size());
        double d0 = 0.0;
        for (double p : mu0) d0 += (p - uni) * (p - uni);
        const oracles::RealMatrix Ld = L.dense().real();
        for (double t : {0.05, 0.5, 2.0, 10.0}) {
            auto mt = semigroup_evolve(L, mu0, t);
            double mass = 0.0, dt = 0.0;
            for (double p : mt) {
                EXPECT_GE(p, -1e-12);
                mass += p;
                dt += (p - uni) * (p - uni);
            }
            EXPECT_NEAR(mass, 1.0, 1e-12);
            EXPECT_LE(std::sqrt(dt), std::exp(-lambda * t) * std::sqrt(d0) + 1e-12);
            // independent exponential
            const oracles::RealMatrix E = oracles::expm(-t * Ld);
            for (std::size_t i = 0; i < mt.size(); ++i) {
                double ref = 0.0;
                for (std::size_t j = 0; j < mt.size(); ++j) ref += E(i, j) * mu0[j];
                EXPECT_NEAR(mt[i], ref, 1e-10);
            }
        }
    }
}
