#include "oracles.hpp"
#include "spinlab/symmetry.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace spinlab;

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST(Su2Totals, CasimirExamples) {
    auto two = SpinSpace::uniform(2, half(1));
    auto t = su2_totals(two);
    auto ev = full_spectrum(t.C, false).eigenvalues;
    EXPECT_NEAR(ev[0], 0.0, 1e-14);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(ev[i], 2.0, 1e-14);
    EXPECT_LT(max_abs_entry(commutator(t.C, t.S3)), 1e-12);
    EXPECT_LT(max_abs_entry(commutator(t.S1, t.S2) - cplx(0, 1) * t.S3), 1e-14);

    auto five = SpinSpace::uniform(5, half(2));
    auto c5 = su2_totals(five).C;
    EXPECT_NEAR(full_spectrum(c5, false).eigenvalues.back(), 30.0, 1e-10);
    EXPECT_LT(max_abs(c5.dense() - (su2_totals(five).S1 * su2_totals(five).S1 + su2_totals(five).S2 * su2_totals(five).S2 +
                                    su2_totals(five).S3 * su2_totals(five).S3)
                                       .dense()),
              1e-12);
}

TEST(Su2Totals, HeisenbergCommutesWithCasimir) {
    auto g = ring_graph(5, half(2));
    SpinSpace space(g);
    auto H = assemble(heisenberg(g), space);
    auto t = su2_totals(space);
    EXPECT_LT(relative_commutator(H, t.C), 1e-14);
    EXPECT_LT(relative_commutator(H, t.S1), 1e-14);
}

TEST(SuqGenerators, CommutationRelation) {
    for (double q : {0.3, 0.5, 0.8}) {
        for (int L = 2; L <= 8; ++L) {
            auto p = XxzParams::from_q(L, q);
            auto g = suq2_generators(p);
            SpinSpace space(xxz_graph(p));
            auto Sp = assemble_full(space, g.Splus), Sm = assemble_full(space, g.Sminus);
            auto lhs = commutator(Sp, Sm).dense();
            Matrix rhs = Matrix::Zero(lhs.rows(), lhs.cols());
            for (StateIndex i = 0; i < space.total_dim(); ++i) {
                const double m = 0.5 * space.twice_magnetization(i);
                rhs(i, i) = (std::pow(q, 2 * m) - std::pow(q, -2 * m)) / (q - 1 / q);
            }
            EXPECT_LT(max_abs(lhs - rhs), 1e-10) << "q=" << q << " L=" << L;
        }
    }
}

TEST(SuqGenerators, ClassicalLimit) {
    auto p = XxzParams::from_q(4, 1.0 - 1e-9);
    auto g = suq2_generators(p);
    SpinSpace space(xxz_graph(p));
    auto Sp = assemble_full(space, g.Splus);
    auto classical = su2_totals(space);
    Matrix splus = (classical.S1 + cplx(0, 1) * classical.S2).dense();
    EXPECT_LT(max_abs(Sp.dense() - splus), 1e-7);
    EXPECT_THROW(suq2_generators(XxzParams{4, 1.0, 1.0, 1.0, 0.0, XxzBoundary::OpenWithField}), DomainError);
}

TEST(SuqGenerators, HamiltonianCommutesWithCasimir) {
    for (double q : {0.3, 0.5, 0.8}) {
        for (int L = 3; L <= 8; ++L) {
            auto p = XxzParams::from_q(L, q);
            SpinSpace space(xxz_graph(p));
            auto H = assemble(xxz(p), space);
            auto C = assemble_full(space, suq2_generators(p).Cq);
            EXPECT_LT(relative_commutator(H, C), 1e-12) << "q=" << q << " L=" << L;
        }
    }
}

TEST(SuqGenerators, CasimirSpectrumWithMultiplicities) {
    for (double q : {0.3, 0.5, 0.8}) {
        for (int L = 2; L <= 6; ++L) {
            auto p = XxzParams::from_q(L, q);
            SpinSpace space(xxz_graph(p));
            auto C = assemble_full(space, suq2_generators(p).Cq).dense();
            Eigen::ComplexEigenSolver<Matrix> es(C, false);
            std::vector<double> got;
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                EXPECT_LT(std::abs(es.eigenvalues()(i).imag()), 1e-8);
                got.push_back(es.eigenvalues()(i).real());
            }
            std::sort(got.begin(), got.end());
            // spin-1/2 chain: binom(L, L/2 - S) - binom(L, L/2 - S - 1) multiplets of spin S, each 2S+1 states
            std::vector<double> expected;
            for (int twiceS = L; twiceS >= 0; twiceS -= 2) {
                const int down = (L - twiceS) / 2;
                const long mult = binom(L, down) - binom(L, down - 1);
                const double d = 1 / q - q;
                const double c = (std::pow(q, -(twiceS + 1)) + std::pow(q, twiceS + 1)) / (d * d);
                for (long k = 0; k < mult * (twiceS + 1); ++k) expected.push_back(c);
            }
            std::sort(expected.begin(), expected.end());
            ASSERT_EQ(got.size(), expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-8 * std::max(1.0, expected[i]));
        }
    }
}

TEST(Classify, TwoSiteFerro) {
    auto g = path_graph(2);
    auto levels = classify_su2(heisenberg(g), SpinSpace(g));
    EXPECT_NEAR(levels.min_energy.at(half(2)), -0.25, 1e-12);
    EXPECT_NEAR(levels.min_energy.at(half(0)), 0.75, 1e-12);
    EXPECT_EQ(levels.multiplet_counts.at(half(2)), 1);
    EXPECT_EQ(levels.multiplet_counts.at(half(0)), 1);
}

TEST(Classify, SpinOneChainFiveSites) {
    auto g = path_graph(5, half(2));
    auto levels = classify_su2(heisenberg(g), SpinSpace(g));
    ASSERT_EQ(levels.min_energy.size(), 6u);
    for (int S = 5; S >= 1; --S) EXPECT_LT(levels.min_energy.at(half(2 * S)), levels.min_energy.at(half(2 * S - 2)));
    EXPECT_NEAR(levels.min_energy.at(half(10)), -4.0, 1e-12);
    EXPECT_EQ(levels.S_max, half(10));
    for (const auto& [S, r] : levels.casimir_residuals) EXPECT_LT(r, 1e-8);
}

TEST(Classify, OpenXxzTable) {
    auto p = XxzParams::from_q(4, 0.5);
    auto levels = classify_suq2(p);
    ASSERT_EQ(levels.min_energy.size(), 3u);
    EXPECT_NEAR(levels.min_energy.at(half(4)), 0.0, 1e-12);
    EXPECT_LT(levels.min_energy.at(half(4)), levels.min_energy.at(half(2)));
    EXPECT_LT(levels.min_energy.at(half(2)), levels.min_energy.at(half(0)));
}

TEST(Classify, MultipletCompletenessOnRandomSystems) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> w(0.2, 2.0);
    int checked = 0;
    while (checked < 12) {
        const int L = 2 + static_cast<int>(rng() % 5);
        std::vector<HalfInteger> spins;
        for (int x = 0; x < L; ++x) spins.push_back(half(1 + static_cast<int>(rng() % 3)));
        SpinSpace space(spins);
        if (space.total_dim() > 1024) continue;
        std::vector<Edge> edges;
        for (int x = 0; x + 1 < L; ++x) edges.push_back({x, x + 1, w(rng)});
        SpinGraph g(L, edges, spins);
        ClassifyOptions opt;
        opt.sectors = SectorSelection::All;
        auto levels = classify_su2(heisenberg(g), space, opt);
        std::size_t labelled = levels.levels.size();
        EXPECT_EQ(labelled, space.total_dim());
        for (auto S : levels.grid()) {
            EXPECT_EQ(levels.multiplet_counts.at(S), levels.expected_counts.at(S));
            // each spin-S multiplet contributes 2S+1 labelled states across sectors
            long total = 0;
            for (const auto& lv : levels.levels) total += lv.S == S;
            EXPECT_EQ(total, levels.expected_counts.at(S) * (S.twice() + 1));
        }
        // full-space route agrees
        auto H = assemble(heisenberg(g), space);
        auto alt = classify_total_spin(space, H, su2_totals(space).C, su2_casimir());
        for (const auto& [S, e] : alt.min_energy) EXPECT_NEAR(e, levels.min_energy.at(S), 1e-10);
        ++checked;
    }
}

TEST(Classify, RejectsNonCommutingCasimir) {
    auto space = SpinSpace::uniform(3, half(1));
    std::vector<ProductTerm> h{{1.0, {LocalFactor{{0}, spin_matrices(0.5).S3}}}};
    EXPECT_THROW(classify_total_spin(space, h, su2_casimir_terms(space), su2_casimir()), DomainError);
}

TEST(Foel, Examples) {
    std::map<HalfInteger, double> tie{{half(2), 0.0}, {half(0), 0.0}};
    auto v = foel_check(tie);
    EXPECT_FALSE(v.holds);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_EQ(v.witness->S, half(2));
    EXPECT_EQ(v.witness->S_prime, half(0));

    std::map<HalfInteger, double> af{{half(0), -0.75}, {half(2), 0.25}};
    EXPECT_FALSE(foel_check(af).holds);

    std::map<HalfInteger, double> gap{{half(4), 0.0}, {half(0), 1.0}};
    EXPECT_THROW(foel_check(gap), IncompleteTableError);
}

TEST(Foel, FerromagneticChainsAndGapStatement) {
    for (int twice_s : {1, 2}) {
        for (int L = 2; L <= 6; ++L) {
            auto g = path_graph(L, half(twice_s));
            SpinSpace space(g);
            auto levels = classify_su2(heisenberg(g), space);
            auto v = foel_check(levels);
            EXPECT_TRUE(v.holds) << "L=" << L << " 2s=" << twice_s;
            EXPECT_GT(v.margin, 1e-9);
            EXPECT_FALSE(v.witness.has_value());
            auto gap = spectral_gap(full_spectrum(assemble(heisenberg(g), space), false));
            const auto Smax = levels.S_max;
            EXPECT_NEAR(gap.gap, levels.min_energy.at(Smax - half(2)) - levels.min_energy.at(Smax), 1e-9);
        }
    }
}

TEST(Foel, OpenSuqChains) {
    for (double q : {0.3, 0.5, 0.8}) {
        for (int L = 2; L <= 10; ++L) {
            auto levels = classify_suq2(XxzParams::from_q(L, q));
            auto v = foel_check(levels);
            EXPECT_TRUE(v.holds) << "q=" << q << " L=" << L;
        }
    }
}

TEST(LiebMattis, SpinHalfChainFour) {
    auto g = path_graph(4);
    auto r = lieb_mattis_check(g);
    EXPECT_EQ(r.ground_spin, half(0));
    EXPECT_TRUE(r.verdict.holds);
    EXPECT_LT(r.levels.min_energy.at(half(0)), r.levels.min_energy.at(half(2)));
    EXPECT_LT(r.levels.min_energy.at(half(2)), r.levels.min_energy.at(half(4)));
    auto oracle = oracles::hermitian_eigenvalues(oracles::heisenberg(4, 1, oracles::chain_edges(4, false, -1.0)));
    EXPECT_NEAR(r.levels.ground_energy(), oracle.front(), 1e-10);
    EXPECT_NEAR(r.levels.min_energy.at(half(0)), oracle.front(), 1e-10);
}

TEST(LiebMattis, TwoSiteAndSpinOneChain) {
    auto r2 = lieb_mattis_check(path_graph(2));
    EXPECT_EQ(r2.ground_spin, half(0));
    EXPECT_NEAR(r2.levels.ground_energy(), -0.75, 1e-12);
    EXPECT_TRUE(r2.verdict.holds);

    auto r = lieb_mattis_check(path_graph(4, half(2)));
    EXPECT_EQ(r.ground_spin, half(0));
    EXPECT_TRUE(r.verdict.holds);
    auto oracle = oracles::hermitian_eigenvalues(oracles::heisenberg(4, 2, oracles::chain_edges(4, false, -1.0)));
    EXPECT_NEAR(r.levels.ground_energy(), oracle.front(), 1e-10);

    EXPECT_THROW(lieb_mattis_check(ring_graph(5)), DomainError);
    EXPECT_THROW(lieb_mattis_check(path_graph(4), {{0, 1, 1.0}}), DomainError);
}

TEST(LiebMattis, IntraPartCouplings) {
    // star with hub 0: A = {0}, B = leaves; ferro bonds among the leaves
    auto g = star_graph(4);
    auto r = lieb_mattis_check(g, {}, {{1, 2, 0.5}, {2, 3, 0.5}});
    EXPECT_EQ(r.ground_spin, half(2));
    EXPECT_TRUE(r.verdict.holds);
}

TEST(LiebMattis, TopOfFerroSpectrumDecreasing) {
    auto g = path_graph(5, half(2));
    auto levels = classify_su2(heisenberg(g), SpinSpace(g));
    EXPECT_EQ(bipartite_spin_imbalance(g), half(2));
    auto v = top_levels_decreasing(levels, bipartite_spin_imbalance(g));
    EXPECT_TRUE(v.holds);
    EXPECT_GT(v.margin, 1e-9);
}
