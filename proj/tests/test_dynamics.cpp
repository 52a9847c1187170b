#include "oracles.hpp"
#include "spinlab/dynamics.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace spinlab;

namespace {

Matrix random_matrix(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
    return a;
}

Matrix oracle_evolve(const Matrix& H, const Matrix& A, double t) {
    const Matrix U = oracles::cexpm(cplx(0, t) * H);
    return U * A * U.adjoint();
}

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Evolution, ZeroTimeIsExact) {
    auto g = path_graph(3);
    SpinSpace space(g);
    auto H = assemble(heisenberg(g), space);
    auto A = embed_at(space, 1, spin_matrices(half(1)).S1);
    auto At = evolve_observable(H, A, 0.0);
    EXPECT_EQ(max_diff(At.dense(), A.dense()), 0.0);
}

TEST(Evolution, MatchesMatrixExponential) {
    std::mt19937_64 rng(2);
    auto g = path_graph(4);
    SpinSpace space(g);
    auto H = assemble(heisenberg(g), space);
    const Matrix Hd = H.dense();
    auto es = EigenSystem::of(H);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix A = random_matrix(16, rng), B = random_matrix(16, rng);
        const double t = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
        const Matrix At = evolve_dense(es, A, t);
        EXPECT_LT(max_diff(At, oracle_evolve(Hd, A, t)), 1e-10);
        // automorphism and isometry
        EXPECT_LT(max_diff(evolve_dense(es, A * B, t), At * evolve_dense(es, B, t)), 1e-9);
        EXPECT_NEAR(oracles::opnorm(At), oracles::opnorm(A), 1e-10);
        EXPECT_LT(max_diff(evolve_dense(es, A.adjoint(), t), At.adjoint()), 1e-10);
    }
}

TEST(Evolution, GroupProperty) {
    std::mt19937_64 rng(5);
    auto g = ring_graph(4, half(2));
    SpinSpace space(g);
    auto es = EigenSystem::of(assemble(aklt(4, true), space));
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix A = random_matrix(81, rng);
        const double s = 0.3 * trial - 1.0, t = 0.7 - 0.1 * trial;
        EXPECT_LT(max_diff(evolve_dense(es, evolve_dense(es, A, t), s), evolve_dense(es, A, s + t)), 1e-9);
    }
}

TEST(Evolution, RefusesLargeSystems) {
    SolverOptions opt;
    opt.dense_cutoff = 8;
    auto g = path_graph(4);
    SpinSpace space(g);
    EXPECT_THROW(EigenSystem::of(assemble(heisenberg(g), space), opt), ResourceError);
}

TEST(HermitianBasis, GellMannSet) {
    for (int n : {2, 3, 4}) {
        auto basis = hermitian_basis(n);
        ASSERT_EQ(static_cast<int>(basis.size()), n * n - 1);
        Eigen::MatrixXcd stacked(n * n, n * n);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            EXPECT_LT(max_diff(basis[k], basis[k].adjoint()), 1e-15);
            EXPECT_NEAR(oracles::opnorm(basis[k]), 1.0, 1e-14);
            EXPECT_NEAR(std::abs(basis[k].trace()), 0.0, 1e-14);
            stacked.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXcd>(basis[k].data(), n * n);
        }
        stacked.col(n * n - 1) = Eigen::Map<const Eigen::VectorXcd>(Matrix::Identity(n, n).eval().data(), n * n);
        EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXcd>(stacked).rank(), n * n);
    }
}

TEST(HermitianNorm, AgreesWithSvd) {
    std::mt19937_64 rng(9);
    for (int n : {1, 5, 40, 120}) {
        const Matrix h = oracles::random_hermitian(n, rng);
        const double est = hermitian_norm([&](const Vector& v) { return Vector(h * v); }, n);
        EXPECT_NEAR(est, oracles::opnorm(h), 1e-9 * oracles::opnorm(h));
    }
}

TEST(Commutator, DisjointSupportsVanishAtZeroTime) {
    auto g = path_graph(5);
    SpinSpace space(g);
    auto H = assemble(heisenberg(g), space);
    auto B = embed_at(space, 0, spin_matrices(half(1)).S3);
    LightconeEngine engine(H, space, B);
    for (Vertex x = 1; x < 5; ++x) {
        engine.prepare(x);
        EXPECT_EQ(engine.measure(x, 0.0), 0.0);
    }
    engine.prepare(0);
    EXPECT_NEAR(engine.measure(0, 0.0), 1.0, 1e-12);
    LightconeEngine fresh(H, space, B);
    EXPECT_THROW(fresh.measure(1, 0.1), DomainError);
}

TEST(Commutator, MatchesBruteForce) {
    auto g = path_graph(4);
    SpinSpace space(g);
    auto H = assemble(heisenberg(g), space);
    const Matrix Bd = oracles::embed({2, 2, 2, 2}, {{3, oracles::spin(1).z}});
    auto B = SparseOperator::from_dense(Bd, true);
    LightconeEngine engine(H, space, B);
    for (Vertex x = 0; x < 4; ++x) {
        engine.prepare(x);
        for (double t : {0.1, 0.4, 1.5}) {
            double expected = 0.0;
            for (const auto& m : hermitian_basis(2)) {
                const Matrix At = oracle_evolve(H.dense(), oracles::embed({2, 2, 2, 2}, {{x, m}}), t);
                expected = std::max(expected, oracles::opnorm(At * Bd - Bd * At));
            }
            EXPECT_NEAR(engine.measure(x, t), expected, 1e-9) << "x=" << x << " t=" << t;
        }
    }
}

TEST(LiebRobinson, SpinHalfChainRespectsBound) {
    auto g = path_graph(8);
    const std::vector<Vertex> xs{0, 1, 2, 3, 4, 5, 6, 7};
    const std::vector<double> ts{0.0, 0.02, 0.05, 0.1, 0.2, 0.5};
    auto grid = lightcone_grid(heisenberg(g), g, {{0}, spin_matrices(half(1)).S3}, 1.0, xs, ts, 2);
    EXPECT_EQ(grid.violations, 0);
    EXPECT_EQ(grid.max_zero_time_outside, 0.0);
    ASSERT_EQ(grid.rows.size(), xs.size() * ts.size());
    for (const auto& r : grid.rows) {
        EXPECT_LE(r.measured, r.bound_thm1 + 1e-9);
        if (r.x != 0) EXPECT_LE(r.measured, r.bound_corollary + 1e-9);
    }
    // growth with time far from B
    double early = 0.0, late = 0.0;
    for (const auto& r : grid.rows) {
        if (r.x == 3 && r.t == 0.05) early = r.measured;
        if (r.x == 3 && r.t == 0.5) late = r.measured;
    }
    EXPECT_GT(late, early);
}

TEST(LiebRobinson, SpinOneChainRespectsBound) {
    auto g = aklt_graph(5, false);
    const std::vector<Vertex> xs{0, 1, 2, 3, 4};
    const std::vector<double> ts{0.0, 0.01, 0.05, 0.2};
    auto grid = lightcone_grid(aklt(5), g, {{2}, spin_matrices(half(2)).S3}, 1.0, xs, ts);
    EXPECT_EQ(grid.violations, 0);
    EXPECT_EQ(grid.max_zero_time_outside, 0.0);
}

TEST(LiebRobinson, BoundFormulas) {
    // ||Phi||_1 = 48e for the spin-1/2 chain: 2(e^{0.96 e} - 1) e^{-3} at t = 0.01, d = 3
    const double phi = 48.0 * std::numbers::e;
    EXPECT_NEAR(lr_corollary_bound(1, 1.0, 1.0, phi, 1.0, 3, 0.01), 2.0 * std::expm1(0.96 * std::numbers::e) * std::exp(-3.0), 1e-14);
    EXPECT_NEAR(lr_corollary_bound(1, 1.0, 1.0, phi, 1.0, 3, 0.01), 1.256, 3e-3);
    EXPECT_EQ(lr_corollary_bound(2, 1.0, 1.0, phi, 1.0, 1, 0.0), 0.0);

    auto g = path_graph(4);
    const std::vector<Vertex> Y{0};
    auto profile = default_profile(g, Y, 0.5);
    EXPECT_EQ(profile, (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
    EXPECT_EQ(lr_bound_rhs(phi, 1.0, g, 0, profile, 0.0), 1.0);
    EXPECT_EQ(lr_bound_rhs(phi, 1.0, g, 2, profile, 0.0), 0.0);
    EXPECT_NEAR(lr_bound_rhs(phi, 1.0, g, 2, profile, 0.1), std::exp(-2.0) * std::expm1(0.2 * phi), 1e-9);
    EXPECT_THROW(lr_bound_rhs(phi, 0.0, g, 2, profile, 0.1), DomainError);

    const std::vector<double> site{0.5, 0.25};
    EXPECT_DOUBLE_EQ(lr_multisite_bound(2, 2, 3.0, site), 16.0 * 3.0 * 0.75);
}

TEST(Clustering, MuAndWindow) {
    EXPECT_NEAR(clustering_mu(2.0, 1.0, 10.0), 2.0 / 42.0, 1e-15);
    EXPECT_NEAR(clustering_mu(1.0, 1.0, 48.0 * std::numbers::e), 1.0 / (192.0 * std::numbers::e + 1.0), 1e-15);
    EXPECT_THROW(clustering_mu(0.0, 1.0, 1.0), DomainError);
    const double mu = clustering_mu(2.0, 1.0, 10.0);
    EXPECT_NEAR(clustering_b_max(mu, 2.0, 3), 3.0 * mu, 1e-15);
    EXPECT_NEAR(decay_bound(1.0, mu, 2.0, 3, 0.0), std::exp(-3.0 * mu), 1e-15);
    // at the end of the window the exponent doubles
    EXPECT_NEAR(decay_bound(1.0, mu, 2.0, 3, clustering_b_max(mu, 2.0, 3)), std::exp(-6.0 * mu), 1e-15);
}

TEST(Clustering, DegenerateGroundStateRejected) {
    auto g = path_graph(4);
    SpinSpace space(g);
    auto terms = heisenberg(g).product_terms();
    EXPECT_THROW(find_ground_state(space, terms, std::nullopt), DegenerateSpectrumError);
}

TEST(Clustering, KrylovAgreesWithDense) {
    auto g = aklt_graph(6, true);
    SpinSpace space(g);
    auto terms = aklt(6, true).product_terms();
    auto dense = find_ground_state(space, terms, half(0));
    SolverOptions opt;
    opt.dense_cutoff = 16;
    auto krylov = find_ground_state(space, terms, half(0), opt);
    EXPECT_FALSE(krylov.dense.has_value());
    EXPECT_NEAR(dense.energy, 0.0, 1e-10);
    EXPECT_NEAR(krylov.gap, dense.gap, 1e-8);
    const Matrix S3 = spin_matrices(half(2)).S3;
    const std::vector<double> bs{0.0, 0.3, 1.0, 4.0};
    for (Vertex y = 1; y < 6; ++y) {
        auto a = ground_correlations(dense, {{0}, S3}, {{y}, S3}, bs);
        auto b = ground_correlations(krylov, {{0}, S3}, {{y}, S3}, bs);
        for (std::size_t k = 0; k < bs.size(); ++k) EXPECT_NEAR(std::abs(a[k] - b[k]), 0.0, 1e-9);
    }
    EXPECT_THROW(ground_correlation(dense, {{0}, S3}, {{1}, S3}, -1.0), DomainError);
}

TEST(Clustering, AkltRingObeysDecayBound) {
    const int L = 8;
    auto g = aklt_graph(L, true);
    SpinSpace space(g);
    const auto phi = aklt(L, true);
    auto terms = phi.product_terms();
    auto gs = find_ground_state(space, terms, half(0));
    EXPECT_NEAR(gs.energy, 0.0, 1e-10);
    EXPECT_GT(gs.gap, 0.3);
    const Matrix S3 = spin_matrices(half(2)).S3;
    const double norm = lambda_norm(phi, 1.0, g);
    EXPECT_NEAR(norm, 324.0 * std::numbers::e, 1e-9);
    auto r = clustering_report(gs, g, S3, S3, 1.0, norm);
    EXPECT_FALSE(r.gap_too_small);
    EXPECT_GT(r.c_fit, 0.0);
    EXPECT_LT(r.zerob_max_deviation, 1e-10);
    EXPECT_LT(r.zerob_max_imag, 1e-10);
    EXPECT_TRUE(r.decay_holds);
    EXPECT_TRUE(r.large_b_holds);
    EXPECT_GT(r.asserted_points, 0);
    // exact AKLT value <S3_0 S3_d> = 4/3 (-1/3)^d on the infinite chain; check sign alternation
    double c1 = 0.0, c2 = 0.0;
    for (const auto& row : r.rows) {
        if (row.x == 0 && row.y == 1 && row.b == 0.0 && !row.large_b) c1 = row.corr_abs;
        if (row.x == 0 && row.y == 2 && row.b == 0.0 && !row.large_b) c2 = row.corr_abs;
    }
    EXPECT_GT(c1, c2);
    const cplx direct = truncated_correlation(gs, {{0}, S3}, {{1}, S3});
    EXPECT_LT(direct.real(), 0.0);
}

TEST(Clustering, GapTrend) {
    EXPECT_TRUE(gap_trend({4, 6, 8}, {1.0, 0.6, 0.3}).shrinking);
    EXPECT_FALSE(gap_trend({4, 6, 8}, {0.4, 0.37, 0.35}).shrinking);
    EXPECT_THROW(gap_trend({4}, {1.0}), DomainError);
}
