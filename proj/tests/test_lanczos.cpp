#include "hlsvd/errors.hpp"
#include "hlsvd/lanczos.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

using namespace hlsvd;

namespace
{

std::vector<Complex> random_signal(std::mt19937_64& rng, std::size_t n)
{
    std::normal_distribution<double> g;
    std::vector<Complex> v(n);
    for (auto& z : v)
        z = {g(rng), g(rng)};
    return v;
}

double orthogonality_error(const Eigen::MatrixXcd& q)
{
    const Eigen::MatrixXcd g = q.adjoint() * q;
    return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

// Largest principal angle sine between the column spaces of a and b.
double subspace_sine(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    const Eigen::MatrixXcd p = a - b * (b.adjoint() * a);
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(p).singularValues()(0);
}

} // namespace

TEST(DenseOracle, SmallDiagonals)
{
    const auto id = dense_svd_oracle(Eigen::MatrixXcd::Identity(3, 3));
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(id.S(i), 1.0, 1e-15);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = 3.0;
    d(2, 2) = 2.0;
    const auto s = dense_svd_oracle(d);
    EXPECT_NEAR(s.S(0), 3.0, 1e-15);
    EXPECT_NEAR(s.S(1), 2.0, 1e-15);
    EXPECT_NEAR(s.S(2), 1.0, 1e-15);
}

TEST(DenseOracle, RandomSquareIsOrthonormalAndReconstructs)
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(20, 20);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a(i) = {g(rng), g(rng)};
    const auto s = dense_svd_oracle(a);
    EXPECT_LE(orthogonality_error(s.U), 1e-12);
    EXPECT_LE(orthogonality_error(s.V), 1e-12);
    const Eigen::MatrixXcd r = s.U * s.S.asDiagonal() * s.V.adjoint();
    EXPECT_LE((a - r).norm(), 1e-12 * a.norm());
}

TEST(DenseOracle, TooLarge)
{
    try {
        dense_svd_oracle(Eigen::MatrixXcd::Zero(600, 513));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
    }
}

TEST(Lanczos, SingleExponentialHasRankOne)
{
    const Complex z = std::exp(Complex(-0.01, 0.3));
    std::vector<Complex> s(64);
    for (std::size_t n = 0; n < s.size(); ++n)
        s[n] = std::pow(z, static_cast<double>(n));
    const auto op = build_hankel(s);
    const auto svd = lanczos_svd(op, 3);
    ASSERT_GE(svd.k(), 3u);
    EXPECT_GT(svd.S(0), 0.0);
    EXPECT_LT(svd.S(1), 1e-10 * svd.S(0));
    EXPECT_LT(svd.S(2), 1e-10 * svd.S(0));
}

TEST(Lanczos, MatchesDenseOracleOnRandomHankels)
{
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        const auto s = random_signal(rng, 128);
        const auto op = build_hankel(s, 64);
        ASSERT_EQ(op.rows(), 64u);
        ASSERT_EQ(op.cols(), 65u);
        const auto l = lanczos_svd(op, 10);
        const auto d = dense_svd_oracle(op.to_dense());
        for (int i = 0; i < 10; ++i)
            EXPECT_LE(std::abs(l.S(i) - d.S(i)), 1e-8 * d.S(i)) << rep << ' ' << i;
        EXPECT_LE(orthogonality_error(l.U), 1e-8);
        EXPECT_LE(orthogonality_error(l.V), 1e-8);
    }
}

TEST(Lanczos, SingularSubspacesMatchOracle)
{
    std::mt19937_64 rng(3);
    for (std::size_t N : {40u, 101u, 255u}) {
        const auto s = random_signal(rng, N);
        const auto op = build_hankel(s);
        const std::size_t k = 6;
        const auto l = lanczos_svd(op, k);
        const auto d = dense_svd_oracle(op.to_dense());
        // Random spectra are simple, so each triplet is its own group.
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
            EXPECT_LE(subspace_sine(l.U.col(i), d.U.col(i)), 1e-6) << N << ' ' << i;
            EXPECT_LE(subspace_sine(l.V.col(i), d.V.col(i)), 1e-6) << N << ' ' << i;
        }
    }
}

TEST(Lanczos, NumericalRankOfFiveComponentSignal)
{
    std::mt19937_64 rng(4);
    AngularGrid g(0.3, 0.001, 256);
    const auto m = test::random_model(rng, 5, g);
    const auto p = test::real_profile(m, g);
    const auto op = build_hankel(std::span<const double>(p.values));
    const auto svd = lanczos_svd(op, 6);
    EXPECT_GT(svd.S(4) / svd.S(0), 1e-8);
    EXPECT_LT(svd.S(5) / svd.S(0), 1e-10);
}

TEST(Lanczos, DeterministicForFixedSeed)
{
    std::mt19937_64 rng(5);
    const auto s = random_signal(rng, 200);
    const auto op = build_hankel(s);
    LanczosOptions o;
    o.seed = 42;
    const auto a = lanczos_svd(op, 8, o);
    const auto b = lanczos_svd(op, 8, o);
    EXPECT_EQ(a.S, b.S);
    EXPECT_EQ(a.U, b.U);
    EXPECT_EQ(a.V, b.V);
}

TEST(Lanczos, InvalidK)
{
    std::mt19937_64 rng(6);
    const auto s = random_signal(rng, 20);
    const auto op = build_hankel(s);
    EXPECT_THROW(lanczos_svd(op, 0), Error);
    EXPECT_THROW(lanczos_svd(op, std::min(op.rows(), op.cols()) + 1), Error);
}

TEST(Lanczos, NoConvergenceCarriesPartialResult)
{
    std::mt19937_64 rng(7);
    const auto s = random_signal(rng, 300);
    const auto op = build_hankel(s);
    LanczosOptions o;
    o.max_iter = 12;
    o.tol = 1e-15;
    try {
        lanczos_svd(op, 10, o);
        FAIL() << "expected NoConvergence";
    } catch (const NoConvergenceError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
        EXPECT_EQ(e.max_iter(), 12u);
        EXPECT_GT(e.partial().S.size(), 0);
    }
}

TEST(Lanczos, FullRankExhaustion)
{
    // Asking for every singular value exercises the invariant-subspace restart.
    std::mt19937_64 rng(8);
    const auto s = random_signal(rng, 31);
    const auto op = build_hankel(s);
    const std::size_t k = std::min(op.rows(), op.cols());
    const auto l = lanczos_svd(op, k);
    const auto d = dense_svd_oracle(op.to_dense());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i)
        EXPECT_LE(std::abs(l.S(i) - d.S(i)), 1e-8 * d.S(0));
}
