#include "hlsvd/errors.hpp"
#include "hlsvd/noise.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace hlsvd;

namespace
{

IntensityProfile constant(double v, std::size_t n)
{
    return IntensityProfile(AngularGrid(0.0, 0.01, n), std::vector<double>(n, v));
}

struct Moments
{
    double mean;
    double var;
    double skew;
};

Moments moments(double mean, std::size_t draws, std::uint64_t seed)
{
    KeyedRandom rng(seed, 0);
    std::vector<double> x(draws);
    for (auto& v : x)
        v = static_cast<double>(poisson_draw(mean, rng));
    double m = 0.0;
    for (double v : x)
        m += v;
    m /= static_cast<double>(draws);
    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : x) {
        m2 += (v - m) * (v - m);
        m3 += (v - m) * (v - m) * (v - m);
    }
    m2 /= static_cast<double>(draws - 1);
    m3 /= static_cast<double>(draws);
    return {m, m2, m3 / std::pow(m2, 1.5)};
}

} // namespace

TEST(KeyedRandom, Deterministic)
{
    KeyedRandom a(7, 3);
    KeyedRandom b(7, 3);
    KeyedRandom c(7, 4);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
    }
}

TEST(KeyedRandom, UniformRange)
{
    KeyedRandom r(1, 1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.next_uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

class PoissonMoments : public ::testing::TestWithParam<double>
{
};

TEST_P(PoissonMoments, MatchTheory)
{
    const double lambda = GetParam();
    const std::size_t draws = 200000;
    const auto m = moments(lambda, draws, 11);
    const double se = std::sqrt(lambda / static_cast<double>(draws));
    EXPECT_NEAR(m.mean, lambda, 5.0 * se);
    EXPECT_NEAR(m.var / lambda, 1.0, 0.02);
    EXPECT_NEAR(m.skew, 1.0 / std::sqrt(lambda), 0.03);
}

// Both sides of the inversion / PTRS switch.
INSTANTIATE_TEST_SUITE_P(Noise, PoissonMoments, ::testing::Values(0.5, 3.0, 9.5, 10.5, 40.0, 1000.0));

TEST(Poisson, ZeroMean)
{
    KeyedRandom r(1, 1);
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(poisson_draw(0.0, r), 0u);
}

TEST(Poissonize, SigmaAndDeterminism)
{
    const auto p = constant(50.0, 200);
    const auto a = poissonize(p, NoiseSpec{2.0, 5});
    const auto b = poissonize(p, NoiseSpec{2.0, 5});
    const auto c = poissonize(p, NoiseSpec{2.0, 6});
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
    ASSERT_TRUE(a.sigma.has_value());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a.values[k], std::floor(a.values[k]));
        EXPECT_DOUBLE_EQ((*a.sigma)[k], std::sqrt(std::max(a.values[k], 1.0)));
    }
}

TEST(Poissonize, SampleKeyedDraws)
{
    // A prefix of the grid sees the same draws.
    const auto full = poissonize(constant(30.0, 100), NoiseSpec{1.0, 9});
    const auto head = poissonize(constant(30.0, 40), NoiseSpec{1.0, 9});
    for (std::size_t k = 0; k < 40; ++k)
        EXPECT_EQ(full.values[k], head.values[k]);
}

TEST(Poissonize, Errors)
{
    auto p = constant(1.0, 10);
    EXPECT_THROW(poissonize(p, NoiseSpec{0.0, 1}), Error);
    p.values[3] = -1.0;
    try {
        poissonize(p, NoiseSpec{1.0, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NegativeIntensity);
    }
}

TEST(Nsr, ConstantProfile)
{
    EXPECT_NEAR(nsr(constant(100.0, 64)), 0.1, 1e-15);
    EXPECT_NEAR(nsr_ratio(constant(100.0, 64)), 0.1, 1e-15);
}

TEST(Nsr, ScalingLaw)
{
    std::vector<double> v(300);
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = 5.0 + 40.0 * std::exp(-0.5 * std::pow((static_cast<double>(k) - 150.0) / 20.0, 2));
    const IntensityProfile p(AngularGrid(0.0, 0.01, v.size()), v);
    const double base = nsr(p);
    for (double F : {0.25, 0.5, 1.0, 2.0, 16.0})
        EXPECT_NEAR(nsr(p, NsrMode::Deterministic, NoiseSpec{F, 0}), base / std::sqrt(F), 1e-14 * base);
}

TEST(Nsr, CalibrationHitsTarget)
{
    std::vector<double> v(256);
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = 1.0 + std::sin(0.1 * static_cast<double>(k)) * std::sin(0.1 * static_cast<double>(k));
    const IntensityProfile p(AngularGrid(0.0, 0.01, v.size()), v);
    for (double target : {0.02, 0.05, 0.10}) {
        const double F = calibrate_F(p, target);
        EXPECT_NEAR(nsr(p, NsrMode::Deterministic, NoiseSpec{F, 0}), target, 1e-12);
    }
}

TEST(Nsr, RealizationNearDeterministic)
{
    const auto p = constant(200.0, 2000);
    const double det = nsr(p);
    const double real = nsr(p, NsrMode::Realization, NoiseSpec{1.0, 3});
    EXPECT_NEAR(real / det, 1.0, 0.02);
}

TEST(Nsr, Errors)
{
    try {
        nsr(constant(0.0, 8));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroSignal);
    }
    auto p = constant(1.0, 8);
    p.values[0] = -2.0;
    EXPECT_THROW(nsr_ratio(p), Error);
}

TEST(PerformanceMeasure, IdentityFilterGivesOne)
{
    const auto truth = constant(10.0, 50);
    auto noisy = truth;
    noisy.values[4] += 3.0;
    EXPECT_DOUBLE_EQ(performance_measure(noisy, noisy, truth), 1.0);
}

TEST(PerformanceMeasure, Ratio)
{
    const auto truth = constant(10.0, 4);
    auto noisy = truth;
    auto filtered = truth;
    noisy.values[0] += 4.0;
    filtered.values[1] += 1.0;
    EXPECT_DOUBLE_EQ(performance_measure(noisy, filtered, truth), 4.0);
}

TEST(PerformanceMeasure, Errors)
{
    const auto truth = constant(10.0, 4);
    try {
        performance_measure(truth, truth, truth);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PerfectFilter);
    }
    EXPECT_THROW(performance_measure(constant(1.0, 5), truth, truth), Error);
}

TEST(DeriveSeed, Distinct)
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t m = 0; m < 4; ++m)
        for (std::uint64_t r = 0; r < 500; ++r)
            seen.insert(derive_seed(m, r));
    EXPECT_EQ(seen.size(), 2000u);
    EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
}
