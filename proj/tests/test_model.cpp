#include "hlsvd/errors.hpp"
#include "hlsvd/model.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace hlsvd;

namespace
{
const double kPi = std::numbers::pi;
}

TEST(AngularGrid, SampleAnglesAreExact)
{
    AngularGrid g(0.25, 0.001, 500);
    EXPECT_EQ(g.angle(0), 0.25);
    EXPECT_EQ(g.angle(7), 0.25 + 7.0 * 0.001);
    EXPECT_EQ(g.size(), 500u);
    EXPECT_DOUBLE_EQ(g.nyquist(), 500.0);
}

TEST(AngularGrid, RejectsBadShapes)
{
    EXPECT_THROW(AngularGrid(0.0, 0.0, 10), Error);
    EXPECT_THROW(AngularGrid(0.0, -1.0, 10), Error);
    EXPECT_THROW(AngularGrid(0.0, 0.1, 1), Error);
}

TEST(IntensityProfile, LengthsMustMatch)
{
    AngularGrid g(0.0, 0.1, 3);
    EXPECT_THROW(IntensityProfile(g, {1.0, 2.0}), Error);
    EXPECT_THROW(IntensityProfile(g, {1.0, 2.0, 3.0}, std::vector<double>{1.0, -1.0, 1.0}), Error);
    EXPECT_NO_THROW(IntensityProfile(g, {1.0, 2.0, 3.0}, std::vector<double>{1.0, 0.0, 1.0}));
}

TEST(EvaluateModel, EmptyModelIsZero)
{
    AngularGrid g(0.3, 0.01, 16);
    for (const auto& z : evaluate_model(ModelEstimate{}, g))
        EXPECT_EQ(z, Complex(0.0, 0.0));
}

TEST(EvaluateModel, UnitConstant)
{
    AngularGrid g(0.3, 0.01, 16);
    ModelEstimate m;
    m.components.push_back({1.0, 0.0, 0.0, 0.0});
    for (const auto& z : evaluate_model(m, g))
        EXPECT_EQ(z, Complex(1.0, 0.0));
}

TEST(EvaluateModel, ConjugatePairIsCosineOnAbsoluteAngles)
{
    AngularGrid g(0.3, 0.01, 64);
    const double f0 = 7.5;
    ModelEstimate m;
    m.conjugate_closed = true;
    m.components.push_back({1.0, 0.0, 0.0, f0});
    m.components.push_back({1.0, 0.0, 0.0, -f0});
    const auto z = evaluate_model(m, g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        EXPECT_NEAR(z[n].real(), 2.0 * std::cos(2.0 * kPi * f0 * g.angle(n)), 1e-13);
        EXPECT_NEAR(z[n].imag(), 0.0, 1e-13);
    }
}

TEST(EvaluateModel, Linearity)
{
    std::mt19937_64 rng(3);
    AngularGrid g(0.3, 0.002, 200);
    const auto a = test::random_model(rng, 5, g);
    const auto b = test::random_model(rng, 3, g);
    ModelEstimate ab = a;
    ab.components.insert(ab.components.end(), b.components.begin(), b.components.end());
    const auto za = evaluate_model(a, g);
    const auto zb = evaluate_model(b, g);
    const auto zab = evaluate_model(ab, g);
    for (std::size_t n = 0; n < g.size(); ++n)
        EXPECT_LE(std::abs(zab[n] - (za[n] + zb[n])), 1e-14 * (std::abs(za[n]) + std::abs(zb[n]) + 1e-300) * 4);
}

TEST(EvaluateModel, ConjugateClosedModelsAreReal)
{
    std::mt19937_64 rng(11);
    AngularGrid g(0.1, 0.0005, 4000);
    for (int rep = 0; rep < 10; ++rep) {
        const auto m = test::random_model(rng, 9, g);
        double re = 0.0;
        double im = 0.0;
        for (const auto& z : evaluate_model(m, g)) {
            re += z.real() * z.real();
            im += z.imag() * z.imag();
        }
        EXPECT_LE(std::sqrt(im), 1e-12 * std::sqrt(re));
    }
}

TEST(EvaluateModel, GridShiftCovariance)
{
    std::mt19937_64 rng(5);
    AngularGrid g(0.3, 0.002, 128);
    const double delta = 0.0173;
    AngularGrid shifted(g.theta0() + delta, g.dtheta(), g.size());
    const auto m = test::random_model(rng, 7, g);
    ModelEstimate rotated = m;
    for (auto& c : rotated.components) {
        c.phase += 2.0 * kPi * c.frequency * delta;
        c.amplitude *= std::exp(-c.damping * delta);
    }
    const auto z1 = evaluate_model(m, shifted);
    const auto z2 = evaluate_model(rotated, g);
    for (std::size_t n = 0; n < g.size(); ++n)
        EXPECT_LE(std::abs(z1[n] - z2[n]), 1e-12 * std::max(std::abs(z1[n]), 1.0));
}

TEST(EvaluateModel, ReferenceAngleShiftsTheOrigin)
{
    AngularGrid g(0.3, 0.002, 32);
    DampedSinusoid c{2.0, 0.4, 3.0, 5.0, 0.3};
    ModelEstimate m;
    m.components.push_back(c);
    ModelEstimate abs;
    abs.components.push_back(test::absolute(c));
    const auto z1 = evaluate_model(m, g);
    const auto z2 = evaluate_model(abs, g);
    for (std::size_t n = 0; n < g.size(); ++n)
        EXPECT_LE(std::abs(z1[n] - z2[n]), 1e-12 * std::abs(z2[n]));
}

TEST(DampedSinusoid, CanonicalFoldsNegativeAmplitude)
{
    DampedSinusoid c{-2.0, 0.5, 1.0, 3.0};
    const auto k = c.canonical();
    EXPECT_DOUBLE_EQ(k.amplitude, 2.0);
    EXPECT_NEAR(k.phase, 0.5 - kPi, 1e-15);
    const auto w = DampedSinusoid{1.0, 3.0 * kPi, 0.0, 0.0}.canonical();
    EXPECT_NEAR(w.phase, kPi, 1e-12);
}

TEST(DampedSinusoid, FromCoefficient)
{
    const auto c = component_from_coefficient(std::polar(3.0, kPi / 4.0), 2.0, 35.0);
    EXPECT_NEAR(c.amplitude, 3.0, 1e-15);
    EXPECT_NEAR(c.phase, kPi / 4.0, 1e-15);
    EXPECT_EQ(c.damping, 2.0);
    EXPECT_EQ(c.frequency, 35.0);
}

TEST(ReconstructReal, CosineHasNoImaginaryResidual)
{
    AngularGrid g(0.3, 0.01, 64);
    ModelEstimate m;
    m.conjugate_closed = true;
    m.components.push_back({1.0, 0.3, 0.0, 4.0});
    m.components.push_back({1.0, -0.3, 0.0, -4.0});
    const auto p = reconstruct_real(m, g);
    for (std::size_t n = 0; n < g.size(); ++n)
        EXPECT_NEAR(p.values[n], 2.0 * std::cos(2.0 * kPi * 4.0 * g.angle(n) + 0.3), 1e-13);
}

TEST(ReconstructReal, DecayingRealPole)
{
    AngularGrid g(0.3, 0.01, 64);
    ModelEstimate m;
    m.conjugate_closed = true;
    m.components.push_back({5.0, 0.0, 2.0, 0.0});
    const auto p = reconstruct_real(m, g);
    for (std::size_t n = 0; n < g.size(); ++n)
        EXPECT_NEAR(p.values[n], 5.0 * std::exp(-2.0 * g.angle(n)), 1e-14);
}

TEST(ReconstructReal, RejectsOpenModels)
{
    AngularGrid g(0.3, 0.01, 64);
    ModelEstimate m;
    m.components.push_back({1.0, 0.0, 0.0, 4.0});
    try {
        reconstruct_real(m, g);
        FAIL() << "expected ImaginaryResidualExceeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ImaginaryResidualExceeded);
    }
    m.conjugate_closed = true;
    EXPECT_THROW(reconstruct_real(m, g), Error);
}

TEST(ConjugateClosure, DetectsPairsAndRealPoles)
{
    AngularGrid g(0.3, 0.01, 64);
    std::vector<DampedSinusoid> c{{1.0, 0.0, 1.0, 0.0}, {2.0, 0.5, 1.0, 3.0}, {2.0, -0.5, 1.0, -3.0}};
    EXPECT_TRUE(is_conjugate_closed(c, g));
    c[2].phase = 0.4;
    EXPECT_FALSE(is_conjugate_closed(c, g));
    std::vector<DampedSinusoid> nyq{{1.0, 0.0, 0.0, g.nyquist()}};
    EXPECT_TRUE(is_conjugate_closed(nyq, g));
}

TEST(ConjugateClosure, PairingToleranceFollowsResolution)
{
    AngularGrid g(0.0, 0.01, 100);
    std::vector<DampedSinusoid> c{{1.0, 0.0, 0.0, 0.0}};
    EXPECT_DOUBLE_EQ(pairing_tolerance(c, g), 1e-6);
    c.push_back({1.0, 0.0, 0.0, 20.0});
    EXPECT_DOUBLE_EQ(pairing_tolerance(c, g), 2e-5);
}
