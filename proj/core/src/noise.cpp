#include "hlsvd/noise.hpp"

#include "hlsvd/errors.hpp"

#include <cmath>
#include <string>

namespace hlsvd
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t inversion(double mean, KeyedRandom& rng)
{
    double p = std::exp(-mean);
    double cdf = p;
    const double u = rng.next_uniform();
    std::uint64_t k = 0;
    // The cap only triggers when rounding leaves cdf just below u.
    while (u > cdf && k < 1000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

// Transformed rejection with squeeze (Hormann 1993).
std::uint64_t ptrs(double mean, KeyedRandom& rng)
{
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double U = rng.next_uniform() - 0.5;
        const double V = rng.next_uniform();
        const double us = 0.5 - std::abs(U);
        const double k = std::floor((2.0 * a / us + b) * U + mean + 0.43);
        if (us >= 0.07 && V <= vr)
            return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && V > us))
            continue;
        if (std::log(V) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - std::lgamma(k + 1.0))
            return static_cast<std::uint64_t>(k);
    }
}

double norm2(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

} // namespace

KeyedRandom::KeyedRandom(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(splitmix64(seed ^ splitmix64(stream)))
{
}

std::uint64_t KeyedRandom::next_u64() noexcept
{
    return splitmix64(key_ + 0xd1b54a32d192ed03ULL * ++counter_);
}

double KeyedRandom::next_uniform() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t poisson_draw(double mean, KeyedRandom& rng)
{
    if (mean <= 0.0)
        return 0;
    return mean < 10.0 ? inversion(mean, rng) : ptrs(mean, rng);
}

IntensityProfile poissonize(const IntensityProfile& profile, const NoiseSpec& spec)
{
    if (!(spec.F > 0.0) || !std::isfinite(spec.F))
        throw Error(ErrorKind::InvalidArgument, "scaling factor F must be > 0");
    const std::size_t N = profile.size();
    std::vector<double> out(N);
    std::vector<double> sigma(N);
    for (std::size_t n = 0; n < N; ++n) {
        const double v = profile.values[n];
        if (!(v >= 0.0))
            throw Error(ErrorKind::NegativeIntensity,
                        "intensity at sample " + std::to_string(n) + " is negative");
        KeyedRandom rng(spec.seed, n);
        out[n] = static_cast<double>(poisson_draw(spec.F * v, rng));
        sigma[n] = std::sqrt(std::max(out[n], 1.0));
    }
    return IntensityProfile(profile.grid, std::move(out), std::move(sigma));
}

double nsr_ratio(const IntensityProfile& profile)
{
    double num = 0.0;
    double den = 0.0;
    for (double v : profile.values) {
        if (v < 0.0)
            throw Error(ErrorKind::NegativeIntensity, "NSR needs non-negative intensities");
        num += v;
        den += v * v;
    }
    if (den == 0.0)
        throw Error(ErrorKind::ZeroSignal, "NSR of an all-zero profile");
    return std::sqrt(num) / std::sqrt(den);
}

double nsr(const IntensityProfile& profile, NsrMode mode, const NoiseSpec& noise)
{
    if (mode == NsrMode::Realization)
        return nsr_ratio(poissonize(profile, noise));
    if (!(noise.F > 0.0))
        throw Error(ErrorKind::InvalidArgument, "scaling factor F must be > 0");
    // ||sqrt(F I)|| / ||F I|| = NSR(I) / sqrt(F).
    return nsr_ratio(profile) / std::sqrt(noise.F);
}

double calibrate_F(const IntensityProfile& profile, double target_nsr)
{
    if (!(target_nsr > 0.0 && target_nsr < 1.0))
        throw Error(ErrorKind::InvalidArgument, "target NSR must lie in (0, 1)");
    const double r = nsr_ratio(profile) / target_nsr;
    return r * r;
}

double performance_measure(const IntensityProfile& noisy, const IntensityProfile& filtered,
                           const IntensityProfile& truth)
{
    if (!(noisy.grid == truth.grid) || !(filtered.grid == truth.grid))
        throw Error(ErrorKind::DimensionMismatch, "performance measure needs a common grid");
    const std::size_t N = truth.size();
    std::vector<double> num(N);
    std::vector<double> den(N);
    for (std::size_t n = 0; n < N; ++n) {
        num[n] = noisy.values[n] - truth.values[n];
        den[n] = filtered.values[n] - truth.values[n];
    }
    const double d = norm2(den);
    if (d == 0.0)
        throw Error(ErrorKind::PerfectFilter, "filtered profile equals the truth");
    return norm2(num) / d;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run) noexcept
{
    return splitmix64(splitmix64(master) ^ (run * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

} // namespace hlsvd
