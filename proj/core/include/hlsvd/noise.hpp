#pragma once

#include "hlsvd/model.hpp"

#include <cstdint>

namespace hlsvd
{

struct NoiseSpec
{
    /// Scale applied to the mean intensity before sampling.
    double F = 1.0;
    std::uint64_t seed = 0;
};

/// Counter-based generator: the draw for (seed, sample, counter) does not
/// depend on evaluation order.
class KeyedRandom
{
public:
    KeyedRandom(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double next_uniform() noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Poisson(mean) draw from the stream; inversion below 10, PTRS above.
std::uint64_t poisson_draw(double mean, KeyedRandom& rng);

///
/// Independent Poisson(F * I_n) draw per sample, keyed by (seed, n).
/// sigma is set to sqrt(max(count, 1)).
/// Throws NegativeIntensity for I_n < 0 and InvalidArgument for F <= 0.
///
IntensityProfile poissonize(const IntensityProfile& profile, const NoiseSpec& spec);

enum class NsrMode
{
    /// ||sqrt(F I)|| / ||F I|| on the mean profile.
    Deterministic,
    /// Same ratio on a Poisson realization of F I.
    Realization,
};

/// ||sqrt(x)|| / ||x|| of the given values. Throws ZeroSignal if all zero,
/// NegativeIntensity on negative values.
double nsr_ratio(const IntensityProfile& values);

/// NSR of the mean profile `profile` scaled by noise.F, as a fraction.
double nsr(const IntensityProfile& profile, NsrMode mode = NsrMode::Deterministic,
           const NoiseSpec& noise = {});

/// F such that the deterministic NSR of F * I equals target: (NSR(1) / target)^2.
double calibrate_F(const IntensityProfile& profile, double target_nsr);

///
/// ||noisy - truth|| / ||filtered - truth||. Throws DimensionMismatch unless
/// the grids agree and PerfectFilter if the denominator is zero.
///
double performance_measure(const IntensityProfile& noisy, const IntensityProfile& filtered,
                           const IntensityProfile& truth);

/// Seed of Monte Carlo run r under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run) noexcept;

} // namespace hlsvd
