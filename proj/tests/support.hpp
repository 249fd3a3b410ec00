#pragma once

#include "hlsvd/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace hlsvd::test
{

/// Real profile of a conjugate-closed model (imaginary part dropped).
inline IntensityProfile real_profile(const ModelEstimate& model, const AngularGrid& grid)
{
    const auto z = evaluate_model(model, grid);
    std::vector<double> v(z.size());
    for (std::size_t n = 0; n < z.size(); ++n)
        v[n] = z[n].real();
    return IntensityProfile(grid, std::move(v));
}

///
/// One real pole plus (K - 1) / 2 conjugate pairs. Frequencies are spread
/// over (0, 0.4 * Nyquist) at least `min_sep` grid resolutions apart.
///
inline ModelEstimate random_model(std::mt19937_64& rng, std::size_t K, const AngularGrid& grid,
                                  double min_sep = 3.0)
{
    std::uniform_real_distribution<double> amp(1.0, 10.0);
    std::uniform_real_distribution<double> phase(-3.0, 3.0);
    std::uniform_real_distribution<double> damp(0.0, 20.0);
    const double resolution = 1.0 / grid.span();
    std::uniform_real_distribution<double> freq(min_sep * resolution, 0.4 * grid.nyquist());

    ModelEstimate m;
    m.conjugate_closed = true;
    m.components.push_back({amp(rng), 0.0, damp(rng), 0.0});
    std::vector<double> fs;
    while (fs.size() < (K - 1) / 2) {
        const double f = freq(rng);
        if (std::all_of(fs.begin(), fs.end(),
                        [&](double g) { return std::abs(f - g) >= min_sep * resolution; }))
            fs.push_back(f);
    }
    for (double f : fs) {
        const double a = amp(rng);
        const double p = phase(rng);
        const double d = damp(rng);
        m.components.push_back({a, p, d, f});
        m.components.push_back({a, -p, d, -f});
    }
    return m;
}

inline double wrap_phase(double p)
{
    p = std::remainder(p, 2.0 * std::numbers::pi);
    return p;
}

inline std::vector<DampedSinusoid> sorted_by_frequency(std::vector<DampedSinusoid> c)
{
    std::sort(c.begin(), c.end(),
              [](const DampedSinusoid& a, const DampedSinusoid& b) { return a.frequency < b.frequency; });
    return c;
}

/// Component written against reference angle 0.
inline DampedSinusoid absolute(const DampedSinusoid& c)
{
    if (c.reference == 0.0)
        return c;
    DampedSinusoid out = c;
    out.amplitude = c.amplitude * std::exp(c.damping * c.reference);
    out.phase = c.phase - 2.0 * std::numbers::pi * c.frequency * c.reference;
    out.reference = 0.0;
    return out;
}

struct RecoveryError
{
    double amplitude = 0.0;
    double phase = 0.0;
    double damping = 0.0;
    double frequency = 0.0;

    double worst() const { return std::max({amplitude, phase, damping, frequency}); }
};

///
/// Errors after matching components by frequency. Amplitudes are relative;
/// frequency and damping are relative to max(|value|, 1 / span), so a pole
/// at f = 0 is compared at the grid resolution; phases are absolute radians.
///
inline RecoveryError recovery_error(const ModelEstimate& truth, const ModelEstimate& estimate,
                                    const AngularGrid& grid)
{
    RecoveryError e;
    if (truth.size() != estimate.size()) {
        e.amplitude = INFINITY;
        return e;
    }
    const auto t = sorted_by_frequency(truth.components);
    auto s = estimate.components;
    for (auto& c : s)
        c = absolute(c);
    s = sorted_by_frequency(s);
    const double scale = 1.0 / grid.span();
    for (std::size_t k = 0; k < t.size(); ++k) {
        e.amplitude = std::max(e.amplitude, std::abs(s[k].amplitude - t[k].amplitude) / t[k].amplitude);
        e.phase = std::max(e.phase, std::abs(wrap_phase(s[k].phase - t[k].phase)));
        e.damping = std::max(e.damping, std::abs(s[k].damping - t[k].damping) /
                                            std::max(std::abs(t[k].damping), scale));
        e.frequency = std::max(e.frequency, std::abs(s[k].frequency - t[k].frequency) /
                                                std::max(std::abs(t[k].frequency), scale));
    }
    return e;
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

} // namespace hlsvd::test
