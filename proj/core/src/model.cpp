#include "hlsvd/model.hpp"

#include "hlsvd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hlsvd
{

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double phi)
{
    double w = std::remainder(phi, kTwoPi);
    if (w <= -std::numbers::pi)
        w += kTwoPi;
    return w;
}

bool is_real_frequency(double f, double tol, double nyquist)
{
    return std::abs(f) <= tol || std::abs(std::abs(f) - nyquist) <= tol;
}

} // namespace

AngularGrid::AngularGrid(double theta0, double dtheta, std::size_t n)
    : theta0_(theta0), dtheta_(dtheta), n_(n)
{
    if (!(dtheta > 0.0) || !std::isfinite(dtheta))
        throw Error(ErrorKind::InvalidArgument, "angular step must be positive");
    if (!std::isfinite(theta0))
        throw Error(ErrorKind::InvalidArgument, "angular origin must be finite");
    if (n < 2)
        throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 samples");
}

IntensityProfile::IntensityProfile(AngularGrid g, std::vector<double> v,
                                   std::optional<std::vector<double>> s)
    : grid(g), values(std::move(v)), sigma(std::move(s))
{
    if (values.size() != grid.size())
        throw Error(ErrorKind::DimensionMismatch,
                    "profile has " + std::to_string(values.size()) + " values for a grid of " +
                        std::to_string(grid.size()));
    if (sigma) {
        if (sigma->size() != grid.size())
            throw Error(ErrorKind::DimensionMismatch, "sigma length differs from grid");
        if (std::any_of(sigma->begin(), sigma->end(), [](double x) { return !(x >= 0.0); }))
            throw Error(ErrorKind::InvalidArgument, "sigma entries must be nonnegative");
    }
}

Complex DampedSinusoid::pole(double dtheta) const
{
    return std::exp(Complex(-damping, kTwoPi * frequency) * dtheta);
}

DampedSinusoid DampedSinusoid::canonical() const
{
    DampedSinusoid c = *this;
    if (c.amplitude < 0.0) {
        c.amplitude = -c.amplitude;
        c.phase += std::numbers::pi;
    }
    c.phase = wrap_phase(c.phase);
    return c;
}

DampedSinusoid component_from_coefficient(Complex c, double damping, double frequency)
{
    return DampedSinusoid{std::abs(c), std::arg(c), damping, frequency, 0.0}.canonical();
}

double pairing_tolerance(std::span<const DampedSinusoid> components, const AngularGrid& grid)
{
    double fmax = 0.0;
    for (const auto& c : components)
        fmax = std::max(fmax, std::abs(c.frequency));
    return 1e-6 * std::max(fmax, 1.0 / grid.span());
}

bool is_conjugate_closed(std::span<const DampedSinusoid> components, const AngularGrid& grid)
{
    const double tol = pairing_tolerance(components, grid);
    const double nyquist = grid.nyquist();
    constexpr double rel = 1e-6;

    std::vector<bool> used(components.size(), false);
    for (std::size_t k = 0; k < components.size(); ++k) {
        if (used[k])
            continue;
        const auto& a = components[k];
        if (is_real_frequency(a.frequency, tol, nyquist)) {
            // A real pole needs a real coefficient at the grid origin.
            const double at_origin = a.phase + kTwoPi * a.frequency * (grid.theta0() - a.reference);
            if (a.amplitude > 0.0 && std::abs(std::sin(at_origin)) > rel)
                return false;
            used[k] = true;
            continue;
        }
        bool found = false;
        for (std::size_t j = k + 1; j < components.size() && !found; ++j) {
            if (used[j])
                continue;
            const auto& b = components[j];
            const double amax = std::max(a.amplitude, b.amplitude);
            if (a.reference == b.reference && std::abs(a.frequency + b.frequency) <= tol &&
                std::abs(a.damping - b.damping) <= tol &&
                std::abs(a.amplitude - b.amplitude) <= rel * amax &&
                (amax == 0.0 || std::abs(wrap_phase(a.phase + b.phase)) <= rel)) {
                used[j] = true;
                found = true;
            }
        }
        if (!found)
            return false;
        used[k] = true;
    }
    return true;
}

std::vector<Complex> evaluate_components(std::span<const DampedSinusoid> components,
                                         const AngularGrid& grid)
{
    std::vector<Complex> out(grid.size(), Complex(0.0, 0.0));
    for (const auto& c : components) {
        if (c.amplitude == 0.0)
            continue;
        const double log_a = std::log(c.amplitude);
        for (std::size_t n = 0; n < grid.size(); ++n) {
            const double theta = grid.angle(n) - c.reference;
            const double mag = std::exp(log_a - c.damping * theta);
            out[n] += std::polar(mag, c.phase + kTwoPi * c.frequency * theta);
        }
    }
    return out;
}

std::vector<Complex> evaluate_model(const ModelEstimate& model, const AngularGrid& grid)
{
    return evaluate_components(model.components, grid);
}

IntensityProfile reconstruct_real(const ModelEstimate& model, const AngularGrid& grid, double tol)
{
    if (!model.conjugate_closed)
        throw Error(ErrorKind::ImaginaryResidualExceeded,
                    "model is not conjugate-closed, real reconstruction undefined");
    constexpr double floor = 1e-300;
    const auto z = evaluate_model(model, grid);
    std::vector<double> re(z.size());
    double max_re = 0.0;
    double max_im = 0.0;
    for (std::size_t n = 0; n < z.size(); ++n) {
        re[n] = z[n].real();
        max_re = std::max(max_re, std::abs(z[n].real()));
        max_im = std::max(max_im, std::abs(z[n].imag()));
    }
    if (max_im > tol * (max_re + floor))
        throw Error(ErrorKind::ImaginaryResidualExceeded,
                    "imaginary residual " + std::to_string(max_im) + " exceeds tolerance");
    return IntensityProfile(grid, std::move(re));
}

} // namespace hlsvd
