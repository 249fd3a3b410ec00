#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hlsvd
{

using Complex = std::complex<double>;

///
/// Uniform sampling of the scattering angle, in radians.
/// Sample k sits at theta0 + k * dtheta.
///
class AngularGrid
{
public:
    AngularGrid(double theta0, double dtheta, std::size_t n);

    double theta0() const noexcept { return theta0_; }
    double dtheta() const noexcept { return dtheta_; }
    std::size_t size() const noexcept { return n_; }

    double angle(std::size_t k) const noexcept
    {
        return theta0_ + static_cast<double>(k) * dtheta_;
    }

    /// Total sampled span N * dtheta, the frequency resolution denominator.
    double span() const noexcept { return static_cast<double>(n_) * dtheta_; }

    /// Largest representable frequency 1 / (2 dtheta), in cycles per radian.
    double nyquist() const noexcept { return 0.5 / dtheta_; }

    friend bool operator==(const AngularGrid&, const AngularGrid&) = default;

private:
    double theta0_;
    double dtheta_;
    std::size_t n_;
};

///
/// Intensity samples on an angular grid with optional per-sample errors.
///
struct IntensityProfile
{
    IntensityProfile(AngularGrid grid, std::vector<double> values,
                     std::optional<std::vector<double>> sigma = std::nullopt);

    AngularGrid grid;
    std::vector<double> values;
    std::optional<std::vector<double>> sigma;

    std::size_t size() const noexcept { return values.size(); }
};

/// One term a * exp(i phi) * exp((-d + i 2 pi f) (theta - reference)).
struct DampedSinusoid
{
    double amplitude = 0.0;
    double phase = 0.0;
    double damping = 0.0;
    double frequency = 0.0;
    /// Angle at which amplitude and phase are taken. 0 is the absolute form;
    /// the estimator only moves it to a grid end when the absolute amplitude
    /// of a strongly damped or growing term does not fit in a double.
    double reference = 0.0;

    /// Complex pole exp((-d + i 2 pi f) dtheta) on a grid of step dtheta.
    Complex pole(double dtheta) const;

    /// Canonical form: amplitude >= 0 (sign folded into the phase), phase
    /// wrapped into (-pi, pi].
    DampedSinusoid canonical() const;

    friend bool operator==(const DampedSinusoid&, const DampedSinusoid&) = default;
};

/// Builds a canonical component from a complex coefficient c = a exp(i phi).
DampedSinusoid component_from_coefficient(Complex c, double damping, double frequency);

struct ModelEstimate
{
    std::vector<DampedSinusoid> components;
    bool conjugate_closed = false;

    std::size_t size() const noexcept { return components.size(); }
};

/// Frequency tolerance used to pair conjugate components and to detect real
/// poles: 1e-6 * max(max |f|, 1 / (N dtheta)).
double pairing_tolerance(std::span<const DampedSinusoid> components, const AngularGrid& grid);

/// Checks whether the components split into real poles and conjugate pairs
/// within the pairing tolerance. Frequencies at the Nyquist limit are their
/// own conjugates and count as real poles.
bool is_conjugate_closed(std::span<const DampedSinusoid> components, const AngularGrid& grid);

/// Evaluates sum_k a_k e^{i phi_k} e^{(-d_k + i 2 pi f_k) theta_n} at the
/// absolute angles theta_n of the grid (theta_n - reference_k in general).
std::vector<Complex> evaluate_model(const ModelEstimate& model, const AngularGrid& grid);

/// Same as evaluate_model, for a bare component list.
std::vector<Complex> evaluate_components(std::span<const DampedSinusoid> components,
                                         const AngularGrid& grid);

///
/// Real part of the model on the grid.
///
/// Throws ImaginaryResidualExceeded when the model is not marked
/// conjugate-closed, or when max |Im| > tol * (max |Re| + floor).
///
IntensityProfile reconstruct_real(const ModelEstimate& model, const AngularGrid& grid,
                                  double tol = 1e-8);

} // namespace hlsvd
