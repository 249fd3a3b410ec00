#pragma once

#include "hlsvd/cluster.hpp"
#include "hlsvd/model.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

namespace hlsvd
{

/// Log-normal size distribution over the shell index.
struct SizeDistribution
{
    double xi = 5.0;
    double s = 0.3;
};

/// Size-dependent strain: a(1) = Xi, a(n) -> Omega for large n.
struct StrainParams
{
    double n0 = 4.0;
    double omega = 1.0;
    double xi_cap = 1.0;
    double w = 0.5;
};

/// exp(-s/2) / sqrt(2 pi xi s) * exp(-(ln n - ln xi)^2 / (2 s^2)), not normalized.
double lognormal_weight(int n, const SizeDistribution& dist);

/// Omega + (Xi - Omega) [pi + 2 atan((n0 - n)/w)] / [pi + 2 atan((n0 - 1)/w)].
/// Throws DegenerateDenominator when the denominator vanishes.
double strain_factor(int n, const StrainParams& p);

struct DistanceHistogram
{
    /// Ascending; each entry is the smallest distance of its group.
    std::vector<double> distance;
    /// Ordered-pair counts (always even).
    std::vector<std::uint64_t> multiplicity;
    std::size_t n_atoms = 0;

    std::size_t size() const noexcept { return distance.size(); }
    std::uint64_t total_pairs() const noexcept;
};

/// Default grouping quantum: 1e-9 of the nearest-neighbour distance.
inline constexpr double kDefaultDistanceQuantum = 1e-9 * kNearestNeighbour;

///
/// Groups pair distances by rounding to multiples of `quantum`.
/// quantum = 0 keeps every unordered pair as its own entry (multiplicity 2).
///
DistanceHistogram distance_histogram(const Cluster& c, double quantum = kDefaultDistanceQuantum);

/// One term a * exp(-b s^2) of a sum-of-Gaussians atomic form factor.
struct GaussianTerm
{
    double a = 0.0;
    double b = 0.0;
};

///
/// A(q') = I0 [T(q') f(q')]^2 with T = exp(-B q'^2 / 4) and
/// f = sum_i a_i exp(-b_i (q'/2)^2) + c. Without Gaussians f = 1.
///
struct PrefactorModel
{
    double i0 = 1.0;
    double debye_waller_b = 0.0;
    std::vector<GaussianTerm> form_factor;
    double form_factor_c = 0.0;
};

/// Throws BadCoefficients for non-finite values, negative widths, or a
/// supplied form factor whose amplitudes are all zero; InvalidArgument for q' < 0.
double scattering_prefactor(double q_prime, const PrefactorModel& model);

/// A * {N + sum_k m_k sinc(2 pi q u_k a)}, sinc(0) = 1.
double debye_intensity(const DistanceHistogram& hist, double strain, double q, double A);

struct StructureComponent
{
    StructureType type = StructureType::Cuboctahedral;
    double fraction = 1.0 / 3.0;
    int max_shell = 12;
    SizeDistribution size;
    StrainParams strain;
};

inline constexpr double kCuKalphaWavelength = 0.15418;
inline constexpr double kGoldLatticeConstant = 0.40786;

struct SampleSpec
{
    std::vector<StructureComponent> components;
    double wavelength = kCuKalphaWavelength;
    double lattice_constant = kGoldLatticeConstant;
    PrefactorModel prefactor;
    /// Au (111) and (200) under Cu K-alpha.
    AngularGrid grid{0.29, 0.00036, 500};
    double distance_quantum = kDefaultDistanceQuantum;
    /// Divide each type's weights by their sum over n = 1..S.
    bool normalize_sizes = false;

    /// Throws InvalidArgument on a malformed spec.
    void validate() const;
};

/// Size presets (2, 3 or 4 nm) on the default grid; Unsupported otherwise.
SampleSpec preset_spec(int size_nm);

/// Reference parameter set for all three structure types at mode xi.
SampleSpec reference_spec(double xi = 5.0, int max_shell = 12);

///
/// Write-once cache of histograms keyed by (type, shells, quantum).
/// Safe for concurrent use.
///
class HistogramCache
{
public:
    std::shared_ptr<const DistanceHistogram> get(StructureType type, int shells, double quantum);
    void clear();

    static HistogramCache& global();

private:
    using Key = std::tuple<int, int, double>;
    std::mutex mutex_;
    std::map<Key, std::shared_ptr<const DistanceHistogram>> entries_;
};

/// q = 2 a_fcc sin(theta) / lambda.
double scattering_q(double theta, double wavelength, double lattice_constant);

/// Noiseless total intensity on spec.grid.
IntensityProfile total_intensity(const SampleSpec& spec,
                                 HistogramCache& cache = HistogramCache::global());

} // namespace hlsvd
