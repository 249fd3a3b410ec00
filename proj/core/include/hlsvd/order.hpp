#pragma once

#include "hlsvd/estimator.hpp"
#include "hlsvd/model.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace hlsvd
{

/// Largest scan order accepted by order_scan.
inline constexpr std::size_t kMaxScanOrder = 64;

struct OrderPair
{
    /// |f| in cycles per radian; both members of a conjugate pair appear.
    double frequency = 0.0;
    double singular_value = 0.0;
    /// Index into the scanned model's components.
    std::size_t component = 0;
};

struct OrderScan
{
    /// Sorted by |f| ascending.
    std::vector<OrderPair> pairs;
    std::size_t k_max = 0;
    /// The order-k_max estimate the pairs were taken from.
    EstimationReport report;
};

enum class AutoRule
{
    /// Largest log10 drop between neighbouring frequency groups.
    LargestGap,
    /// Highest-frequency group standing clear of the high-frequency noise floor.
    NoiseFloor,
};

struct OrderDecision
{
    std::size_t K = 0;
    double f_cutoff = 0.0;
    /// |f| of the highest retained component (the K-th in ascending order).
    double kth_frequency = 0.0;
    /// log10 drop across the cutoff (0 for manual decisions).
    double score = 0.0;
    bool manual = false;
    /// Rule that produced an automatic decision.
    AutoRule rule = AutoRule::NoiseFloor;
};

struct OrderPolicy
{
    /// Unset: automatic transition detection.
    std::optional<double> manual_cutoff;
    AutoRule rule = AutoRule::NoiseFloor;
    /// Minimum accepted log10 gap for LargestGap, in decades.
    double min_gap = 0.7;
    /// Minimum height above the noise floor for NoiseFloor, in decades.
    double floor_margin = 0.2;
};

///
/// Runs the estimator at order k_max and pairs the descending singular
/// values with the components ranked by descending energy (rank r gets the
/// r-th singular value). Throws InvalidK unless 1 <= k_max <= min(L, M, 64).
///
OrderScan order_scan(const IntensityProfile& profile, std::size_t k_max,
                     const EstimatorOptions& opts = {});

///
/// Pairs sharing one |f| form a group that the cutoff never splits; a
/// group is represented by its largest lambda.
///
/// LargestGap: the cutoff is the midpoint between the two neighbouring
/// groups with the largest log10 drop, if that drop is at least `min_gap`.
/// NoiseFloor: the floor is the median log10 lambda of the upper half of
/// the pairs; the cutoff is the midpoint above the last group that rises
/// `floor_margin` decades over it.
///
/// Either rule throws NoTransition when nothing qualifies. K is the number
/// of components with |f| < f_cutoff. The manual policy only counts.
///
OrderDecision select_order(const OrderScan& scan, const OrderPolicy& policy = {});

std::string_view to_string(AutoRule rule) noexcept;
/// Accepts "gap" or "floor".
AutoRule auto_rule_from_string(std::string_view name);

struct SpectrumBin
{
    double frequency = 0.0;
    double amplitude = 0.0;
};

/// |DFT| / N at f_j = j / (N dtheta), j = 0 .. floor(N / 2).
std::vector<SpectrumBin> dft_spectrum(const IntensityProfile& profile);

/// Fraction of sum |X_j|^2 carried by bins with f_j < f_limit.
double spectral_energy_fraction(const std::vector<SpectrumBin>& spectrum, double f_limit);

} // namespace hlsvd
