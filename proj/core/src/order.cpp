#include "hlsvd/order.hpp"

#include "hlsvd/errors.hpp"

#include "fftw_lock.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>

namespace hlsvd
{

OrderScan order_scan(const IntensityProfile& profile, std::size_t k_max,
                     const EstimatorOptions& opts)
{
    const std::size_t N = profile.size();
    const std::size_t L = opts.rows.value_or((N + 1) / 2);
    const std::size_t M = N + 1 - L;
    const std::size_t cap = std::min({L, M, kMaxScanOrder});
    if (k_max < 1 || k_max > cap)
        throw Error(ErrorKind::InvalidK, "scan order " + std::to_string(k_max) +
                                             " outside [1, " + std::to_string(cap) + "]");

    OrderScan scan;
    scan.k_max = k_max;
    scan.report = estimate_model(profile, k_max, opts);
    const auto& comps = scan.report.model.components;
    const auto& sv = scan.report.singular_values;
    scan.pairs.reserve(comps.size());
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const std::size_t rank = scan.report.pairing[k];
        const double lambda = rank < sv.size() ? sv[rank] : 0.0;
        scan.pairs.push_back(OrderPair{std::abs(comps[k].frequency), lambda, k});
    }
    std::stable_sort(scan.pairs.begin(), scan.pairs.end(),
                     [](const OrderPair& a, const OrderPair& b) {
                         if (a.frequency != b.frequency)
                             return a.frequency < b.frequency;
                         return a.singular_value > b.singular_value;
                     });
    return scan;
}

OrderDecision select_order(const OrderScan& scan, const OrderPolicy& policy)
{
    const auto& pairs = scan.pairs;
    if (pairs.empty())
        throw Error(ErrorKind::InvalidArgument, "empty order scan");

    auto count_below = [&](double cutoff) {
        return static_cast<std::size_t>(std::count_if(
            pairs.begin(), pairs.end(), [&](const OrderPair& p) { return p.frequency < cutoff; }));
    };
    auto kth = [&](std::size_t K) { return K == 0 ? 0.0 : pairs[K - 1].frequency; };

    if (policy.manual_cutoff) {
        OrderDecision d;
        d.f_cutoff = *policy.manual_cutoff;
        d.K = count_below(d.f_cutoff);
        d.manual = true;
        if (d.K < 1)
            throw Error(ErrorKind::InvalidArgument,
                        "manual cutoff " + std::to_string(d.f_cutoff) + " keeps no component");
        d.kth_frequency = kth(d.K);
        return d;
    }

    double lambda_max = 0.0;
    double f_max = 0.0;
    for (const auto& p : pairs) {
        lambda_max = std::max(lambda_max, p.singular_value);
        f_max = std::max(f_max, p.frequency);
    }
    const double tiny = std::max(lambda_max, 1e-300) * 1e-300;
    const double same_f = 1e-9 * std::max(f_max, 1.0);
    auto log_lambda = [&](std::size_t i) {
        return std::log10(std::max(pairs[i].singular_value, tiny));
    };

    // Groups of pairs sharing one |f| (conjugate partners).
    struct Group
    {
        std::size_t first;
        std::size_t last;
        double top;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (groups.empty() || pairs[i].frequency - pairs[groups.back().last].frequency > same_f)
            groups.push_back({i, i, log_lambda(i)});
        else {
            groups.back().last = i;
            groups.back().top = std::max(groups.back().top, log_lambda(i));
        }
    }

    std::size_t best = groups.size();
    double score = -std::numeric_limits<double>::infinity();
    if (policy.rule == AutoRule::LargestGap) {
        for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
            const double gap = groups[g].top - groups[g + 1].top;
            if (gap > score) {
                score = gap;
                best = g;
            }
        }
        if (best == groups.size() || !(score >= policy.min_gap))
            throw Error(ErrorKind::NoTransition,
                        "no singular-value drop of at least " + std::to_string(policy.min_gap) +
                            " decades between neighbouring frequencies");
    } else {
        std::vector<double> upper;
        for (std::size_t i = pairs.size() / 2; i < pairs.size(); ++i)
            upper.push_back(log_lambda(i));
        const auto mid = upper.begin() + static_cast<std::ptrdiff_t>(upper.size() / 2);
        std::nth_element(upper.begin(), mid, upper.end());
        const double floor = *mid;
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (groups[g].top - floor >= policy.floor_margin) {
                best = g;
                score = groups[g].top - floor;
            }
        if (best + 1 >= groups.size())
            throw Error(ErrorKind::NoTransition,
                        best == groups.size()
                            ? "no frequency group rises above the noise floor"
                            : "no noise floor above the highest signal group");
    }

    OrderDecision d;
    d.f_cutoff = 0.5 * (pairs[groups[best].last].frequency + pairs[groups[best + 1].first].frequency);
    d.K = count_below(d.f_cutoff);
    d.kth_frequency = kth(d.K);
    d.score = score;
    d.manual = false;
    d.rule = policy.rule;
    return d;
}

std::string_view to_string(AutoRule rule) noexcept
{
    return rule == AutoRule::LargestGap ? "gap" : "floor";
}

AutoRule auto_rule_from_string(std::string_view name)
{
    if (name == "gap")
        return AutoRule::LargestGap;
    if (name == "floor")
        return AutoRule::NoiseFloor;
    throw Error(ErrorKind::InvalidArgument, "unknown order rule '" + std::string(name) + "'");
}

std::vector<SpectrumBin> dft_spectrum(const IntensityProfile& profile)
{
    const std::size_t N = profile.size();
    const std::size_t bins = N / 2 + 1;
    double* in = fftw_alloc_real(N);
    fftw_complex* out = fftw_alloc_complex(bins);
    fftw_plan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(N), in, out, FFTW_ESTIMATE);
    }
    std::copy(profile.values.begin(), profile.values.end(), in);
    fftw_execute(plan);

    std::vector<SpectrumBin> spectrum(bins);
    const double span = profile.grid.span();
    for (std::size_t j = 0; j < bins; ++j) {
        spectrum[j].frequency = static_cast<double>(j) / span;
        spectrum[j].amplitude = std::hypot(out[j][0], out[j][1]) / static_cast<double>(N);
    }
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return spectrum;
}

double spectral_energy_fraction(const std::vector<SpectrumBin>& spectrum, double f_limit)
{
    double below = 0.0;
    double total = 0.0;
    for (const auto& b : spectrum) {
        const double e = b.amplitude * b.amplitude;
        total += e;
        if (b.frequency < f_limit)
            below += e;
    }
    return total > 0.0 ? below / total : 0.0;
}

} // namespace hlsvd
