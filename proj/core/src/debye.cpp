#include "hlsvd/debye.hpp"

#include "hlsvd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>

namespace hlsvd
{

double lognormal_weight(int n, const SizeDistribution& dist)
{
    const double s = dist.s;
    const double xi = dist.xi;
    const double l = std::log(static_cast<double>(n)) - std::log(xi);
    return std::exp(-s / 2.0) / std::sqrt(2.0 * std::numbers::pi * xi * s) *
           std::exp(-(l * l) / (2.0 * s * s));
}

double strain_factor(int n, const StrainParams& p)
{
    const double pi = std::numbers::pi;
    const double den = pi + 2.0 * std::atan((p.n0 - 1.0) / p.w);
    if (std::abs(den) <= 1e-14)
        throw Error(ErrorKind::DegenerateDenominator,
                    "strain denominator vanishes for n0 = " + std::to_string(p.n0));
    const double num = pi + 2.0 * std::atan((p.n0 - static_cast<double>(n)) / p.w);
    return p.omega + (p.xi_cap - p.omega) * num / den;
}

std::uint64_t DistanceHistogram::total_pairs() const noexcept
{
    return std::accumulate(multiplicity.begin(), multiplicity.end(), std::uint64_t{0});
}

DistanceHistogram distance_histogram(const Cluster& c, double quantum)
{
    if (!(quantum >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "distance quantum must be >= 0");
    const auto& p = c.positions;
    const std::size_t n = p.size();
    DistanceHistogram h;
    h.n_atoms = n;

    auto dist = [&](std::size_t i, std::size_t j) {
        const double dx = p[i][0] - p[j][0];
        const double dy = p[i][1] - p[j][1];
        const double dz = p[i][2] - p[j][2];
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    };

    if (quantum == 0.0) {
        std::vector<double> all;
        all.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                all.push_back(dist(i, j));
        std::sort(all.begin(), all.end());
        h.distance = std::move(all);
        h.multiplicity.assign(h.distance.size(), 2);
        return h;
    }

    struct Group
    {
        double min_distance;
        std::uint64_t count;
    };
    std::unordered_map<long long, Group> groups;
    groups.reserve(4096);
    const double inv = 1.0 / quantum;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = dist(i, j);
            auto [it, fresh] = groups.try_emplace(std::llround(d * inv), Group{d, 0});
            it->second.min_distance = std::min(it->second.min_distance, d);
            it->second.count += 2;
        }

    std::vector<std::pair<long long, Group>> sorted(groups.begin(), groups.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    h.distance.reserve(sorted.size());
    h.multiplicity.reserve(sorted.size());
    for (const auto& [key, g] : sorted) {
        h.distance.push_back(g.min_distance);
        h.multiplicity.push_back(g.count);
    }
    return h;
}

double scattering_prefactor(double q_prime, const PrefactorModel& model)
{
    if (!(q_prime >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "q' must be >= 0");
    if (!std::isfinite(model.i0) || !std::isfinite(model.debye_waller_b) ||
        !std::isfinite(model.form_factor_c))
        throw Error(ErrorKind::BadCoefficients, "non-finite prefactor coefficient");

    double f = 1.0;
    if (!model.form_factor.empty()) {
        bool any = false;
        for (const auto& g : model.form_factor) {
            if (!std::isfinite(g.a) || !std::isfinite(g.b) || g.b < 0.0)
                throw Error(ErrorKind::BadCoefficients, "form-factor Gaussian needs finite a and b >= 0");
            any = any || g.a != 0.0;
        }
        if (!any)
            throw Error(ErrorKind::BadCoefficients, "form-factor Gaussian amplitudes are all zero");
        const double s2 = 0.25 * q_prime * q_prime;
        f = model.form_factor_c;
        for (const auto& g : model.form_factor)
            f += g.a * std::exp(-g.b * s2);
    }
    const double t = model.debye_waller_b == 0.0
                         ? 1.0
                         : std::exp(-model.debye_waller_b * q_prime * q_prime / 4.0);
    const double tf = t * f;
    return model.i0 * tf * tf;
}

double debye_intensity(const DistanceHistogram& hist, double strain, double q, double A)
{
    const double k = 2.0 * std::numbers::pi * q * strain;
    double sum = static_cast<double>(hist.n_atoms);
    for (std::size_t e = 0; e < hist.size(); ++e) {
        const double x = k * hist.distance[e];
        const double m = static_cast<double>(hist.multiplicity[e]);
        sum += x == 0.0 ? m : m * std::sin(x) / x;
    }
    return A * sum;
}

void SampleSpec::validate() const
{
    if (components.empty())
        throw Error(ErrorKind::InvalidArgument, "sample needs at least one structure type");
    double total = 0.0;
    for (const auto& c : components) {
        const std::string name(to_string(c.type));
        if (!(c.fraction >= 0.0))
            throw Error(ErrorKind::InvalidArgument, name + ": fraction must be >= 0");
        if (c.max_shell < 1 || c.max_shell > kMaxShells)
            throw Error(ErrorKind::InvalidArgument, name + ": max shell outside [1, " +
                                                        std::to_string(kMaxShells) + "]");
        if (!(c.size.xi > 0.0) || !(c.size.s > 0.0))
            throw Error(ErrorKind::InvalidArgument, name + ": size distribution needs xi, s > 0");
        if (!(c.strain.w > 0.0))
            throw Error(ErrorKind::InvalidArgument, name + ": strain width must be > 0");
        total += c.fraction;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw Error(ErrorKind::InvalidArgument,
                    "structure fractions sum to " + std::to_string(total) + ", not 1");
    if (!(wavelength > 0.0) || !(lattice_constant > 0.0))
        throw Error(ErrorKind::InvalidArgument, "wavelength and lattice constant must be > 0");
    if (!(distance_quantum >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "distance quantum must be >= 0");
    const double first = grid.angle(0);
    const double last = grid.angle(grid.size() - 1);
    if (!(first > 0.0) || !(last < std::numbers::pi / 2.0))
        throw Error(ErrorKind::InvalidArgument, "grid must lie inside (0, pi/2) rad");
}

SampleSpec reference_spec(double xi, int max_shell)
{
    SampleSpec spec;
    const std::array<double, 3> n0 = {4.0, 4.0, 6.0};
    for (std::size_t t = 0; t < kAllStructureTypes.size(); ++t) {
        StructureComponent c;
        c.type = kAllStructureTypes[t];
        c.fraction = 1.0 / 3.0;
        c.max_shell = max_shell;
        c.size = SizeDistribution{xi, 0.3};
        c.strain = StrainParams{n0[t], 1.0, 1.0, 0.5};
        spec.components.push_back(c);
    }
    // 1/3 three times does not sum to 1 exactly in binary.
    spec.components.back().fraction = 1.0 - 2.0 / 3.0;
    return spec;
}

SampleSpec preset_spec(int size_nm)
{
    switch (size_nm) {
    case 2: return reference_spec(3.5, 12);
    case 3: return reference_spec(5.0, 12);
    case 4: return reference_spec(7.0, 16);
    default:
        throw Error(ErrorKind::Unsupported,
                    "no preset for " + std::to_string(size_nm) + " nm (use 2, 3 or 4)");
    }
}

std::shared_ptr<const DistanceHistogram> HistogramCache::get(StructureType type, int shells,
                                                             double quantum)
{
    const Key key{static_cast<int>(type), shells, quantum};
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end())
            return it->second;
    }
    auto hist = std::make_shared<const DistanceHistogram>(
        distance_histogram(build_cluster(type, shells), quantum));
    std::lock_guard lock(mutex_);
    return entries_.try_emplace(key, std::move(hist)).first->second;
}

void HistogramCache::clear()
{
    std::lock_guard lock(mutex_);
    entries_.clear();
}

HistogramCache& HistogramCache::global()
{
    static HistogramCache cache;
    return cache;
}

double scattering_q(double theta, double wavelength, double lattice_constant)
{
    return 2.0 * lattice_constant * std::sin(theta) / wavelength;
}

IntensityProfile total_intensity(const SampleSpec& spec, HistogramCache& cache)
{
    spec.validate();
    const std::size_t N = spec.grid.size();
    std::vector<double> values(N, 0.0);

    for (const auto& comp : spec.components) {
        if (comp.fraction == 0.0)
            continue;
        std::vector<double> weight(static_cast<std::size_t>(comp.max_shell));
        for (int n = 1; n <= comp.max_shell; ++n)
            weight[static_cast<std::size_t>(n - 1)] = lognormal_weight(n, comp.size);
        if (spec.normalize_sizes) {
            const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
            for (auto& w : weight)
                w /= total;
        }
        for (int n = 1; n <= comp.max_shell; ++n) {
            const auto hist = cache.get(comp.type, n, spec.distance_quantum);
            const double a = strain_factor(n, comp.strain);
            const double scale = comp.fraction * weight[static_cast<std::size_t>(n - 1)];
            for (std::size_t k = 0; k < N; ++k) {
                const double q =
                    scattering_q(spec.grid.angle(k), spec.wavelength, spec.lattice_constant);
                values[k] += scale * debye_intensity(*hist, a, q, 1.0);
            }
        }
    }

    for (std::size_t k = 0; k < N; ++k) {
        const double q = scattering_q(spec.grid.angle(k), spec.wavelength, spec.lattice_constant);
        values[k] *= scattering_prefactor(q / spec.lattice_constant, spec.prefactor);
    }
    return IntensityProfile(spec.grid, std::move(values));
}

} // namespace hlsvd
