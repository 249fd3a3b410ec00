#include "hlsvd/bench.hpp"

#include "hlsvd/errors.hpp"
#include "hlsvd/noise.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace hlsvd
{

namespace
{

std::string format_fixed(double v, int digits)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string percent(double nsr)
{
    std::ostringstream s;
    s << std::defaultfloat << std::setprecision(6) << nsr * 100.0 << '%';
    return s.str();
}

std::string cell_text(const BenchCell& c)
{
    return format_fixed(c.mean, 2) + " +- " + format_fixed(c.std, 2);
}

void write_row(std::ostream& out, const BenchCell& c, long K)
{
    out << c.size_nm << ',' << std::setprecision(17) << c.nsr << ',' << K << ',' << c.mean << ','
        << c.std << ',' << c.runs << ',' << c.excluded << '\n';
}

} // namespace

void BenchConfig::validate() const
{
    if (runs < 2)
        throw Error(ErrorKind::InvalidArgument, "bench needs at least 2 runs per cell");
    if (samples.empty() || nsr_targets.empty())
        throw Error(ErrorKind::InvalidArgument, "bench needs samples and NSR targets");
    for (double t : nsr_targets)
        if (!(t > 0.0 && t < 1.0))
            throw Error(ErrorKind::InvalidArgument, "NSR targets must lie in (0, 1)");
    for (double t : table2_nsr)
        if (!(t > 0.0 && t < 1.0))
            throw Error(ErrorKind::InvalidArgument, "NSR targets must lie in (0, 1)");
    if (policy == KPolicy::Fixed && fixed_K < 1)
        throw Error(ErrorKind::InvalidArgument, "fixed K must be >= 1");
    if (k_max < 1 || k_max > kMaxScanOrder)
        throw Error(ErrorKind::InvalidArgument, "k_max outside [1, 64]");
    if (k_offsets.empty())
        throw Error(ErrorKind::InvalidArgument, "Table 2 needs at least one K offset");
    for (const auto& s : samples)
        s.spec.validate();
}

BenchConfig default_bench_config(std::optional<AngularGrid> grid)
{
    BenchConfig config;
    for (int size : {2, 3, 4}) {
        BenchSample s{size, preset_spec(size)};
        if (grid)
            s.spec.grid = *grid;
        config.samples.push_back(std::move(s));
    }
    return config;
}

bool BenchCell::failed() const noexcept
{
    const std::size_t attempted = runs + excluded;
    return attempted > 0 && excluded * 100 > attempted;
}

ScaledTruth scaled_truth(const IntensityProfile& noiseless, double target_nsr)
{
    const double F = calibrate_F(noiseless, target_nsr);
    std::vector<double> values = noiseless.values;
    for (double& v : values)
        v *= F;
    return ScaledTruth{IntensityProfile(noiseless.grid, std::move(values)), F};
}

double calibrate_F(const SampleSpec& spec, double target_nsr)
{
    return calibrate_F(total_intensity(spec), target_nsr);
}

OrderDecision choose_order(const IntensityProfile& noisy, const BenchConfig& config)
{
    const OrderScan scan = order_scan(noisy, config.k_max, config.estimator);
    return select_order(scan, config.order);
}

BenchCell run_cell(const IntensityProfile& noiseless, double target_nsr, std::size_t K,
                   const BenchConfig& config)
{
    const ScaledTruth st = scaled_truth(noiseless, target_nsr);
    BenchCell cell;
    cell.nsr = target_nsr;
    cell.F = st.F;
    cell.K = K;

    // Accumulated in run order so the sums do not depend on scheduling.
    std::vector<double> values;
    values.reserve(config.runs);
    for (std::size_t r = 0; r < config.runs; ++r) {
        const IntensityProfile noisy =
            poissonize(noiseless, NoiseSpec{st.F, derive_seed(config.master_seed, r)});
        try {
            const FilterResult fr = hlsvd_filter(noisy, K, config.estimator);
            values.push_back(performance_measure(noisy, fr.filtered, st.truth));
        } catch (const Error& e) {
            cell.exclusions.emplace_back(to_string(e.kind()));
        }
    }
    cell.runs = values.size();
    cell.excluded = cell.exclusions.size();
    if (!values.empty()) {
        double sum = 0.0;
        for (double v : values)
            sum += v;
        cell.mean = sum / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values)
            ss += (v - cell.mean) * (v - cell.mean);
        cell.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    }
    return cell;
}

namespace
{

struct CellK
{
    std::size_t K;
    std::optional<OrderDecision> decision;
};

CellK cell_order(const IntensityProfile& noiseless, double target_nsr, const BenchConfig& config)
{
    if (config.policy == KPolicy::Fixed)
        return CellK{config.fixed_K, std::nullopt};
    const double F = calibrate_F(noiseless, target_nsr);
    const IntensityProfile first =
        poissonize(noiseless, NoiseSpec{F, derive_seed(config.master_seed, 0)});
    const OrderDecision d = choose_order(first, config);
    return CellK{d.K, d};
}

} // namespace

Table1 run_table1(const BenchConfig& config)
{
    config.validate();
    Table1 table;
    for (const auto& sample : config.samples) {
        const IntensityProfile noiseless = total_intensity(sample.spec);
        for (double nsr : config.nsr_targets) {
            const CellK ck = cell_order(noiseless, nsr, config);
            BenchCell cell = run_cell(noiseless, nsr, ck.K, config);
            cell.size_nm = sample.size_nm;
            cell.decision = ck.decision;
            table.cells.push_back(std::move(cell));
        }
    }
    return table;
}

Table2 run_table2(const BenchConfig& config)
{
    config.validate();
    Table2 table;
    table.offsets = config.k_offsets;
    for (double nsr : config.table2_nsr) {
        for (const auto& sample : config.samples) {
            const IntensityProfile noiseless = total_intensity(sample.spec);
            const CellK ck = cell_order(noiseless, nsr, config);
            Table2Row row;
            row.size_nm = sample.size_nm;
            row.nsr = nsr;
            row.K = ck.K;
            for (int off : config.k_offsets) {
                const long k = static_cast<long>(ck.K) + off;
                if (k < 1)
                    throw Error(ErrorKind::InvalidK,
                                "K = " + std::to_string(ck.K) + " leaves no room for offset " +
                                    std::to_string(off));
                BenchCell cell = run_cell(noiseless, nsr, static_cast<std::size_t>(k), config);
                cell.size_nm = sample.size_nm;
                cell.decision = ck.decision;
                row.cells.push_back(std::move(cell));
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

void write_csv(std::ostream& out, const Table1& table)
{
    out << "size,nsr,K,mean,std,runs,excluded\n";
    for (const auto& c : table.cells)
        write_row(out, c, static_cast<long>(c.K));
}

void write_csv(std::ostream& out, const Table2& table)
{
    out << "size,nsr,K,mean,std,runs,excluded\n";
    for (const auto& row : table.rows)
        for (const auto& c : row.cells)
            write_row(out, c, static_cast<long>(c.K));
}

void write_text(std::ostream& out, const Table1& table, const BenchConfig& config)
{
    const std::size_t cols = config.nsr_targets.size();
    out << std::left << std::setw(8) << "";
    for (double nsr : config.nsr_targets)
        out << std::setw(24) << ("NSR=" + percent(nsr));
    out << '\n';
    for (std::size_t i = 0; i < table.cells.size(); ++i) {
        const auto& c = table.cells[i];
        if (i % cols == 0)
            out << std::setw(8) << (std::to_string(c.size_nm) + " nm");
        out << std::setw(24) << (cell_text(c) + " (K=" + std::to_string(c.K) + ")");
        if (i % cols == cols - 1)
            out << '\n';
    }
}

void write_text(std::ostream& out, const Table2& table)
{
    double current = -1.0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.nsr != current) {
            current = row.nsr;
            out << "NSR=" << percent(row.nsr) << '\n';
        }
        out << "  " << row.size_nm << " nm (K=" << row.K << ")\n";
        for (std::size_t j = 0; j < row.cells.size(); ++j) {
            const int off = table.offsets[j];
            std::string label = off == 0 ? "K" : (off > 0 ? "K+" : "K-") + std::to_string(std::abs(off));
            out << "    " << std::left << std::setw(6) << label << cell_text(row.cells[j]);
            if (row.cells[j].excluded > 0)
                out << "  [" << row.cells[j].excluded << " excluded]";
            out << '\n';
        }
    }
}

} // namespace hlsvd
