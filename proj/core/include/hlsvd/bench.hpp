#pragma once

#include "hlsvd/debye.hpp"
#include "hlsvd/estimator.hpp"
#include "hlsvd/order.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hlsvd
{

struct BenchSample
{
    int size_nm = 3;
    SampleSpec spec;
};

enum class KPolicy
{
    /// Select K on the first realization of each cell, then hold it.
    Auto,
    /// Use BenchConfig::fixed_K everywhere.
    Fixed,
};

struct BenchConfig
{
    std::vector<BenchSample> samples;
    std::vector<double> nsr_targets = {0.02, 0.05, 0.10};
    std::size_t runs = 100;
    std::uint64_t master_seed = 1;
    KPolicy policy = KPolicy::Auto;
    std::size_t fixed_K = 9;
    /// Offsets around the selected K evaluated by run_table2.
    std::vector<int> k_offsets = {-2, 0, 2};
    /// NSR rows of run_table2.
    std::vector<double> table2_nsr = {0.10};
    std::size_t k_max = 50;
    OrderPolicy order;
    EstimatorOptions estimator;

    /// Throws InvalidArgument unless runs >= 2 and the lists are usable.
    void validate() const;
};

/// The 2, 3 and 4 nm presets, with `grid` applied when given.
BenchConfig default_bench_config(std::optional<AngularGrid> grid = std::nullopt);

struct BenchCell
{
    int size_nm = 0;
    double nsr = 0.0;
    double F = 0.0;
    std::size_t K = 0;
    /// Decision that fixed K (absent for the fixed policy).
    std::optional<OrderDecision> decision;
    double mean = 0.0;
    double std = 0.0;
    /// Valid runs the statistics are taken over.
    std::size_t runs = 0;
    std::size_t excluded = 0;
    /// One ErrorKind name per excluded run.
    std::vector<std::string> exclusions;

    /// More than 1% of the attempted runs were excluded.
    bool failed() const noexcept;
};

struct Table1
{
    /// Row-major: samples x nsr_targets.
    std::vector<BenchCell> cells;
};

struct Table2Row
{
    int size_nm = 0;
    double nsr = 0.0;
    std::size_t K = 0;
    /// One cell per entry of k_offsets; paired realizations.
    std::vector<BenchCell> cells;
};

struct Table2
{
    std::vector<int> offsets;
    std::vector<Table2Row> rows;
};

/// Noiseless profile scaled by F = calibrate_F(noiseless, target).
struct ScaledTruth
{
    IntensityProfile truth;
    double F = 0.0;
};
ScaledTruth scaled_truth(const IntensityProfile& noiseless, double target_nsr);

/// F = (NSR(1) / target)^2 for the noiseless profile of `spec`.
double calibrate_F(const SampleSpec& spec, double target_nsr);

/// Order scan at config.k_max and decision under config.order.
OrderDecision choose_order(const IntensityProfile& noisy, const BenchConfig& config);

/// Filter performance of `runs` realizations at a fixed K.
BenchCell run_cell(const IntensityProfile& noiseless, double target_nsr, std::size_t K,
                   const BenchConfig& config);

Table1 run_table1(const BenchConfig& config);
Table2 run_table2(const BenchConfig& config);

/// CSV with columns size,nsr,K,mean,std,runs,excluded.
void write_csv(std::ostream& out, const Table1& table);
void write_csv(std::ostream& out, const Table2& table);
/// Plain-text tables: sizes down, NSR across (Table 1) or K offsets (Table 2).
void write_text(std::ostream& out, const Table1& table, const BenchConfig& config);
void write_text(std::ostream& out, const Table2& table);

} // namespace hlsvd
