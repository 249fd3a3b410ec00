// hlsvd: synthesize, noise, filter and benchmark XRD profiles.
//
// Exit codes: 0 success, 2 usage, 3 data, 4 numerical failure.

#include "hlsvd/bench.hpp"
#include "hlsvd/debye.hpp"
#include "hlsvd/errors.hpp"
#include "hlsvd/estimator.hpp"
#include "hlsvd/io.hpp"
#include "hlsvd/noise.hpp"
#include "hlsvd/order.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace hlsvd;

namespace
{

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

int exit_code(const Error& e)
{
    if (e.numerical())
        return kExitNumerical;
    switch (e.kind()) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidK:
    case ErrorKind::Unsupported:
        return kExitUsage;
    default:
        return kExitData;
    }
}

std::string g17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string g6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    return out;
}

struct Common
{
    std::string units = "degrees";
    std::uint64_t seed = 0;

    AngleUnit unit() const { return angle_unit_from_string(units); }
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--units", c.units, "Angle unit of profile files")
        ->check(CLI::IsMember({"degrees", "radians", "deg", "rad"}))
        ->capture_default_str();
    cmd->add_flag_callback("--degrees", [&c] { c.units = "degrees"; }, "Same as --units degrees");
    cmd->add_flag_callback("--radians", [&c] { c.units = "radians"; }, "Same as --units radians");
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

struct OrderFlags
{
    std::size_t k_max = 50;
    std::string rule = "floor";
    double gap = 0.7;
    double floor_margin = 0.2;
    std::optional<double> cutoff;

    OrderPolicy policy() const
    {
        OrderPolicy p;
        p.rule = auto_rule_from_string(rule);
        p.min_gap = gap;
        p.floor_margin = floor_margin;
        p.manual_cutoff = cutoff;
        return p;
    }
};

void add_order_flags(CLI::App* cmd, OrderFlags& o)
{
    cmd->add_option("--kmax", o.k_max, "Scan order of the order selection")->capture_default_str();
    cmd->add_option("--rule", o.rule, "Automatic rule: floor or gap")
        ->check(CLI::IsMember({"floor", "gap"}))
        ->capture_default_str();
    cmd->add_option("--gap", o.gap, "Minimum log10 gap for the gap rule")->capture_default_str();
    cmd->add_option("--floor-margin", o.floor_margin, "Decades above the noise floor (floor rule)")
        ->capture_default_str();
    cmd->add_option("--cutoff", o.cutoff, "Manual cutoff frequency (rad^-1)");
}

void print_decision(const OrderDecision& d)
{
    std::cout << "K=" << d.K << " f_cutoff=" << g6(d.f_cutoff) << " f_K=" << g6(d.kth_frequency)
              << " rule=" << (d.manual ? "manual" : to_string(d.rule)) << " score=" << g6(d.score)
              << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"HLSVD-PRO filtering of X-ray diffraction profiles"};
    app.require_subcommand(1);

    // synth
    Common synth_common;
    std::string synth_config;
    std::optional<int> synth_preset;
    std::string synth_out;
    bool synth_normalize = false;
    auto* synth = app.add_subcommand("synth", "Noiseless Debye profile from a sample config");
    add_common(synth, synth_common);
    auto* synth_cfg_opt = synth->add_option("--config", synth_config, "Sample JSON config");
    synth->add_option("--preset", synth_preset, "Size preset in nm (2, 3 or 4)")->excludes(synth_cfg_opt);
    synth->add_option("--out", synth_out, "Output profile")->required();
    synth->add_flag("--normalize", synth_normalize, "Normalize size weights over each shell range");

    // noise
    Common noise_common;
    std::string noise_in;
    std::string noise_out;
    std::optional<double> noise_F;
    std::optional<double> noise_nsr;
    auto* noise = app.add_subcommand("noise", "Poisson realization of F * I");
    add_common(noise, noise_common);
    noise->add_option("--in", noise_in, "Mean profile")->required();
    noise->add_option("--out", noise_out, "Output profile")->required();
    auto* f_opt = noise->add_option("--F", noise_F, "Intensity scale F");
    noise->add_option("--nsr", noise_nsr, "Target NSR; F is calibrated from it")->excludes(f_opt);

    // filter
    Common filter_common;
    OrderFlags filter_order;
    std::string filter_in;
    std::string filter_out;
    std::string filter_report;
    std::string filter_svg;
    std::optional<long> filter_K;
    bool filter_auto = false;
    auto* filter = app.add_subcommand("filter", "HLSVD-PRO filter at a fixed or selected order");
    add_common(filter, filter_common);
    add_order_flags(filter, filter_order);
    filter->add_option("--in", filter_in, "Input profile")->required();
    filter->add_option("--out", filter_out, "Filtered profile")->required();
    auto* k_opt = filter->add_option("--K", filter_K, "Model order");
    auto* auto_opt = filter->add_flag("--auto", filter_auto, "Select K from an order scan");
    k_opt->excludes(auto_opt);
    filter->add_option("--report", filter_report, "JSON report of the estimated model");
    filter->add_option("--svg", filter_svg, "Order-scan plot (with --auto)");

    // order
    Common order_common;
    OrderFlags order_flags;
    std::string order_in;
    std::string order_out;
    std::string order_svg;
    auto* order = app.add_subcommand("order", "Order scan: singular values against frequency");
    add_common(order, order_common);
    add_order_flags(order, order_flags);
    order->add_option("--in", order_in, "Input profile")->required();
    order->add_option("--out", order_out, "Two-column (|f|, lambda) series")->required();
    order->add_option("--svg", order_svg, "Scatter plot with the cutoff marked");

    // nsr
    Common nsr_common;
    std::string nsr_in;
    std::string nsr_mode = "deterministic";
    double nsr_F = 1.0;
    auto* nsr_cmd = app.add_subcommand("nsr", "Noise-to-signal ratio of a profile");
    add_common(nsr_cmd, nsr_common);
    nsr_cmd->add_option("--in", nsr_in, "Input profile")->required();
    nsr_cmd->add_option("--mode", nsr_mode, "deterministic or realization")
        ->check(CLI::IsMember({"deterministic", "realization"}))
        ->capture_default_str();
    nsr_cmd->add_option("--F", nsr_F, "Intensity scale F")->capture_default_str();

    // bench
    Common bench_common;
    std::string bench_config;
    std::string bench_out;
    std::optional<std::size_t> bench_runs;
    std::string bench_tables = "both";
    auto* bench = app.add_subcommand("bench", "Monte Carlo filter-performance tables");
    add_common(bench, bench_common);
    bench->add_option("--config", bench_config, "Bench JSON config (defaults when omitted)");
    bench->add_option("--out", bench_out, "Output directory")->required();
    bench->add_option("--runs", bench_runs, "Override runs per cell");
    bench->add_option("--tables", bench_tables, "1, 2 or both")
        ->check(CLI::IsMember({"1", "2", "both"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*synth) {
            SampleSpec spec = synth_config.empty()
                                  ? preset_spec(synth_preset.value_or(3))
                                  : load_sample_spec(synth_config);
            if (synth_normalize)
                spec.normalize_sizes = true;
            const IntensityProfile p = total_intensity(spec);
            write_profile(fs::path(synth_out), p, synth_common.unit(),
                          std::vector<std::string>{"noiseless Debye profile"});
        } else if (*noise) {
            const IntensityProfile mean = read_profile(noise_in, noise_common.unit());
            double F = 1.0;
            if (noise_F)
                F = *noise_F;
            else if (noise_nsr)
                F = calibrate_F(mean, *noise_nsr);
            if (!(F > 0.0))
                throw UsageError("--F must be > 0");
            const IntensityProfile p = poissonize(mean, NoiseSpec{F, noise_common.seed});
            write_profile(fs::path(noise_out), p, noise_common.unit(),
                          std::vector<std::string>{"Poisson realization, F = " + g17(F) +
                                                   ", seed = " + std::to_string(noise_common.seed)});
            std::cout << "F=" << g6(F) << '\n';
        } else if (*filter) {
            if (!filter_K && !filter_auto && !filter_order.cutoff)
                throw UsageError("filter needs --K, --auto or --cutoff");
            if (filter_K && *filter_K < 1)
                throw UsageError("--K must be >= 1");
            const IntensityProfile p = read_profile(filter_in, filter_common.unit());
            std::optional<OrderDecision> decision;
            std::size_t K = 0;
            if (filter_K) {
                K = static_cast<std::size_t>(*filter_K);
            } else {
                const OrderScan scan = order_scan(p, filter_order.k_max);
                decision = select_order(scan, filter_order.policy());
                K = decision->K;
                print_decision(*decision);
                if (!filter_svg.empty()) {
                    auto out = open_out(filter_svg);
                    write_order_svg(out, scan, decision);
                }
            }
            const FilterResult r = hlsvd_filter(p, K);
            write_profile(fs::path(filter_out), r.filtered, filter_common.unit(),
                          std::vector<std::string>{"HLSVD-PRO filtered, K = " + std::to_string(K)});
            if (!filter_report.empty()) {
                auto out = open_out(filter_report);
                write_report(out, r.report, p.grid, decision);
            }
            if (filter_K)
                std::cout << "K=" << K << '\n';
        } else if (*order) {
            const IntensityProfile p = read_profile(order_in, order_common.unit());
            const OrderScan scan = order_scan(p, order_flags.k_max);
            std::optional<OrderDecision> decision;
            try {
                decision = select_order(scan, order_flags.policy());
                print_decision(*decision);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoTransition)
                    throw;
                std::cerr << "hlsvd: " << e.what() << '\n';
            }
            {
                auto out = open_out(order_out);
                write_order_series(out, scan, decision);
            }
            if (!order_svg.empty()) {
                auto out = open_out(order_svg);
                write_order_svg(out, scan, decision);
            }
            if (!decision)
                return kExitData;
        } else if (*nsr_cmd) {
            const IntensityProfile p = read_profile(nsr_in, nsr_common.unit());
            const NsrMode mode = nsr_mode == "realization" ? NsrMode::Realization : NsrMode::Deterministic;
            std::cout << "NSR=" << g6(nsr(p, mode, NoiseSpec{nsr_F, nsr_common.seed})) << '\n';
        } else if (*bench) {
            BenchConfig cfg = bench_config.empty() ? default_bench_config() : load_bench_config(bench_config);
            if (bench_runs)
                cfg.runs = *bench_runs;
            if (bench->count("--seed"))
                cfg.master_seed = bench_common.seed;
            cfg.validate();
            fs::create_directories(bench_out);
            const fs::path dir(bench_out);
            if (bench_tables != "2") {
                const Table1 t = run_table1(cfg);
                auto csv = open_out(dir / "table1.csv");
                write_csv(csv, t);
                auto txt = open_out(dir / "table1.txt");
                write_text(txt, t, cfg);
                write_text(std::cout, t, cfg);
            }
            if (bench_tables != "1") {
                const Table2 t = run_table2(cfg);
                auto csv = open_out(dir / "table2.csv");
                write_csv(csv, t);
                auto txt = open_out(dir / "table2.txt");
                write_text(txt, t);
                write_text(std::cout, t);
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "hlsvd: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "hlsvd: " << e.what() << '\n';
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "hlsvd: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
