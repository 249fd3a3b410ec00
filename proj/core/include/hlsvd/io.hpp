#pragma once

#include "hlsvd/bench.hpp"
#include "hlsvd/debye.hpp"
#include "hlsvd/estimator.hpp"
#include "hlsvd/model.hpp"
#include "hlsvd/order.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hlsvd
{

enum class AngleUnit
{
    Degrees,
    Radians,
};

std::string_view to_string(AngleUnit unit) noexcept;
/// Accepts "degrees"/"deg" or "radians"/"rad".
AngleUnit angle_unit_from_string(std::string_view name);

///
/// Profile text format: '#' comment lines, then rows of "angle intensity
/// [sigma]". Angles must increase uniformly (1e-9 of the span). A header line
/// "# grid theta0 dtheta n" (radians) written by write_profile restores the
/// grid exactly when it agrees with the rows.
///
/// Throws ParseError (with the line number), NonUniformGrid or NegativeIntensity.
///
IntensityProfile parse_profile(std::istream& in, AngleUnit unit);
IntensityProfile read_profile(const std::filesystem::path& path, AngleUnit unit);

/// Values are printed with 17 significant digits, so they read back bitwise.
void write_profile(std::ostream& out, const IntensityProfile& profile, AngleUnit unit,
                   std::span<const std::string> header = {});
void write_profile(const std::filesystem::path& path, const IntensityProfile& profile,
                   AngleUnit unit, std::span<const std::string> header = {});

/// Whitespace-separated columns under a "# name name ..." line.
void write_series(std::ostream& out, std::span<const std::string> columns,
                  const std::vector<std::vector<double>>& rows,
                  std::span<const std::string> header = {});
void write_series(const std::filesystem::path& path, std::span<const std::string> columns,
                  const std::vector<std::vector<double>>& rows,
                  std::span<const std::string> header = {});

/// (|f|, lambda) rows of an order scan.
void write_order_series(std::ostream& out, const OrderScan& scan,
                        const std::optional<OrderDecision>& decision = std::nullopt);

/// Static scatter of log10 lambda against |f| with the cutoff drawn in.
void write_order_svg(std::ostream& out, const OrderScan& scan,
                     const std::optional<OrderDecision>& decision = std::nullopt);

/// Everything needed to rebuild the filtered profile offline.
struct ReportFile
{
    AngularGrid grid{0.0, 1.0, 2};
    ModelEstimate model;
    std::vector<double> singular_values;
    std::optional<OrderDecision> decision;
};

/// JSON: grid, components (a, phi, d, f, reference), singular values,
/// diagnostics, and the order decision when given.
void write_report(std::ostream& out, const EstimationReport& report, const AngularGrid& grid,
                  const std::optional<OrderDecision>& decision = std::nullopt);
ReportFile parse_report(std::istream& in);

/// JSON sample description; see configs/ for the schema. Throws
/// ParseError on malformed JSON and InvalidArgument on bad fields.
SampleSpec parse_sample_spec(std::istream& in);
SampleSpec load_sample_spec(const std::filesystem::path& path);
std::string sample_spec_to_json(const SampleSpec& spec);

BenchConfig parse_bench_config(std::istream& in);
BenchConfig load_bench_config(const std::filesystem::path& path);

} // namespace hlsvd
