#include "hlsvd/io.hpp"

#include "hlsvd/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace hlsvd
{

using nlohmann::json;

namespace
{

constexpr double kDegree = std::numbers::pi / 180.0;

double to_radians(double v, AngleUnit unit) { return unit == AngleUnit::Degrees ? v * kDegree : v; }
double from_radians(double v, AngleUnit unit) { return unit == AngleUnit::Degrees ? v / kDegree : v; }

std::string g17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool parse_double(std::string_view s, double& v)
{
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(v);
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what)
{
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot read " + path.string());
    return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out)
        throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

// JSON helpers. Unknown keys are rejected so typos do not pass silently.

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed)
{
    if (!j.is_object())
        throw Error(ErrorKind::InvalidArgument, std::string(where) + " must be an object");
    for (const auto& [key, value] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw Error(ErrorKind::InvalidArgument,
                        "unknown key '" + key + "' in " + std::string(where));
}

template <class T>
void read_opt(const json& j, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::InvalidArgument, std::string("bad value for '") + key + "'");
    }
}

json parse_json(std::istream& in)
{
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

AngularGrid grid_from_json(const json& j)
{
    check_keys(j, "grid", {"theta0", "dtheta", "n", "units"});
    double theta0 = 0.0;
    double dtheta = 0.0;
    std::size_t n = 0;
    std::string units = "radians";
    read_opt(j, "theta0", theta0);
    read_opt(j, "dtheta", dtheta);
    read_opt(j, "n", n);
    read_opt(j, "units", units);
    const AngleUnit u = angle_unit_from_string(units);
    return AngularGrid(to_radians(theta0, u), to_radians(dtheta, u), n);
}

json grid_to_json(const AngularGrid& g)
{
    return json{{"theta0", g.theta0()}, {"dtheta", g.dtheta()}, {"n", g.size()}, {"units", "radians"}};
}

StructureComponent component_from_json(const json& j)
{
    check_keys(j, "component", {"type", "fraction", "max_shell", "size", "strain"});
    StructureComponent c;
    std::string type;
    read_opt(j, "type", type);
    if (type.empty())
        throw Error(ErrorKind::InvalidArgument, "component needs a type");
    c.type = structure_type_from_string(type);
    read_opt(j, "fraction", c.fraction);
    read_opt(j, "max_shell", c.max_shell);
    if (j.contains("size")) {
        const json& s = j.at("size");
        check_keys(s, "size", {"xi", "s"});
        read_opt(s, "xi", c.size.xi);
        read_opt(s, "s", c.size.s);
    }
    if (j.contains("strain")) {
        const json& s = j.at("strain");
        check_keys(s, "strain", {"n0", "omega", "xi", "w"});
        read_opt(s, "n0", c.strain.n0);
        read_opt(s, "omega", c.strain.omega);
        read_opt(s, "xi", c.strain.xi_cap);
        read_opt(s, "w", c.strain.w);
    }
    return c;
}

SampleSpec sample_spec_from_json(const json& j)
{
    check_keys(j, "sample", {"preset", "components", "wavelength", "lattice_constant", "prefactor",
                             "grid", "distance_quantum", "normalize_sizes"});
    SampleSpec spec;
    if (j.contains("preset")) {
        int size = 0;
        read_opt(j, "preset", size);
        spec = preset_spec(size);
    }
    if (j.contains("components")) {
        if (!j.at("components").is_array())
            throw Error(ErrorKind::InvalidArgument, "components must be an array");
        spec.components.clear();
        for (const auto& c : j.at("components"))
            spec.components.push_back(component_from_json(c));
    }
    read_opt(j, "wavelength", spec.wavelength);
    read_opt(j, "lattice_constant", spec.lattice_constant);
    read_opt(j, "distance_quantum", spec.distance_quantum);
    read_opt(j, "normalize_sizes", spec.normalize_sizes);
    if (j.contains("grid"))
        spec.grid = grid_from_json(j.at("grid"));
    if (j.contains("prefactor")) {
        const json& p = j.at("prefactor");
        check_keys(p, "prefactor", {"i0", "debye_waller_b", "form_factor", "c"});
        read_opt(p, "i0", spec.prefactor.i0);
        read_opt(p, "debye_waller_b", spec.prefactor.debye_waller_b);
        read_opt(p, "c", spec.prefactor.form_factor_c);
        if (p.contains("form_factor")) {
            spec.prefactor.form_factor.clear();
            for (const auto& t : p.at("form_factor")) {
                check_keys(t, "form_factor term", {"a", "b"});
                GaussianTerm g;
                read_opt(t, "a", g.a);
                read_opt(t, "b", g.b);
                spec.prefactor.form_factor.push_back(g);
            }
        }
    }
    spec.validate();
    return spec;
}

json decision_to_json(const OrderDecision& d)
{
    return json{{"K", d.K},
                {"f_cutoff", d.f_cutoff},
                {"kth_frequency", d.kth_frequency},
                {"score", d.score},
                {"manual", d.manual},
                {"rule", std::string(to_string(d.rule))}};
}

} // namespace

std::string_view to_string(AngleUnit unit) noexcept
{
    return unit == AngleUnit::Degrees ? "degrees" : "radians";
}

AngleUnit angle_unit_from_string(std::string_view name)
{
    if (name == "degrees" || name == "deg")
        return AngleUnit::Degrees;
    if (name == "radians" || name == "rad")
        return AngleUnit::Radians;
    throw Error(ErrorKind::InvalidArgument, "unknown angle unit '" + std::string(name) + "'");
}

IntensityProfile parse_profile(std::istream& in, AngleUnit unit)
{
    std::vector<double> angle;
    std::vector<double> value;
    std::vector<double> sigma;
    std::optional<AngularGrid> header_grid;
    std::size_t columns = 0;
    std::size_t first_line = 0;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        auto fields = split_ws(line);
        if (fields.empty())
            continue;
        if (fields[0].front() == '#') {
            // "# grid theta0 dtheta n"
            if (fields.size() == 5 && fields[0] == "#" && fields[1] == "grid") {
                double t0 = 0.0;
                double dt = 0.0;
                double n = 0.0;
                if (parse_double(fields[2], t0) && parse_double(fields[3], dt) &&
                    parse_double(fields[4], n) && dt > 0.0 && n >= 2.0)
                    header_grid = AngularGrid(t0, dt, static_cast<std::size_t>(n));
            }
            continue;
        }
        if (fields.size() != 2 && fields.size() != 3)
            parse_error(lineno, "expected 2 or 3 columns, got " + std::to_string(fields.size()));
        if (columns == 0) {
            columns = fields.size();
            first_line = lineno;
        } else if (fields.size() != columns)
            parse_error(lineno, "column count differs from line " + std::to_string(first_line));
        double a = 0.0;
        double v = 0.0;
        if (!parse_double(fields[0], a))
            parse_error(lineno, "bad angle '" + std::string(fields[0]) + "'");
        if (!parse_double(fields[1], v))
            parse_error(lineno, "bad intensity '" + std::string(fields[1]) + "'");
        if (v < 0.0)
            throw Error(ErrorKind::NegativeIntensity,
                        "line " + std::to_string(lineno) + ": intensity " + g17(v));
        if (columns == 3) {
            double s = 0.0;
            if (!parse_double(fields[2], s) || s < 0.0)
                parse_error(lineno, "bad sigma '" + std::string(fields[2]) + "'");
            sigma.push_back(s);
        }
        angle.push_back(a);
        value.push_back(v);
    }
    if (in.bad())
        throw Error(ErrorKind::IoError, "read failure");
    const std::size_t N = angle.size();
    if (N < 2)
        throw Error(ErrorKind::ParseError, "a profile needs at least 2 rows");

    const double first = angle.front();
    const double span = angle.back() - first;
    if (!(span > 0.0))
        throw Error(ErrorKind::NonUniformGrid, "angles must increase");
    const double step = span / static_cast<double>(N - 1);
    const double tol = 1e-9 * span;
    for (std::size_t k = 0; k < N; ++k) {
        if (k > 0 && !(angle[k] > angle[k - 1]))
            throw Error(ErrorKind::NonUniformGrid, "angles must increase strictly");
        if (std::abs(angle[k] - (first + static_cast<double>(k) * step)) > tol)
            throw Error(ErrorKind::NonUniformGrid,
                        "angle " + std::to_string(k) + " is off the uniform grid");
    }

    AngularGrid grid(to_radians(first, unit), to_radians(step, unit), N);
    if (header_grid && header_grid->size() == N) {
        const double rspan = std::abs(to_radians(span, unit));
        const double last = header_grid->angle(N - 1);
        if (std::abs(header_grid->theta0() - grid.theta0()) <= 1e-9 * rspan &&
            std::abs(last - to_radians(angle.back(), unit)) <= 1e-9 * rspan)
            grid = *header_grid;
    }
    if (sigma.empty())
        return IntensityProfile(grid, std::move(value));
    return IntensityProfile(grid, std::move(value), std::move(sigma));
}

IntensityProfile read_profile(const std::filesystem::path& path, AngleUnit unit)
{
    auto in = open_in(path);
    return parse_profile(in, unit);
}

void write_profile(std::ostream& out, const IntensityProfile& profile, AngleUnit unit,
                   std::span<const std::string> header)
{
    for (const auto& h : header)
        out << "# " << h << '\n';
    const AngularGrid& g = profile.grid;
    out << "# grid " << g17(g.theta0()) << ' ' << g17(g.dtheta()) << ' ' << g.size() << '\n';
    out << "# angle(" << to_string(unit) << ") intensity" << (profile.sigma ? " sigma" : "") << '\n';
    for (std::size_t k = 0; k < profile.size(); ++k) {
        out << g17(from_radians(g.angle(k), unit)) << ' ' << g17(profile.values[k]);
        if (profile.sigma)
            out << ' ' << g17((*profile.sigma)[k]);
        out << '\n';
    }
}

void write_profile(const std::filesystem::path& path, const IntensityProfile& profile,
                   AngleUnit unit, std::span<const std::string> header)
{
    auto out = open_out(path);
    write_profile(out, profile, unit, header);
    finish(out, path);
}

void write_series(std::ostream& out, std::span<const std::string> columns,
                  const std::vector<std::vector<double>>& rows, std::span<const std::string> header)
{
    for (const auto& h : header)
        out << "# " << h << '\n';
    out << '#';
    for (const auto& c : columns)
        out << ' ' << c;
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw Error(ErrorKind::DimensionMismatch, "series row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? " " : "") << g17(row[i]);
        out << '\n';
    }
}

void write_series(const std::filesystem::path& path, std::span<const std::string> columns,
                  const std::vector<std::vector<double>>& rows, std::span<const std::string> header)
{
    auto out = open_out(path);
    write_series(out, columns, rows, header);
    finish(out, path);
}

void write_order_series(std::ostream& out, const OrderScan& scan,
                        const std::optional<OrderDecision>& decision)
{
    std::vector<std::string> header{"order scan, k_max = " + std::to_string(scan.k_max)};
    if (decision)
        header.push_back("K = " + std::to_string(decision->K) + ", f_cutoff = " +
                         g17(decision->f_cutoff) + ", kth_frequency = " +
                         g17(decision->kth_frequency));
    std::vector<std::vector<double>> rows;
    for (const auto& p : scan.pairs)
        rows.push_back({p.frequency, p.singular_value});
    const std::vector<std::string> columns{"frequency", "singular_value"};
    write_series(out, columns, rows, header);
}

void write_order_svg(std::ostream& out, const OrderScan& scan,
                     const std::optional<OrderDecision>& decision)
{
    constexpr double W = 640.0;
    constexpr double H = 420.0;
    constexpr double left = 70.0;
    constexpr double right = 20.0;
    constexpr double top = 20.0;
    constexpr double bottom = 50.0;

    double f_max = 1.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& p : scan.pairs) {
        f_max = std::max(f_max, p.frequency);
        if (p.singular_value > 0.0) {
            lo = std::min(lo, std::log10(p.singular_value));
            hi = std::max(hi, std::log10(p.singular_value));
        }
    }
    if (!(lo <= hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    lo = std::floor(lo);
    hi = std::max(std::ceil(hi), lo + 1.0);
    f_max *= 1.05;

    auto x = [&](double f) { return left + (W - left - right) * f / f_max; };
    auto y = [&](double l) { return top + (H - top - bottom) * (hi - l) / (hi - lo); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right
        << "\" height=\"" << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double l = lo; l <= hi; l += 1.0)
        out << "<text x=\"" << left - 8 << "\" y=\"" << fixed(y(l) + 4, 1)
            << "\" text-anchor=\"end\">1e" << static_cast<int>(l) << "</text>\n";
    out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\">|f| (rad^-1)</text>\n";
    out << "<text x=\"" << left << "\" y=\"" << H - 30 << "\" text-anchor=\"middle\">0</text>\n";
    out << "<text x=\"" << W - right << "\" y=\"" << H - 30 << "\" text-anchor=\"end\">"
        << fixed(f_max, 1) << "</text>\n";
    if (decision) {
        const double xc = x(decision->f_cutoff);
        out << "<line x1=\"" << fixed(xc, 2) << "\" y1=\"" << top << "\" x2=\"" << fixed(xc, 2)
            << "\" y2=\"" << H - bottom << "\" stroke=\"red\" stroke-dasharray=\"6,4\"/>\n";
        out << "<text x=\"" << fixed(xc + 4, 2) << "\" y=\"" << top + 14 << "\" fill=\"red\">K = "
            << decision->K << ", f_c = " << fixed(decision->f_cutoff, 1) << "</text>\n";
    }
    for (const auto& p : scan.pairs) {
        if (!(p.singular_value > 0.0))
            continue;
        out << "<circle cx=\"" << fixed(x(p.frequency), 2) << "\" cy=\""
            << fixed(y(std::log10(p.singular_value)), 2) << "\" r=\"3\" fill=\"navy\"/>\n";
    }
    out << "</svg>\n";
}

void write_report(std::ostream& out, const EstimationReport& report, const AngularGrid& grid,
                  const std::optional<OrderDecision>& decision)
{
    json comps = json::array();
    for (const auto& c : report.model.components)
        comps.push_back(json{{"amplitude", c.amplitude},
                             {"phase", c.phase},
                             {"damping", c.damping},
                             {"frequency", c.frequency},
                             {"reference", c.reference}});
    const auto& d = report.diagnostics;
    json j{{"K", report.model.size()},
           {"grid", grid_to_json(grid)},
           {"conjugate_closed", report.model.conjugate_closed},
           {"components", comps},
           {"singular_values", report.singular_values},
           {"pairing", report.pairing},
           {"diagnostics",
            {{"residual_norm", d.residual_norm},
             {"shift_condition", d.shift_condition},
             {"vandermonde_condition", d.vandermonde_condition},
             {"ill_conditioned", d.ill_conditioned},
             {"near_duplicate_poles", d.near_duplicate_poles},
             {"growing", d.growing}}}};
    if (decision)
        j["order"] = decision_to_json(*decision);
    out << j.dump(2) << '\n';
}

ReportFile parse_report(std::istream& in)
{
    const json j = parse_json(in);
    ReportFile r;
    try {
        r.grid = grid_from_json(j.at("grid"));
        r.model.conjugate_closed = j.at("conjugate_closed").get<bool>();
        for (const auto& c : j.at("components")) {
            DampedSinusoid s;
            s.amplitude = c.at("amplitude").get<double>();
            s.phase = c.at("phase").get<double>();
            s.damping = c.at("damping").get<double>();
            s.frequency = c.at("frequency").get<double>();
            s.reference = c.value("reference", 0.0);
            r.model.components.push_back(s);
        }
        r.singular_values = j.at("singular_values").get<std::vector<double>>();
        if (j.contains("order")) {
            const json& o = j.at("order");
            OrderDecision d;
            d.K = o.at("K").get<std::size_t>();
            d.f_cutoff = o.at("f_cutoff").get<double>();
            d.kth_frequency = o.at("kth_frequency").get<double>();
            d.score = o.at("score").get<double>();
            d.manual = o.at("manual").get<bool>();
            d.rule = auto_rule_from_string(o.at("rule").get<std::string>());
            r.decision = d;
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("report: ") + e.what());
    }
    return r;
}

SampleSpec parse_sample_spec(std::istream& in)
{
    return sample_spec_from_json(parse_json(in));
}

SampleSpec load_sample_spec(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return parse_sample_spec(in);
}

std::string sample_spec_to_json(const SampleSpec& spec)
{
    json comps = json::array();
    for (const auto& c : spec.components)
        comps.push_back(json{{"type", std::string(to_string(c.type))},
                             {"fraction", c.fraction},
                             {"max_shell", c.max_shell},
                             {"size", {{"xi", c.size.xi}, {"s", c.size.s}}},
                             {"strain",
                              {{"n0", c.strain.n0},
                               {"omega", c.strain.omega},
                               {"xi", c.strain.xi_cap},
                               {"w", c.strain.w}}}});
    json ff = json::array();
    for (const auto& g : spec.prefactor.form_factor)
        ff.push_back(json{{"a", g.a}, {"b", g.b}});
    json j{{"wavelength", spec.wavelength},
           {"lattice_constant", spec.lattice_constant},
           {"grid", grid_to_json(spec.grid)},
           {"distance_quantum", spec.distance_quantum},
           {"normalize_sizes", spec.normalize_sizes},
           {"prefactor",
            {{"i0", spec.prefactor.i0},
             {"debye_waller_b", spec.prefactor.debye_waller_b},
             {"form_factor", ff},
             {"c", spec.prefactor.form_factor_c}}},
           {"components", comps}};
    return j.dump(2) + "\n";
}

BenchConfig parse_bench_config(std::istream& in)
{
    const json j = parse_json(in);
    check_keys(j, "bench config",
               {"samples", "grid", "nsr", "runs", "master_seed", "policy", "fixed_K", "k_offsets",
                "table2_nsr", "k_max", "order"});
    BenchConfig c;
    std::optional<AngularGrid> grid;
    if (j.contains("grid"))
        grid = grid_from_json(j.at("grid"));
    if (j.contains("samples")) {
        for (const auto& s : j.at("samples")) {
            BenchSample b;
            if (s.is_number_integer()) {
                b.size_nm = s.get<int>();
                b.spec = preset_spec(b.size_nm);
            } else {
                check_keys(s, "sample entry", {"size_nm", "spec"});
                read_opt(s, "size_nm", b.size_nm);
                b.spec = s.contains("spec") ? sample_spec_from_json(s.at("spec"))
                                            : preset_spec(b.size_nm);
            }
            if (grid && !(s.is_object() && s.contains("spec") && s.at("spec").contains("grid")))
                b.spec.grid = *grid;
            c.samples.push_back(std::move(b));
        }
    } else {
        c.samples = default_bench_config(grid).samples;
    }
    read_opt(j, "nsr", c.nsr_targets);
    read_opt(j, "runs", c.runs);
    read_opt(j, "master_seed", c.master_seed);
    if (j.contains("policy")) {
        std::string p;
        read_opt(j, "policy", p);
        if (p == "auto")
            c.policy = KPolicy::Auto;
        else if (p == "fixed")
            c.policy = KPolicy::Fixed;
        else
            throw Error(ErrorKind::InvalidArgument, "policy must be 'auto' or 'fixed'");
    }
    read_opt(j, "fixed_K", c.fixed_K);
    read_opt(j, "k_offsets", c.k_offsets);
    read_opt(j, "table2_nsr", c.table2_nsr);
    read_opt(j, "k_max", c.k_max);
    if (j.contains("order")) {
        const json& o = j.at("order");
        check_keys(o, "order", {"rule", "min_gap", "floor_margin", "manual_cutoff"});
        if (o.contains("rule")) {
            std::string rule;
            read_opt(o, "rule", rule);
            c.order.rule = auto_rule_from_string(rule);
        }
        read_opt(o, "min_gap", c.order.min_gap);
        read_opt(o, "floor_margin", c.order.floor_margin);
        if (o.contains("manual_cutoff") && !o.at("manual_cutoff").is_null()) {
            double cut = 0.0;
            read_opt(o, "manual_cutoff", cut);
            c.order.manual_cutoff = cut;
        }
    }
    c.validate();
    return c;
}

BenchConfig load_bench_config(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return parse_bench_config(in);
}

} // namespace hlsvd
