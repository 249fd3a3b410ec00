#include "hlsvd/estimator.hpp"

#include "hlsvd/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace hlsvd
{

namespace
{

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double condition_estimate(const Eigen::ColPivHouseholderQR<MatrixXcd>& qr, Index k)
{
    if (k == 0)
        return 1.0;
    const auto& r = qr.matrixQR();
    const double first = std::abs(r(0, 0));
    const double last = std::abs(r(k - 1, k - 1));
    if (last == 0.0)
        return std::numeric_limits<double>::infinity();
    return first / last;
}

// partner[k] == k for self-conjugate poles (f = 0 or Nyquist), the index of
// the conjugate pole otherwise, -1 when none is found.
std::vector<std::ptrdiff_t> conjugate_partners(std::span<const PoleParameters> poles, double tol,
                                               double nyquist)
{
    const std::size_t K = poles.size();
    std::vector<std::ptrdiff_t> partner(K, -1);
    for (std::size_t k = 0; k < K; ++k) {
        if (partner[k] >= 0)
            continue;
        const double f = poles[k].frequency;
        if (std::abs(f) <= tol || std::abs(std::abs(f) - nyquist) <= tol) {
            partner[k] = static_cast<std::ptrdiff_t>(k);
            continue;
        }
        std::ptrdiff_t best = -1;
        double best_err = 0.0;
        for (std::size_t j = k + 1; j < K; ++j) {
            if (partner[j] >= 0)
                continue;
            const double err = std::abs(f + poles[j].frequency) +
                               std::abs(poles[k].damping - poles[j].damping);
            if (err <= 2.0 * tol && (best < 0 || err < best_err)) {
                best = static_cast<std::ptrdiff_t>(j);
                best_err = err;
            }
        }
        if (best >= 0) {
            partner[k] = best;
            partner[static_cast<std::size_t>(best)] = static_cast<std::ptrdiff_t>(k);
        }
    }
    return partner;
}

double frequency_tolerance(std::span<const PoleParameters> poles, const AngularGrid& grid)
{
    double fmax = 0.0;
    for (const auto& p : poles)
        fmax = std::max(fmax, std::abs(p.frequency));
    return 1e-6 * std::max(fmax, 1.0 / grid.span());
}

bool has_near_duplicates(std::span<const PoleParameters> poles, double tol)
{
    for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = i + 1; j < poles.size(); ++j)
            if (std::abs(poles[i].frequency - poles[j].frequency) <= tol &&
                std::abs(poles[i].damping - poles[j].damping) <= tol)
                return true;
    return false;
}

// Column k holds z_k^n scaled by exp(-shift_k) and normalized, so that the
// magnitudes stay representable for strongly damped or growing poles.
struct ScaledColumns
{
    MatrixXcd matrix;
    std::vector<double> log_scale; // log of the factor removed from column k
};

ScaledColumns vandermonde(const AngularGrid& grid, std::span<const PoleParameters> poles)
{
    const Index N = static_cast<Index>(grid.size());
    const Index K = static_cast<Index>(poles.size());
    ScaledColumns out{MatrixXcd(N, K), std::vector<double>(poles.size())};
    const double dt = grid.dtheta();
    for (Index k = 0; k < K; ++k) {
        const auto& p = poles[static_cast<std::size_t>(k)];
        const double log_mag = -p.damping * dt;
        const double shift = std::max(0.0, static_cast<double>(N - 1) * log_mag);
        const double omega = kTwoPi * p.frequency * dt;
        double norm2 = 0.0;
        for (Index n = 0; n < N; ++n) {
            const double mag = std::exp(static_cast<double>(n) * log_mag - shift);
            const Complex v = std::polar(mag, omega * static_cast<double>(n));
            out.matrix(n, k) = v;
            norm2 += std::norm(v);
        }
        const double norm = std::sqrt(norm2);
        if (norm > 0.0)
            out.matrix.col(k) /= norm;
        out.log_scale[static_cast<std::size_t>(k)] = shift + (norm > 0.0 ? std::log(norm) : 0.0);
    }
    return out;
}

AmplitudeFit fit_amplitudes(std::span<const Complex> signal, const AngularGrid& grid,
                            std::span<const PoleParameters> poles, double condition_limit,
                            const std::vector<std::ptrdiff_t>* partners)
{
    const std::size_t K = poles.size();
    if (signal.size() != grid.size())
        throw Error(ErrorKind::DimensionMismatch, "signal length differs from grid");
    if (K > grid.size())
        throw Error(ErrorKind::InvalidK, "more poles than samples");
    AmplitudeFit fit;
    if (K == 0) {
        fit.condition = 1.0;
        return fit;
    }

    const ScaledColumns cols = vandermonde(grid, poles);
    const Eigen::Map<const VectorXcd> rhs(signal.data(), static_cast<Index>(signal.size()));
    Eigen::ColPivHouseholderQR<MatrixXcd> qr(cols.matrix);
    VectorXcd c = qr.solve(rhs);
    fit.condition = condition_estimate(qr, static_cast<Index>(K));
    fit.ill_conditioned = !(fit.condition <= condition_limit);

    if (partners != nullptr) {
        for (std::size_t k = 0; k < K; ++k) {
            const std::ptrdiff_t j = (*partners)[k];
            if (j < 0)
                continue;
            const auto uj = static_cast<std::size_t>(j);
            const Index ik = static_cast<Index>(k);
            const Index ij = static_cast<Index>(uj);
            if (uj == k) {
                c(ik) = Complex(c(ik).real(), 0.0);
            } else if (uj > k) {
                const Complex avg = 0.5 * (c(ik) + std::conj(c(ij)));
                c(ik) = avg;
                c(ij) = std::conj(avg);
            }
        }
    }

    // Undo the column scaling and move the reference from theta0 to 0:
    // a e^{i phi} = c' e^{-log_scale} e^{-(-d + i 2 pi f) theta0}.
    // Terms whose absolute amplitude leaves the double range keep a
    // reference at the grid end where they are largest.
    constexpr double kMaxLog = 700.0;
    const double theta0 = grid.theta0();
    const double theta_last = grid.angle(grid.size() - 1);
    fit.coefficients.resize(K);
    fit.components.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const Complex ck = c(static_cast<Index>(k));
        const auto& p = poles[k];
        DampedSinusoid comp;
        comp.damping = p.damping;
        comp.frequency = p.frequency;
        if (ck == Complex(0.0, 0.0)) {
            comp.amplitude = 0.0;
            comp.phase = 0.0;
        } else {
            const double log_first = std::log(std::abs(ck)) - cols.log_scale[k];
            double log_a = log_first + p.damping * theta0;
            comp.phase = std::arg(ck) - kTwoPi * p.frequency * theta0;
            if (std::abs(log_a) > kMaxLog) {
                if (p.damping >= 0.0) {
                    comp.reference = theta0;
                    log_a = log_first;
                    comp.phase = std::arg(ck);
                } else {
                    comp.reference = theta_last;
                    log_a = log_first - p.damping * (theta_last - theta0);
                    comp.phase = std::arg(ck) + kTwoPi * p.frequency * (theta_last - theta0);
                }
            }
            comp.amplitude = std::exp(log_a);
        }
        comp = comp.canonical();
        fit.components[k] = comp;
        fit.coefficients[k] = std::polar(comp.amplitude, comp.phase);
    }
    return fit;
}

std::vector<std::size_t> energy_ranks(std::span<const DampedSinusoid> components,
                                      const AngularGrid& grid)
{
    const auto energy = component_energy(components, grid);
    std::vector<std::size_t> order(components.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return energy[a] > energy[b]; });
    std::vector<std::size_t> rank(components.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        rank[order[r]] = r;
    return rank;
}

struct PoleStage
{
    std::vector<PoleParameters> poles;
    double shift_condition = 0.0;
    std::vector<double> singular_values;
};

PoleStage estimate_poles(const HankelOperator& op, const AngularGrid& grid, std::size_t K,
                         const EstimatorOptions& opts)
{
    const PartialSVD svd = lanczos_svd(op, K, opts.lanczos);
    const PartialSVD top = truncate(svd, K);
    MatrixXcd v_k = top.V;
    if (op.is_real())
        v_k = v_k.real().cast<Complex>();
    const ShiftInvariance shift = shift_invariance_solve(v_k, opts.condition_limit);
    const std::vector<Complex> z = eigenvalues(shift.E);

    PoleStage stage;
    stage.shift_condition = shift.condition;
    stage.singular_values.assign(svd.S.data(), svd.S.data() + svd.S.size());
    stage.poles.reserve(z.size());
    for (const Complex& zk : z)
        stage.poles.push_back(poles_to_params(zk, grid.dtheta()));
    return stage;
}

void finish_report(EstimationReport& report, std::span<const PoleParameters> poles,
                   const AngularGrid& grid)
{
    auto& comps = report.model.components;
    std::stable_sort(comps.begin(), comps.end(), [](const DampedSinusoid& a, const DampedSinusoid& b) {
        if (a.frequency != b.frequency)
            return a.frequency < b.frequency;
        return a.damping < b.damping;
    });
    report.pairing = energy_ranks(comps, grid);
    report.diagnostics.growing.clear();
    for (std::size_t k = 0; k < comps.size(); ++k)
        if (comps[k].damping < 0.0)
            report.diagnostics.growing.push_back(k);
    report.diagnostics.near_duplicate_poles =
        has_near_duplicates(poles, frequency_tolerance(poles, grid));
}

} // namespace

PartialSVD truncate(const PartialSVD& svd, std::size_t K)
{
    if (K > svd.k())
        throw Error(ErrorKind::InvalidK, "cannot truncate " + std::to_string(svd.k()) +
                                             " triplets to rank " + std::to_string(K));
    const Index k = static_cast<Index>(K);
    PartialSVD out;
    out.U = svd.U.leftCols(k);
    out.V = svd.V.leftCols(k);
    out.S = svd.S.head(k);
    out.ritz_values = svd.ritz_values;
    out.residuals.assign(svd.residuals.begin(),
                         svd.residuals.begin() + std::min(svd.residuals.size(), K));
    out.iterations = svd.iterations;
    out.reorthogonalizations = svd.reorthogonalizations;
    return out;
}

ShiftInvariance shift_invariance_solve(const Eigen::MatrixXcd& v_k, double condition_limit)
{
    const Index M = v_k.rows();
    const Index K = v_k.cols();
    ShiftInvariance out;
    if (K == 0) {
        out.E = MatrixXcd(0, 0);
        out.condition = 1.0;
        return out;
    }
    if (M - 1 < K)
        throw Error(ErrorKind::InvalidShape, "shift invariance needs M - 1 >= K, got M = " +
                                                 std::to_string(M) + ", K = " + std::to_string(K));
    const MatrixXcd top = v_k.topRows(M - 1);
    const MatrixXcd bottom = v_k.bottomRows(M - 1);
    Eigen::ColPivHouseholderQR<MatrixXcd> qr(top);
    out.condition = condition_estimate(qr, K);
    if (!(out.condition <= condition_limit))
        throw Error(ErrorKind::RankDeficient,
                    "top block of V_K is numerically rank deficient (condition estimate " +
                        std::to_string(out.condition) + ")");
    const MatrixXcd e_h = qr.solve(bottom);
    out.E = e_h.adjoint();
    return out;
}

std::vector<Complex> eigenvalues(const Eigen::MatrixXcd& e)
{
    const Index K = e.rows();
    if (e.cols() != K)
        throw Error(ErrorKind::DimensionMismatch, "eigenvalues need a square matrix");
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(K));
    if (K == 0)
        return out;
    const bool real = (e.imag().array() == 0.0).all();
    if (real) {
        Eigen::EigenSolver<Eigen::MatrixXd> solver(e.real(), false);
        if (solver.info() != Eigen::Success)
            throw Error(ErrorKind::NoConvergence, "real QR iteration did not converge");
        for (Index i = 0; i < K; ++i)
            out.push_back(solver.eigenvalues()(i));
    } else {
        Eigen::ComplexEigenSolver<MatrixXcd> solver(e, false);
        if (solver.info() != Eigen::Success)
            throw Error(ErrorKind::NoConvergence, "complex QR iteration did not converge");
        for (Index i = 0; i < K; ++i)
            out.push_back(solver.eigenvalues()(i));
    }
    return out;
}

PoleParameters poles_to_params(Complex z, double dtheta)
{
    if (z == Complex(0.0, 0.0))
        throw Error(ErrorKind::ZeroPole, "pole at the origin has no damping/frequency");
    if (!(dtheta > 0.0))
        throw Error(ErrorKind::InvalidArgument, "angular step must be positive");
    double arg = std::arg(z);
    if (arg <= -std::numbers::pi)
        arg = std::numbers::pi;
    return PoleParameters{-std::log(std::abs(z)) / dtheta, arg / (kTwoPi * dtheta)};
}

AmplitudeFit amplitude_phase_ls(std::span<const Complex> signal, const AngularGrid& grid,
                                std::span<const PoleParameters> poles, double condition_limit)
{
    return fit_amplitudes(signal, grid, poles, condition_limit, nullptr);
}

std::vector<double> component_energy(std::span<const DampedSinusoid> components,
                                     const AngularGrid& grid)
{
    // a ||e^{-d (theta - reference)}|| via log-sum-exp.
    std::vector<double> energy(components.size(), 0.0);
    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        if (c.amplitude == 0.0)
            continue;
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < grid.size(); ++n)
            peak = std::max(peak, -2.0 * c.damping * (grid.angle(n) - c.reference));
        double sum = 0.0;
        for (std::size_t n = 0; n < grid.size(); ++n)
            sum += std::exp(-2.0 * c.damping * (grid.angle(n) - c.reference) - peak);
        energy[k] = std::exp(std::log(c.amplitude) + 0.5 * (peak + std::log(sum)));
    }
    return energy;
}

EstimationReport estimate_model(std::span<const Complex> signal, const AngularGrid& grid,
                                std::size_t K, const EstimatorOptions& opts)
{
    if (signal.size() != grid.size())
        throw Error(ErrorKind::DimensionMismatch, "signal length differs from grid");
    const HankelOperator op(signal, opts.rows);
    const PoleStage stage = estimate_poles(op, grid, K, opts);
    const AmplitudeFit fit = amplitude_phase_ls(signal, grid, stage.poles, opts.condition_limit);

    EstimationReport report;
    report.singular_values = stage.singular_values;
    report.model.components = fit.components;
    report.diagnostics.shift_condition = stage.shift_condition;
    report.diagnostics.vandermonde_condition = fit.condition;
    report.diagnostics.ill_conditioned = fit.ill_conditioned;
    finish_report(report, stage.poles, grid);
    report.model.conjugate_closed = is_conjugate_closed(report.model.components, grid);

    const auto model = evaluate_model(report.model, grid);
    double r2 = 0.0;
    for (std::size_t n = 0; n < signal.size(); ++n)
        r2 += std::norm(signal[n] - model[n]);
    report.diagnostics.residual_norm = std::sqrt(r2);
    return report;
}

EstimationReport estimate_model(const IntensityProfile& profile, std::size_t K,
                                const EstimatorOptions& opts)
{
    const AngularGrid& grid = profile.grid;
    const HankelOperator op(std::span<const double>(profile.values), opts.rows);
    const PoleStage stage = estimate_poles(op, grid, K, opts);

    const auto partners =
        conjugate_partners(stage.poles, frequency_tolerance(stage.poles, grid), grid.nyquist());
    std::vector<Complex> signal(profile.values.begin(), profile.values.end());
    const AmplitudeFit fit =
        fit_amplitudes(signal, grid, stage.poles, opts.condition_limit, &partners);

    EstimationReport report;
    report.singular_values = stage.singular_values;
    report.model.components = fit.components;
    report.diagnostics.shift_condition = stage.shift_condition;
    report.diagnostics.vandermonde_condition = fit.condition;
    report.diagnostics.ill_conditioned = fit.ill_conditioned;
    finish_report(report, stage.poles, grid);
    report.model.conjugate_closed = is_conjugate_closed(report.model.components, grid);
    return report;
}

FilterResult hlsvd_filter(const IntensityProfile& profile, std::size_t K,
                          const EstimatorOptions& opts)
{
    const std::size_t N = profile.size();
    if (K < 1 || N < 2 * K + 2)
        throw Error(ErrorKind::InvalidK, "filter order " + std::to_string(K) +
                                             " needs 1 <= K and N >= 2K + 2 (N = " +
                                             std::to_string(N) + ")");
    EstimationReport report = estimate_model(profile, K, opts);
    IntensityProfile filtered = reconstruct_real(report.model, profile.grid);
    double r2 = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const double d = profile.values[n] - filtered.values[n];
        r2 += d * d;
    }
    report.diagnostics.residual_norm = std::sqrt(r2);
    return FilterResult{std::move(filtered), std::move(report)};
}

} // namespace hlsvd
