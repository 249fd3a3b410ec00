#pragma once

#include "hlsvd/hankel.hpp"
#include "hlsvd/lanczos.hpp"
#include "hlsvd/model.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hlsvd
{

struct EstimatorOptions
{
    LanczosOptions lanczos;
    /// Hankel row count; floor((N + 1) / 2) when unset.
    std::optional<std::size_t> rows;
    /// Condition estimate above which a least-squares system is flagged
    /// (amplitudes) or rejected (shift invariance).
    double condition_limit = 1e12;
};

struct EstimationDiagnostics
{
    /// ||input - reconstruction||_2
    double residual_norm = 0.0;
    double shift_condition = 0.0;
    double vandermonde_condition = 0.0;
    bool ill_conditioned = false;
    /// Two poles coincide within the pairing tolerance.
    bool near_duplicate_poles = false;
    /// Components with d < 0 (|z| > 1), kept in the model.
    std::vector<std::size_t> growing;
};

struct EstimationReport
{
    ModelEstimate model;
    /// Singular values seen by the SVD stage, descending.
    std::vector<double> singular_values;
    /// pairing[k] = index into singular_values associated with component k
    /// (rank of the component by estimated energy).
    std::vector<std::size_t> pairing;
    EstimationDiagnostics diagnostics;
};

struct FilterResult
{
    IntensityProfile filtered;
    EstimationReport report;
};

/// Keeps the first K triplets (columns of U and V, leading K values of S).
/// Throws InvalidK when K > svd.k().
PartialSVD truncate(const PartialSVD& svd, std::size_t K);

struct ShiftInvariance
{
    /// K x K matrix whose eigenvalues are the signal poles.
    Eigen::MatrixXcd E;
    double condition = 0.0;
};

///
/// Least-squares solution of V_top E^H = V_bottom, where V_top drops the
/// last row of V_K and V_bottom drops the first. Solved by column-pivoted
/// Householder QR. Throws RankDeficient when the condition estimate of
/// V_top exceeds `condition_limit`, InvalidShape when M - 1 < K.
///
ShiftInvariance shift_invariance_solve(const Eigen::MatrixXcd& v_k, double condition_limit = 1e12);

/// All eigenvalues of E by Hessenberg reduction and shifted QR; a real E
/// goes through the real double-shift solver, so its eigenvalues come in
/// exact conjugate pairs. Throws NoConvergence.
std::vector<Complex> eigenvalues(const Eigen::MatrixXcd& e);

struct PoleParameters
{
    double damping = 0.0;
    double frequency = 0.0;
};

/// d = -ln|z| / dtheta, f = arg(z) / (2 pi dtheta) with arg in (-pi, pi].
PoleParameters poles_to_params(Complex z, double dtheta);

struct AmplitudeFit
{
    /// c_k = a_k e^{i phi_k}, referenced to theta = 0.
    std::vector<Complex> coefficients;
    std::vector<DampedSinusoid> components;
    double condition = 0.0;
    bool ill_conditioned = false;
};

///
/// Complex least squares for c_k in signal_n ~ sum_k c_k e^{(-d_k + i 2 pi f_k) theta_n}
/// on the absolute angles of the grid. Columns are equilibrated before a
/// column-pivoted QR; a condition estimate above `condition_limit` sets the
/// ill_conditioned flag but still returns the solution.
///
AmplitudeFit amplitude_phase_ls(std::span<const Complex> signal, const AngularGrid& grid,
                                std::span<const PoleParameters> poles,
                                double condition_limit = 1e12);

/// a_k * ||e^{-d_k theta}||_2 over the grid, the energy used to rank components.
std::vector<double> component_energy(std::span<const DampedSinusoid> components,
                                     const AngularGrid& grid);

/// Runs the estimator on a complex signal. The model is marked
/// conjugate-closed only if its components pass is_conjugate_closed.
EstimationReport estimate_model(std::span<const Complex> signal, const AngularGrid& grid,
                                std::size_t K, const EstimatorOptions& opts = {});

/// Runs the estimator on a real profile. Poles and amplitudes are made
/// exactly conjugate-symmetric, so the model is always conjugate-closed.
EstimationReport estimate_model(const IntensityProfile& profile, std::size_t K,
                                const EstimatorOptions& opts = {});

///
/// HLSVD-PRO filter: Hankel embedding, Lanczos SVD of rank K, shift
/// invariance, poles, amplitudes, and the real reconstruction.
/// Requires K >= 1 and N >= 2K + 2 (InvalidK otherwise).
///
FilterResult hlsvd_filter(const IntensityProfile& profile, std::size_t K,
                          const EstimatorOptions& opts = {});

} // namespace hlsvd
