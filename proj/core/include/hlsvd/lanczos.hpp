#pragma once

#include "hlsvd/errors.hpp"
#include "hlsvd/hankel.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hlsvd
{

///
/// Leading singular triplets H v_i = s_i u_i, singular values descending.
///
struct PartialSVD
{
    Eigen::MatrixXcd U;
    Eigen::VectorXd S;
    Eigen::MatrixXcd V;

    /// Ritz values of the final projected bidiagonal, descending. For the
    /// Lanczos solver this is the spectrum seen by the Krylov space, of which
    /// the first k() entries are converged.
    std::vector<double> ritz_values;
    /// Residual bound per returned triplet.
    std::vector<double> residuals;

    std::size_t iterations = 0;
    std::size_t reorthogonalizations = 0;

    std::size_t k() const noexcept { return static_cast<std::size_t>(S.size()); }
};

struct LanczosOptions
{
    /// Convergence: residual <= tol * s_1 for every requested triplet.
    double tol = 1e-10;
    /// Bidiagonalization steps; 0 means min(L, M).
    std::size_t max_iter = 0;
    std::uint64_t seed = 0;
    /// Extra Lanczos vectors carried beyond k before convergence is tested.
    std::size_t oversample = 8;
};

/// Raised when the iteration budget runs out; carries the current Ritz
/// approximation.
class NoConvergenceError : public Error
{
public:
    NoConvergenceError(std::size_t max_iter, PartialSVD partial);

    std::size_t max_iter() const noexcept { return max_iter_; }
    const PartialSVD& partial() const noexcept { return partial_; }

private:
    std::size_t max_iter_;
    PartialSVD partial_;
};

///
/// Lanczos bidiagonalization with partial reorthogonalization.
///
/// Golub-Kahan recurrences on H and H^H, started from a seeded pseudo-random
/// real unit vector. Loss of orthogonality in both Krylov bases is tracked
/// with the omega recurrences; when an estimate exceeds sqrt(eps) both bases
/// are reorthogonalized against all previous vectors, at that step and the
/// next. Invariant subspaces (alpha or beta below the rounding level) restart
/// the recurrence from a fresh vector orthogonal to the current basis.
///
/// The returned triplets are refined by one Rayleigh-Ritz step on the
/// converged right subspace, which makes both bases orthonormal to rounding.
///
/// Throws InvalidK unless 1 <= k <= min(L, M); NoConvergenceError when
/// max_iter steps do not converge.
///
PartialSVD lanczos_svd(const HankelOperator& op, std::size_t k, const LanczosOptions& opts = {});

///
/// Full SVD of a dense matrix by one-sided Jacobi rotations.
/// Throws TooLarge when min(rows, cols) > 512.
///
PartialSVD dense_svd_oracle(const Eigen::MatrixXcd& a);

} // namespace hlsvd
