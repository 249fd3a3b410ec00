#include "hlsvd/lanczos.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace hlsvd
{

NoConvergenceError::NoConvergenceError(std::size_t max_iter, PartialSVD partial)
    : Error(ErrorKind::NoConvergence,
            "Lanczos bidiagonalization did not converge in " + std::to_string(max_iter) + " steps"),
      max_iter_(max_iter), partial_(std::move(partial))
{
}

namespace
{

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Uniform [-1, 1) from the top 53 bits of a 64-bit draw; std distributions
// are implementation-defined, this is not.
class StartVectorSource
{
public:
    explicit StartVectorSource(std::uint64_t seed) : gen_(seed) {}

    VectorXcd next(Index n)
    {
        VectorXcd v(n);
        for (Index i = 0; i < n; ++i) {
            const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
            v(i) = Complex(2.0 * u - 1.0, 0.0);
        }
        return v;
    }

private:
    std::mt19937_64 gen_;
};

// Classical Gram-Schmidt against the first `count` columns, applied twice.
void orthogonalize(VectorXcd& r, const MatrixXcd& basis, Index count)
{
    if (count == 0)
        return;
    for (int pass = 0; pass < 2; ++pass) {
        const VectorXcd h = basis.leftCols(count).adjoint() * r;
        r.noalias() -= basis.leftCols(count) * h;
    }
}

// Fresh unit vector orthogonal to the first `count` columns of `basis`.
// Returns false when the basis already spans the space.
bool restart_vector(VectorXcd& out, const MatrixXcd& basis, Index count, StartVectorSource& rng)
{
    const Index n = basis.rows();
    if (count >= n)
        return false;
    for (int attempt = 0; attempt < 4; ++attempt) {
        out = rng.next(n);
        orthogonalize(out, basis, count);
        const double nrm = out.norm();
        if (nrm > 1e-4) {
            out /= nrm;
            return true;
        }
    }
    return false;
}

void apply(const HankelOperator& op, const VectorXcd& x, VectorXcd& y)
{
    y.resize(static_cast<Index>(op.rows()));
    op.matvec(std::span<const Complex>(x.data(), static_cast<std::size_t>(x.size())),
              std::span<Complex>(y.data(), static_cast<std::size_t>(y.size())));
}

void apply_adjoint(const HankelOperator& op, const VectorXcd& y, VectorXcd& x)
{
    x.resize(static_cast<Index>(op.cols()));
    op.rmatvec(std::span<const Complex>(y.data(), static_cast<std::size_t>(y.size())),
               std::span<Complex>(x.data(), static_cast<std::size_t>(x.size())));
}

struct RitzExtraction
{
    VectorXd values;
    MatrixXd left;  // (j x j)
    MatrixXd right; // (j x j) or (j+1 x j+1) when augmented
    VectorXd residuals;
};

// SVD of the upper bidiagonal B (alpha on the diagonal, beta above it).
// With `augmented`, the trailing coupling beta_last * e_j is appended as an
// extra column, which makes the projection exact once U spans C^L.
RitzExtraction ritz(const std::vector<double>& alpha, const std::vector<double>& beta, Index j,
                    double beta_last, bool augmented)
{
    const Index cols = augmented ? j + 1 : j;
    MatrixXd b = MatrixXd::Zero(j, cols);
    for (Index i = 0; i < j; ++i) {
        b(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < j)
            b(i, i + 1) = beta[static_cast<std::size_t>(i)];
    }
    if (augmented)
        b(j - 1, j) = beta_last;

    Eigen::BDCSVD<MatrixXd> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RitzExtraction out;
    out.values = svd.singularValues();
    out.left = svd.matrixU();
    out.right = svd.matrixV();
    out.residuals.resize(out.values.size());
    for (Index i = 0; i < out.values.size(); ++i)
        out.residuals(i) = augmented ? 0.0 : std::abs(beta_last * out.left(j - 1, i));
    return out;
}

// Rayleigh-Ritz refinement on span(V): orthonormalize, apply H, and take the
// SVD of the small projected factor.
void refine(const HankelOperator& op, PartialSVD& svd)
{
    const Index k = svd.V.cols();
    const Index m = svd.V.rows();
    const Index l = static_cast<Index>(op.rows());

    Eigen::HouseholderQR<MatrixXcd> qv(svd.V);
    const MatrixXcd q_v = qv.householderQ() * MatrixXcd::Identity(m, k);

    MatrixXcd w(l, k);
    VectorXcd col;
    for (Index i = 0; i < k; ++i) {
        apply(op, q_v.col(i), col);
        w.col(i) = col;
    }
    Eigen::HouseholderQR<MatrixXcd> qw(w);
    const MatrixXcd q_u = qw.householderQ() * MatrixXcd::Identity(l, k);
    const MatrixXcd r = q_u.adjoint() * w;

    Eigen::BDCSVD<MatrixXcd> small(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.U = q_u * small.matrixU();
    svd.V = q_v * small.matrixV();
    svd.S = small.singularValues();
}

} // namespace

PartialSVD lanczos_svd(const HankelOperator& op, std::size_t k, const LanczosOptions& opts)
{
    const Index L = static_cast<Index>(op.rows());
    const Index M = static_cast<Index>(op.cols());
    const Index dim = std::min(L, M);
    if (k < 1 || static_cast<Index>(k) > dim)
        throw Error(ErrorKind::InvalidK, "requested " + std::to_string(k) +
                                             " triplets, allowed range is [1, " +
                                             std::to_string(dim) + "]");
    const Index kk = static_cast<Index>(k);
    const Index max_steps =
        opts.max_iter == 0 ? dim : std::min<Index>(dim, static_cast<Index>(opts.max_iter));
    const Index min_steps = std::min<Index>(dim, kk + static_cast<Index>(opts.oversample));

    const double sqrt_eps = std::sqrt(kEps);
    const double eps1 = kEps * std::sqrt(static_cast<double>(std::max(L, M)));

    MatrixXcd U = MatrixXcd::Zero(L, dim);
    MatrixXcd V = MatrixXcd::Zero(M, dim + 1);
    std::vector<double> alpha;
    std::vector<double> beta;
    alpha.reserve(static_cast<std::size_t>(dim));
    beta.reserve(static_cast<std::size_t>(dim));

    StartVectorSource rng(opts.seed);
    {
        VectorXcd v0 = rng.next(M);
        V.col(0) = v0 / v0.norm();
    }

    // Orthogonality estimates: mu[i] ~ u_i^H u_j, nu[i] ~ v_i^H v_{j+1}.
    std::vector<double> mu(static_cast<std::size_t>(dim) + 1, 0.0);
    std::vector<double> nu(static_cast<std::size_t>(dim) + 2, 0.0);
    std::vector<double> mu_prev(mu.size(), 0.0);
    nu[0] = 1.0;

    double anorm = 0.0;
    std::size_t reorths = 0;
    bool force_reorth = false;
    Index next_check = min_steps;

    VectorXcd r;
    VectorXcd p;
    PartialSVD result;

    auto sign = [](double x) { return x >= 0.0 ? 1.0 : -1.0; };

    for (Index j = 0; j < max_steps; ++j) {
        const std::size_t uj = static_cast<std::size_t>(j);

        // u step: alpha_j u_j = H v_j - beta_{j-1} u_{j-1}
        apply(op, V.col(j), r);
        if (j > 0)
            r.noalias() -= beta[uj - 1] * U.col(j - 1);
        double a = r.norm();
        anorm = std::max(anorm, j > 0 ? std::hypot(a, beta[uj - 1]) : a);

        bool reorth_now = force_reorth;
        if (j > 0 && a > 0.0) {
            // mu_{i,j} = (alpha_i nu_{i,j} + beta_i nu_{i+1,j} - beta_{j-1} mu_{i,j-1}) / alpha_j
            std::swap(mu, mu_prev);
            double worst = 0.0;
            for (std::size_t i = 0; i < uj; ++i) {
                double est = alpha[i] * nu[i] + beta[i] * nu[i + 1] - beta[uj - 1] * mu_prev[i];
                const double d = eps1 * (std::hypot(a, beta[uj - 1]) +
                                         std::hypot(alpha[i], i > 0 ? beta[i - 1] : 0.0));
                est = (est + sign(est) * d) / a;
                mu[i] = est;
                worst = std::max(worst, std::abs(est));
            }
            mu[uj] = 1.0;
            if (worst > sqrt_eps)
                reorth_now = true;
        } else {
            mu[uj] = 1.0;
        }

        if (reorth_now || a < sqrt_eps * anorm) {
            orthogonalize(r, U, j);
            a = r.norm();
            for (std::size_t i = 0; i < uj; ++i)
                mu[i] = eps1;
            ++reorths;
        }
        if (a <= eps1 * std::max(anorm, 1e-300) * 16.0 || a == 0.0) {
            a = 0.0;
            VectorXcd fresh;
            if (!restart_vector(fresh, U, j, rng))
                break;
            U.col(j) = fresh;
        } else {
            U.col(j) = r / a;
        }
        alpha.push_back(a);

        // v step: beta_j v_{j+1} = H^H u_j - alpha_j v_j
        apply_adjoint(op, U.col(j), p);
        p.noalias() -= a * V.col(j);
        double b = p.norm();
        anorm = std::max(anorm, std::hypot(a, b));

        // nu_{i,j+1} = (alpha_i mu_{i,j} + beta_{i-1} mu_{i-1,j} - alpha_j nu_{i,j}) / beta_j
        double worst_nu = 0.0;
        if (b > 0.0) {
            for (std::size_t i = 0; i <= uj; ++i) {
                double est = alpha[i] * mu[i] + (i > 0 ? beta[i - 1] * mu[i - 1] : 0.0) - a * nu[i];
                if (i == uj)
                    est = (i > 0 ? beta[i - 1] * mu[i - 1] : 0.0);
                const double d = eps1 * (std::hypot(a, b) +
                                         std::hypot(alpha[i], i > 0 ? beta[i - 1] : 0.0));
                est = (est + sign(est) * d) / b;
                nu[i] = est;
                worst_nu = std::max(worst_nu, std::abs(est));
            }
        }
        nu[uj + 1] = 1.0;

        const bool reorth_v = reorth_now || worst_nu > sqrt_eps || b < sqrt_eps * anorm;
        if (reorth_v) {
            orthogonalize(p, V, j + 1);
            b = p.norm();
            for (std::size_t i = 0; i <= uj; ++i)
                nu[i] = eps1;
            ++reorths;
        }
        // Simon's rule: one more reorthogonalization on the following step.
        force_reorth = (reorth_now || reorth_v) && !force_reorth;

        const bool at_cap = (j + 1 == dim);
        if (j + 1 >= M) {
            b = 0.0; // V already spans C^M.
        } else if (b <= eps1 * std::max(anorm, 1e-300) * 16.0) {
            b = 0.0;
            VectorXcd fresh;
            if (!at_cap && restart_vector(fresh, V, j + 1, rng))
                V.col(j + 1) = fresh;
        } else {
            V.col(j + 1) = p / b;
        }
        beta.push_back(b);

        const Index steps = j + 1;
        const bool last_step = (steps == max_steps);
        if (steps < next_check && !at_cap && !last_step)
            continue;
        // Geometric check schedule keeps the small SVDs off the critical path.
        next_check = steps + std::max<Index>(1, steps / 8);

        // Exact projection once U spans C^L; otherwise the residual bound.
        const bool augmented = at_cap && L <= M && L < M;
        const RitzExtraction rx = ritz(alpha, beta, steps, b, augmented);
        const double s1 = rx.values.size() > 0 ? rx.values(0) : 0.0;
        bool converged = at_cap;
        if (!converged) {
            converged = true;
            for (Index i = 0; i < kk; ++i)
                if (rx.residuals(i) > opts.tol * s1) {
                    converged = false;
                    break;
                }
        }
        if (!converged && !last_step)
            continue;

        result.iterations = static_cast<std::size_t>(steps);
        result.reorthogonalizations = reorths;
        result.ritz_values.assign(rx.values.data(), rx.values.data() + rx.values.size());
        result.residuals.assign(rx.residuals.data(), rx.residuals.data() + kk);
        const Index vcols = augmented ? steps + 1 : steps;
        result.V = V.leftCols(vcols) * rx.right.leftCols(kk).cast<Complex>();
        result.U = U.leftCols(steps) * rx.left.leftCols(kk).cast<Complex>();
        result.S = rx.values.head(kk);
        refine(op, result);
        if (!converged)
            throw NoConvergenceError(static_cast<std::size_t>(max_steps), std::move(result));
        return result;
    }

    // Only reached when no fresh direction exists, i.e. the bases span the
    // whole space: the current projection is exact.
    const Index steps = static_cast<Index>(alpha.size());
    while (beta.size() < alpha.size())
        beta.push_back(0.0);
    const RitzExtraction rx = ritz(alpha, beta, steps, 0.0, false);
    const Index take = std::min<Index>(kk, rx.values.size());
    result.iterations = static_cast<std::size_t>(steps);
    result.reorthogonalizations = reorths;
    result.ritz_values.assign(rx.values.data(), rx.values.data() + rx.values.size());
    result.residuals.assign(static_cast<std::size_t>(take), 0.0);
    result.V = V.leftCols(steps) * rx.right.leftCols(take).cast<Complex>();
    result.U = U.leftCols(steps) * rx.left.leftCols(take).cast<Complex>();
    result.S = rx.values.head(take);
    refine(op, result);
    return result;
}

PartialSVD dense_svd_oracle(const Eigen::MatrixXcd& a)
{
    const Index small = std::min(a.rows(), a.cols());
    if (small > 512)
        throw Error(ErrorKind::TooLarge,
                    "dense oracle limited to min dimension 512, got " + std::to_string(small));
    Eigen::JacobiSVD<MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    PartialSVD out;
    out.U = svd.matrixU();
    out.V = svd.matrixV();
    out.S = svd.singularValues();
    out.ritz_values.assign(out.S.data(), out.S.data() + out.S.size());
    out.residuals.assign(static_cast<std::size_t>(out.S.size()), 0.0);
    return out;
}

} // namespace hlsvd
