#pragma once

#include "hlsvd/model.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace hlsvd
{

///
/// ### HankelOperator
///
/// Implicit L x M Hankel matrix H(i, j) = data[i + j] over a signal of
/// length N = L + M - 1.
///
/// Products with H and its conjugate transpose are computed by embedding H
/// into a circulant of size P (the next power of two >= N) and using one
/// forward/inverse FFT pair per product, O(P log P) instead of O(LM). The
/// transform of the circulant symbol is computed once at construction.
///
/// Real signals take a real-to-complex FFT path; products of a real operator
/// with a real vector are exactly real. The operator is immutable and may be
/// shared between threads: every product allocates its own scratch space.
///
class HankelOperator
{
public:
    /// Complex signal; `rows` defaults to floor((N + 1) / 2).
    explicit HankelOperator(std::span<const Complex> signal,
                            std::optional<std::size_t> rows = std::nullopt);

    /// Real signal; uses the real FFT path.
    explicit HankelOperator(std::span<const double> signal,
                            std::optional<std::size_t> rows = std::nullopt);

    std::size_t rows() const noexcept;
    std::size_t cols() const noexcept;
    /// Signal length N.
    std::size_t size() const noexcept;
    /// Circulant embedding size P.
    std::size_t fft_size() const noexcept;
    bool is_real() const noexcept;

    Complex operator()(std::size_t i, std::size_t j) const;
    std::span<const Complex> data() const noexcept;

    /// y = H x, x of length M, y of length L.
    void matvec(std::span<const Complex> x, std::span<Complex> y) const;
    std::vector<Complex> matvec(std::span<const Complex> x) const;

    /// x = H^H y, y of length L, x of length M.
    void rmatvec(std::span<const Complex> y, std::span<Complex> x) const;
    std::vector<Complex> rmatvec(std::span<const Complex> y) const;

    /// Direct O(LM) products, kept as a reference path.
    std::vector<Complex> matvec_naive(std::span<const Complex> x) const;
    std::vector<Complex> rmatvec_naive(std::span<const Complex> y) const;

    Eigen::MatrixXcd to_dense() const;

    struct Impl;

private:
    std::shared_ptr<const Impl> impl_;
};

/// Validating factory: N >= 3, and 2 <= L <= N - 1 when L is given.
HankelOperator build_hankel(std::span<const Complex> signal,
                            std::optional<std::size_t> rows = std::nullopt);
HankelOperator build_hankel(std::span<const double> signal,
                            std::optional<std::size_t> rows = std::nullopt);

} // namespace hlsvd
