#include "hlsvd/hankel.hpp"

#include "hlsvd/errors.hpp"

#include "fftw_lock.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <mutex>
#include <string>

namespace hlsvd
{

namespace detail
{

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace detail

namespace
{

using detail::fftw_planner_mutex;

struct PlanDeleter
{
    void operator()(fftw_plan_s* p) const
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct FftwFree
{
    void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using Buffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
Buffer<T> allocate(std::size_t n)
{
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
    if (p == nullptr)
        throw std::bad_alloc();
    std::memset(static_cast<void*>(p), 0, sizeof(T) * n);
    return Buffer<T>(p);
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

void check_shape(std::size_t n, std::optional<std::size_t> rows)
{
    if (n < 3)
        throw Error(ErrorKind::InvalidShape,
                    "Hankel operator needs at least 3 samples, got " + std::to_string(n));
    if (rows && (*rows < 2 || *rows > n - 1))
        throw Error(ErrorKind::InvalidShape, "row count " + std::to_string(*rows) +
                                                 " outside [2, " + std::to_string(n - 1) + "]");
}

} // namespace

struct HankelOperator::Impl
{
    std::size_t L = 0;
    std::size_t M = 0;
    std::size_t N = 0;
    std::size_t P = 0;
    bool real = false;
    std::vector<Complex> data;

    // Real path: r2c transform of the zero-padded signal (P/2 + 1 bins).
    // Complex path: c2c transforms of the signal and of its conjugate.
    Buffer<Complex> symbol;
    Buffer<Complex> symbol_conj;

    Plan r2c;
    Plan c2r;
    Plan fwd;
    Plan bwd;

    void init_real(std::span<const double> signal)
    {
        real = true;
        const std::size_t bins = P / 2 + 1;
        auto in = allocate<double>(P);
        auto out = allocate<Complex>(bins);
        {
            std::lock_guard lock(fftw_planner_mutex());
            r2c.reset(fftw_plan_dft_r2c_1d(static_cast<int>(P), in.get(), as_fftw(out.get()),
                                           FFTW_ESTIMATE));
            c2r.reset(fftw_plan_dft_c2r_1d(static_cast<int>(P), as_fftw(out.get()), in.get(),
                                           FFTW_ESTIMATE));
        }
        std::copy(signal.begin(), signal.end(), in.get());
        symbol = allocate<Complex>(bins);
        fftw_execute_dft_r2c(r2c.get(), in.get(), as_fftw(symbol.get()));
    }

    void init_complex()
    {
        real = false;
        auto in = allocate<Complex>(P);
        auto out = allocate<Complex>(P);
        {
            std::lock_guard lock(fftw_planner_mutex());
            fwd.reset(fftw_plan_dft_1d(static_cast<int>(P), as_fftw(in.get()), as_fftw(out.get()),
                                       FFTW_FORWARD, FFTW_ESTIMATE));
            bwd.reset(fftw_plan_dft_1d(static_cast<int>(P), as_fftw(in.get()), as_fftw(out.get()),
                                       FFTW_BACKWARD, FFTW_ESTIMATE));
        }
        symbol = allocate<Complex>(P);
        symbol_conj = allocate<Complex>(P);
        std::copy(data.begin(), data.end(), in.get());
        fftw_execute_dft(fwd.get(), as_fftw(in.get()), as_fftw(symbol.get()));
        for (std::size_t k = 0; k < N; ++k)
            in[k] = std::conj(data[k]);
        fftw_execute_dft(fwd.get(), as_fftw(in.get()), as_fftw(symbol_conj.get()));
    }

    // out[t] = sum_m sym_signal[t - m] * v[len - 1 - m] for t in [len-1, N-1],
    // i.e. a correlation of the signal with v, written to out[0..N-len].
    void correlate_real(std::span<const double> v, std::span<double> out) const
    {
        const std::size_t len = v.size();
        const std::size_t bins = P / 2 + 1;
        auto buf = allocate<double>(P);
        auto spec = allocate<Complex>(bins);
        for (std::size_t m = 0; m < len; ++m)
            buf[m] = v[len - 1 - m];
        fftw_execute_dft_r2c(r2c.get(), buf.get(), as_fftw(spec.get()));
        for (std::size_t k = 0; k < bins; ++k)
            spec[k] *= symbol[k];
        fftw_execute_dft_c2r(c2r.get(), as_fftw(spec.get()), buf.get());
        const double scale = 1.0 / static_cast<double>(P);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = buf[i + len - 1] * scale;
    }

    void correlate_complex(const Buffer<Complex>& sym, std::span<const Complex> v,
                           std::span<Complex> out) const
    {
        const std::size_t len = v.size();
        auto buf = allocate<Complex>(P);
        auto spec = allocate<Complex>(P);
        for (std::size_t m = 0; m < len; ++m)
            buf[m] = v[len - 1 - m];
        fftw_execute_dft(fwd.get(), as_fftw(buf.get()), as_fftw(spec.get()));
        for (std::size_t k = 0; k < P; ++k)
            spec[k] *= sym[k];
        fftw_execute_dft(bwd.get(), as_fftw(spec.get()), as_fftw(buf.get()));
        const double scale = 1.0 / static_cast<double>(P);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = buf[i + len - 1] * scale;
    }

    // Real operator applied to a complex vector, split into real and
    // imaginary parts so that real inputs give exactly real outputs.
    void apply_real(std::span<const Complex> v, std::span<Complex> out) const
    {
        const std::size_t len = v.size();
        std::vector<double> part(len);
        std::vector<double> res(out.size());
        for (std::size_t m = 0; m < len; ++m)
            part[m] = v[m].real();
        correlate_real(part, res);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = Complex(res[i], 0.0);
        const bool has_imag =
            std::any_of(v.begin(), v.end(), [](const Complex& c) { return c.imag() != 0.0; });
        if (!has_imag)
            return;
        for (std::size_t m = 0; m < len; ++m)
            part[m] = v[m].imag();
        correlate_real(part, res);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i].imag(res[i]);
    }
};

HankelOperator::HankelOperator(std::span<const Complex> signal, std::optional<std::size_t> rows)
{
    check_shape(signal.size(), rows);
    auto impl = std::make_shared<Impl>();
    impl->N = signal.size();
    impl->L = rows.value_or((impl->N + 1) / 2);
    impl->M = impl->N + 1 - impl->L;
    impl->P = std::bit_ceil(impl->N);
    impl->data.assign(signal.begin(), signal.end());
    impl->init_complex();
    impl_ = std::move(impl);
}

HankelOperator::HankelOperator(std::span<const double> signal, std::optional<std::size_t> rows)
{
    check_shape(signal.size(), rows);
    auto impl = std::make_shared<Impl>();
    impl->N = signal.size();
    impl->L = rows.value_or((impl->N + 1) / 2);
    impl->M = impl->N + 1 - impl->L;
    impl->P = std::bit_ceil(impl->N);
    impl->data.assign(signal.begin(), signal.end());
    impl->init_real(signal);
    impl_ = std::move(impl);
}

std::size_t HankelOperator::rows() const noexcept { return impl_->L; }
std::size_t HankelOperator::cols() const noexcept { return impl_->M; }
std::size_t HankelOperator::size() const noexcept { return impl_->N; }
std::size_t HankelOperator::fft_size() const noexcept { return impl_->P; }
bool HankelOperator::is_real() const noexcept { return impl_->real; }
std::span<const Complex> HankelOperator::data() const noexcept { return impl_->data; }

Complex HankelOperator::operator()(std::size_t i, std::size_t j) const
{
    return impl_->data[i + j];
}

void HankelOperator::matvec(std::span<const Complex> x, std::span<Complex> y) const
{
    if (x.size() != cols() || y.size() != rows())
        throw Error(ErrorKind::DimensionMismatch, "matvec expects x of length " +
                                                      std::to_string(cols()) + " and y of length " +
                                                      std::to_string(rows()));
    if (impl_->real)
        impl_->apply_real(x, y);
    else
        impl_->correlate_complex(impl_->symbol, x, y);
}

std::vector<Complex> HankelOperator::matvec(std::span<const Complex> x) const
{
    std::vector<Complex> y(rows());
    matvec(x, y);
    return y;
}

void HankelOperator::rmatvec(std::span<const Complex> y, std::span<Complex> x) const
{
    if (y.size() != rows() || x.size() != cols())
        throw Error(ErrorKind::DimensionMismatch, "rmatvec expects y of length " +
                                                      std::to_string(rows()) + " and x of length " +
                                                      std::to_string(cols()));
    if (impl_->real)
        impl_->apply_real(y, x);
    else
        impl_->correlate_complex(impl_->symbol_conj, y, x);
}

std::vector<Complex> HankelOperator::rmatvec(std::span<const Complex> y) const
{
    std::vector<Complex> x(cols());
    rmatvec(y, x);
    return x;
}

std::vector<Complex> HankelOperator::matvec_naive(std::span<const Complex> x) const
{
    if (x.size() != cols())
        throw Error(ErrorKind::DimensionMismatch, "matvec expects x of length " +
                                                      std::to_string(cols()));
    std::vector<Complex> y(rows(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < rows(); ++i)
        for (std::size_t j = 0; j < cols(); ++j)
            y[i] += impl_->data[i + j] * x[j];
    return y;
}

std::vector<Complex> HankelOperator::rmatvec_naive(std::span<const Complex> y) const
{
    if (y.size() != rows())
        throw Error(ErrorKind::DimensionMismatch, "rmatvec expects y of length " +
                                                      std::to_string(rows()));
    std::vector<Complex> x(cols(), Complex(0.0, 0.0));
    for (std::size_t j = 0; j < cols(); ++j)
        for (std::size_t i = 0; i < rows(); ++i)
            x[j] += std::conj(impl_->data[i + j]) * y[i];
    return x;
}

Eigen::MatrixXcd HankelOperator::to_dense() const
{
    Eigen::MatrixXcd h(rows(), cols());
    for (std::size_t i = 0; i < rows(); ++i)
        for (std::size_t j = 0; j < cols(); ++j)
            h(i, j) = impl_->data[i + j];
    return h;
}

HankelOperator build_hankel(std::span<const Complex> signal, std::optional<std::size_t> rows)
{
    return HankelOperator(signal, rows);
}

HankelOperator build_hankel(std::span<const double> signal, std::optional<std::size_t> rows)
{
    return HankelOperator(signal, rows);
}

} // namespace hlsvd
