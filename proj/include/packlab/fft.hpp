#pragma once

#include <fftw3.h>

#include <cstddef>
#include <memory>
#include <vector>

#include "packlab/error.hpp"

namespace packlab::fft {

namespace detail {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
struct PlanFree {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

using RealBuf = std::unique_ptr<double[], FftwFree>;
using ComplexBuf = std::unique_ptr<fftw_complex[], FftwFree>;
using Plan = std::unique_ptr<fftw_plan_s, PlanFree>;

inline RealBuf real_buffer(std::size_t n) {
    auto* p = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    if (p == nullptr) {
        fail(ErrorKind::budget, "fft buffer allocation failed");
    }
    return RealBuf(p);
}

inline ComplexBuf complex_buffer(std::size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (p == nullptr) {
        fail(ErrorKind::budget, "fft buffer allocation failed");
    }
    return ComplexBuf(p);
}

inline int good_size(int n) {
    // Smallest 2^a 3^b 5^c 7^d >= n.
    for (int m = n;; ++m) {
        int r = m;
        for (int f : {2, 3, 5, 7}) {
            while (r % f == 0) {
                r /= f;
            }
        }
        if (r == 1) {
            return m;
        }
    }
}

}  // namespace detail

// Full linear convolution of two row-major 2D arrays (index x * ny + y).
// Output has (anx + bnx - 1) x (any + bny - 1) entries.
inline std::vector<double> convolve_2d(const std::vector<double>& a, int anx, int any, const std::vector<double>& b,
                                       int bnx, int bny) {
    const int onx = anx + bnx - 1;
    const int ony = any + bny - 1;
    const int nx = detail::good_size(onx);
    const int ny = detail::good_size(ony);
    const int nyc = ny / 2 + 1;
    const std::size_t nreal = static_cast<std::size_t>(nx) * ny;
    const std::size_t ncplx = static_cast<std::size_t>(nx) * nyc;

    auto ra = detail::real_buffer(nreal);
    auto rb = detail::real_buffer(nreal);
    auto ca = detail::complex_buffer(ncplx);
    auto cb = detail::complex_buffer(ncplx);

    detail::Plan fa(fftw_plan_dft_r2c_2d(nx, ny, ra.get(), ca.get(), FFTW_ESTIMATE));
    detail::Plan fb(fftw_plan_dft_r2c_2d(nx, ny, rb.get(), cb.get(), FFTW_ESTIMATE));
    detail::Plan inv(fftw_plan_dft_c2r_2d(nx, ny, ca.get(), ra.get(), FFTW_ESTIMATE));

    std::fill(ra.get(), ra.get() + nreal, 0.0);
    std::fill(rb.get(), rb.get() + nreal, 0.0);
    for (int x = 0; x < anx; ++x) {
        for (int y = 0; y < any; ++y) {
            ra[static_cast<std::size_t>(x) * ny + y] = a[static_cast<std::size_t>(x) * any + y];
        }
    }
    for (int x = 0; x < bnx; ++x) {
        for (int y = 0; y < bny; ++y) {
            rb[static_cast<std::size_t>(x) * ny + y] = b[static_cast<std::size_t>(x) * bny + y];
        }
    }
    fftw_execute(fa.get());
    fftw_execute(fb.get());
    const double scale = 1.0 / static_cast<double>(nreal);
    for (std::size_t k = 0; k < ncplx; ++k) {
        const double re = ca[k][0] * cb[k][0] - ca[k][1] * cb[k][1];
        const double im = ca[k][0] * cb[k][1] + ca[k][1] * cb[k][0];
        ca[k][0] = re * scale;
        ca[k][1] = im * scale;
    }
    fftw_execute(inv.get());

    std::vector<double> out(static_cast<std::size_t>(onx) * ony);
    for (int x = 0; x < onx; ++x) {
        for (int y = 0; y < ony; ++y) {
            out[static_cast<std::size_t>(x) * ony + y] = ra[static_cast<std::size_t>(x) * ny + y];
        }
    }
    return out;
}

}  // namespace packlab::fft
