#include "ergolab/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "ergolab/errors.hpp"

namespace ergolab::kernels {

namespace {

// ---------------------------------------------------------------------------
// Scalar reference lane.
//
// The loops are written against the reduction contract in kernels.hpp rather
// than in the most natural scalar style: four interleaved partials, separate
// re^2/im^2 partials for squared magnitudes, explicit product formulas
// instead of std::complex operator* (whose library implementation is free to
// add NaN fixups).  This is what makes the AVX2 lane able to match it bit
// for bit.
// ---------------------------------------------------------------------------

void s_acc(cplx* dst, const cplx* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

void s_axpy(cplx* dst, cplx w, const cplx* src, std::size_t n) {
    const double wr = w.real(), wi = w.imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = src[i].real(), ai = src[i].imag();
        dst[i] += cplx(ar * wr - ai * wi, ai * wr + ar * wi);
    }
}

void s_scale(cplx* dst, cplx w, std::size_t n) {
    const double wr = w.real(), wi = w.imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = dst[i].real(), ai = dst[i].imag();
        dst[i] = cplx(ar * wr - ai * wi, ai * wr + ar * wi);
    }
}

void s_pointwise_mul(cplx* dst, const cplx* a, const cplx* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        dst[i] = cplx(ar * br - ai * bi, ai * br + ar * bi);
    }
}

cplx s_dot(const cplx* a, const cplx* b, std::size_t n) {
    double pr[4] = {0, 0, 0, 0}, pi[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        pr[i & 3] += ar * br - ai * bi;
        pi[i & 3] += ai * br + ar * bi;
    }
    return cplx((pr[0] + pr[1]) + (pr[2] + pr[3]),
                (pi[0] + pi[1]) + (pi[2] + pi[3]));
}

cplx s_dotc(const cplx* a, const cplx* b, std::size_t n) {
    double pr[4] = {0, 0, 0, 0}, pi[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        pr[i & 3] += ar * br + ai * bi;
        pi[i & 3] += ai * br - ar * bi;
    }
    return cplx((pr[0] + pr[1]) + (pr[2] + pr[3]),
                (pi[0] + pi[1]) + (pi[2] + pi[3]));
}

cplx s_sum(const cplx* a, std::size_t n) {
    double pr[4] = {0, 0, 0, 0}, pi[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        pr[i & 3] += a[i].real();
        pi[i & 3] += a[i].imag();
    }
    return cplx((pr[0] + pr[1]) + (pr[2] + pr[3]),
                (pi[0] + pi[1]) + (pi[2] + pi[3]));
}

double s_sum_abs2(const cplx* a, std::size_t n) {
    // s[2j] collects re^2, s[2j+1] collects im^2 of elements i == j mod 4.
    double s[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i & 3;
        const double re = a[i].real(), im = a[i].imag();
        s[2 * j] += re * re;
        s[2 * j + 1] += im * im;
    }
    return (((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7])));
}

double s_sum_abs(const cplx* a, std::size_t n) {
    double p[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double re = a[i].real(), im = a[i].imag();
        p[i & 3] += std::sqrt(re * re + im * im);
    }
    return (p[0] + p[1]) + (p[2] + p[3]);
}

double s_max_abs2(const cplx* a, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double re = a[i].real(), im = a[i].imag();
        const double v = re * re + im * im;
        if (v > m) m = v;
    }
    return m;
}

void s_abs_accum(cplx* dst, const cplx* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double re = src[i].real(), im = src[i].imag();
        // Touch only the real component: adding 0.0 to the imaginary part
        // would flip a stored -0.0, and the AVX2 lane leaves it alone.
        dst[i].real(dst[i].real() + std::sqrt(re * re + im * im));
    }
}

const KernelTable kScalarTable = {
    s_acc,  s_axpy, s_scale,    s_pointwise_mul, s_dot,       s_dotc,
    s_sum,  s_sum_abs2, s_sum_abs, s_max_abs2,   s_abs_accum, "scalar",
};

const KernelTable& resolve_active() {
    const char* want = std::getenv("ERGOLAB_KERNELS");
    std::string mode = want ? want : "auto";
    if (mode == "scalar") return scalar_kernels();
    const KernelTable* vec = avx2_kernels();
    if (mode == "avx2") {
        if (!vec) fail(ErrorCode::Argument, "ERGOLAB_KERNELS=avx2 requested but AVX2 is unavailable");
        return *vec;
    }
    if (mode != "auto")
        fail(ErrorCode::Argument, "ERGOLAB_KERNELS must be scalar, avx2 or auto, got: " + mode);
    return vec ? *vec : scalar_kernels();
}

} // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

const KernelTable& active() {
    static const KernelTable& table = resolve_active();
    return table;
}

} // namespace ergolab::kernels
