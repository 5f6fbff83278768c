// AVX2 lane of the kernel table. This translation unit is the only one built
// with -mavx2; everything else stays generic and reaches these through the
// runtime-dispatched table. On non-x86 builds it degrades to a stub.

#include "ergolab/kernels.hpp"

#include <cmath>

#if defined(ERGOLAB_HAVE_AVX2)

#include <immintrin.h>

namespace ergolab::kernels {

namespace {

// One __m256d holds two interleaved complexes: (re0, im0, re1, im1).

inline __m256d complex_mul(__m256d a, __m256d b) {
    __m256d b_re = _mm256_movedup_pd(b);        // (br0, br0, br1, br1)
    __m256d b_im = _mm256_permute_pd(b, 0xF);   // (bi0, bi0, bi1, bi1)
    __m256d a_sw = _mm256_permute_pd(a, 0x5);   // (ai0, ar0, ai1, ar1)
    __m256d t1 = _mm256_mul_pd(a, b_re);        // (ar*br, ai*br, ...)
    __m256d t2 = _mm256_mul_pd(a_sw, b_im);     // (ai*bi, ar*bi, ...)
    // (ar*br - ai*bi, ai*br + ar*bi): the scalar lane's formula, same rounding.
    return _mm256_addsub_pd(t1, t2);
}

inline __m256d complex_mul_conj_b(__m256d a, __m256d b) {
    __m256d b_re = _mm256_movedup_pd(b);
    __m256d b_im = _mm256_permute_pd(b, 0xF);
    __m256d a_sw = _mm256_permute_pd(a, 0x5);
    __m256d t1 = _mm256_mul_pd(a, b_re);
    __m256d t2 = _mm256_mul_pd(a_sw, b_im);
    __m256d t2n = _mm256_xor_pd(t2, _mm256_set1_pd(-0.0));
    // (ar*br + ai*bi, ai*br - ar*bi); sign flips are exact so this still
    // rounds identically to the scalar lane.
    return _mm256_addsub_pd(t1, t2n);
}

void v_acc(cplx* dst, const cplx* src, std::size_t n) {
    auto* d = reinterpret_cast<double*>(dst);
    const auto* s = reinterpret_cast<const double*>(src);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_add_pd(_mm256_loadu_pd(d + 2 * i), _mm256_loadu_pd(s + 2 * i));
        _mm256_storeu_pd(d + 2 * i, v);
    }
    for (; i < n; ++i) dst[i] += src[i];
}

void v_axpy(cplx* dst, cplx w, const cplx* src, std::size_t n) {
    const double wr = w.real(), wi = w.imag();
    __m256d w_re = _mm256_set1_pd(wr);
    __m256d w_im = _mm256_set1_pd(wi);
    auto* d = reinterpret_cast<double*>(dst);
    const auto* s = reinterpret_cast<const double*>(src);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d a = _mm256_loadu_pd(s + 2 * i);
        __m256d a_sw = _mm256_permute_pd(a, 0x5);
        __m256d t1 = _mm256_mul_pd(a, w_re);
        __m256d t2 = _mm256_mul_pd(a_sw, w_im);
        __m256d prod = _mm256_addsub_pd(t1, t2);
        _mm256_storeu_pd(d + 2 * i, _mm256_add_pd(_mm256_loadu_pd(d + 2 * i), prod));
    }
    for (; i < n; ++i) {
        const double ar = src[i].real(), ai = src[i].imag();
        dst[i] += cplx(ar * wr - ai * wi, ai * wr + ar * wi);
    }
}

void v_scale(cplx* dst, cplx w, std::size_t n) {
    const double wr = w.real(), wi = w.imag();
    __m256d w_re = _mm256_set1_pd(wr);
    __m256d w_im = _mm256_set1_pd(wi);
    auto* d = reinterpret_cast<double*>(dst);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d a = _mm256_loadu_pd(d + 2 * i);
        __m256d a_sw = _mm256_permute_pd(a, 0x5);
        __m256d t1 = _mm256_mul_pd(a, w_re);
        __m256d t2 = _mm256_mul_pd(a_sw, w_im);
        _mm256_storeu_pd(d + 2 * i, _mm256_addsub_pd(t1, t2));
    }
    for (; i < n; ++i) {
        const double ar = dst[i].real(), ai = dst[i].imag();
        dst[i] = cplx(ar * wr - ai * wi, ai * wr + ar * wi);
    }
}

void v_pointwise_mul(cplx* dst, const cplx* a, const cplx* b, std::size_t n) {
    auto* d = reinterpret_cast<double*>(dst);
    const auto* pa = reinterpret_cast<const double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d va = _mm256_loadu_pd(pa + 2 * i);
        __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        _mm256_storeu_pd(d + 2 * i, complex_mul(va, vb));
    }
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        dst[i] = cplx(ar * br - ai * bi, ai * br + ar * bi);
    }
}

cplx v_dot(const cplx* a, const cplx* b, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    __m256d acc0 = _mm256_setzero_pd();  // partials p0, p1
    __m256d acc1 = _mm256_setzero_pd();  // partials p2, p3
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, complex_mul(_mm256_loadu_pd(pa + 2 * i),
                                               _mm256_loadu_pd(pb + 2 * i)));
        acc1 = _mm256_add_pd(acc1, complex_mul(_mm256_loadu_pd(pa + 2 * i + 4),
                                               _mm256_loadu_pd(pb + 2 * i + 4)));
    }
    double p[8];
    _mm256_storeu_pd(p, acc0);
    _mm256_storeu_pd(p + 4, acc1);
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        p[2 * (i & 3)] += ar * br - ai * bi;
        p[2 * (i & 3) + 1] += ai * br + ar * bi;
    }
    return cplx((p[0] + p[2]) + (p[4] + p[6]), (p[1] + p[3]) + (p[5] + p[7]));
}

cplx v_dotc(const cplx* a, const cplx* b, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, complex_mul_conj_b(_mm256_loadu_pd(pa + 2 * i),
                                                      _mm256_loadu_pd(pb + 2 * i)));
        acc1 = _mm256_add_pd(acc1, complex_mul_conj_b(_mm256_loadu_pd(pa + 2 * i + 4),
                                                      _mm256_loadu_pd(pb + 2 * i + 4)));
    }
    double p[8];
    _mm256_storeu_pd(p, acc0);
    _mm256_storeu_pd(p + 4, acc1);
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        p[2 * (i & 3)] += ar * br + ai * bi;
        p[2 * (i & 3) + 1] += ai * br - ar * bi;
    }
    return cplx((p[0] + p[2]) + (p[4] + p[6]), (p[1] + p[3]) + (p[5] + p[7]));
}

cplx v_sum(const cplx* a, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(pa + 2 * i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(pa + 2 * i + 4));
    }
    double p[8];
    _mm256_storeu_pd(p, acc0);
    _mm256_storeu_pd(p + 4, acc1);
    for (; i < n; ++i) {
        p[2 * (i & 3)] += a[i].real();
        p[2 * (i & 3) + 1] += a[i].imag();
    }
    return cplx((p[0] + p[2]) + (p[4] + p[6]), (p[1] + p[3]) + (p[5] + p[7]));
}

double v_sum_abs2(const cplx* a, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    __m256d acc0 = _mm256_setzero_pd();  // (s0, s1, s2, s3)
    __m256d acc1 = _mm256_setzero_pd();  // (s4, s5, s6, s7)
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v0 = _mm256_loadu_pd(pa + 2 * i);
        __m256d v1 = _mm256_loadu_pd(pa + 2 * i + 4);
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(v0, v0));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(v1, v1));
    }
    double s[8];
    _mm256_storeu_pd(s, acc0);
    _mm256_storeu_pd(s + 4, acc1);
    for (; i < n; ++i) {
        const double re = a[i].real(), im = a[i].imag();
        s[2 * (i & 3)] += re * re;
        s[2 * (i & 3) + 1] += im * im;
    }
    return (((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7])));
}

double v_sum_abs(const cplx* a, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    __m256d acc0 = _mm256_setzero_pd();  // lanes (p0, p0, p1, p1)
    __m256d acc1 = _mm256_setzero_pd();  // lanes (p2, p2, p3, p3)
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v0 = _mm256_loadu_pd(pa + 2 * i);
        __m256d v1 = _mm256_loadu_pd(pa + 2 * i + 4);
        __m256d m0 = _mm256_mul_pd(v0, v0);
        __m256d m1 = _mm256_mul_pd(v1, v1);
        acc0 = _mm256_add_pd(acc0, _mm256_sqrt_pd(_mm256_hadd_pd(m0, m0)));
        acc1 = _mm256_add_pd(acc1, _mm256_sqrt_pd(_mm256_hadd_pd(m1, m1)));
    }
    double q0[4], q1[4];
    _mm256_storeu_pd(q0, acc0);
    _mm256_storeu_pd(q1, acc1);
    double p[4] = {q0[0], q0[2], q1[0], q1[2]};
    for (; i < n; ++i) {
        const double re = a[i].real(), im = a[i].imag();
        p[i & 3] += std::sqrt(re * re + im * im);
    }
    return (p[0] + p[1]) + (p[2] + p[3]);
}

double v_max_abs2(const cplx* a, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(pa + 2 * i);
        __m256d m = _mm256_mul_pd(v, v);
        acc = _mm256_max_pd(acc, _mm256_hadd_pd(m, m));
    }
    double q[4];
    _mm256_storeu_pd(q, acc);
    double best = q[0] > q[2] ? q[0] : q[2];
    for (; i < n; ++i) {
        const double re = a[i].real(), im = a[i].imag();
        const double v = re * re + im * im;
        if (v > best) best = v;
    }
    return best;
}

void v_abs_accum(cplx* dst, const cplx* src, std::size_t n) {
    auto* d = reinterpret_cast<double*>(dst);
    const auto* s = reinterpret_cast<const double*>(src);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(s + 2 * i);
        __m256d m = _mm256_mul_pd(v, v);
        __m256d r = _mm256_sqrt_pd(_mm256_hadd_pd(m, m));  // (|z0|, |z0|, |z1|, |z1|)
        __m256d cur = _mm256_loadu_pd(d + 2 * i);
        __m256d added = _mm256_add_pd(cur, r);
        // Take real lanes from the sum, keep imaginary lanes untouched
        // (adding 0.0 would turn a stored -0.0 into +0.0).
        _mm256_storeu_pd(d + 2 * i, _mm256_blend_pd(cur, added, 0x5));
    }
    for (; i < n; ++i) {
        const double re = src[i].real(), im = src[i].imag();
        dst[i] += cplx(std::sqrt(re * re + im * im), 0.0);
    }
}

const KernelTable kAvx2Table = {
    v_acc,  v_axpy, v_scale,    v_pointwise_mul, v_dot,       v_dotc,
    v_sum,  v_sum_abs2, v_sum_abs, v_max_abs2,   v_abs_accum, "avx2",
};

} // namespace

const KernelTable* avx2_kernels() {
    return __builtin_cpu_supports("avx2") ? &kAvx2Table : nullptr;
}

} // namespace ergolab::kernels

#else // !ERGOLAB_HAVE_AVX2

namespace ergolab::kernels {

const KernelTable* avx2_kernels() { return nullptr; }

} // namespace ergolab::kernels

#endif
