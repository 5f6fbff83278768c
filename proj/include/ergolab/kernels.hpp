#pragma once

#include <cstddef>

#include "ergolab/complex.hpp"

namespace ergolab::kernels {

/// Hot inner loops on interleaved complex arrays, provided in two lanes:
/// a scalar reference and an AVX2 variant selected at runtime.
///
/// Both lanes follow one reduction contract so their results are
/// bit-identical (this is asserted by tests, not just approximated):
///   * element i contributes to partial i mod 4,
///   * squared magnitudes accumulate re^2 and im^2 in separate partials,
///   * partials combine as (p0+p1)+(p2+p3),
///   * complex products are formed as (ar*br - ai*bi, ar*bi + ai*br) with
///     no FMA contraction (the build sets -ffp-contract=off).
/// Keeping the lanes bit-identical means kernel dispatch can never change
/// a report, which the engine's determinism contract relies on.
struct KernelTable {
    // dst[i] += src[i]
    void (*acc)(cplx* dst, const cplx* src, std::size_t n);
    // dst[i] += w * src[i]
    void (*axpy)(cplx* dst, cplx w, const cplx* src, std::size_t n);
    // dst[i] *= w
    void (*scale)(cplx* dst, cplx w, std::size_t n);
    // dst[i] = a[i] * b[i]; dst may alias a or b
    void (*pointwise_mul)(cplx* dst, const cplx* a, const cplx* b, std::size_t n);
    // sum a[i] * b[i]
    cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
    // sum a[i] * conj(b[i])
    cplx (*dotc)(const cplx* a, const cplx* b, std::size_t n);
    // sum a[i]
    cplx (*sum)(const cplx* a, std::size_t n);
    // sum |a[i]|^2
    double (*sum_abs2)(const cplx* a, std::size_t n);
    // sum |a[i]|, |z| = sqrt(re^2 + im^2)
    double (*sum_abs)(const cplx* a, std::size_t n);
    // max |a[i]|^2 (caller applies the final sqrt; max needs no rounding care)
    double (*max_abs2)(const cplx* a, std::size_t n);
    // dst[i] += |src[i]| on the real component; imaginary parts untouched
    void (*abs_accum)(cplx* dst, const cplx* src, std::size_t n);

    const char* name;
};

/// Scalar reference lane; always available.
const KernelTable& scalar_kernels();

/// AVX2 lane, or nullptr when unsupported (non-x86 build or CPU without AVX2).
const KernelTable* avx2_kernels();

/// Lane picked at startup: AVX2 when the CPU supports it, else scalar.
/// ERGOLAB_KERNELS=scalar|avx2|auto overrides (avx2 fails fast if absent).
const KernelTable& active();

} // namespace ergolab::kernels
