#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace ergolab {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.28318530717958647692;

/// exp(2*pi*i*turns). `turns` is in revolutions, not radians, so integer
/// turns map to exactly representable arguments before the sin/cos call.
inline cplx unit_phase(double turns) {
    double angle = kTwoPi * turns;
    return cplx(std::cos(angle), std::sin(angle));
}

/// Reduce `a*b` modulo 1 in extended precision. Products like n*theta with
/// n ~ 2^28 lose ~9 digits in double before the reduction; doing the multiply
/// and remainder in long double keeps phase errors below 1e-11 over the
/// exponent ranges the engine produces.
inline double mul_mod_one(double a, long double b) {
    long double p = static_cast<long double>(a) * b;
    long double r = p - std::floor(p);
    return static_cast<double>(r);
}

/// |z| as sqrt(re^2+im^2). Both kernel lanes use this exact formula so the
/// scalar and SIMD paths round identically (values here are O(1); the
/// overflow protection of std::abs/hypot is not needed and would change
/// the rounding).
inline double abs2(const cplx& z) {
    return z.real() * z.real() + z.imag() * z.imag();
}

inline double abs_fast(const cplx& z) {
    return std::sqrt(abs2(z));
}

inline bool is_finite(const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

} // namespace ergolab
