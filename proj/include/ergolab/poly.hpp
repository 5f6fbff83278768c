#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ergolab {

/// Integer-coefficient polynomial c_0 + c_1 n + ... + c_d n^d, used as a
/// Koopman exponent sequence n -> q(n). Average schedules require values
/// that are positive integers across the whole lattice range; the engine
/// validates that up front (this type only evaluates).
class IntPolynomial {
public:
    /// Default: the identity exponent q(n) = n.
    IntPolynomial() : coeffs_{0, 1} {}
    /// Coefficients low-to-high; trailing zeros trimmed (constant 0 keeps
    /// one coefficient).
    explicit IntPolynomial(std::vector<std::int64_t> coeffs);

    static IntPolynomial identity() { return IntPolynomial(); }

    const std::vector<std::int64_t>& coefficients() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_constant() const { return degree() < 1; }

    /// Horner evaluation; any intermediate past 2^62 in magnitude raises an
    /// ExponentOverflow error (the engine never needs exponents that large).
    std::int64_t eval(std::int64_t n) const;

    /// Horner evaluation with every step reduced mod q >= 1; result in
    /// [0, q). Exact no matter how large the unreduced value would be.
    std::int64_t eval_mod(std::int64_t n, std::int64_t q) const;

    /// Human-readable form, e.g. "n^2 + n" or "2n + 1"; used in labels.
    std::string label() const;

    bool operator==(const IntPolynomial& other) const = default;

private:
    std::vector<std::int64_t> coeffs_;
};

} // namespace ergolab
