#include "ergolab/poly.hpp"

#include <cstdlib>

#include "ergolab/errors.hpp"

namespace ergolab {

namespace {
constexpr std::int64_t kGuard = std::int64_t{1} << 62;
} // namespace

IntPolynomial::IntPolynomial(std::vector<std::int64_t> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0);
    while (coeffs_.size() > 1 && coeffs_.back() == 0) coeffs_.pop_back();
}

std::int64_t IntPolynomial::eval(std::int64_t n) const {
    if (std::abs(n) >= kGuard) fail(ErrorCode::ExponentOverflow, "polynomial argument out of range");
    __int128 acc = 0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) {
        acc = acc * n + coeffs_[i];
        if (acc > kGuard || acc < -static_cast<__int128>(kGuard))
            fail(ErrorCode::ExponentOverflow,
                 "polynomial exponent overflows the 62-bit guard at n = " + std::to_string(n));
    }
    return static_cast<std::int64_t>(acc);
}

std::int64_t IntPolynomial::eval_mod(std::int64_t n, std::int64_t q) const {
    if (q < 1) fail(ErrorCode::Argument, "eval_mod requires a positive modulus");
    if (q >= (std::int64_t{1} << 31)) fail(ErrorCode::Argument, "eval_mod modulus too large");
    const std::int64_t nr = ((n % q) + q) % q;
    std::int64_t acc = 0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) {
        const std::int64_t c = ((coeffs_[i] % q) + q) % q;
        acc = (acc * nr + c) % q;
    }
    return acc;
}

std::string IntPolynomial::label() const {
    std::string out;
    for (int d = degree(); d >= 0; --d) {
        const std::int64_t c = coeffs_[static_cast<std::size_t>(d)];
        if (c == 0 && !(d == 0 && out.empty())) continue;
        if (!out.empty()) out += c < 0 ? " - " : " + ";
        else if (c < 0) out += "-";
        const std::int64_t a = std::abs(c);
        const bool unit = (a == 1 && d > 0);
        if (!unit) out += std::to_string(a);
        if (d >= 1) out += "n";
        if (d >= 2) out += "^" + std::to_string(d);
    }
    return out;
}

} // namespace ergolab
