#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ergolab/complex.hpp"

namespace ergolab {

/// How a function on the underlying probability space is stored.
///
///   Grid     — M values sampled at i/M on the unit circle, uniform measure.
///   Fourier  — coefficients c_j for e_j(x) = exp(2*pi*i*j*x), |j| <= K.
///   Finite   — q values on Z_q, uniform measure 1/q.
///   Cylinder — a function of coordinates a..b of a two-sided coin-flip
///              sequence, stored as a table of 2^(b-a+1) values.
enum class RepKind { Grid, Fourier, Finite, Cylinder };

enum class NormKind { L1, L2, Sup };

const char* rep_kind_name(RepKind kind) noexcept;

/// Conversion target descriptor.
struct RepTarget {
    RepKind kind;
    int param = 0;             // M for Grid, K for Fourier, q for Finite
    std::int64_t lo = 0;       // Cylinder window
    std::int64_t hi = -1;
};

/// Cylinder windows wider than this are rejected: the table doubles per
/// coordinate and past 31 coordinates it stops being a table at all.
inline constexpr int kMaxCylinderWidth = 31;

class FunctionRep {
public:
    FunctionRep() = default;

    static FunctionRep grid(std::vector<cplx> values);
    static FunctionRep fourier(int cutoff, std::vector<cplx> coeffs);
    static FunctionRep finite(std::vector<cplx> values);
    /// Table convention: coordinate c of window [lo, hi] is bit (hi - c) of
    /// the table index, i.e. the leftmost coordinate is the most significant
    /// bit. Widening [0,0]:(u,v) to [0,1] therefore gives (u,u,v,v).
    static FunctionRep cylinder(std::int64_t lo, std::int64_t hi, std::vector<cplx> table);

    /// Constant function with the same kind and shape as `like`.
    static FunctionRep constant_like(const FunctionRep& like, cplx value);
    static FunctionRep zero_like(const FunctionRep& like) { return constant_like(like, cplx(0, 0)); }
    static FunctionRep one_like(const FunctionRep& like) { return constant_like(like, cplx(1, 0)); }

    RepKind rep() const { return kind_; }
    std::size_t size() const { return values_.size(); }
    std::span<const cplx> data() const { return values_; }
    std::span<cplx> mutable_data() { return values_; }

    /// Grid resolution M.
    int grid_points() const;
    /// Fourier cutoff K.
    int cutoff() const;
    /// Finite modulus q.
    std::int64_t modulus() const;
    /// Cylinder window.
    std::int64_t window_lo() const;
    std::int64_t window_hi() const;
    int window_width() const;

    /// Fourier coefficient c_j, |j| <= K (0 beyond the cutoff).
    cplx coeff(int j) const;
    void set_coeff(int j, cplx value);

    /// Pointwise evaluation, one accessor per representation.
    cplx eval_grid(std::int64_t i) const;                    // value at i/M
    cplx eval_finite(std::int64_t x) const;                  // value at x mod q
    cplx eval_point(double x) const;                         // trig-poly value at x
    /// Value at the coin-flip sample generated by `seed`, with the window
    /// read at coordinates shifted by `shift` (the value of the shifted
    /// function at the unshifted sample).
    cplx eval_coin(std::uint64_t seed, std::int64_t shift = 0) const;

    bool is_constant() const;  // every stored value identical

    /// Average over coordinates of [lo, hi] outside [sub_lo, sub_hi]
    /// (cylinder only; the sub-window must be contained in the window).
    FunctionRep marginal_to(std::int64_t sub_lo, std::int64_t sub_hi) const;
    /// Reindex onto a superset window (cylinder only; exact).
    FunctionRep widened_to(std::int64_t new_lo, std::int64_t new_hi) const;
    /// Same table, window translated by n (the Koopman image under n shifts).
    FunctionRep shifted_window(std::int64_t n) const;

private:
    FunctionRep(RepKind kind, std::vector<cplx> values, int param,
                std::int64_t lo, std::int64_t hi);

    RepKind kind_ = RepKind::Grid;
    std::vector<cplx> values_;
    int param_ = 0;            // M (grid) or K (fourier); redundant but checked
    std::int64_t lo_ = 0;      // cylinder window
    std::int64_t hi_ = -1;
};

// --- bilinear / metric operations ------------------------------------------

/// Integral of f * conj(g). Conjugate-linear in g. Fourier cutoffs reconcile
/// by zero extension (the stored trig polynomial does not change); cylinder
/// windows reconcile exactly through marginals on the window overlap, so no
/// widening — and no window-cap failure — can occur here.
cplx inner_product(const FunctionRep& f, const FunctionRep& g);

double norm(const FunctionRep& f, NormKind p);

/// Integral of f; equals inner_product(f, one).
cplx mean(const FunctionRep& f);

/// || f - g ||_2 computed without materializing f - g, so it works for
/// cylinder functions on arbitrarily far-apart windows.
double l2_distance(const FunctionRep& f, const FunctionRep& g);

// --- vector-space operations -------------------------------------------------

/// out = f + w * g. Shapes must agree kind-wise; fourier zero-extends,
/// cylinder widens to the union window (WindowCap error past the width cap,
/// except that constant operands combine without widening).
FunctionRep add_scaled(const FunctionRep& f, const FunctionRep& g, cplx w);
inline FunctionRep add(const FunctionRep& f, const FunctionRep& g) { return add_scaled(f, g, cplx(1, 0)); }
inline FunctionRep sub(const FunctionRep& f, const FunctionRep& g) { return add_scaled(f, g, cplx(-1, 0)); }
FunctionRep scaled(const FunctionRep& f, cplx w);

/// Pointwise product. Grid/finite/cylinder multiply elementwise (cylinder on
/// the union window); fourier is the coefficient convolution truncated at the
/// larger operand cutoff.
FunctionRep pointwise_product(const FunctionRep& f, const FunctionRep& g);

/// Pointwise |f|. Not defined on the fourier representation (callers convert
/// to a grid first); raises a Kind error there.
FunctionRep pointwise_abs(const FunctionRep& f);

// --- conversions -------------------------------------------------------------

/// Defined pairs: fourier->grid (evaluation; exact at grid points),
/// grid->fourier (exact for trig polynomials of degree <= K when M >= 2K+1;
/// requires M >= 2K+1), fourier->fourier with K' >= K (zero extension),
/// grid->grid / finite->finite with identical shape, cylinder->cylinder onto
/// a superset window. Everything else raises a Conversion error.
FunctionRep convert(const FunctionRep& f, const RepTarget& target);

/// Short human-readable shape tag, e.g. "fourier(K=32)" — used in reports.
std::string shape_label(const FunctionRep& f);

} // namespace ergolab
