#include "ergolab/function_rep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergolab/errors.hpp"
#include "ergolab/kernels.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

namespace {

void require_finite(const std::vector<cplx>& values, const char* what) {
    for (const cplx& z : values) {
        if (!is_finite(z)) fail(ErrorCode::Argument, std::string(what) + ": non-finite value");
    }
}

[[noreturn]] void shape_mismatch(const FunctionRep& f, const FunctionRep& g, const char* op) {
    fail(ErrorCode::ShapeMismatch,
         std::string(op) + ": incompatible representations " + shape_label(f) + " vs " + shape_label(g));
}

/// Grid size used to bound fourier L1/sup norms: dense enough that a degree-K
/// trig polynomial cannot hide between nodes (and >= 2K+1 nodes make the
/// quadrature L2 exact, which keeps L1 <= L2 <= sup true for the reported
/// values as well).
int oversample_count(int cutoff) {
    return std::max(16 * cutoff + 16, 32);
}

} // namespace

const char* rep_kind_name(RepKind kind) noexcept {
    switch (kind) {
        case RepKind::Grid: return "grid";
        case RepKind::Fourier: return "fourier";
        case RepKind::Finite: return "finite";
        case RepKind::Cylinder: return "cylinder";
    }
    return "?";
}

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ShapeMismatch: return "shape-mismatch";
        case ErrorCode::Conversion: return "conversion";
        case ErrorCode::Resolution: return "resolution";
        case ErrorCode::WindowCap: return "window-cap";
        case ErrorCode::Kind: return "kind";
        case ErrorCode::ExponentOverflow: return "exponent-overflow";
        case ErrorCode::UnsupportedOperator: return "unsupported-operator";
        case ErrorCode::DegenerateProbe: return "degenerate-probe";
        case ErrorCode::Applicability: return "applicability";
        case ErrorCode::Strategy: return "strategy";
        case ErrorCode::Argument: return "argument";
        case ErrorCode::Schema: return "schema";
        case ErrorCode::Budget: return "budget";
    }
    return "?";
}

// --- construction ------------------------------------------------------------

FunctionRep::FunctionRep(RepKind kind, std::vector<cplx> values, int param,
                         std::int64_t lo, std::int64_t hi)
    : kind_(kind), values_(std::move(values)), param_(param), lo_(lo), hi_(hi) {}

FunctionRep FunctionRep::grid(std::vector<cplx> values) {
    if (values.empty()) fail(ErrorCode::Argument, "grid: need at least one point");
    require_finite(values, "grid");
    const int m = static_cast<int>(values.size());
    return FunctionRep(RepKind::Grid, std::move(values), m, 0, -1);
}

FunctionRep FunctionRep::fourier(int cutoff, std::vector<cplx> coeffs) {
    if (cutoff < 0) fail(ErrorCode::Argument, "fourier: cutoff must be >= 0");
    if (coeffs.size() != static_cast<std::size_t>(2 * cutoff + 1))
        fail(ErrorCode::Argument, "fourier: expected 2K+1 coefficients");
    require_finite(coeffs, "fourier");
    return FunctionRep(RepKind::Fourier, std::move(coeffs), cutoff, 0, -1);
}

FunctionRep FunctionRep::finite(std::vector<cplx> values) {
    if (values.empty()) fail(ErrorCode::Argument, "finite: need q >= 1 values");
    require_finite(values, "finite");
    return FunctionRep(RepKind::Finite, std::move(values), 0, 0, -1);
}

FunctionRep FunctionRep::cylinder(std::int64_t lo, std::int64_t hi, std::vector<cplx> table) {
    if (hi < lo) fail(ErrorCode::Argument, "cylinder: window must satisfy lo <= hi");
    const std::int64_t width = hi - lo + 1;
    if (width > kMaxCylinderWidth)
        fail(ErrorCode::WindowCap, "cylinder: window width " + std::to_string(width) +
                                       " exceeds cap " + std::to_string(kMaxCylinderWidth));
    if (table.size() != (std::size_t{1} << width))
        fail(ErrorCode::Argument, "cylinder: table must hold exactly 2^width values");
    require_finite(table, "cylinder");
    return FunctionRep(RepKind::Cylinder, std::move(table), 0, lo, hi);
}

FunctionRep FunctionRep::constant_like(const FunctionRep& like, cplx value) {
    switch (like.kind_) {
        case RepKind::Grid:
            return grid(std::vector<cplx>(like.values_.size(), value));
        case RepKind::Fourier: {
            std::vector<cplx> coeffs(like.values_.size(), cplx(0, 0));
            coeffs[static_cast<std::size_t>(like.param_)] = value;
            return fourier(like.param_, std::move(coeffs));
        }
        case RepKind::Finite:
            return finite(std::vector<cplx>(like.values_.size(), value));
        case RepKind::Cylinder:
            return cylinder(like.lo_, like.hi_, std::vector<cplx>(like.values_.size(), value));
    }
    fail(ErrorCode::Kind, "constant_like: unknown representation");
}

// --- accessors ----------------------------------------------------------------

int FunctionRep::grid_points() const {
    if (kind_ != RepKind::Grid) fail(ErrorCode::Kind, "grid_points: not a grid representation");
    return param_;
}

int FunctionRep::cutoff() const {
    if (kind_ != RepKind::Fourier) fail(ErrorCode::Kind, "cutoff: not a fourier representation");
    return param_;
}

std::int64_t FunctionRep::modulus() const {
    if (kind_ != RepKind::Finite) fail(ErrorCode::Kind, "modulus: not a finite representation");
    return static_cast<std::int64_t>(values_.size());
}

std::int64_t FunctionRep::window_lo() const {
    if (kind_ != RepKind::Cylinder) fail(ErrorCode::Kind, "window_lo: not a cylinder representation");
    return lo_;
}

std::int64_t FunctionRep::window_hi() const {
    if (kind_ != RepKind::Cylinder) fail(ErrorCode::Kind, "window_hi: not a cylinder representation");
    return hi_;
}

int FunctionRep::window_width() const {
    if (kind_ != RepKind::Cylinder) fail(ErrorCode::Kind, "window_width: not a cylinder representation");
    return static_cast<int>(hi_ - lo_ + 1);
}

cplx FunctionRep::coeff(int j) const {
    if (kind_ != RepKind::Fourier) fail(ErrorCode::Kind, "coeff: not a fourier representation");
    if (j < -param_ || j > param_) return cplx(0, 0);
    return values_[static_cast<std::size_t>(j + param_)];
}

void FunctionRep::set_coeff(int j, cplx value) {
    if (kind_ != RepKind::Fourier) fail(ErrorCode::Kind, "set_coeff: not a fourier representation");
    if (j < -param_ || j > param_)
        fail(ErrorCode::Argument, "set_coeff: mode " + std::to_string(j) + " outside cutoff");
    values_[static_cast<std::size_t>(j + param_)] = value;
}

cplx FunctionRep::eval_grid(std::int64_t i) const {
    if (kind_ != RepKind::Grid) fail(ErrorCode::Kind, "eval_grid: not a grid representation");
    const auto m = static_cast<std::int64_t>(values_.size());
    std::int64_t r = i % m;
    if (r < 0) r += m;
    return values_[static_cast<std::size_t>(r)];
}

cplx FunctionRep::eval_finite(std::int64_t x) const {
    if (kind_ != RepKind::Finite) fail(ErrorCode::Kind, "eval_finite: not a finite representation");
    const auto q = static_cast<std::int64_t>(values_.size());
    std::int64_t r = x % q;
    if (r < 0) r += q;
    return values_[static_cast<std::size_t>(r)];
}

cplx FunctionRep::eval_point(double x) const {
    if (kind_ != RepKind::Fourier) fail(ErrorCode::Kind, "eval_point: not a fourier representation");
    cplx acc(0, 0);
    for (int j = -param_; j <= param_; ++j) {
        acc += values_[static_cast<std::size_t>(j + param_)] * unit_phase(static_cast<double>(j) * x);
    }
    return acc;
}

cplx FunctionRep::eval_coin(std::uint64_t seed, std::int64_t shift) const {
    if (kind_ != RepKind::Cylinder) fail(ErrorCode::Kind, "eval_coin: not a cylinder representation");
    std::size_t idx = 0;
    for (std::int64_t c = lo_; c <= hi_; ++c) {
        idx |= static_cast<std::size_t>(coin_bit(seed, c + shift)) << (hi_ - c);
    }
    return values_[idx];
}

bool FunctionRep::is_constant() const {
    for (const cplx& z : values_) {
        if (z != values_[0]) return false;
    }
    return true;
}

// --- cylinder window plumbing ---------------------------------------------------

FunctionRep FunctionRep::marginal_to(std::int64_t sub_lo, std::int64_t sub_hi) const {
    if (kind_ != RepKind::Cylinder) fail(ErrorCode::Kind, "marginal_to: not a cylinder representation");
    if (sub_lo < lo_ || sub_hi > hi_ || sub_hi < sub_lo)
        fail(ErrorCode::Argument, "marginal_to: sub-window must lie inside the window");
    const int w = window_width();
    const int ws = static_cast<int>(sub_hi - sub_lo + 1);
    if (ws == w) return *this;
    std::vector<cplx> out(std::size_t{1} << ws, cplx(0, 0));
    const std::size_t n = values_.size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t sub = 0;
        for (std::int64_t c = sub_lo; c <= sub_hi; ++c) {
            sub |= ((idx >> (hi_ - c)) & 1u) << (sub_hi - c);
        }
        out[sub] += values_[idx];
    }
    const double weight = 1.0 / static_cast<double>(std::size_t{1} << (w - ws));
    for (cplx& z : out) z *= weight;
    return cylinder(sub_lo, sub_hi, std::move(out));
}

FunctionRep FunctionRep::widened_to(std::int64_t new_lo, std::int64_t new_hi) const {
    if (kind_ != RepKind::Cylinder) fail(ErrorCode::Kind, "widened_to: not a cylinder representation");
    if (new_lo > lo_ || new_hi < hi_)
        fail(ErrorCode::Argument, "widened_to: target window must contain the window");
    const std::int64_t new_width = new_hi - new_lo + 1;
    if (new_width > kMaxCylinderWidth)
        fail(ErrorCode::WindowCap, "widened_to: window width " + std::to_string(new_width) +
                                       " exceeds cap " + std::to_string(kMaxCylinderWidth));
    if (new_lo == lo_ && new_hi == hi_) return *this;
    std::vector<cplx> out(std::size_t{1} << new_width);
    const std::size_t n = out.size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t old_idx = 0;
        for (std::int64_t c = lo_; c <= hi_; ++c) {
            old_idx |= ((idx >> (new_hi - c)) & 1u) << (hi_ - c);
        }
        out[idx] = values_[old_idx];
    }
    return cylinder(new_lo, new_hi, std::move(out));
}

FunctionRep FunctionRep::shifted_window(std::int64_t n) const {
    if (kind_ != RepKind::Cylinder) fail(ErrorCode::Kind, "shifted_window: not a cylinder representation");
    FunctionRep out = *this;
    out.lo_ += n;
    out.hi_ += n;
    return out;
}

// --- bilinear / metric operations ------------------------------------------------

namespace {

cplx cylinder_inner(const FunctionRep& f, const FunctionRep& g) {
    const std::int64_t lo = std::max(f.window_lo(), g.window_lo());
    const std::int64_t hi = std::min(f.window_hi(), g.window_hi());
    if (lo > hi) {
        // Disjoint windows: the factors depend on independent coordinates.
        return mean(f) * std::conj(mean(g));
    }
    const FunctionRep mf = f.marginal_to(lo, hi);
    const FunctionRep mg = g.marginal_to(lo, hi);
    const cplx dot = kernels::active().dotc(mf.data().data(), mg.data().data(), mf.size());
    return dot / static_cast<double>(mf.size());
}

} // namespace

cplx inner_product(const FunctionRep& f, const FunctionRep& g) {
    if (f.rep() != g.rep()) shape_mismatch(f, g, "inner_product");
    const auto& k = kernels::active();
    switch (f.rep()) {
        case RepKind::Grid:
        case RepKind::Finite: {
            if (f.size() != g.size()) shape_mismatch(f, g, "inner_product");
            return k.dotc(f.data().data(), g.data().data(), f.size()) /
                   static_cast<double>(f.size());
        }
        case RepKind::Fourier: {
            const int kf = f.cutoff(), kg = g.cutoff();
            const int km = std::min(kf, kg);
            // Modes beyond the smaller cutoff pair with zeros and drop out.
            return k.dotc(f.data().data() + (kf - km), g.data().data() + (kg - km),
                          static_cast<std::size_t>(2 * km + 1));
        }
        case RepKind::Cylinder:
            return cylinder_inner(f, g);
    }
    fail(ErrorCode::Kind, "inner_product: unknown representation");
}

double norm(const FunctionRep& f, NormKind p) {
    const auto& k = kernels::active();
    const double inv_n = 1.0 / static_cast<double>(f.size());
    switch (f.rep()) {
        case RepKind::Grid:
        case RepKind::Finite:
        case RepKind::Cylinder:
            switch (p) {
                case NormKind::L1: return k.sum_abs(f.data().data(), f.size()) * inv_n;
                case NormKind::L2: return std::sqrt(k.sum_abs2(f.data().data(), f.size()) * inv_n);
                case NormKind::Sup: return std::sqrt(k.max_abs2(f.data().data(), f.size()));
            }
            break;
        case RepKind::Fourier:
            switch (p) {
                case NormKind::L2:
                    // Orthonormality of the e_j makes this exact.
                    return std::sqrt(k.sum_abs2(f.data().data(), f.size()));
                case NormKind::L1:
                case NormKind::Sup: {
                    const int n = oversample_count(f.cutoff());
                    std::vector<cplx> samples(static_cast<std::size_t>(n));
                    for (int i = 0; i < n; ++i)
                        samples[static_cast<std::size_t>(i)] =
                            f.eval_point(static_cast<double>(i) / n);
                    if (p == NormKind::Sup)
                        return std::sqrt(k.max_abs2(samples.data(), samples.size()));
                    return k.sum_abs(samples.data(), samples.size()) / n;
                }
            }
            break;
    }
    fail(ErrorCode::Kind, "norm: unknown representation");
}

cplx mean(const FunctionRep& f) {
    if (f.rep() == RepKind::Fourier) return f.coeff(0);
    return kernels::active().sum(f.data().data(), f.size()) / static_cast<double>(f.size());
}

double l2_distance(const FunctionRep& f, const FunctionRep& g) {
    if (f.rep() != g.rep()) shape_mismatch(f, g, "l2_distance");
    if (f.rep() == RepKind::Cylinder && (f.window_lo() != g.window_lo() || f.window_hi() != g.window_hi())) {
        const std::int64_t lo = std::min(f.window_lo(), g.window_lo());
        const std::int64_t hi = std::max(f.window_hi(), g.window_hi());
        if (hi - lo + 1 <= kMaxCylinderWidth) {
            return norm(sub(f.widened_to(lo, hi), g.widened_to(lo, hi)), NormKind::L2);
        }
        // Windows too far apart to materialize the difference; expand
        // ||f-g||^2 = ||f||^2 + ||g||^2 - 2 Re<f,g> through exact marginal
        // inner products. Accurate to ~1e-8 absolute, which is fine at the
        // O(1) distances this branch is reached with.
        const double a = norm(f, NormKind::L2), b = norm(g, NormKind::L2);
        const double d2 = a * a + b * b - 2.0 * inner_product(f, g).real();
        return std::sqrt(std::max(0.0, d2));
    }
    return norm(sub(f, g), NormKind::L2);
}

// --- vector-space operations -------------------------------------------------------

namespace {

FunctionRep cylinder_add_scaled(const FunctionRep& f, const FunctionRep& g, cplx w) {
    const bool same_window = f.window_lo() == g.window_lo() && f.window_hi() == g.window_hi();
    if (!same_window) {
        // Constants carry no coordinate dependence, so they combine onto the
        // other operand's window; this keeps e.g. "f - mean(f)*one" from
        // widening when f lives on a far-from-zero window.
        if (g.is_constant()) {
            FunctionRep out = f;
            const cplx shift = w * g.data()[0];
            for (cplx& z : out.mutable_data()) z += shift;
            return out;
        }
        if (f.is_constant()) {
            FunctionRep out = scaled(g, w);
            const cplx shift = f.data()[0];
            for (cplx& z : out.mutable_data()) z += shift;
            return out;
        }
        const std::int64_t lo = std::min(f.window_lo(), g.window_lo());
        const std::int64_t hi = std::max(f.window_hi(), g.window_hi());
        return cylinder_add_scaled(f.widened_to(lo, hi), g.widened_to(lo, hi), w);
    }
    FunctionRep out = f;
    kernels::active().axpy(out.mutable_data().data(), w, g.data().data(), out.size());
    return out;
}

} // namespace

FunctionRep add_scaled(const FunctionRep& f, const FunctionRep& g, cplx w) {
    if (f.rep() != g.rep()) shape_mismatch(f, g, "add_scaled");
    switch (f.rep()) {
        case RepKind::Grid:
        case RepKind::Finite: {
            if (f.size() != g.size()) shape_mismatch(f, g, "add_scaled");
            FunctionRep out = f;
            kernels::active().axpy(out.mutable_data().data(), w, g.data().data(), out.size());
            return out;
        }
        case RepKind::Fourier: {
            const int kf = f.cutoff(), kg = g.cutoff();
            if (kf >= kg) {
                FunctionRep out = f;
                // g's modes sit centered inside f's coefficient array.
                kernels::active().axpy(out.mutable_data().data() + (kf - kg), w,
                                       g.data().data(), g.size());
                return out;
            }
            FunctionRep out = scaled(g, w);
            kernels::active().axpy(out.mutable_data().data() + (kg - kf), cplx(1, 0),
                                   f.data().data(), f.size());
            return out;
        }
        case RepKind::Cylinder:
            return cylinder_add_scaled(f, g, w);
    }
    fail(ErrorCode::Kind, "add_scaled: unknown representation");
}

FunctionRep scaled(const FunctionRep& f, cplx w) {
    FunctionRep out = f;
    kernels::active().scale(out.mutable_data().data(), w, out.size());
    return out;
}

FunctionRep pointwise_product(const FunctionRep& f, const FunctionRep& g) {
    if (f.rep() != g.rep()) shape_mismatch(f, g, "pointwise_product");
    switch (f.rep()) {
        case RepKind::Grid:
        case RepKind::Finite: {
            if (f.size() != g.size()) shape_mismatch(f, g, "pointwise_product");
            FunctionRep out = f;
            kernels::active().pointwise_mul(out.mutable_data().data(), f.data().data(),
                                            g.data().data(), f.size());
            return out;
        }
        case RepKind::Fourier: {
            const int kf = f.cutoff(), kg = g.cutoff();
            const int kr = std::max(kf, kg);
            std::vector<cplx> out(static_cast<std::size_t>(2 * kr + 1), cplx(0, 0));
            // Coefficient convolution, truncated at the result cutoff.
            for (int j1 = -kf; j1 <= kf; ++j1) {
                const cplx a = f.coeff(j1);
                if (a == cplx(0, 0)) continue;
                const int lo = std::max(-kg, -kr - j1);
                const int hi = std::min(kg, kr - j1);
                for (int j2 = lo; j2 <= hi; ++j2) {
                    out[static_cast<std::size_t>(j1 + j2 + kr)] += a * g.coeff(j2);
                }
            }
            return FunctionRep::fourier(kr, std::move(out));
        }
        case RepKind::Cylinder: {
            const std::int64_t lo = std::min(f.window_lo(), g.window_lo());
            const std::int64_t hi = std::max(f.window_hi(), g.window_hi());
            FunctionRep wf = f.widened_to(lo, hi);
            const FunctionRep wg = g.widened_to(lo, hi);
            kernels::active().pointwise_mul(wf.mutable_data().data(), wf.data().data(),
                                            wg.data().data(), wf.size());
            return wf;
        }
    }
    fail(ErrorCode::Kind, "pointwise_product: unknown representation");
}

FunctionRep pointwise_abs(const FunctionRep& f) {
    if (f.rep() == RepKind::Fourier)
        fail(ErrorCode::Kind, "pointwise_abs: |f| of a trig polynomial is not one; convert to a grid first");
    FunctionRep out = f;
    for (cplx& z : out.mutable_data()) z = cplx(abs_fast(z), 0.0);
    return out;
}

// --- conversions ----------------------------------------------------------------------

namespace {

/// exp(2*pi*i * j*i/M) with the angle reduced on the integer lattice, so grid
/// transforms agree with their inverses to machine precision.
cplx lattice_phase(std::int64_t num, std::int64_t m) {
    std::int64_t r = num % m;
    if (r < 0) r += m;
    return unit_phase(static_cast<double>(r) / static_cast<double>(m));
}

FunctionRep fourier_to_grid(const FunctionRep& f, int m) {
    const int k = f.cutoff();
    std::vector<cplx> values(static_cast<std::size_t>(m), cplx(0, 0));
    for (int i = 0; i < m; ++i) {
        cplx acc(0, 0);
        for (int j = -k; j <= k; ++j) {
            acc += f.coeff(j) * lattice_phase(static_cast<std::int64_t>(j) * i, m);
        }
        values[static_cast<std::size_t>(i)] = acc;
    }
    return FunctionRep::grid(std::move(values));
}

FunctionRep grid_to_fourier(const FunctionRep& f, int k) {
    const int m = f.grid_points();
    if (m < 2 * k + 1)
        fail(ErrorCode::Resolution, "convert: grid with M=" + std::to_string(m) +
                                        " cannot resolve fourier cutoff K=" + std::to_string(k));
    std::vector<cplx> coeffs(static_cast<std::size_t>(2 * k + 1), cplx(0, 0));
    const double inv_m = 1.0 / m;
    for (int j = -k; j <= k; ++j) {
        cplx acc(0, 0);
        for (int i = 0; i < m; ++i) {
            acc += f.data()[static_cast<std::size_t>(i)] *
                   lattice_phase(-static_cast<std::int64_t>(j) * i, m);
        }
        coeffs[static_cast<std::size_t>(j + k)] = acc * inv_m;
    }
    return FunctionRep::fourier(k, std::move(coeffs));
}

} // namespace

FunctionRep convert(const FunctionRep& f, const RepTarget& target) {
    switch (f.rep()) {
        case RepKind::Fourier:
            if (target.kind == RepKind::Grid) {
                if (target.param < 1) fail(ErrorCode::Argument, "convert: grid target needs M >= 1");
                return fourier_to_grid(f, target.param);
            }
            if (target.kind == RepKind::Fourier) {
                if (target.param < f.cutoff())
                    fail(ErrorCode::Resolution, "convert: lowering a fourier cutoff discards modes");
                FunctionRep out = FunctionRep::fourier(
                    target.param, std::vector<cplx>(static_cast<std::size_t>(2 * target.param + 1), cplx(0, 0)));
                for (int j = -f.cutoff(); j <= f.cutoff(); ++j) out.set_coeff(j, f.coeff(j));
                return out;
            }
            break;
        case RepKind::Grid:
            if (target.kind == RepKind::Fourier) return grid_to_fourier(f, target.param);
            if (target.kind == RepKind::Grid) {
                if (target.param != f.grid_points())
                    fail(ErrorCode::Conversion, "convert: grid resampling is not defined");
                return f;
            }
            break;
        case RepKind::Finite:
            if (target.kind == RepKind::Finite) {
                if (static_cast<std::int64_t>(target.param) != f.modulus())
                    fail(ErrorCode::Conversion, "convert: finite representations only convert to the same q");
                return f;
            }
            break;
        case RepKind::Cylinder:
            if (target.kind == RepKind::Cylinder) return f.widened_to(target.lo, target.hi);
            break;
    }
    fail(ErrorCode::Conversion, std::string("convert: no conversion from ") + rep_kind_name(f.rep()) +
                                    " to " + rep_kind_name(target.kind));
}

std::string shape_label(const FunctionRep& f) {
    std::ostringstream os;
    switch (f.rep()) {
        case RepKind::Grid: os << "grid(M=" << f.grid_points() << ")"; break;
        case RepKind::Fourier: os << "fourier(K=" << f.cutoff() << ")"; break;
        case RepKind::Finite: os << "finite(q=" << f.modulus() << ")"; break;
        case RepKind::Cylinder:
            os << "cylinder[" << f.window_lo() << "," << f.window_hi() << "]";
            break;
    }
    return os.str();
}

} // namespace ergolab
