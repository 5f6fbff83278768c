#include "ergolab/systems.hpp"

#include <cmath>
#include <sstream>

#include "ergolab/errors.hpp"

namespace ergolab {

namespace {

/// exp(2 pi i j x) as a fourier element with the given cutoff.
FunctionRep fourier_mode(int cutoff, int j) {
    std::vector<cplx> coeffs(static_cast<std::size_t>(2 * cutoff + 1), cplx(0, 0));
    coeffs[static_cast<std::size_t>(j + cutoff)] = cplx(1, 0);
    return FunctionRep::fourier(cutoff, std::move(coeffs));
}

/// Character chi_r on Z_q, chi_r(x) = exp(2 pi i r x / q); unit L2 norm.
FunctionRep character(std::int64_t q, std::int64_t r) {
    std::vector<cplx> values(static_cast<std::size_t>(q));
    for (std::int64_t x = 0; x < q; ++x) {
        values[static_cast<std::size_t>(x)] =
            unit_phase(static_cast<double>((r * x) % q) / static_cast<double>(q));
    }
    return FunctionRep::finite(std::move(values));
}

void require_fourier(const SystemDescriptor& s, const FunctionRep& f, const char* op) {
    if (f.rep() != RepKind::Fourier)
        fail(ErrorCode::Kind, std::string(op) + ": " + s.label() + " acts on fourier data, got " +
                                  shape_label(f));
}

} // namespace

const char* system_kind_name(SystemKind kind) noexcept {
    switch (kind) {
        case SystemKind::Rotation: return "rotation";
        case SystemKind::Doubling: return "doubling";
        case SystemKind::FiniteCyclic: return "finite_cyclic";
        case SystemKind::BernoulliShift: return "bernoulli_shift";
        case SystemKind::TorusFlow: return "torus_flow";
    }
    return "?";
}

SystemDescriptor::SystemDescriptor(SystemKind kind, double theta, std::int64_t q, int cutoff)
    : kind_(kind), theta_(theta), q_(q), cutoff_(cutoff) {}

SystemDescriptor SystemDescriptor::rotation(double theta, int cutoff) {
    if (!(theta >= 0.0 && theta < 1.0)) fail(ErrorCode::Argument, "rotation: theta must lie in [0,1)");
    if (cutoff < 0) fail(ErrorCode::Argument, "rotation: cutoff must be >= 0");
    return SystemDescriptor(SystemKind::Rotation, theta, 0, cutoff);
}

SystemDescriptor SystemDescriptor::golden_rotation(int cutoff) {
    return rotation((std::sqrt(5.0) - 1.0) / 2.0, cutoff);
}

SystemDescriptor SystemDescriptor::doubling(int cutoff) {
    if (cutoff < 0) fail(ErrorCode::Argument, "doubling: cutoff must be >= 0");
    return SystemDescriptor(SystemKind::Doubling, 0.0, 0, cutoff);
}

SystemDescriptor SystemDescriptor::finite_cyclic(std::int64_t q) {
    if (q < 1) fail(ErrorCode::Argument, "finite_cyclic: q must be >= 1");
    return SystemDescriptor(SystemKind::FiniteCyclic, 0.0, q, 0);
}

SystemDescriptor SystemDescriptor::bernoulli_shift() {
    return SystemDescriptor(SystemKind::BernoulliShift, 0.0, 0, 0);
}

SystemDescriptor SystemDescriptor::torus_flow(double theta, int cutoff) {
    if (theta == 0.0) fail(ErrorCode::Argument, "torus_flow: theta must be nonzero");
    if (cutoff < 0) fail(ErrorCode::Argument, "torus_flow: cutoff must be >= 0");
    return SystemDescriptor(SystemKind::TorusFlow, theta, 0, cutoff);
}

double SystemDescriptor::theta() const {
    if (kind_ != SystemKind::Rotation && kind_ != SystemKind::TorusFlow)
        fail(ErrorCode::Kind, "theta: system has no angle");
    return theta_;
}

std::int64_t SystemDescriptor::modulus() const {
    if (kind_ != SystemKind::FiniteCyclic) fail(ErrorCode::Kind, "modulus: system is not finite");
    return q_;
}

int SystemDescriptor::cutoff() const {
    if (representation() != RepKind::Fourier) fail(ErrorCode::Kind, "cutoff: system is not on fourier data");
    return cutoff_;
}

RepKind SystemDescriptor::representation() const {
    switch (kind_) {
        case SystemKind::Rotation:
        case SystemKind::Doubling:
        case SystemKind::TorusFlow: return RepKind::Fourier;
        case SystemKind::FiniteCyclic: return RepKind::Finite;
        case SystemKind::BernoulliShift: return RepKind::Cylinder;
    }
    fail(ErrorCode::Kind, "representation: unknown system kind");
}

bool SystemDescriptor::weakly_mixing() const {
    return kind_ == SystemKind::Doubling || kind_ == SystemKind::BernoulliShift;
}

std::string SystemDescriptor::label() const {
    std::ostringstream os;
    os << system_kind_name(kind_);
    switch (kind_) {
        case SystemKind::Rotation:
        case SystemKind::TorusFlow: os << "(theta=" << theta_ << ",K=" << cutoff_ << ")"; break;
        case SystemKind::Doubling: os << "(K=" << cutoff_ << ")"; break;
        case SystemKind::FiniteCyclic: os << "(q=" << q_ << ")"; break;
        case SystemKind::BernoulliShift: break;
    }
    return os.str();
}

FunctionRep koopman_apply(const SystemDescriptor& system, std::int64_t n, const FunctionRep& f) {
    switch (system.kind()) {
        case SystemKind::Rotation: {
            require_fourier(system, f, "koopman_apply");
            FunctionRep out = f;
            const int k = f.cutoff();
            const long double theta = static_cast<long double>(system.theta());
            for (int j = -k; j <= k; ++j) {
                if (j == 0) continue;
                // (j*n) stays within int64: |j| <= K and the engine's
                // polynomial exponents are capped well below 2^40.
                const double jn = static_cast<double>(static_cast<std::int64_t>(j) * n);
                out.set_coeff(j, f.coeff(j) * unit_phase(mul_mod_one(jn, theta)));
            }
            return out;
        }
        case SystemKind::Doubling: {
            require_fourier(system, f, "koopman_apply");
            if (n < 0) fail(ErrorCode::Argument, "koopman_apply: doubling is not invertible, need n >= 0");
            const int k = f.cutoff();
            FunctionRep out = FunctionRep::fourier(
                k, std::vector<cplx>(static_cast<std::size_t>(2 * k + 1), cplx(0, 0)));
            // Mode j survives iff |j| * 2^n <= K; compare via the shifted
            // cutoff so the product itself can never overflow.
            const std::int64_t alive = n < 63 ? (static_cast<std::int64_t>(k) >> n) : 0;
            for (std::int64_t j = -alive; j <= alive; ++j) {
                out.set_coeff(static_cast<int>(j << n), f.coeff(static_cast<int>(j)));
            }
            return out;
        }
        case SystemKind::FiniteCyclic: {
            if (f.rep() != RepKind::Finite)
                fail(ErrorCode::Kind, "koopman_apply: finite_cyclic acts on finite data, got " + shape_label(f));
            const std::int64_t q = f.modulus();
            std::int64_t r = n % q;
            if (r < 0) r += q;
            std::vector<cplx> out(static_cast<std::size_t>(q));
            for (std::int64_t x = 0; x < q; ++x) {
                out[static_cast<std::size_t>(x)] = f.data()[static_cast<std::size_t>((x + r) % q)];
            }
            return FunctionRep::finite(std::move(out));
        }
        case SystemKind::BernoulliShift: {
            if (f.rep() != RepKind::Cylinder)
                fail(ErrorCode::Kind, "koopman_apply: bernoulli_shift acts on cylinder data, got " + shape_label(f));
            return f.shifted_window(n);
        }
        case SystemKind::TorusFlow:
            return flow_apply(system, static_cast<double>(n), f);
    }
    fail(ErrorCode::Kind, "koopman_apply: unknown system kind");
}

FunctionRep flow_apply(const SystemDescriptor& system, double t, const FunctionRep& f) {
    if (system.kind() != SystemKind::TorusFlow)
        fail(ErrorCode::Kind, "flow_apply: " + system.label() + " is not a flow");
    require_fourier(system, f, "flow_apply");
    FunctionRep out = f;
    const int k = f.cutoff();
    const long double drift = static_cast<long double>(t) * static_cast<long double>(system.theta());
    for (int j = -k; j <= k; ++j) {
        if (j == 0) continue;
        out.set_coeff(j, f.coeff(j) * unit_phase(mul_mod_one(static_cast<double>(j), drift)));
    }
    return out;
}

JglParts jgl_decompose(const SystemDescriptor& system, const FunctionRep& f) {
    if (f.rep() != system.representation())
        fail(ErrorCode::Kind, "jgl_decompose: " + system.label() + " does not act on " + shape_label(f));
    if (system.weakly_mixing()) {
        FunctionRep reversible = FunctionRep::constant_like(f, mean(f));
        return {reversible, sub(f, reversible)};
    }
    // Discrete spectrum: the eigenfunctions span everything representable.
    return {f, FunctionRep::constant_like(f, cplx(0, 0))};
}

ReversibleRank reversible_rank(const SystemDescriptor& system) {
    switch (system.kind()) {
        case SystemKind::Rotation:
        case SystemKind::TorusFlow:
            return {true, 2 * static_cast<std::int64_t>(system.cutoff()) + 1};
        case SystemKind::FiniteCyclic:
            return {true, system.modulus()};
        case SystemKind::Doubling:
        case SystemKind::BernoulliShift:
            return {false, 1};
    }
    fail(ErrorCode::Kind, "reversible_rank: unknown system kind");
}

std::vector<EigenPair> eigen_data(const SystemDescriptor& system) {
    std::vector<EigenPair> pairs;
    switch (system.kind()) {
        case SystemKind::Rotation:
        case SystemKind::TorusFlow: {
            const int k = system.cutoff();
            const long double theta = static_cast<long double>(system.theta());
            pairs.reserve(static_cast<std::size_t>(2 * k + 1));
            for (int j = -k; j <= k; ++j) {
                pairs.push_back({unit_phase(mul_mod_one(static_cast<double>(j), theta)), j,
                                 fourier_mode(k, j)});
            }
            return pairs;
        }
        case SystemKind::Doubling:
            pairs.push_back({cplx(1, 0), 0, fourier_mode(system.cutoff(), 0)});
            return pairs;
        case SystemKind::FiniteCyclic: {
            const std::int64_t q = system.modulus();
            pairs.reserve(static_cast<std::size_t>(q));
            for (std::int64_t r = 0; r < q; ++r) {
                pairs.push_back({unit_phase(static_cast<double>(r) / static_cast<double>(q)), r,
                                 character(q, r)});
            }
            return pairs;
        }
        case SystemKind::BernoulliShift:
            pairs.push_back({cplx(1, 0), 0,
                             FunctionRep::cylinder(0, 0, {cplx(1, 0), cplx(1, 0)})});
            return pairs;
    }
    fail(ErrorCode::Kind, "eigen_data: unknown system kind");
}

} // namespace ergolab
