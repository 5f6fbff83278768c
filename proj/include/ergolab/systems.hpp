#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergolab/function_rep.hpp"

namespace ergolab {

/// The concrete measure-preserving systems the engine understands.
///
///   Rotation      — x -> x + theta on the circle; acts on fourier data as
///                   c_j -> exp(2*pi*i*j*n*theta) * c_j.
///   Doubling      — x -> 2x; mode j -> mode 2^n * j, modes pushed past the
///                   cutoff are dropped (hard truncation).
///   FiniteCyclic  — x -> x + 1 on Z_q; index rotation.
///   BernoulliShift— two-sided coin-flip shift; windows translate.
///   TorusFlow     — x -> x + t*theta, the continuous-time rotation.
enum class SystemKind { Rotation, Doubling, FiniteCyclic, BernoulliShift, TorusFlow };

const char* system_kind_name(SystemKind kind) noexcept;

/// One unimodular eigenpair T h = lambda h (for the flow, T(t) h = e^(2 pi i
/// mode theta t) h). `mode` is the exact integer behind lambda: the fourier
/// index j for circle systems, the character index r for Z_q. Predictors use
/// it to reason about phases without touching floating point.
struct EigenPair {
    cplx eigenvalue;
    std::int64_t mode;
    FunctionRep eigenfunction;  // unit L2 norm
};

struct ReversibleRank {
    bool full;          // the whole space is spanned by unimodular eigenpairs
    std::int64_t dim;   // dimension of that span within the representation
};

class SystemDescriptor {
public:
    static SystemDescriptor rotation(double theta, int cutoff);
    /// Rotation by the golden-mean angle frac((sqrt 5 - 1)/2), the default
    /// badly-approximable irrational used across the test corpus.
    static SystemDescriptor golden_rotation(int cutoff);
    static SystemDescriptor doubling(int cutoff);
    static SystemDescriptor finite_cyclic(std::int64_t q);
    static SystemDescriptor bernoulli_shift();
    static SystemDescriptor torus_flow(double theta, int cutoff);

    SystemKind kind() const { return kind_; }
    bool is_flow() const { return kind_ == SystemKind::TorusFlow; }
    double theta() const;
    std::int64_t modulus() const;
    int cutoff() const;

    /// The representation this system acts on.
    RepKind representation() const;
    /// Whether the model is weakly mixing (only the constants are eigendata).
    bool weakly_mixing() const;
    std::string label() const;

private:
    SystemDescriptor(SystemKind kind, double theta, std::int64_t q, int cutoff);

    SystemKind kind_;
    double theta_ = 0.0;
    std::int64_t q_ = 0;
    int cutoff_ = 0;
};

/// f composed with the n-th iterate of the map (n may be negative for the
/// invertible systems; Doubling requires n >= 0). Exact on the stored data:
/// permutations for finite/bernoulli, phase rotation for the circle maps.
FunctionRep koopman_apply(const SystemDescriptor& system, std::int64_t n, const FunctionRep& f);

/// f composed with the time-t flow map (TorusFlow only).
FunctionRep flow_apply(const SystemDescriptor& system, double t, const FunctionRep& f);

/// Splitting f = reversible + stable: the reversible part is the projection
/// onto the span of the unimodular eigenfunctions, the stable part is the
/// rest. For the discrete-spectrum systems (rotation, finite cyclic, torus
/// flow) the stable part is 0; for the mixing systems the reversible part is
/// mean(f) * one.
struct JglParts {
    FunctionRep reversible;
    FunctionRep stable;
};
JglParts jgl_decompose(const SystemDescriptor& system, const FunctionRep& f);

ReversibleRank reversible_rank(const SystemDescriptor& system);

/// All unimodular eigenpairs representable at the system's resolution,
/// orthonormal, ordered by mode. Weakly mixing systems list exactly the
/// constants.
std::vector<EigenPair> eigen_data(const SystemDescriptor& system);

} // namespace ergolab
