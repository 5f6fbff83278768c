#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ergolab/function_rep.hpp"
#include "ergolab/operators.hpp"
#include "ergolab/poly.hpp"
#include "ergolab/systems.hpp"

namespace ergolab {

/// How an entangled average is evaluated. All strategies compute the same
/// multi-Cesàro mean and must agree within 1e-10 in L2:
///
///   Naive      — direct enumeration of the exponent lattice, one full chain
///                evaluation per tuple.
///   Cached     — enumeration with shared chain prefixes, incremental Koopman
///                powers, and an LRU memo of partial states, so repeated
///                work across the lattice and across schedule points is
///                looked up instead of recomputed.
///   Factorized — for injective entanglement maps the average telescopes
///                into nested one-parameter Cesàro means, O(N·m) Koopman
///                applications in total.
enum class Strategy { Naive, Cached, Factorized };

const char* strategy_name(Strategy s) noexcept;
Strategy parse_strategy(std::string_view name);  // Argument error if unknown

/// A fixed set of evaluation points matched to one representation: x in
/// [0,1) for grid/fourier data, residues for finite data, coin-stream seeds
/// for cylinder data. Sampled runs report average values at these points
/// when the averaged function itself cannot be stored (wide cylinder sums).
struct SampleSet {
    RepKind kind = RepKind::Grid;
    std::vector<double> xs;                // grid / fourier
    std::vector<std::int64_t> residues;    // finite
    std::vector<std::uint64_t> seeds;      // cylinder

    std::size_t size() const;
    /// `count` points drawn reproducibly from `seed`, shaped for the
    /// representation of `like`.
    static SampleSet seeded_for(const FunctionRep& like, int count, std::uint64_t seed);
    /// Stable hash of the point set; keys resumable partial sums.
    std::uint64_t fingerprint() const;
};

/// f evaluated at every sample point (f's representation must match).
std::vector<cplx> values_at(const FunctionRep& f, const SampleSet& samples);

/// One entangled chain
///
///   T_m^{q_{alpha(m)}(n_{alpha(m)})} A_{m-1} ... A_1 T_1^{q_{alpha(1)}(n_{alpha(1)})} f
///
/// over m systems on a common representation, coupled through the
/// entanglement map alpha : {1..m} -> {1..k} that assigns each slot one of
/// the k lattice indices. alpha need not be surjective: an unused index
/// contributes a factor N that cancels against the 1/N^k normalization, so
/// averages skip it and normalize by N^(number of used indices).
struct ChainSpec {
    int m = 2;
    int k = 1;
    std::vector<int> alpha;                     // size m, entries in 1..k
    std::vector<SystemDescriptor> systems;      // size m
    std::vector<OperatorSpec> operators;        // size m-1
    std::vector<IntPolynomial> exponent_polys;  // size k, or empty = all q(n) = n
    FunctionRep input;
    bool continuous = false;                    // flows instead of maps
    int abs_grid_resolution = 512;              // grid used for |summand| on fourier data

    /// Shape/range checks; Argument errors. Continuous chains require flow
    /// systems and identity exponents; discrete chains require map systems.
    void validate() const;

    const IntPolynomial& poly_for_class(int c) const;  // c is 1-based
    std::vector<int> used_classes() const;             // ascending, 1-based
    bool alpha_injective() const;
    std::string label() const;
};

struct PointDistance {
    double sup = 0.0;
    double l2 = 0.0;
};

/// One schedule sweep of a chain. Per schedule point: the averaged function
/// where the representation permits storing it (a wide cylinder sum does
/// not; those entries stay empty), the average's values at the declared
/// samples, and distances to the predicted limit when one is attached.
struct AverageResult {
    bool abs_mode = false;
    bool continuous = false;
    Strategy strategy = Strategy::Naive;
    std::vector<double> schedule;               // N values, or flow horizons
    std::vector<std::optional<FunctionRep>> averages;
    SampleSet samples;
    std::vector<std::vector<cplx>> sample_values;
    std::optional<FunctionRep> predicted_limit;
    std::vector<PointDistance> distances;       // filled iff predicted_limit
    std::vector<double> wall_seconds;
};

} // namespace ergolab
