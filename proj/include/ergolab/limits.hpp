#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergolab/chain.hpp"
#include "ergolab/complex.hpp"
#include "ergolab/function_rep.hpp"
#include "ergolab/systems.hpp"

namespace ergolab {

// --- weight sequences --------------------------------------------------------

struct WeightTerm {
    cplx gamma;   // unimodular generator
    cplx weight;  // its coefficient q
};

/// Sequences a_n = sum_j q_j * gamma_j^n with |gamma_j| = 1. Finite sums of
/// this shape are closed under elementwise products and are the concrete
/// almost periodic weights the weighted averaging theory runs on.
class WeightSequence {
public:
    cplx at(std::int64_t n) const;
    std::vector<cplx> first(std::int64_t count) const;  // a_1 .. a_count

    const std::vector<WeightTerm>& terms() const { return terms_; }
    bool almost_periodic_tag() const { return almost_periodic_; }
    /// Default evaluation horizon used by report tooling.
    std::int64_t horizon() const { return horizon_; }
    void set_horizon(std::int64_t h);

    /// Elementwise product: generated by the pairwise term products, so the
    /// class is closed under multiplication.
    WeightSequence product(const WeightSequence& other) const;

    std::string label() const;

private:
    friend WeightSequence almost_periodic_weight(std::vector<WeightTerm> terms);

    std::vector<WeightTerm> terms_;
    bool almost_periodic_ = true;
    std::int64_t horizon_ = 4096;
};

/// Build a weight sequence from its generator terms. Every gamma must be
/// unimodular within 1e-12 (Argument error otherwise).
WeightSequence almost_periodic_weight(std::vector<WeightTerm> terms);

// --- predicted limits ----------------------------------------------------------

enum class Predictor { WeakMixing, ProjectionChain, Resonance, None };

const char* predictor_name(Predictor p) noexcept;
Predictor parse_predictor(const std::string& name);

/// Limit for chains of weakly mixing systems: the constant
/// mean(f) * prod_i mean(A_i 1). Applicability error when any system in the
/// chain is not weakly mixing.
FunctionRep predicted_limit_weak_mixing(const ChainSpec& chain);

/// Projection onto the fixed space of the system: mean(f) * 1 for the ergodic
/// catalog here. The N -> infinity trend of (1/N) sum T^n f.
FunctionRep mean_ergodic_projection(const SystemDescriptor& system, const FunctionRep& f);

/// For injective entanglement maps the multi-average factorizes into nested
/// single Cesàro means, so the limit is P_m A_{m-1} P_{m-1} ... A_1 P_1 f
/// with P_i the mean ergodic projections. Applicability error when the map
/// reuses an index class.
FunctionRep predicted_limit_projection_chain(const ChainSpec& chain);

/// Eigen-expansion limit for discrete-spectrum chains (rotations, finite
/// cyclic): expand f and each operator in the systems' eigenbases and keep
/// exactly the tuples whose combined Cesàro phase averages survive. For the
/// default exponents a class survives iff its eigenvalue product is 1; for
/// polynomial exponents on finite systems the exact periodic character
/// average is used (which may be a non-unimodular complex factor).
/// Applicability error for systems without finite eigen-data or for
/// continuous chains.
FunctionRep predicted_limit_resonance(const ChainSpec& chain);

/// Dispatch by predictor tag; Predictor::None is an Applicability error.
FunctionRep predicted_limit(const ChainSpec& chain, Predictor p);

// --- sequence classes -----------------------------------------------------------

/// Cesàro curve of |a_n| along a geometric schedule, and the finite-horizon
/// verdict: final value below tol with the tail of the curve nonincreasing.
struct ClassNReport {
    std::vector<std::int64_t> schedule;
    std::vector<double> cesaro_abs;  // (1/N) sum_{n<=N} |a_n| per schedule point
    double tol = 0.0;
    bool in_class = false;
};

/// a holds a_1 .. a_{N_max}; N_max = a.size() must be >= 16.
ClassNReport is_class_N(const std::vector<cplx>& a, double tol);
ClassNReport is_class_N(const WeightSequence& w, std::int64_t n_max, double tol);

/// The density-one index set along which a class-N sequence dies: all n with
/// |a_n| <= tol, plus the running densities |J cap [1,N]| / N.
struct DensityReport {
    std::vector<std::int64_t> indices;  // 1-based
    std::vector<std::int64_t> schedule;
    std::vector<double> density;
    bool input_in_class_n = false;  // courtesy check of the caller's precondition
};

DensityReport density_one_subsequence(const std::vector<cplx>& a, double tol);

/// (1/N) sum_{n<=N} a_n T^n f — the weighted one-system average. Discrete
/// systems only; the representation must match the system.
FunctionRep weighted_birkhoff_average(const SystemDescriptor& system, const WeightSequence& w,
                                      const FunctionRep& f, std::int64_t N);

} // namespace ergolab
