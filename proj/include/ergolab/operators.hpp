#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ergolab/function_rep.hpp"
#include "ergolab/systems.hpp"

namespace ergolab {

/// The bounded operators that sit between Koopman powers in a chain.
///
///   Identity       — f -> f on any representation.
///   Volterra       — d-th power of the integration operator
///                    (Vf)(x) = integral of f over [0, x]. On grids this is
///                    the cumulative trapezoid rule; on fourier data the
///                    closed form V e_j = (e_j - e_0)/(2 pi i j) for j != 0
///                    and V e_0 = x-hat (c_0 = 1/2, c_j = -1/(2 pi i j)).
///   FiniteRank     — f -> sum_j <f, u_j> v_j.
///   Multiplication — f -> g * f pointwise.
///   Matrix         — a q x q complex matrix acting on the value vector of a
///                    finite representation.
enum class OperatorKind { Identity, Volterra, FiniteRank, Multiplication, Matrix };

const char* operator_kind_name(OperatorKind kind) noexcept;

class OperatorSpec {
public:
    static OperatorSpec identity();
    static OperatorSpec volterra(int power);
    static OperatorSpec finite_rank(std::vector<std::pair<FunctionRep, FunctionRep>> pairs);
    static OperatorSpec multiplication(FunctionRep multiplier);
    static OperatorSpec matrix(std::int64_t q, std::vector<cplx> entries);  // row-major

    OperatorKind kind() const { return kind_; }
    int power() const;
    const std::vector<std::pair<FunctionRep, FunctionRep>>& pairs() const;
    const FunctionRep& multiplier() const;
    std::int64_t matrix_modulus() const;
    const std::vector<cplx>& matrix_entries() const;
    std::string label() const;

private:
    OperatorSpec() = default;

    OperatorKind kind_ = OperatorKind::Identity;
    int power_ = 0;
    std::vector<std::pair<FunctionRep, FunctionRep>> pairs_;
    std::vector<FunctionRep> multiplier_;  // 0 or 1 elements
    std::int64_t q_ = 0;
    std::vector<cplx> entries_;
};

/// Apply the operator; raises UnsupportedOperator when the variant is not
/// defined on f's representation (volterra on finite data, matrix with the
/// wrong q, ...).
FunctionRep apply_operator(const OperatorSpec& op, const FunctionRep& f);

// --- numerical probes ---------------------------------------------------------
//
// Empirical checks of the two hypotheses the convergence theory runs on:
// (1) each A T^n orbit stays close to a fixed finite-dimensional subspace in
// sup norm, and (2) the pairs (A_j, T_j) are uniformly sup-norm bounded.

struct ProbeReport {
    int requested_dim = 0;      // the probed subspace dimension
    int effective_dim = 0;      // numerically independent directions actually used
    double max_residual_sup = 0.0;
    std::int64_t n_tested = 0;
    std::string f_label;
};

/// Best rank-`dim` sup-norm approximation of the orbit {A T^n f : 1 <= n <=
/// n_max}: the subspace is spanned by the dominant eigenvectors of the orbit
/// Gram matrix, and the report carries the worst sup-norm residual. The
/// residual is nonincreasing in `dim` because the dominant subspaces are
/// nested.
ProbeReport probe_twisted_compactness(const OperatorSpec& op, const SystemDescriptor& system,
                                      const FunctionRep& f, int dim, std::int64_t n_max);

/// Empirical joint bound: max over j, n <= n_max and test functions f of
/// ||A_j T_j^n f||_sup / ||f||_sup.
double probe_joint_bound(const std::vector<OperatorSpec>& ops,
                         const std::vector<SystemDescriptor>& systems,
                         const std::vector<FunctionRep>& test_functions, std::int64_t n_max);

} // namespace ergolab
