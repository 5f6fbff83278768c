#include "ergolab/operators.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergolab/errors.hpp"

namespace ergolab {

namespace {

constexpr double kRankTolerance = 1e-12;  // relative eigenvalue floor for probe bases

FunctionRep volterra_once_grid(const FunctionRep& f) {
    const int m = f.grid_points();
    std::vector<cplx> out(static_cast<std::size_t>(m));
    // Cumulative trapezoid over [0, i/M] with (Vf)(0) = 0.
    out[0] = cplx(0, 0);
    const double h = 1.0 / (2.0 * m);
    for (int i = 1; i < m; ++i) {
        out[static_cast<std::size_t>(i)] =
            out[static_cast<std::size_t>(i - 1)] +
            (f.data()[static_cast<std::size_t>(i - 1)] + f.data()[static_cast<std::size_t>(i)]) * h;
    }
    return FunctionRep::grid(std::move(out));
}

FunctionRep volterra_once_fourier(const FunctionRep& f) {
    const int k = f.cutoff();
    FunctionRep out = FunctionRep::fourier(
        k, std::vector<cplx>(static_cast<std::size_t>(2 * k + 1), cplx(0, 0)));
    const cplx f0 = f.coeff(0);
    cplx c0 = f0 * 0.5;
    for (int j = -k; j <= k; ++j) {
        if (j == 0) continue;
        const cplx denom(0.0, kTwoPi * j);
        out.set_coeff(j, (f.coeff(j) - f0) / denom);
        c0 -= f.coeff(j) / denom;
    }
    out.set_coeff(0, c0);
    return out;
}

} // namespace

const char* operator_kind_name(OperatorKind kind) noexcept {
    switch (kind) {
        case OperatorKind::Identity: return "identity";
        case OperatorKind::Volterra: return "volterra";
        case OperatorKind::FiniteRank: return "finite_rank";
        case OperatorKind::Multiplication: return "multiplication";
        case OperatorKind::Matrix: return "matrix";
    }
    return "?";
}

OperatorSpec OperatorSpec::identity() {
    OperatorSpec op;
    op.kind_ = OperatorKind::Identity;
    return op;
}

OperatorSpec OperatorSpec::volterra(int power) {
    if (power < 1) fail(ErrorCode::Argument, "volterra: power must be >= 1");
    OperatorSpec op;
    op.kind_ = OperatorKind::Volterra;
    op.power_ = power;
    return op;
}

OperatorSpec OperatorSpec::finite_rank(std::vector<std::pair<FunctionRep, FunctionRep>> pairs) {
    if (pairs.empty()) fail(ErrorCode::Argument, "finite_rank: need at least one (u, v) pair");
    const RepKind kind = pairs[0].first.rep();
    for (const auto& [u, v] : pairs) {
        if (u.rep() != kind || v.rep() != kind)
            fail(ErrorCode::ShapeMismatch, "finite_rank: all u_j and v_j must share one representation");
    }
    OperatorSpec op;
    op.kind_ = OperatorKind::FiniteRank;
    op.pairs_ = std::move(pairs);
    return op;
}

OperatorSpec OperatorSpec::multiplication(FunctionRep multiplier) {
    OperatorSpec op;
    op.kind_ = OperatorKind::Multiplication;
    op.multiplier_.push_back(std::move(multiplier));
    return op;
}

OperatorSpec OperatorSpec::matrix(std::int64_t q, std::vector<cplx> entries) {
    if (q < 1) fail(ErrorCode::Argument, "matrix: q must be >= 1");
    if (entries.size() != static_cast<std::size_t>(q) * static_cast<std::size_t>(q))
        fail(ErrorCode::Argument, "matrix: expected q*q row-major entries");
    for (const cplx& z : entries) {
        if (!is_finite(z)) fail(ErrorCode::Argument, "matrix: non-finite entry");
    }
    OperatorSpec op;
    op.kind_ = OperatorKind::Matrix;
    op.q_ = q;
    op.entries_ = std::move(entries);
    return op;
}

int OperatorSpec::power() const {
    if (kind_ != OperatorKind::Volterra) fail(ErrorCode::Kind, "power: not a volterra operator");
    return power_;
}

const std::vector<std::pair<FunctionRep, FunctionRep>>& OperatorSpec::pairs() const {
    if (kind_ != OperatorKind::FiniteRank) fail(ErrorCode::Kind, "pairs: not a finite_rank operator");
    return pairs_;
}

const FunctionRep& OperatorSpec::multiplier() const {
    if (kind_ != OperatorKind::Multiplication) fail(ErrorCode::Kind, "multiplier: not a multiplication operator");
    return multiplier_[0];
}

std::int64_t OperatorSpec::matrix_modulus() const {
    if (kind_ != OperatorKind::Matrix) fail(ErrorCode::Kind, "matrix_modulus: not a matrix operator");
    return q_;
}

const std::vector<cplx>& OperatorSpec::matrix_entries() const {
    if (kind_ != OperatorKind::Matrix) fail(ErrorCode::Kind, "matrix_entries: not a matrix operator");
    return entries_;
}

std::string OperatorSpec::label() const {
    std::ostringstream os;
    os << operator_kind_name(kind_);
    switch (kind_) {
        case OperatorKind::Volterra: os << "(d=" << power_ << ")"; break;
        case OperatorKind::FiniteRank: os << "(rank<=" << pairs_.size() << ")"; break;
        case OperatorKind::Matrix: os << "(q=" << q_ << ")"; break;
        default: break;
    }
    return os.str();
}

FunctionRep apply_operator(const OperatorSpec& op, const FunctionRep& f) {
    switch (op.kind()) {
        case OperatorKind::Identity:
            return f;
        case OperatorKind::Volterra: {
            if (f.rep() != RepKind::Grid && f.rep() != RepKind::Fourier)
                fail(ErrorCode::UnsupportedOperator,
                     "volterra is defined on grid and fourier data, got " + shape_label(f));
            FunctionRep out = f;
            for (int d = 0; d < op.power(); ++d) {
                out = f.rep() == RepKind::Grid ? volterra_once_grid(out) : volterra_once_fourier(out);
            }
            return out;
        }
        case OperatorKind::FiniteRank: {
            const auto& pairs = op.pairs();
            if (f.rep() != pairs[0].first.rep())
                fail(ErrorCode::UnsupportedOperator,
                     "finite_rank built on " + shape_label(pairs[0].first) + " cannot take " + shape_label(f));
            FunctionRep acc = scaled(pairs[0].second, inner_product(f, pairs[0].first));
            for (std::size_t j = 1; j < pairs.size(); ++j) {
                acc = add_scaled(acc, pairs[j].second, inner_product(f, pairs[j].first));
            }
            return acc;
        }
        case OperatorKind::Multiplication: {
            if (f.rep() != op.multiplier().rep())
                fail(ErrorCode::UnsupportedOperator,
                     "multiplication by " + shape_label(op.multiplier()) + " cannot take " + shape_label(f));
            return pointwise_product(op.multiplier(), f);
        }
        case OperatorKind::Matrix: {
            if (f.rep() != RepKind::Finite || f.modulus() != op.matrix_modulus())
                fail(ErrorCode::UnsupportedOperator,
                     op.label() + " acts on finite(q=" + std::to_string(op.matrix_modulus()) +
                         ") data, got " + shape_label(f));
            const std::int64_t q = op.matrix_modulus();
            const auto& m = op.matrix_entries();
            std::vector<cplx> out(static_cast<std::size_t>(q), cplx(0, 0));
            for (std::int64_t i = 0; i < q; ++i) {
                cplx acc(0, 0);
                for (std::int64_t j = 0; j < q; ++j) {
                    acc += m[static_cast<std::size_t>(i * q + j)] * f.data()[static_cast<std::size_t>(j)];
                }
                out[static_cast<std::size_t>(i)] = acc;
            }
            return FunctionRep::finite(std::move(out));
        }
    }
    fail(ErrorCode::Kind, "apply_operator: unknown operator kind");
}

// --- probes -----------------------------------------------------------------------

ProbeReport probe_twisted_compactness(const OperatorSpec& op, const SystemDescriptor& system,
                                      const FunctionRep& f, int dim, std::int64_t n_max) {
    if (dim < 1) fail(ErrorCode::DegenerateProbe, "probe: subspace dimension must be >= 1");
    if (n_max < 1) fail(ErrorCode::DegenerateProbe, "probe: need n_max >= 1 orbit points");
    if (norm(f, NormKind::Sup) == 0.0)
        fail(ErrorCode::DegenerateProbe, "probe: test function is identically zero");

    std::vector<FunctionRep> orbit;
    orbit.reserve(static_cast<std::size_t>(n_max));
    for (std::int64_t n = 1; n <= n_max; ++n) {
        orbit.push_back(apply_operator(op, koopman_apply(system, n, f)));
    }
    const auto count = static_cast<Eigen::Index>(orbit.size());

    // For u = sum_i c_i o_i, w = sum_j d_j o_j one has <u, w> = d^H conj(A) c
    // with A[i][j] = <o_i, o_j>, so the matrix whose eigenvectors give an
    // orthonormal basis of the orbit span is conj(A); build it directly.
    Eigen::MatrixXcd gram(count, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index j = i; j < count; ++j) {
            const cplx v = std::conj(inner_product(orbit[static_cast<std::size_t>(i)],
                                                   orbit[static_cast<std::size_t>(j)]));
            gram(i, j) = v;
            gram(j, i) = std::conj(v);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
    if (solver.info() != Eigen::Success)
        fail(ErrorCode::DegenerateProbe, "probe: orbit Gram eigendecomposition failed");
    const Eigen::VectorXd& eigenvalues = solver.eigenvalues();  // ascending
    const double scale = std::max(eigenvalues(count - 1), 0.0);

    // Dominant eigenvectors, largest eigenvalue first, numerically
    // independent directions only.
    std::vector<FunctionRep> basis;
    const int want = std::min<int>(dim, static_cast<int>(count));
    for (int l = 0; l < want; ++l) {
        const Eigen::Index col = count - 1 - l;
        const double mu = eigenvalues(col);
        if (mu <= kRankTolerance * scale || mu <= 0.0) break;
        const double inv_len = 1.0 / std::sqrt(mu);
        FunctionRep u = scaled(orbit[0], solver.eigenvectors()(0, col) * inv_len);
        for (Eigen::Index i = 1; i < count; ++i) {
            u = add_scaled(u, orbit[static_cast<std::size_t>(i)],
                           solver.eigenvectors()(i, col) * inv_len);
        }
        basis.push_back(std::move(u));
    }

    double worst = 0.0;
    for (const FunctionRep& o : orbit) {
        FunctionRep residual = o;
        for (const FunctionRep& u : basis) {
            residual = add_scaled(residual, u, -inner_product(o, u));
        }
        worst = std::max(worst, norm(residual, NormKind::Sup));
    }

    ProbeReport report;
    report.requested_dim = dim;
    report.effective_dim = static_cast<int>(basis.size());
    report.max_residual_sup = worst;
    report.n_tested = n_max;
    report.f_label = shape_label(f);
    return report;
}

double probe_joint_bound(const std::vector<OperatorSpec>& ops,
                         const std::vector<SystemDescriptor>& systems,
                         const std::vector<FunctionRep>& test_functions, std::int64_t n_max) {
    if (ops.size() != systems.size() || ops.empty())
        fail(ErrorCode::Argument, "probe_joint_bound: need matching, nonempty operator/system lists");
    if (test_functions.empty())
        fail(ErrorCode::DegenerateProbe, "probe_joint_bound: need at least one test function");
    if (n_max < 1) fail(ErrorCode::DegenerateProbe, "probe_joint_bound: need n_max >= 1");

    double bound = 0.0;
    for (const FunctionRep& f : test_functions) {
        const double base = norm(f, NormKind::Sup);
        if (base == 0.0)
            fail(ErrorCode::DegenerateProbe, "probe_joint_bound: test function is identically zero");
        for (std::size_t j = 0; j < ops.size(); ++j) {
            for (std::int64_t n = 1; n <= n_max; ++n) {
                const FunctionRep image = apply_operator(ops[j], koopman_apply(systems[j], n, f));
                bound = std::max(bound, norm(image, NormKind::Sup) / base);
            }
        }
    }
    return bound;
}

} // namespace ergolab
