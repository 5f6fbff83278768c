#include "ergolab/limits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ergolab/errors.hpp"
#include "ergolab/operators.hpp"

namespace ergolab {

namespace {

/// Geometric check schedule: 16, 32, 64, ... capped by n_max, with n_max
/// itself always the final point.
std::vector<std::int64_t> geometric_schedule(std::int64_t n_max) {
    std::vector<std::int64_t> schedule;
    for (std::int64_t n = 16; n <= n_max; n *= 2) schedule.push_back(n);
    if (schedule.empty() || schedule.back() != n_max) schedule.push_back(n_max);
    return schedule;
}

} // namespace

// --- weight sequences --------------------------------------------------------

cplx WeightSequence::at(std::int64_t n) const {
    cplx v(0, 0);
    for (const auto& t : terms_) v += t.weight * std::pow(t.gamma, static_cast<double>(n));
    return v;
}

std::vector<cplx> WeightSequence::first(std::int64_t count) const {
    if (count < 0) fail(ErrorCode::Argument, "weight prefix length must be nonnegative");
    std::vector<cplx> out(static_cast<std::size_t>(count));
    // Incremental powers: one complex multiply per term per step keeps the
    // phase drift at the rounding floor across the horizons used here.
    std::vector<cplx> powers(terms_.size(), cplx(1, 0));
    for (std::int64_t n = 1; n <= count; ++n) {
        cplx v(0, 0);
        for (std::size_t j = 0; j < terms_.size(); ++j) {
            powers[j] *= terms_[j].gamma;
            v += terms_[j].weight * powers[j];
        }
        out[static_cast<std::size_t>(n - 1)] = v;
    }
    return out;
}

void WeightSequence::set_horizon(std::int64_t h) {
    if (h < 1) fail(ErrorCode::Argument, "weight horizon must be positive");
    horizon_ = h;
}

WeightSequence WeightSequence::product(const WeightSequence& other) const {
    std::vector<WeightTerm> prod;
    prod.reserve(terms_.size() * other.terms_.size());
    for (const auto& a : terms_)
        for (const auto& b : other.terms_)
            prod.push_back(WeightTerm{a.gamma * b.gamma, a.weight * b.weight});
    WeightSequence w = almost_periodic_weight(std::move(prod));
    w.horizon_ = std::min(horizon_, other.horizon_);
    return w;
}

std::string WeightSequence::label() const {
    std::string s = "weights[";
    for (std::size_t j = 0; j < terms_.size(); ++j) {
        if (j) s += ", ";
        s += "(" + std::to_string(terms_[j].gamma.real()) + "+" +
             std::to_string(terms_[j].gamma.imag()) + "i)^n * (" +
             std::to_string(terms_[j].weight.real()) + "+" +
             std::to_string(terms_[j].weight.imag()) + "i)";
    }
    return s + "]";
}

WeightSequence almost_periodic_weight(std::vector<WeightTerm> terms) {
    for (const auto& t : terms) {
        if (std::abs(std::abs(t.gamma) - 1.0) > 1e-12)
            fail(ErrorCode::Argument, "weight generators must be unimodular");
        if (!is_finite(t.weight)) fail(ErrorCode::Argument, "weight coefficients must be finite");
    }
    WeightSequence w;
    w.terms_ = std::move(terms);
    w.almost_periodic_ = true;
    return w;
}

// --- predicted limits ----------------------------------------------------------

const char* predictor_name(Predictor p) noexcept {
    switch (p) {
        case Predictor::WeakMixing: return "weak_mixing";
        case Predictor::ProjectionChain: return "projection_chain";
        case Predictor::Resonance: return "resonance";
        case Predictor::None: return "none";
    }
    return "?";
}

Predictor parse_predictor(const std::string& name) {
    if (name == "weak_mixing") return Predictor::WeakMixing;
    if (name == "projection_chain") return Predictor::ProjectionChain;
    if (name == "resonance") return Predictor::Resonance;
    if (name == "none") return Predictor::None;
    fail(ErrorCode::Argument, "unknown predictor: " + name);
}

FunctionRep predicted_limit_weak_mixing(const ChainSpec& chain) {
    chain.validate();
    for (const auto& sys : chain.systems)
        if (!sys.weakly_mixing())
            fail(ErrorCode::Applicability,
                 "weak-mixing predictor needs every system weakly mixing (" + sys.label() +
                     " is not)");
    const FunctionRep one = FunctionRep::one_like(chain.input);
    cplx value = mean(chain.input);
    for (const auto& op : chain.operators) value *= mean(apply_operator(op, one));
    return FunctionRep::constant_like(chain.input, value);
}

FunctionRep mean_ergodic_projection(const SystemDescriptor& system, const FunctionRep& f) {
    if (system.representation() != f.rep())
        fail(ErrorCode::Kind, "function representation does not match the system");
    if (system.kind() == SystemKind::FiniteCyclic && f.modulus() != system.modulus())
        fail(ErrorCode::Kind, "finite modulus does not match the system");
    return FunctionRep::constant_like(f, mean(f));
}

FunctionRep predicted_limit_projection_chain(const ChainSpec& chain) {
    chain.validate();
    if (!chain.alpha_injective())
        fail(ErrorCode::Applicability,
             "projection-chain predictor needs an injective entanglement map; "
             "use the resonance or weak-mixing predictor instead");
    FunctionRep g = mean_ergodic_projection(chain.systems[0], chain.input);
    for (int i = 1; i < chain.m; ++i) {
        g = apply_operator(chain.operators[static_cast<std::size_t>(i - 1)], g);
        g = mean_ergodic_projection(chain.systems[static_cast<std::size_t>(i)], g);
    }
    return g;
}

namespace {

/// Cesàro limit of the class phase: for default exponents the product of the
/// class's eigenvalues must be 1; for polynomial exponents on finite systems
/// the limit is the exact average of the character over one period, which can
/// be any complex number of modulus <= 1 (quadratic character sums).
cplx class_cesaro_factor(const ChainSpec& chain, int cls, bool finite, std::int64_t q,
                         std::int64_t mode_sum, cplx eigen_product) {
    const IntPolynomial& p = chain.poly_for_class(cls);
    if (finite) {
        std::int64_t r = mode_sum % q;
        if (r < 0) r += q;
        cplx sum(0, 0);
        for (std::int64_t n = 1; n <= q; ++n) {
            const std::int64_t e = p.eval_mod(n, q);
            sum += unit_phase(static_cast<double>((r * e) % q) / static_cast<double>(q));
        }
        return sum / static_cast<double>(q);
    }
    // Rotations: the average survives exactly when the combined phase is
    // trivial. |product - 1| < 1e-9 never fires falsely for the badly
    // approximable angles and cutoffs used here.
    return std::abs(eigen_product - cplx(1, 0)) < 1e-9 ? cplx(1, 0) : cplx(0, 0);
}

} // namespace

FunctionRep predicted_limit_resonance(const ChainSpec& chain) {
    chain.validate();
    if (chain.continuous)
        fail(ErrorCode::Applicability, "resonance predictor covers discrete chains");
    for (const auto& sys : chain.systems)
        if (!reversible_rank(sys).full)
            fail(ErrorCode::Applicability,
                 "resonance predictor needs a full point-spectrum system (" + sys.label() +
                     " is not)");
    const bool finite = chain.systems[0].kind() == SystemKind::FiniteCyclic;
    const std::int64_t q = finite ? chain.systems[0].modulus() : 0;
    if (chain.input.rep() == RepKind::Fourier &&
        chain.systems[0].cutoff() < chain.input.cutoff())
        fail(ErrorCode::Applicability,
             "system eigenbasis does not span the input (cutoff too small)");

    const int m = chain.m;
    std::vector<std::vector<EigenPair>> bases(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        bases[static_cast<std::size_t>(i)] = eigen_data(chain.systems[static_cast<std::size_t>(i)]);

    // Input coefficients in the first basis.
    const auto& b0 = bases[0];
    std::vector<cplx> c0(b0.size());
    for (std::size_t j = 0; j < b0.size(); ++j)
        c0[j] = inner_product(chain.input, b0[j].eigenfunction);

    // Operator matrices in the eigenbases, computed once per chain:
    // M[i][r * B_i + j] = <A_i h^i_j, h^{i+1}_r>.
    std::vector<std::vector<cplx>> mats(static_cast<std::size_t>(m - 1));
    for (int i = 0; i + 1 < m; ++i) {
        const auto& from = bases[static_cast<std::size_t>(i)];
        const auto& to = bases[static_cast<std::size_t>(i + 1)];
        auto& M = mats[static_cast<std::size_t>(i)];
        M.assign(from.size() * to.size(), cplx(0, 0));
        for (std::size_t j = 0; j < from.size(); ++j) {
            const FunctionRep img =
                apply_operator(chain.operators[static_cast<std::size_t>(i)], from[j].eigenfunction);
            for (std::size_t r = 0; r < to.size(); ++r)
                M[r * from.size() + j] = inner_product(img, to[r].eigenfunction);
        }
    }

    // Path enumeration with per-class eigenvalue products and mode sums.
    const std::size_t kmax = static_cast<std::size_t>(chain.k) + 1;
    std::vector<cplx> class_product(kmax, cplx(1, 0));
    std::vector<std::int64_t> class_mode(kmax, 0);
    std::vector<cplx> out_coeffs(bases[static_cast<std::size_t>(m - 1)].size(), cplx(0, 0));

    std::function<void(int, std::size_t, cplx)> walk = [&](int slot, std::size_t j, cplx amp) {
        if (amp == cplx(0, 0)) return;
        const std::size_t si = static_cast<std::size_t>(slot);
        const int cls = chain.alpha[si];
        const auto& pair = bases[si][j];
        const cplx saved_prod = class_product[static_cast<std::size_t>(cls)];
        const std::int64_t saved_mode = class_mode[static_cast<std::size_t>(cls)];
        class_product[static_cast<std::size_t>(cls)] *= pair.eigenvalue;
        class_mode[static_cast<std::size_t>(cls)] += pair.mode;

        if (slot + 1 == m) {
            cplx factor = amp;
            for (int b : chain.used_classes())
                factor *= class_cesaro_factor(chain, b, finite, q,
                                              class_mode[static_cast<std::size_t>(b)],
                                              class_product[static_cast<std::size_t>(b)]);
            out_coeffs[j] += factor;
        } else {
            const auto& M = mats[si];
            const std::size_t from = bases[si].size();
            const std::size_t to = bases[si + 1].size();
            for (std::size_t r = 0; r < to; ++r) {
                const cplx step = M[r * from + j];
                if (step != cplx(0, 0)) walk(slot + 1, r, amp * step);
            }
        }

        class_product[static_cast<std::size_t>(cls)] = saved_prod;
        class_mode[static_cast<std::size_t>(cls)] = saved_mode;
    };
    for (std::size_t j = 0; j < b0.size(); ++j) walk(0, j, c0[j]);

    FunctionRep out = FunctionRep::zero_like(chain.input);
    const auto& blast = bases[static_cast<std::size_t>(m - 1)];
    for (std::size_t r = 0; r < blast.size(); ++r)
        if (out_coeffs[r] != cplx(0, 0)) out = add_scaled(out, blast[r].eigenfunction, out_coeffs[r]);
    return out;
}

FunctionRep predicted_limit(const ChainSpec& chain, Predictor p) {
    switch (p) {
        case Predictor::WeakMixing: return predicted_limit_weak_mixing(chain);
        case Predictor::ProjectionChain: return predicted_limit_projection_chain(chain);
        case Predictor::Resonance: return predicted_limit_resonance(chain);
        case Predictor::None: break;
    }
    fail(ErrorCode::Applicability, "no predictor selected");
}

// --- sequence classes -----------------------------------------------------------

ClassNReport is_class_N(const std::vector<cplx>& a, double tol) {
    if (a.size() < 16) fail(ErrorCode::Argument, "class-N check needs at least 16 terms");
    if (!(tol > 0.0)) fail(ErrorCode::Argument, "class-N tolerance must be positive");
    ClassNReport report;
    report.tol = tol;
    report.schedule = geometric_schedule(static_cast<std::int64_t>(a.size()));
    double running = 0.0;
    std::size_t consumed = 0;
    for (std::int64_t N : report.schedule) {
        while (consumed < static_cast<std::size_t>(N)) running += std::abs(a[consumed++]);
        report.cesaro_abs.push_back(running / static_cast<double>(N));
    }
    const auto& c = report.cesaro_abs;
    bool tail_ok = true;
    const std::size_t lo = c.size() > 3 ? c.size() - 3 : 1;
    for (std::size_t i = lo; i < c.size(); ++i) tail_ok = tail_ok && c[i] <= c[i - 1];
    report.in_class = tail_ok && c.back() < tol;
    return report;
}

ClassNReport is_class_N(const WeightSequence& w, std::int64_t n_max, double tol) {
    if (n_max < 16) fail(ErrorCode::Argument, "class-N check needs at least 16 terms");
    return is_class_N(w.first(n_max), tol);
}

DensityReport density_one_subsequence(const std::vector<cplx>& a, double tol) {
    if (!(tol >= 0.0)) fail(ErrorCode::Argument, "density tolerance must be nonnegative");
    DensityReport report;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i]) <= tol) report.indices.push_back(static_cast<std::int64_t>(i) + 1);
    report.schedule = geometric_schedule(static_cast<std::int64_t>(a.size()));
    std::size_t in = 0;
    for (std::int64_t N : report.schedule) {
        while (in < report.indices.size() && report.indices[in] <= N) ++in;
        report.density.push_back(static_cast<double>(in) / static_cast<double>(N));
    }
    report.input_in_class_n = a.size() >= 16 && is_class_N(a, std::max(tol, 1e-12)).in_class;
    return report;
}

FunctionRep weighted_birkhoff_average(const SystemDescriptor& system, const WeightSequence& w,
                                      const FunctionRep& f, std::int64_t N) {
    if (system.is_flow()) fail(ErrorCode::Kind, "weighted averages run on discrete systems");
    if (system.representation() != f.rep())
        fail(ErrorCode::Kind, "function representation does not match the system");
    if (system.kind() == SystemKind::FiniteCyclic && f.modulus() != system.modulus())
        fail(ErrorCode::Kind, "finite modulus does not match the system");
    if (N < 1) fail(ErrorCode::Argument, "N must be positive");

    const std::vector<cplx> weights = w.first(N);
    FunctionRep sum;
    bool started = false;
    for (std::int64_t n = 1; n <= N; ++n) {
        const FunctionRep g = koopman_apply(system, n, f);
        const cplx a = weights[static_cast<std::size_t>(n - 1)];
        if (!started) {
            sum = scaled(g, a);
            started = true;
        } else {
            sum = add_scaled(sum, g, a);
        }
    }
    for (cplx& v : sum.mutable_data()) v /= static_cast<double>(N);
    return sum;
}

} // namespace ergolab
