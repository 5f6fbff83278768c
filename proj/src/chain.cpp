#include "ergolab/chain.hpp"

#include <algorithm>
#include <bit>

#include "ergolab/errors.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

const char* strategy_name(Strategy s) noexcept {
    switch (s) {
        case Strategy::Naive: return "naive";
        case Strategy::Cached: return "cached";
        case Strategy::Factorized: return "factorized";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "naive") return Strategy::Naive;
    if (name == "cached") return Strategy::Cached;
    if (name == "factorized") return Strategy::Factorized;
    fail(ErrorCode::Argument, "unknown strategy '" + std::string(name) +
                                  "' (expected naive, cached, or factorized)");
}

std::size_t SampleSet::size() const {
    switch (kind) {
        case RepKind::Grid:
        case RepKind::Fourier: return xs.size();
        case RepKind::Finite: return residues.size();
        case RepKind::Cylinder: return seeds.size();
    }
    return 0;
}

SampleSet SampleSet::seeded_for(const FunctionRep& like, int count, std::uint64_t seed) {
    if (count < 1) fail(ErrorCode::Argument, "sample set needs at least one point");
    SampleSet out;
    out.kind = like.rep();
    SeededRng rng(seed);
    for (int i = 0; i < count; ++i) {
        switch (out.kind) {
            case RepKind::Grid:
            case RepKind::Fourier: out.xs.push_back(rng.next_unit()); break;
            case RepKind::Finite: out.residues.push_back(rng.next_below(like.modulus())); break;
            case RepKind::Cylinder: out.seeds.push_back(rng.next_u64()); break;
        }
    }
    return out;
}

std::uint64_t SampleSet::fingerprint() const {
    std::uint64_t h = splitmix64(0x5A17F00DULL + static_cast<std::uint64_t>(kind));
    auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
    mix(xs.size());
    for (double x : xs) mix(std::bit_cast<std::uint64_t>(x));
    mix(residues.size());
    for (std::int64_t r : residues) mix(static_cast<std::uint64_t>(r));
    mix(seeds.size());
    for (std::uint64_t s : seeds) mix(s);
    return h;
}

std::vector<cplx> values_at(const FunctionRep& f, const SampleSet& samples) {
    if (f.rep() != samples.kind)
        fail(ErrorCode::ShapeMismatch, "sample set was declared for a different representation");
    std::vector<cplx> out;
    out.reserve(samples.size());
    switch (samples.kind) {
        case RepKind::Grid: {
            const auto mres = static_cast<double>(f.grid_points());
            for (double x : samples.xs) {
                auto i = static_cast<std::int64_t>(x * mres);
                if (i >= f.grid_points()) i = f.grid_points() - 1;
                out.push_back(f.eval_grid(i));
            }
            break;
        }
        case RepKind::Fourier:
            for (double x : samples.xs) out.push_back(f.eval_point(x));
            break;
        case RepKind::Finite:
            for (std::int64_t r : samples.residues) out.push_back(f.eval_finite(r));
            break;
        case RepKind::Cylinder:
            for (std::uint64_t s : samples.seeds) out.push_back(f.eval_coin(s));
            break;
    }
    return out;
}

void ChainSpec::validate() const {
    if (m < 2) fail(ErrorCode::Argument, "chain needs m >= 2 systems");
    if (k < 1) fail(ErrorCode::Argument, "chain needs k >= 1 lattice indices");
    if (static_cast<int>(alpha.size()) != m)
        fail(ErrorCode::Argument, "alpha must assign one index per system slot");
    for (int a : alpha)
        if (a < 1 || a > k) fail(ErrorCode::Argument, "alpha entries must lie in 1..k");
    if (static_cast<int>(systems.size()) != m)
        fail(ErrorCode::Argument, "chain needs exactly m systems");
    if (static_cast<int>(operators.size()) != m - 1)
        fail(ErrorCode::Argument, "chain needs exactly m-1 intertwining operators");
    if (!exponent_polys.empty() && static_cast<int>(exponent_polys.size()) != k)
        fail(ErrorCode::Argument, "exponent polynomials must cover all k indices when given");
    for (const auto& p : exponent_polys)
        if (p.is_constant())
            fail(ErrorCode::Argument, "exponent polynomials must be nonconstant");
    for (const auto& sys : systems) {
        if (continuous != sys.is_flow())
            fail(ErrorCode::Argument, continuous ? "continuous chains need flow systems"
                                                 : "discrete chains cannot contain flows");
        if (sys.representation() != input.rep())
            fail(ErrorCode::ShapeMismatch, "system " + sys.label() +
                                               " acts on a different representation than the input");
        if (sys.kind() == SystemKind::FiniteCyclic && sys.modulus() != input.modulus())
            fail(ErrorCode::ShapeMismatch, "finite system modulus does not match the input");
    }
    if (continuous) {
        for (const auto& p : exponent_polys)
            if (!(p == IntPolynomial::identity()))
                fail(ErrorCode::Argument, "continuous chains use linear time, not exponent polynomials");
    }
    if (abs_grid_resolution < 2)
        fail(ErrorCode::Argument, "abs_grid_resolution must be at least 2");
}

const IntPolynomial& ChainSpec::poly_for_class(int c) const {
    static const IntPolynomial kIdentity = IntPolynomial::identity();
    if (exponent_polys.empty()) return kIdentity;
    return exponent_polys[static_cast<std::size_t>(c - 1)];
}

std::vector<int> ChainSpec::used_classes() const {
    std::vector<int> used(alpha);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    return used;
}

bool ChainSpec::alpha_injective() const {
    return used_classes().size() == alpha.size();
}

std::string ChainSpec::label() const {
    std::string out = "m=" + std::to_string(m) + " k=" + std::to_string(k) + " alpha=(";
    for (int i = 0; i < m; ++i) {
        if (i) out += ",";
        out += std::to_string(alpha[static_cast<std::size_t>(i)]);
    }
    out += ") [";
    for (int i = 0; i < m; ++i) {
        if (i) out += " | ";
        out += systems[static_cast<std::size_t>(i)].label();
        if (i + 1 < m) out += " ; " + operators[static_cast<std::size_t>(i)].label();
    }
    out += "] f=" + shape_label(input);
    if (!exponent_polys.empty()) {
        out += " q=(";
        for (int c = 0; c < k; ++c) {
            if (c) out += ",";
            out += exponent_polys[static_cast<std::size_t>(c)].label();
        }
        out += ")";
    }
    if (continuous) out += " [flow]";
    return out;
}

} // namespace ergolab
