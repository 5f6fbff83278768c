#include <doctest.h>

#include <cmath>
#include <vector>

#include "ergolab/errors.hpp"
#include "ergolab/operators.hpp"
#include "ergolab/rng.hpp"

using namespace ergolab;

namespace {

FunctionRep fourier_mode(int cutoff, int j, cplx c = cplx(1, 0)) {
    auto f = FunctionRep::fourier(cutoff, std::vector<cplx>(static_cast<std::size_t>(2 * cutoff + 1), cplx(0, 0)));
    f.set_coeff(j, c);
    return f;
}

FunctionRep random_fourier(int cutoff, std::uint64_t seed) {
    SeededRng rng(seed);
    std::vector<cplx> coeffs(static_cast<std::size_t>(2 * cutoff + 1));
    for (cplx& z : coeffs) z = rng.next_complex();
    return FunctionRep::fourier(cutoff, std::move(coeffs));
}

} // namespace

TEST_SUITE_BEGIN("operators");

// ============================ worked examples ============================

TEST_CASE("volterra on the constant one gives the sawtooth exactly") {
    const auto one = FunctionRep::one_like(FunctionRep::grid(std::vector<cplx>(64, cplx(0, 0))));
    const auto v = apply_operator(OperatorSpec::volterra(1), one);
    for (int i = 0; i < 64; ++i) {
        CHECK(v.data()[static_cast<std::size_t>(i)].real() == doctest::Approx(i / 64.0).epsilon(1e-14));
    }
    CHECK(mean(v).real() == doctest::Approx(0.5 - 1.0 / 128.0).epsilon(1e-14));
}

TEST_CASE("volterra closed form on fourier modes") {
    const auto op = OperatorSpec::volterra(1);

    const auto v0 = apply_operator(op, fourier_mode(3, 0));
    CHECK(std::abs(v0.coeff(0) - cplx(0.5, 0)) <= 1e-15);
    for (int j = 1; j <= 3; ++j) {
        CHECK(std::abs(v0.coeff(j) - cplx(0, 1) / (kTwoPi * j)) <= 1e-15);   // -1/(2 pi i j)
        CHECK(std::abs(v0.coeff(-j) - cplx(0, -1) / (kTwoPi * j)) <= 1e-15);
    }

    const auto v1 = apply_operator(op, fourier_mode(3, 1));
    const cplx inv(0.0, -1.0 / kTwoPi);  // 1/(2 pi i)
    CHECK(std::abs(v1.coeff(1) - inv) <= 1e-15);
    CHECK(std::abs(v1.coeff(0) + inv) <= 1e-15);
    CHECK(std::abs(v1.coeff(2)) <= 1e-15);
}

TEST_CASE("volterra fourier and grid routes agree on the common band") {
    // The fourier route stores the image at cutoff K, so the L2 comparison
    // projects the grid route onto the same band. When f has nonzero mean the
    // image contains a sawtooth whose jump biases every sampled-DFT bin by
    // about |f_0|/(2M), giving an O(1/M) floor around 1.5e-3 here; the second
    // power adds an M-independent reentry of the out-of-band tail of size
    // about |f_0| * sum_{|j|>K} (2 pi j)^-2 ~ 4e-3.
    const int k = 8, m = 1024;
    const auto f = random_fourier(k, 314);
    for (int power : {1, 2}) {
        const auto spectral = apply_operator(OperatorSpec::volterra(power), f);
        const auto sampled = convert(
            apply_operator(OperatorSpec::volterra(power), convert(f, {RepKind::Grid, m})),
            {RepKind::Fourier, k});
        CHECK(l2_distance(spectral, sampled) <= (power == 1 ? 2e-3 : 6e-3));
    }
}

TEST_CASE("volterra routes agree everywhere for mean-zero input") {
    // With f mean-zero, V f = sum_j f_j (e_j - e_0)/(2 pi i j) is exactly a
    // degree-K trig polynomial, so the two routes agree on the whole grid.
    const int k = 8, m = 1024;
    auto f = random_fourier(k, 315);
    f.set_coeff(0, cplx(0, 0));
    const auto spectral = convert(apply_operator(OperatorSpec::volterra(1), f), {RepKind::Grid, m});
    const auto sampled = apply_operator(OperatorSpec::volterra(1), convert(f, {RepKind::Grid, m}));
    CHECK(l2_distance(spectral, sampled) <= 1e-3);
}

TEST_CASE("volterra cutoff truncation follows the sawtooth tail law") {
    // V applied to the constant produces x, whose band-K expansion drops an L2
    // mass of sum_{|j|>K} 1/(2 pi j)^2; for K = 8 that is (0.07716..)^2. The
    // full-grid distance between the two routes must reproduce this law.
    const int k = 8, m = 1024;
    const auto one = FunctionRep::one_like(fourier_mode(k, 0));
    const auto spectral = convert(apply_operator(OperatorSpec::volterra(1), one), {RepKind::Grid, m});
    const auto sampled = apply_operator(OperatorSpec::volterra(1), convert(one, {RepKind::Grid, m}));
    double tail = 0.0;
    for (int j = k + 1; j <= 2000000; ++j) tail += 2.0 / (kTwoPi * j * (kTwoPi * j));
    // 5% slack: the grid quadrature samples the sawtooth jump point exactly
    // and picks up Gibbs oscillation, perturbing the measured mass slightly.
    CHECK(l2_distance(spectral, sampled) == doctest::Approx(std::sqrt(tail)).epsilon(0.05));
}

TEST_CASE("volterra of a nonnegative function is nondecreasing") {
    SeededRng rng(77);
    std::vector<cplx> v(128);
    for (cplx& z : v) z = cplx(rng.next_unit() + 0.1, 0.0);
    const auto vf = apply_operator(OperatorSpec::volterra(1), FunctionRep::grid(v));
    for (std::size_t i = 1; i < vf.size(); ++i) {
        CHECK(vf.data()[i].real() >= vf.data()[i - 1].real());
    }
}

TEST_CASE("finite rank projection onto constants averages") {
    const auto one = FunctionRep::one_like(FunctionRep::finite(std::vector<cplx>(3, cplx(0, 0))));
    const auto proj = OperatorSpec::finite_rank({{one, one}});
    const auto f = FunctionRep::finite({cplx(1, 0), cplx(0, 0), cplx(0, 0)});
    const auto pf = apply_operator(proj, f);
    for (int x = 0; x < 3; ++x) {
        CHECK(std::abs(pf.data()[static_cast<std::size_t>(x)] - cplx(1.0 / 3.0, 0)) <= 1e-15);
    }
}

TEST_CASE("matrix operator acts on the value vector") {
    // Swap + scale on Z_2.
    const auto op = OperatorSpec::matrix(2, {cplx(0, 0), cplx(2, 0), cplx(1, 0), cplx(0, 0)});
    const auto f = FunctionRep::finite({cplx(5, 0), cplx(7, 0)});
    const auto g = apply_operator(op, f);
    CHECK(g.data()[0] == cplx(14, 0));
    CHECK(g.data()[1] == cplx(5, 0));
}

TEST_CASE("multiplication operator multiplies pointwise") {
    const auto g = FunctionRep::finite({cplx(2, 0), cplx(0, 1), cplx(1, -1)});
    const auto f = FunctionRep::finite({cplx(1, 0), cplx(3, 0), cplx(0, 2)});
    const auto out = apply_operator(OperatorSpec::multiplication(g), f);
    CHECK(out.data()[0] == cplx(2, 0));
    CHECK(out.data()[1] == cplx(0, 3));
    CHECK(out.data()[2] == cplx(2, 2));
}

// ============================ invariants ============================

TEST_CASE("operators are linear") {
    const cplx a(0.7, -0.2), b(-1.1, 0.4);
    const auto f = random_fourier(4, 1001);
    const auto g = random_fourier(4, 1002);
    std::vector<OperatorSpec> ops;
    ops.push_back(OperatorSpec::identity());
    ops.push_back(OperatorSpec::volterra(1));
    ops.push_back(OperatorSpec::volterra(2));
    ops.push_back(OperatorSpec::finite_rank({{random_fourier(4, 1003), random_fourier(4, 1004)}}));
    ops.push_back(OperatorSpec::multiplication(random_fourier(4, 1005)));
    for (const auto& op : ops) {
        CAPTURE(op.label());
        const auto lhs = apply_operator(op, add_scaled(scaled(f, a), g, b));
        const auto rhs = add_scaled(scaled(apply_operator(op, f), a), apply_operator(op, g), b);
        CHECK(l2_distance(lhs, rhs) <= 1e-12);
    }
}

TEST_CASE("unsupported operator-representation pairs are rejected") {
    const auto finite_f = FunctionRep::finite({cplx(1, 0), cplx(2, 0)});
    CHECK_THROWS_AS((void)apply_operator(OperatorSpec::volterra(1), finite_f), Error);
    try {
        (void)apply_operator(OperatorSpec::volterra(1), finite_f);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedOperator);
    }
    CHECK_THROWS_AS((void)apply_operator(OperatorSpec::matrix(3, std::vector<cplx>(9, cplx(1, 0))), finite_f),
                    Error);
    CHECK_THROWS_AS((void)apply_operator(OperatorSpec::multiplication(random_fourier(3, 1)), finite_f), Error);
}

// ============================ probes ============================

TEST_CASE("orbit of a single eigenmode is one-dimensional") {
    const auto report = probe_twisted_compactness(OperatorSpec::identity(),
                                                  SystemDescriptor::golden_rotation(4),
                                                  fourier_mode(4, 1), 1, 24);
    CHECK(report.effective_dim == 1);
    CHECK(report.max_residual_sup <= 1e-10);
    CHECK(report.n_tested == 24);
}

TEST_CASE("finite rank operator orbit fits in rank many dimensions") {
    const auto u1 = random_fourier(4, 21), v1 = random_fourier(4, 22);
    const auto u2 = random_fourier(4, 23), v2 = random_fourier(4, 24);
    const auto op = OperatorSpec::finite_rank({{u1, v1}, {u2, v2}});
    const auto sys = SystemDescriptor::golden_rotation(4);
    const auto f = random_fourier(4, 25);
    const auto r2 = probe_twisted_compactness(op, sys, f, 2, 32);
    CHECK(r2.max_residual_sup <= 1e-8);
    const auto r1 = probe_twisted_compactness(op, sys, f, 1, 32);
    CHECK(r1.max_residual_sup >= r2.max_residual_sup - 1e-12);
}

TEST_CASE("probe residual is nonincreasing in the subspace dimension") {
    const auto op = OperatorSpec::volterra(1);
    const auto sys = SystemDescriptor::golden_rotation(6);
    const auto f = random_fourier(6, 31);
    double prev = -1.0;
    for (int dim : {1, 2, 4, 8}) {
        const auto report = probe_twisted_compactness(op, sys, f, dim, 24);
        if (prev >= 0.0) CHECK(report.max_residual_sup <= prev + 1e-10);
        prev = report.max_residual_sup;
    }
}

TEST_CASE("degenerate probes are refused") {
    const auto sys = SystemDescriptor::golden_rotation(3);
    const auto z = FunctionRep::zero_like(fourier_mode(3, 0));
    CHECK_THROWS_AS((void)probe_twisted_compactness(OperatorSpec::identity(), sys, z, 1, 8), Error);
    CHECK_THROWS_AS((void)probe_twisted_compactness(OperatorSpec::identity(), sys, fourier_mode(3, 1), 0, 8),
                    Error);
    CHECK_THROWS_AS((void)probe_twisted_compactness(OperatorSpec::identity(), sys, fourier_mode(3, 1), 1, 0),
                    Error);
}

TEST_CASE("joint bound of rotations under the identity is one") {
    std::vector<OperatorSpec> ops = {OperatorSpec::identity(), OperatorSpec::identity()};
    std::vector<SystemDescriptor> systems = {SystemDescriptor::golden_rotation(4),
                                             SystemDescriptor::rotation(0.25, 4)};
    // Single modes have constant modulus, where the sup estimate is exact.
    std::vector<FunctionRep> fs = {fourier_mode(4, 1), fourier_mode(4, 2, cplx(0, 2))};
    const double c = probe_joint_bound(ops, systems, fs, 16);
    CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("volterra contracts the joint bound well below one") {
    std::vector<OperatorSpec> ops = {OperatorSpec::volterra(1)};
    std::vector<SystemDescriptor> systems = {SystemDescriptor::doubling(16)};
    std::vector<FunctionRep> fs = {fourier_mode(16, 1), random_fourier(16, 99)};
    const double c = probe_joint_bound(ops, systems, fs, 32);
    CHECK(c > 0.0);
    CHECK(c <= 1.0);
}

TEST_SUITE_END();
