#include <doctest.h>

#include <cmath>
#include <vector>

#include "ergolab/errors.hpp"
#include "ergolab/function_rep.hpp"
#include "ergolab/rng.hpp"

using namespace ergolab;

namespace {

FunctionRep random_rep(RepKind kind, std::uint64_t seed) {
    SeededRng rng(seed);
    auto draw = [&](std::size_t n) {
        std::vector<cplx> v(n);
        for (cplx& z : v) z = rng.next_complex();
        return v;
    };
    switch (kind) {
        case RepKind::Grid: return FunctionRep::grid(draw(24));
        case RepKind::Fourier: return FunctionRep::fourier(6, draw(13));
        case RepKind::Finite: return FunctionRep::finite(draw(7));
        case RepKind::Cylinder: return FunctionRep::cylinder(-1, 2, draw(16));
    }
    return FunctionRep::grid(draw(4));
}

const RepKind kAllKinds[] = {RepKind::Grid, RepKind::Fourier, RepKind::Finite, RepKind::Cylinder};

} // namespace

TEST_SUITE_BEGIN("space");

// ============================ worked examples ============================

TEST_CASE("finite inner product averages over Z_q") {
    const auto f = FunctionRep::finite({cplx(1, 0), cplx(2, 0), cplx(3, 0)});
    const auto g = FunctionRep::one_like(f);
    CHECK(inner_product(f, g) == cplx(2, 0));  // (1+2+3)/3
    CHECK(mean(f) == cplx(2, 0));
}

TEST_CASE("grid of cos(2 pi x) analyzes to half-weight modes +-1") {
    std::vector<cplx> values(8);
    for (int i = 0; i < 8; ++i) values[i] = cplx(std::cos(kTwoPi * i / 8.0), 0.0);
    const auto f = convert(FunctionRep::grid(values), {RepKind::Fourier, 2});
    CHECK(std::abs(f.coeff(1) - cplx(0.5, 0)) <= 1e-14);
    CHECK(std::abs(f.coeff(-1) - cplx(0.5, 0)) <= 1e-14);
    CHECK(std::abs(f.coeff(0)) <= 1e-14);
    CHECK(std::abs(f.coeff(2)) <= 1e-14);
    CHECK(std::abs(f.coeff(-2)) <= 1e-14);
}

TEST_CASE("cylinder widening replicates over the new coordinate") {
    const cplx u(0.25, 1.0), v(-2.0, 0.5);
    const auto f = FunctionRep::cylinder(0, 0, {u, v});
    const auto wide = f.widened_to(0, 1);
    REQUIRE(wide.size() == 4);
    CHECK(wide.data()[0] == u);
    CHECK(wide.data()[1] == u);
    CHECK(wide.data()[2] == v);
    CHECK(wide.data()[3] == v);
}

TEST_CASE("fourier basis mode evaluates on the 4-point grid to the 4th roots of unity") {
    auto e1 = FunctionRep::fourier(1, {cplx(0, 0), cplx(0, 0), cplx(0, 0)});
    e1.set_coeff(1, cplx(1, 0));
    const auto g = convert(e1, {RepKind::Grid, 4});
    const cplx expected[] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(g.data()[i] - expected[i]) <= 1e-15);
}

TEST_CASE("mean of the sawtooth grid is 1/2 - 1/(2M)") {
    for (int m : {8, 64, 512}) {
        std::vector<cplx> values(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) values[static_cast<std::size_t>(i)] = cplx(double(i) / m, 0.0);
        const auto f = FunctionRep::grid(values);
        CHECK(mean(f).real() == doctest::Approx(0.5 - 0.5 / m).epsilon(1e-14));
    }
}

// ============================ invariants ============================

TEST_CASE("inner product is conjugate symmetric and Cauchy-Schwarz bounded") {
    for (RepKind kind : kAllKinds) {
        CAPTURE(rep_kind_name(kind));
        for (std::uint64_t s = 0; s < 8; ++s) {
            const auto f = random_rep(kind, 100 + s);
            const auto g = random_rep(kind, 200 + s);
            const cplx fg = inner_product(f, g);
            const cplx gf = inner_product(g, f);
            CHECK(std::abs(fg - std::conj(gf)) <= 1e-12);
            CHECK(std::abs(fg) <= norm(f, NormKind::L2) * norm(g, NormKind::L2) + 1e-12);
        }
    }
}

TEST_CASE("norms are ordered L1 <= L2 <= Sup on a probability space") {
    for (RepKind kind : kAllKinds) {
        CAPTURE(rep_kind_name(kind));
        for (std::uint64_t s = 0; s < 8; ++s) {
            const auto f = random_rep(kind, 300 + s);
            const double l1 = norm(f, NormKind::L1);
            const double l2 = norm(f, NormKind::L2);
            const double sup = norm(f, NormKind::Sup);
            CHECK(l1 <= l2 + 1e-12);
            CHECK(l2 <= sup + 1e-12);
            CHECK(l1 > 0.0);
        }
    }
}

TEST_CASE("norm vanishes exactly on the zero element") {
    for (RepKind kind : kAllKinds) {
        const auto z = FunctionRep::zero_like(random_rep(kind, 1));
        for (NormKind p : {NormKind::L1, NormKind::L2, NormKind::Sup}) {
            CHECK(norm(z, p) == 0.0);
        }
    }
}

TEST_CASE("mean agrees with pairing against the constant one") {
    for (RepKind kind : kAllKinds) {
        CAPTURE(rep_kind_name(kind));
        const auto f = random_rep(kind, 42);
        const auto one = FunctionRep::one_like(f);
        CHECK(std::abs(mean(f) - inner_product(f, one)) <= 1e-12);
    }
}

TEST_CASE("fourier-grid round trip is exact for resolved trig polynomials") {
    const auto f = random_rep(RepKind::Fourier, 7);  // K = 6
    for (int m : {13, 16, 64}) {
        const auto g = convert(f, {RepKind::Grid, m});
        const auto back = convert(g, {RepKind::Fourier, 6});
        CHECK(l2_distance(f, back) <= 1e-12);
    }
}

TEST_CASE("grid-fourier transform needs enough points") {
    const auto f = random_rep(RepKind::Grid, 8);  // M = 24
    CHECK_THROWS_AS((void)convert(f, {RepKind::Fourier, 12}), Error);
    try {
        (void)convert(f, {RepKind::Fourier, 12});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Resolution);
    }
    CHECK_NOTHROW((void)convert(f, {RepKind::Fourier, 11}));
}

TEST_CASE("parseval ties the fourier L2 norm to its grid samples") {
    const auto f = random_rep(RepKind::Fourier, 9);
    const auto g = convert(f, {RepKind::Grid, 40});
    CHECK(norm(f, NormKind::L2) == doctest::Approx(norm(g, NormKind::L2)).epsilon(1e-12));
}

TEST_CASE("cylinder inner product through marginals equals the widened computation") {
    const auto f = random_rep(RepKind::Cylinder, 55);                 // window [-1, 2]
    SeededRng rng(66);
    std::vector<cplx> t(8);
    for (cplx& z : t) z = rng.next_complex();
    const auto g = FunctionRep::cylinder(1, 3, t);                    // overlaps at [1, 2]
    const cplx direct = inner_product(f, g);
    const cplx widened = inner_product(f.widened_to(-1, 3), g.widened_to(-1, 3));
    CHECK(std::abs(direct - widened) <= 1e-13);
}

TEST_CASE("disjoint cylinder windows factor into a product of means") {
    const auto f = random_rep(RepKind::Cylinder, 77);
    const auto g = FunctionRep::cylinder(10, 11, {cplx(1, 1), cplx(2, 0), cplx(0, -1), cplx(1, 0)});
    CHECK(std::abs(inner_product(f, g) - mean(f) * std::conj(mean(g))) <= 1e-14);
}

TEST_CASE("widening preserves coin-sample evaluation") {
    const auto f = random_rep(RepKind::Cylinder, 88);
    const auto wide = f.widened_to(-4, 5);
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        CHECK(f.eval_coin(seed) == wide.eval_coin(seed));
    }
}

TEST_CASE("cylinder arithmetic with far windows avoids widening only for constants") {
    const auto f = random_rep(RepKind::Cylinder, 99);
    const auto far_const = FunctionRep::cylinder(100, 100, {cplx(2, 1), cplx(2, 1)});
    const auto sum = add(f, far_const);
    CHECK(sum.window_lo() == f.window_lo());
    CHECK(sum.window_hi() == f.window_hi());
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(sum.data()[i] == f.data()[i] + cplx(2, 1));

    SeededRng rng(5);
    std::vector<cplx> t(4);
    for (cplx& z : t) z = rng.next_complex();
    t[1] += cplx(0.5, 0);  // genuinely non-constant
    const auto far = FunctionRep::cylinder(100, 101, t);
    CHECK_THROWS_AS((void)add(f, far), Error);
    try {
        (void)add(f, far);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WindowCap);
    }
}

TEST_CASE("mixed representations are rejected, not coerced") {
    const auto f = random_rep(RepKind::Grid, 3);
    const auto g = random_rep(RepKind::Finite, 4);
    CHECK_THROWS_AS((void)inner_product(f, g), Error);
    CHECK_THROWS_AS((void)add(f, g), Error);
    const auto h = random_rep(RepKind::Grid, 5);       // M = 24
    const auto h2 = FunctionRep::grid(std::vector<cplx>(10, cplx(1, 0)));
    CHECK_THROWS_AS((void)inner_product(h, h2), Error);
}

TEST_CASE("non-finite values are rejected at construction") {
    CHECK_THROWS_AS((void)FunctionRep::grid({cplx(std::nan(""), 0)}), Error);
    CHECK_THROWS_AS((void)FunctionRep::finite({cplx(0, INFINITY)}), Error);
}

TEST_CASE("fourier cutoffs reconcile by zero extension") {
    const auto f = random_rep(RepKind::Fourier, 10);  // K = 6
    const auto g = convert(f, {RepKind::Fourier, 9}); // zero-extended copy
    CHECK(l2_distance(f, g) == 0.0);
    CHECK(std::abs(inner_product(f, g) - inner_product(f, f)) <= 1e-13);
    const auto sum = add(f, g);
    CHECK(sum.cutoff() == 9);
    CHECK(norm(sub(sum, scaled(g, cplx(2, 0))), NormKind::L2) <= 1e-14);
}

TEST_CASE("pointwise product on fourier is the truncated convolution") {
    // (e_1 + e_{-1})^2 = e_2 + 2 e_0 + e_{-2}, fully resolved at K = 2.
    auto f = FunctionRep::fourier(2, std::vector<cplx>(5, cplx(0, 0)));
    f.set_coeff(1, cplx(1, 0));
    f.set_coeff(-1, cplx(1, 0));
    const auto p = pointwise_product(f, f);
    CHECK(std::abs(p.coeff(2) - cplx(1, 0)) <= 1e-15);
    CHECK(std::abs(p.coeff(0) - cplx(2, 0)) <= 1e-15);
    CHECK(std::abs(p.coeff(-2) - cplx(1, 0)) <= 1e-15);
    CHECK(std::abs(p.coeff(1)) <= 1e-15);

    // Against the grid: multiply samples, compare transforms.
    const auto grid_f = convert(f, {RepKind::Grid, 16});
    const auto grid_p = pointwise_product(grid_f, grid_f);
    CHECK(l2_distance(convert(grid_p, {RepKind::Fourier, 2}), p) <= 1e-13);
}

TEST_CASE("fourier sup norm sits between the L2 norm and the coefficient sum") {
    // The reported sup is a dense-grid estimate: it can only undershoot the
    // true sup (slightly), so the sharp two-sided sandwich is
    //   L2  <=  reported sup  <=  sum of |c_j|  (triangle inequality).
    for (std::uint64_t s = 0; s < 8; ++s) {
        const auto f = random_rep(RepKind::Fourier, 300 + s);
        double coeff_sum = 0.0;
        for (const cplx& c : f.data()) coeff_sum += std::abs(c);
        const double sup = norm(f, NormKind::Sup);
        CHECK(norm(f, NormKind::L2) <= sup + 1e-12);
        CHECK(sup <= coeff_sum + 1e-12);
    }
    // Where the sup is attained on a sample node it is exact: e_1 + e_{-1}
    // = 2cos(2*pi*x) peaks at x = 0, which every sample grid contains.
    auto c = FunctionRep::fourier(1, {cplx(1, 0), cplx(0, 0), cplx(1, 0)});
    CHECK(norm(c, NormKind::Sup) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_SUITE_END();
