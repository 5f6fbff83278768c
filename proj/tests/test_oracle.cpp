#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/config.hpp"
#include "ergolab/engine.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/oracle.hpp"
#include "ergolab/rng.hpp"

using namespace ergolab;

namespace {

cplx loop_cesaro(cplx lambda, std::int64_t N) {
    cplx sum(0, 0);
    cplx cur(1, 0);
    for (std::int64_t n = 1; n <= N; ++n) {
        cur *= lambda;
        sum += cur;
    }
    return sum / static_cast<double>(N);
}

std::filesystem::path fresh_temp_dir(const char* tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     (std::string("ergolab-") + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("geometric cesaro closed form matches the defining examples") {
    CHECK(geometric_cesaro(cplx(1, 0), 1) == cplx(1, 0));
    CHECK(geometric_cesaro(cplx(1, 0), 7) == cplx(1, 0));

    CHECK(std::abs(geometric_cesaro(cplx(-1, 0), 2)) == 0.0);
    CHECK(std::abs(geometric_cesaro(cplx(-1, 0), 10)) == 0.0);

    // i + i^2 + i^3 = i - 1 - i = -1, averaged over three terms.
    CHECK(std::abs(geometric_cesaro(cplx(0, 1), 3) - cplx(-1.0 / 3.0, 0)) < 1e-15);

    // A contracting ratio: (1/2 + 1/4)/2 = 3/8.
    CHECK(std::abs(geometric_cesaro(cplx(0.5, 0), 2) - cplx(0.375, 0)) < 1e-15);
}

TEST_CASE("geometric cesaro validates its domain") {
    CHECK_THROWS_AS(geometric_cesaro(cplx(1.1, 0), 4), Error);
    CHECK_THROWS_AS(geometric_cesaro(cplx(1, 0), 0), Error);
    CHECK_NOTHROW(geometric_cesaro(cplx(1.0 + 5e-13, 0), 4));
}

TEST_CASE("geometric cesaro equals the naive loop for random unimodular ratios") {
    SeededRng rng(2718281828ULL);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const cplx lambda = rng.next_unimodular();
        const auto N = static_cast<std::int64_t>(1 + rng.next_below(10000));
        worst = std::max(worst, std::abs(geometric_cesaro(lambda, N) - loop_cesaro(lambda, N)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("seeded finite chains are reproducible and entry-bounded") {
    const ChainSpec a = seeded_finite_chain(4, 3, 2, 7);
    const ChainSpec b = seeded_finite_chain(4, 3, 2, 7);
    CHECK(chain_to_json(a).dump() == chain_to_json(b).dump());

    const ChainSpec c = seeded_finite_chain(4, 3, 2, 8);
    CHECK(chain_to_json(a).dump() != chain_to_json(c).dump());

    for (const OperatorSpec& op : a.operators)
        for (cplx entry : op.matrix_entries()) CHECK(std::abs(entry) <= 1.0);
}

TEST_CASE("freshly generated fixtures regenerate with zero drift") {
    const Fixture fixture = make_finite_fixture("t", 4, 3, 2, 7, {1, 2, 4, 8});
    const FixtureReport report = regenerate_fixture(fixture);
    CHECK(report.pass);
    CHECK(report.max_abs_diff == 0.0);
}

TEST_CASE("value perturbations beyond the tolerance fail regeneration") {
    Fixture fixture = make_finite_fixture("t", 3, 2, 1, 9, {1, 2, 4});

    Fixture nudged = fixture;
    nudged.reference[1][0] += cplx(1e-12, 0);
    CHECK(regenerate_fixture(nudged).pass);

    Fixture drifted = fixture;
    drifted.reference[2][1] += cplx(1e-6, 0);
    const FixtureReport report = regenerate_fixture(drifted);
    CHECK(!report.pass);
    CHECK(report.max_abs_diff == doctest::Approx(1e-6).epsilon(1e-3));
    CHECK(report.detail.find("N=4") != std::string::npos);
}

TEST_CASE("fixture files round-trip exactly through serialization") {
    const Fixture fixture = make_finite_fixture("round-trip", 4, 3, 2, 7, {1, 2, 4, 8});
    const std::string text = fixture.serialize();
    const Fixture back = Fixture::parse(text, "test");
    CHECK(back.name == fixture.name);
    CHECK(back.seed == fixture.seed);
    CHECK(back.schedule == fixture.schedule);
    CHECK(back.serialize() == text);
    CHECK(regenerate_fixture(back).max_abs_diff == 0.0);
}

TEST_CASE("structural drift raises Schema errors instead of numeric failures") {
    const Fixture fixture = make_finite_fixture("drift", 3, 2, 1, 5, {1, 2, 4});
    const nlohmann::json good = nlohmann::json::parse(fixture.serialize());

    auto expect_schema = [](const nlohmann::json& j) {
        try {
            Fixture::parse(j.dump(), "test");
            FAIL_CHECK("expected a Schema error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Schema);
        }
    };

    nlohmann::json stale = good;
    stale["generator_version"] = kFixtureGeneratorVersion + 1;
    expect_schema(stale);

    nlohmann::json missing_block = good;
    missing_block["reference"].erase(2);
    expect_schema(missing_block);

    nlohmann::json relabeled = good;
    relabeled["reference"][0]["label"] = "N=9";
    expect_schema(relabeled);

    nlohmann::json short_block = good;
    short_block["reference"][0]["values"].erase(0);
    const Fixture parsed = Fixture::parse(short_block.dump(), "test");
    CHECK_THROWS_AS(regenerate_fixture(parsed), Error);
}

TEST_CASE("fixture directories check in bulk") {
    const auto dir = fresh_temp_dir("fixtures");
    write_default_fixtures(dir.string());

    const std::vector<FixtureReport> reports = check_fixture_directory(dir.string());
    REQUIRE(reports.size() == 3);
    for (const FixtureReport& report : reports) {
        CHECK(report.pass);
        CHECK(report.max_abs_diff == 0.0);
    }

    const auto empty = fresh_temp_dir("fixtures-empty");
    CHECK_THROWS_AS(check_fixture_directory(empty.string()), Error);
    CHECK_THROWS_AS(check_fixture_directory((dir / "nope").string()), Error);

    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(empty);
}

TEST_SUITE_END();
