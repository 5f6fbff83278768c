#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergolab/chain.hpp"
#include "ergolab/complex.hpp"

namespace ergolab {

/// Cesàro mean of a geometric sequence, (1/N) sum_{n=1..N} lambda^n, via the
/// closed form lambda (lambda^N - 1) / (lambda - 1) / N for lambda != 1 and
/// exactly 1 for lambda == 1. Requires |lambda| <= 1 + 1e-12.
cplx geometric_cesaro(cplx lambda, std::int64_t N);

/// Stamp on generated fixtures; bumped whenever seeded generation changes so
/// stale fixture files are refused (Schema error) instead of mis-diffed.
inline constexpr int kFixtureGeneratorVersion = 1;

/// A frozen reference computation: a seeded finite-cyclic chain, an N
/// schedule, and the brute-force average recorded at each schedule point
/// when the fixture was generated. Values regenerate bit-identically from
/// (seed, chain, version), so any nonzero drift is a real behavior change.
struct Fixture {
    std::string name;
    int generator_version = kFixtureGeneratorVersion;
    std::uint64_t seed = 0;
    ChainSpec chain;
    std::vector<std::int64_t> schedule;
    std::vector<std::vector<cplx>> reference;  // one value block per schedule point

    std::string serialize() const;
    static Fixture parse(const std::string& json_text, const std::string& where);
};

struct FixtureReport {
    std::string name;
    bool pass = false;
    double max_abs_diff = 0.0;
    std::string detail;
};

/// Deterministic pseudo-random finite-cyclic chain: Z_q systems, matrix
/// operators with every entry inside the unit disk, a random entanglement
/// map into {1..k}, and a random input. Same (q, m, k, seed), same chain.
ChainSpec seeded_finite_chain(std::int64_t q, int m, int k, std::uint64_t seed);

/// Build a fixture for the given shape: seeded chain plus fresh brute-force
/// reference values along the schedule.
Fixture make_finite_fixture(const std::string& name, std::int64_t q, int m, int k,
                            std::uint64_t seed, std::vector<std::int64_t> schedule);

/// Recompute the fixture's reference values and diff against the stored
/// ones. Pass iff the max abs difference is <= 1e-10. Structural drift
/// (generator version, shape mismatches) raises Schema errors rather than
/// reporting a numeric failure.
FixtureReport regenerate_fixture(const Fixture& fixture);

/// Check every *.json file under `dir` (sorted by name). Argument error when
/// the directory has no fixtures at all.
std::vector<FixtureReport> check_fixture_directory(const std::string& dir);

/// Write the repository's committed fixture set into `dir`.
void write_default_fixtures(const std::string& dir);

} // namespace ergolab
