#include "ergolab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <utility>

#include "json.hpp"

#include "ergolab/config.hpp"
#include "ergolab/engine.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

namespace {

using nlohmann::json;

constexpr double kFixtureTolerance = 1e-10;

std::string point_label(std::int64_t n) { return "N=" + std::to_string(n); }

/// Exponentiation by squaring: a few ulp for any unimodular base, and exact
/// on the lattice cases ((-1)^even, i^4k, ...) that the exp/log form of
/// std::pow smears with ~1e-16 phase residue.
cplx ipow(cplx base, std::int64_t n) {
    cplx acc(1.0, 0.0);
    while (n > 0) {
        if (n & 1) acc *= base;
        base *= base;
        n >>= 1;
    }
    return acc;
}

} // namespace

cplx geometric_cesaro(cplx lambda, std::int64_t N) {
    if (N < 1) fail(ErrorCode::Argument, "geometric_cesaro needs N >= 1");
    if (std::abs(lambda) > 1.0 + 1e-12)
        fail(ErrorCode::Argument, "geometric_cesaro is for |lambda| <= 1");
    if (lambda == cplx(1.0, 0.0)) return cplx(1.0, 0.0);
    return lambda * (ipow(lambda, N) - cplx(1.0, 0.0)) / (lambda - cplx(1.0, 0.0)) /
           static_cast<double>(N);
}

ChainSpec seeded_finite_chain(std::int64_t q, int m, int k, std::uint64_t seed) {
    if (q < 1 || m < 1 || k < 1)
        fail(ErrorCode::Argument, "seeded_finite_chain needs q, m, k >= 1");
    SeededRng rng(splitmix64(seed ^ 0x66697874757265ULL));
    ChainSpec chain;
    chain.m = m;
    chain.k = k;
    chain.alpha.clear();
    for (int i = 0; i < m; ++i)
        chain.alpha.push_back(1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k))));
    chain.systems.assign(static_cast<std::size_t>(m), SystemDescriptor::finite_cyclic(q));
    chain.operators.clear();
    for (int i = 0; i + 1 < m; ++i) {
        std::vector<cplx> entries;
        entries.reserve(static_cast<std::size_t>(q * q));
        for (std::int64_t e = 0; e < q * q; ++e) {
            // Uniform on the unit disk, so every matrix entry is bounded by 1.
            const double radius = std::sqrt(rng.next_unit());
            entries.push_back(radius * rng.next_unimodular());
        }
        chain.operators.push_back(OperatorSpec::matrix(q, std::move(entries)));
    }
    std::vector<cplx> values;
    values.reserve(static_cast<std::size_t>(q));
    for (std::int64_t r = 0; r < q; ++r) values.push_back(rng.next_complex(1.0));
    chain.input = FunctionRep::finite(std::move(values));
    chain.validate();
    return chain;
}

Fixture make_finite_fixture(const std::string& name, std::int64_t q, int m, int k,
                            std::uint64_t seed, std::vector<std::int64_t> schedule) {
    if (schedule.empty()) fail(ErrorCode::Argument, "fixture schedules must not be empty");
    Fixture fixture;
    fixture.name = name;
    fixture.seed = seed;
    fixture.chain = seeded_finite_chain(q, m, k, seed);
    fixture.schedule = std::move(schedule);
    for (std::int64_t N : fixture.schedule) {
        const FunctionRep avg = brute_force_average(fixture.chain, N);
        fixture.reference.emplace_back(avg.data().begin(), avg.data().end());
    }
    return fixture;
}

std::string Fixture::serialize() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = name;
    j["generator_version"] = generator_version;
    j["seed"] = seed;
    j["chain"] = chain_to_json(chain);
    j["schedule"] = schedule;
    json blocks = json::array();
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const std::int64_t n = i < schedule.size() ? schedule[i] : -1;
        blocks.push_back(
            json{{"label", point_label(n)}, {"values", complex_list_to_json(reference[i])}});
    }
    j["reference"] = std::move(blocks);
    return j.dump(2) + "\n";
}

Fixture Fixture::parse(const std::string& json_text, const std::string& where) {
    const json j = parse_json_text(json_text, where);
    if (!j.is_object()) fail(ErrorCode::Schema, where + ": expected a JSON object");
    const json& version = require_field(j, "schema_version", where);
    if (!version.is_number_integer() || version.get<std::int64_t>() != kSchemaVersion)
        fail(ErrorCode::Schema,
             where + ": schema_version must be " + std::to_string(kSchemaVersion));

    Fixture fixture;
    fixture.name = require_string(j, "name", where);
    fixture.generator_version =
        static_cast<int>(require_integer(j, "generator_version", where));
    if (fixture.generator_version != kFixtureGeneratorVersion)
        fail(ErrorCode::Schema, where + ": fixture was generated by version " +
                                    std::to_string(fixture.generator_version) +
                                    "; this build regenerates version " +
                                    std::to_string(kFixtureGeneratorVersion));
    const json& seed = require_field(j, "seed", where);
    if (!seed.is_number_integer() && !seed.is_number_unsigned())
        fail(ErrorCode::Schema, where + ": field 'seed' must be an integer");
    fixture.seed = seed.get<std::uint64_t>();
    fixture.chain = chain_from_json(require_field(j, "chain", where), where + ".chain");

    const json& sched = require_field(j, "schedule", where);
    if (!sched.is_array() || sched.empty())
        fail(ErrorCode::Schema, where + ": field 'schedule' must be a nonempty array");
    for (const json& v : sched) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            fail(ErrorCode::Schema, where + ": schedule entries must be positive integers");
        fixture.schedule.push_back(v.get<std::int64_t>());
    }

    const json& blocks = require_field(j, "reference", where);
    if (!blocks.is_array() || blocks.size() != fixture.schedule.size())
        fail(ErrorCode::Schema, where + ": need one reference block per schedule point");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string bw = where + ".reference[" + std::to_string(i) + "]";
        const std::string label = require_string(blocks[i], "label", bw);
        if (label != point_label(fixture.schedule[i]))
            fail(ErrorCode::Schema, bw + ": label '" + label + "' does not match schedule point " +
                                        point_label(fixture.schedule[i]));
        fixture.reference.push_back(
            complex_list_from_json(require_field(blocks[i], "values", bw), bw + ".values"));
    }
    return fixture;
}

FixtureReport regenerate_fixture(const Fixture& fixture) {
    FixtureReport report;
    report.name = fixture.name;
    if (fixture.schedule.size() != fixture.reference.size())
        fail(ErrorCode::Schema, "fixture '" + fixture.name +
                                    "': need one reference block per schedule point");
    const std::size_t want = fixture.chain.input.size();
    for (std::size_t i = 0; i < fixture.schedule.size(); ++i) {
        if (fixture.reference[i].size() != want)
            fail(ErrorCode::Schema, "fixture '" + fixture.name + "': reference block " +
                                        std::to_string(i) + " has " +
                                        std::to_string(fixture.reference[i].size()) +
                                        " values; the chain produces " + std::to_string(want));
        FunctionRep avg = [&] {
            try {
                return brute_force_average(fixture.chain, fixture.schedule[i]);
            } catch (const Error& e) {
                // A fixture whose chain can no longer be brute-forced has
                // drifted structurally, not numerically.
                fail(ErrorCode::Schema,
                     "fixture '" + fixture.name + "': " + std::string(e.what()));
            }
        }();
        for (std::size_t r = 0; r < want; ++r) {
            const double diff = std::abs(avg.data()[r] - fixture.reference[i][r]);
            if (diff > report.max_abs_diff) {
                report.max_abs_diff = diff;
                report.detail = point_label(fixture.schedule[i]) + " component " +
                                std::to_string(r) + " differs by " + std::to_string(diff);
            }
        }
    }
    report.pass = report.max_abs_diff <= kFixtureTolerance;
    if (report.pass) report.detail = "max |diff| = " + std::to_string(report.max_abs_diff);
    return report;
}

std::vector<FixtureReport> check_fixture_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        fail(ErrorCode::Argument, "'" + dir + "' is not a directory");
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            paths.push_back(entry.path().string());
    }
    if (ec) fail(ErrorCode::Argument, "cannot list '" + dir + "': " + ec.message());
    if (paths.empty()) fail(ErrorCode::Argument, "no fixture files (*.json) in '" + dir + "'");
    std::sort(paths.begin(), paths.end());
    std::vector<FixtureReport> reports;
    reports.reserve(paths.size());
    for (const std::string& path : paths)
        reports.push_back(regenerate_fixture(Fixture::parse(load_text_file(path), path)));
    return reports;
}

void write_default_fixtures(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Argument, "cannot create '" + dir + "': " + ec.message());
    struct Shape {
        const char* name;
        std::int64_t q;
        int m, k;
        std::uint64_t seed;
    };
    // The first shape is the canonical regression fixture: two entangled
    // index classes, three Z_4 slots, averages up to N = 8.
    const Shape shapes[] = {
        {"finite-q4-m3-k2", 4, 3, 2, 11},
        {"finite-q3-m2-k1", 3, 2, 1, 23},
        {"finite-q5-m2-k2", 5, 2, 2, 37},
    };
    for (const Shape& s : shapes) {
        Fixture fixture = make_finite_fixture(s.name, s.q, s.m, s.k, s.seed, {1, 2, 4, 8});
        save_text_file((fs::path(dir) / (std::string(s.name) + ".json")).string(),
                       fixture.serialize());
    }
}

} // namespace ergolab
