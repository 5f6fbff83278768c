#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/chain.hpp"
#include "ergolab/config.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/experiment.hpp"
#include "ergolab/limits.hpp"
#include "ergolab/systems.hpp"

using namespace ergolab;

namespace {

std::filesystem::path fresh_temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("ergolab-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::string& path) { return load_text_file(path); }

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::string drop_last_field(const std::string& line) {
    const auto pos = line.rfind(',');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

ExperimentConfig order_two_config(const std::string& out_dir) {
    ExperimentConfig config;
    config.name = "order-two-shift";
    config.chain.m = 2;
    config.chain.k = 1;
    config.chain.alpha = {1, 1};
    config.chain.systems = {SystemDescriptor::finite_cyclic(2),
                            SystemDescriptor::finite_cyclic(2)};
    config.chain.operators = {OperatorSpec::identity()};
    config.chain.input = FunctionRep::finite({cplx(1, 0), cplx(-1, 0)});
    config.schedule = {2.0, 2.0, 3};
    config.strategy = Strategy::Cached;
    config.predictor = Predictor::Resonance;
    config.samples.count = 2;
    config.samples.seed = 5;
    config.out_dir = out_dir;
    return config;
}

} // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("an order-two chain sits on its predicted limit at every point") {
    const auto dir = fresh_temp_dir("exp-order2");
    const ExperimentConfig config = order_two_config(dir.string());
    const ExperimentOutcome outcome = run_experiment(config);

    REQUIRE(outcome.result.schedule == std::vector<double>{2.0, 4.0, 8.0});
    REQUIRE(outcome.result.distances.size() == 3);
    for (const PointDistance& d : outcome.result.distances) {
        CHECK(d.sup <= 1e-14);
        CHECK(d.l2 <= 1e-14);
    }
    for (const auto& avg : outcome.result.averages) CHECK(avg.has_value());

    const nlohmann::json report = nlohmann::json::parse(slurp(outcome.paths.report_json));
    CHECK(report["status"] == "ok");
    CHECK(report["points"].size() == 3);
    CHECK(report["config"] == experiment_to_json(config));
    CHECK(report["config"]["schema_version"] == kSchemaVersion);

    const auto plot = csv_lines(slurp(outcome.paths.plot_csv));
    REQUIRE(plot.size() == 4);
    CHECK(plot[0] == "point,sup_distance,l2_distance");
    CHECK(plot[1].substr(0, 2) == "2,");

    const auto dist = csv_lines(slurp(outcome.paths.distances_csv));
    REQUIRE(dist.size() == 4);
    CHECK(dist[0] == "point,sup_distance,l2_distance,wall_seconds");
    std::filesystem::remove_all(dir);
}

TEST_CASE("plot output is byte-identical across worker counts") {
    const auto dir_a = fresh_temp_dir("exp-det-a");
    const auto dir_b = fresh_temp_dir("exp-det-b");

    ExperimentConfig config;
    config.name = "determinism";
    config.chain.m = 2;
    config.chain.k = 2;
    config.chain.alpha = {1, 2};
    config.chain.systems = {SystemDescriptor::finite_cyclic(3),
                            SystemDescriptor::finite_cyclic(3)};
    config.chain.operators = {OperatorSpec::matrix(
        3, {cplx(0.2, 0.1), cplx(0, 0.5), cplx(0.3, 0), cplx(0.1, -0.2), cplx(0.4, 0),
            cplx(0, 0), cplx(0.25, 0.25), cplx(0, -0.3), cplx(0.5, 0)})};
    config.chain.input = FunctionRep::finite({cplx(1, 0), cplx(0, 1), cplx(-0.5, 0.5)});
    config.schedule = {8.0, 2.0, 3};
    config.strategy = Strategy::Naive;
    config.predictor = Predictor::Resonance;
    config.samples.count = 3;
    config.samples.seed = 17;

    config.out_dir = dir_a.string();
    config.workers = 1;
    const ExperimentOutcome a = run_experiment(config);

    config.out_dir = dir_b.string();
    config.workers = 3;
    const ExperimentOutcome b = run_experiment(config);

    CHECK(slurp(a.paths.plot_csv) == slurp(b.paths.plot_csv));

    REQUIRE(a.result.sample_values.size() == b.result.sample_values.size());
    for (std::size_t i = 0; i < a.result.sample_values.size(); ++i)
        CHECK(a.result.sample_values[i] == b.result.sample_values[i]);

    // distances.csv differs only in the wall-time column.
    const auto lines_a = csv_lines(slurp(a.paths.distances_csv));
    const auto lines_b = csv_lines(slurp(b.paths.distances_csv));
    REQUIRE(lines_a.size() == lines_b.size());
    for (std::size_t i = 0; i < lines_a.size(); ++i)
        CHECK(drop_last_field(lines_a[i]) == drop_last_field(lines_b[i]));

    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("the budget guard refuses costly naive runs but not cached ones") {
    const auto dir = fresh_temp_dir("exp-budget");
    ExperimentConfig config = order_two_config(dir.string());
    config.budget_ceiling = 10.0;
    config.strategy = Strategy::Naive;
    try {
        run_experiment(config);
        FAIL_CHECK("expected a Budget error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Budget);
    }

    config.strategy = Strategy::Cached;
    CHECK_NOTHROW(run_experiment(config));
    std::filesystem::remove_all(dir);
}

TEST_CASE("errors are tagged with the failing point and partial rows are flushed") {
    const auto dir = fresh_temp_dir("exp-partial");
    ExperimentConfig config;
    config.name = "cubic-overflow";
    config.chain.m = 2;
    config.chain.k = 1;
    config.chain.alpha = {1, 1};
    config.chain.systems = {SystemDescriptor::finite_cyclic(2),
                            SystemDescriptor::finite_cyclic(2)};
    config.chain.operators = {OperatorSpec::identity()};
    config.chain.exponent_polys = {IntPolynomial({0, 0, 0, 1})};  // n^3
    config.chain.input = FunctionRep::finite({cplx(1, 0), cplx(-1, 0)});
    config.schedule = {524288.0, 2.0, 3};  // the last point overflows n^3
    config.strategy = Strategy::Cached;
    config.samples.count = 2;
    config.samples.seed = 1;
    config.out_dir = dir.string();

    try {
        run_experiment(config);
        FAIL_CHECK("expected an ExponentOverflow error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ExponentOverflow);
        CHECK(std::string(e.what()).find("2097152") != std::string::npos);
    }

    const ExperimentPaths paths = experiment_paths(dir.string());
    const nlohmann::json report = nlohmann::json::parse(slurp(paths.report_json));
    CHECK(report["status"] == "error");
    CHECK(report["error"]["at_point"] == 2097152.0);
    CHECK(report["error"]["code"] == "exponent-overflow");
    CHECK(report["points"].size() == 2);

    CHECK(csv_lines(slurp(paths.distances_csv)).size() == 3);  // header + 2 rows
    CHECK(csv_lines(slurp(paths.plot_csv)).size() == 3);
    std::filesystem::remove_all(dir);
}

TEST_CASE("flow schedules run against the projection-chain limit") {
    const auto dir = fresh_temp_dir("exp-flow");
    const double theta = SystemDescriptor::golden_rotation(4).theta();

    ExperimentConfig config;
    config.name = "flow-projection";
    config.chain.m = 2;
    config.chain.k = 2;
    config.chain.alpha = {1, 2};
    config.chain.continuous = true;
    config.chain.systems = {SystemDescriptor::torus_flow(theta, 4),
                            SystemDescriptor::torus_flow(theta, 4)};
    config.chain.operators = {OperatorSpec::volterra(1)};
    std::vector<cplx> coeffs(9, cplx(0, 0));
    coeffs[4] = cplx(1, 0);  // e_0
    coeffs[5] = cplx(1, 0);  // e_1
    config.chain.input = FunctionRep::fourier(4, std::move(coeffs));
    config.schedule = {8.0, 2.0, 3};
    config.flow_step = 0.25;
    config.predictor = Predictor::ProjectionChain;
    config.samples.count = 6;
    config.samples.seed = 3;
    config.out_dir = dir.string();

    const ExperimentOutcome outcome = run_experiment(config);
    REQUIRE(outcome.result.distances.size() == 3);
    for (const auto& avg : outcome.result.averages) CHECK(avg.has_value());
    CHECK(outcome.result.distances.back().l2 <= 0.05);
    CHECK(std::isfinite(outcome.result.distances.front().sup));

    const nlohmann::json report = nlohmann::json::parse(slurp(outcome.paths.report_json));
    CHECK(report["status"] == "ok");
    CHECK(report["config"]["flow_step"] == 0.25);
    std::filesystem::remove_all(dir);
}

TEST_CASE("absolute-value schedules report nonnegative real sample values") {
    const auto dir = fresh_temp_dir("exp-abs");
    ExperimentConfig config;
    config.name = "stable-decay";
    config.chain.m = 2;
    config.chain.k = 1;
    config.chain.alpha = {1, 1};
    config.chain.systems = {SystemDescriptor::doubling(16), SystemDescriptor::doubling(16)};
    config.chain.operators = {OperatorSpec::volterra(1)};
    std::vector<cplx> coeffs(33, cplx(0, 0));
    coeffs[17] = cplx(1, 0);  // e_1
    config.chain.input = FunctionRep::fourier(16, std::move(coeffs));
    config.schedule = {8.0, 2.0, 3};
    config.abs_mode = true;
    config.samples.count = 8;
    config.samples.seed = 11;
    config.out_dir = dir.string();

    const ExperimentOutcome outcome = run_experiment(config);
    REQUIRE(outcome.result.sample_values.size() == 3);
    for (const auto& values : outcome.result.sample_values)
        for (cplx v : values) {
            CHECK(v.imag() == 0.0);
            CHECK(v.real() >= 0.0);
        }
    // No predictor: distance columns stay empty but rows are still written.
    const auto plot = csv_lines(slurp(outcome.paths.plot_csv));
    REQUIRE(plot.size() == 4);
    CHECK(plot[1] == "8,,");

    CHECK_THROWS_AS([&] {
        ExperimentConfig bad = config;
        bad.chain.continuous = true;
        return run_experiment(bad);
    }(), Error);
    std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
