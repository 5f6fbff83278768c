#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergolab/config.hpp"
#include "ergolab/engine.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/experiment.hpp"
#include "ergolab/limits.hpp"
#include "ergolab/oracle.hpp"
#include "ergolab/systems.hpp"

using namespace ergolab;
using nlohmann::json;

namespace {

/// Exit contract: 0 all checks passed, 1 a check failed (or a runtime
/// error), 2 the input itself was malformed.
int guarded(const std::function<bool()>& body) {
    try {
        return body() ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
        return (e.code() == ErrorCode::Schema || e.code() == ErrorCode::Argument) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

void write_json_report(const std::string& out_dir, const std::string& file, const json& j) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::Argument, "cannot create '" + out_dir + "': " + ec.message());
    save_text_file((std::filesystem::path(out_dir) / file).string(), j.dump(2) + "\n");
}

bool cmd_run(const std::string& config_path, const CLI::Option* workers_opt, int workers,
             const CLI::Option* cache_opt, std::int64_t cache_mb, const CLI::Option* out_opt,
             const std::string& out_dir, const CLI::Option* seed_opt, std::uint64_t seed) {
    ExperimentConfig config = parse_experiment_config(load_text_file(config_path));
    if (*workers_opt) config.workers = workers;
    if (*cache_opt) {
        if (cache_mb < 1) fail(ErrorCode::Argument, "--cache-mb must be >= 1");
        config.cache_mb = static_cast<std::size_t>(cache_mb);
    }
    if (*out_opt) config.out_dir = out_dir;
    if (*seed_opt) {
        if (config.samples.use_explicit)
            fail(ErrorCode::Argument, "--seed has no effect on explicit sample points");
        config.samples.seed = seed;
    }

    std::printf("%s: %s strategy, %s predictor, %zu sample points\n", config.name.c_str(),
                strategy_name(config.strategy), predictor_name(config.predictor),
                config.samples.use_explicit ? config.samples.explicit_points.size()
                                            : static_cast<std::size_t>(config.samples.count));
    const ExperimentOutcome outcome = run_experiment(config);

    const bool have_distances = !outcome.result.distances.empty();
    std::printf("%14s %16s %16s %10s\n", "point", "sup_distance", "l2_distance", "wall_s");
    for (std::size_t i = 0; i < outcome.result.schedule.size(); ++i) {
        if (have_distances)
            std::printf("%14.6g %16.6e %16.6e %10.3f\n", outcome.result.schedule[i],
                        outcome.result.distances[i].sup, outcome.result.distances[i].l2,
                        outcome.result.wall_seconds[i]);
        else
            std::printf("%14.6g %16s %16s %10.3f\n", outcome.result.schedule[i], "-", "-",
                        outcome.result.wall_seconds[i]);
    }
    std::printf("wrote %s, %s, %s\n", outcome.paths.report_json.c_str(),
                outcome.paths.distances_csv.c_str(), outcome.paths.plot_csv.c_str());
    return true;
}

bool cmd_decompose(const std::string& config_path, const std::string& out_dir) {
    const json j = load_json_file(config_path);
    const SystemDescriptor system =
        system_from_json(require_field(j, "system", config_path), config_path + ".system");
    const FunctionRep f =
        rep_from_json(require_field(j, "function", config_path), config_path + ".function");

    const JglParts parts = jgl_decompose(system, f);
    const double reconstruction = l2_distance(add(parts.reversible, parts.stable), f);
    const bool pass = reconstruction <= 1e-12;

    json report;
    report["schema_version"] = kSchemaVersion;
    report["system"] = system_to_json(system);
    report["input"] = rep_to_json(f);
    report["reversible"] = rep_to_json(parts.reversible);
    report["stable"] = rep_to_json(parts.stable);
    report["reversible_norm"] = norm(parts.reversible, NormKind::L2);
    report["stable_norm"] = norm(parts.stable, NormKind::L2);
    report["reconstruction_error"] = reconstruction;
    write_json_report(out_dir, "decompose.json", report);

    std::printf("%s: ||reversible|| = %.12g, ||stable|| = %.12g, reconstruction error %.3g\n",
                system.label().c_str(), norm(parts.reversible, NormKind::L2),
                norm(parts.stable, NormKind::L2),
                reconstruction);
    std::printf("wrote %s/decompose.json\n", out_dir.c_str());
    if (!pass) std::printf("[FAIL] the parts do not reassemble the input\n");
    return pass;
}

bool cmd_probe(const std::string& config_path, const std::string& out_dir) {
    const json j = load_json_file(config_path);
    const OperatorSpec op =
        operator_from_json(require_field(j, "operator", config_path), config_path + ".operator");
    const SystemDescriptor system =
        system_from_json(require_field(j, "system", config_path), config_path + ".system");

    const json& fj = require_field(j, "functions", config_path);
    if (!fj.is_array() || fj.empty())
        fail(ErrorCode::Schema, config_path + ": field 'functions' must be a nonempty array");
    std::vector<FunctionRep> functions;
    for (std::size_t i = 0; i < fj.size(); ++i)
        functions.push_back(
            rep_from_json(fj[i], config_path + ".functions[" + std::to_string(i) + "]"));

    const json& dj = require_field(j, "dims", config_path);
    if (!dj.is_array() || dj.empty())
        fail(ErrorCode::Schema, config_path + ": field 'dims' must be a nonempty array");
    std::vector<int> dims;
    for (const json& d : dj) {
        if (!d.is_number_integer())
            fail(ErrorCode::Schema, config_path + ": dims must be integers");
        dims.push_back(d.get<int>());
    }
    const std::int64_t n_max = require_integer(j, "n_max", config_path);

    bool nonincreasing = true;
    json rows = json::array();
    std::printf("%-24s %6s %8s %18s\n", "function", "dim", "eff_dim", "max_residual_sup");
    for (const FunctionRep& f : functions) {
        double previous = -1.0;
        for (int dim : dims) {
            const ProbeReport report = probe_twisted_compactness(op, system, f, dim, n_max);
            if (previous >= 0.0 && report.max_residual_sup > previous + 1e-12)
                nonincreasing = false;
            previous = report.max_residual_sup;
            std::printf("%-24s %6d %8d %18.6e\n", report.f_label.c_str(), report.requested_dim,
                        report.effective_dim, report.max_residual_sup);
            rows.push_back(json{{"function", report.f_label},
                                {"dim", report.requested_dim},
                                {"effective_dim", report.effective_dim},
                                {"max_residual_sup", report.max_residual_sup},
                                {"n_tested", report.n_tested}});
        }
    }
    const double joint = probe_joint_bound({op}, {system}, functions, n_max);
    std::printf("joint bound over the test set: %.6g\n", joint);

    json report;
    report["schema_version"] = kSchemaVersion;
    report["operator"] = operator_to_json(op);
    report["system"] = system_to_json(system);
    report["n_max"] = n_max;
    report["rows"] = std::move(rows);
    report["joint_bound"] = joint;
    report["residuals_nonincreasing"] = nonincreasing;
    write_json_report(out_dir, "probe.json", report);
    std::printf("wrote %s/probe.json\n", out_dir.c_str());

    if (!nonincreasing) std::printf("[FAIL] residuals increased with dim\n");
    if (!std::isfinite(joint)) std::printf("[FAIL] joint bound is not finite\n");
    return nonincreasing && std::isfinite(joint);
}

bool cmd_fixtures(const std::string& dir, bool write) {
    if (write) {
        write_default_fixtures(dir);
        std::printf("regenerated default fixtures in %s\n", dir.c_str());
    }
    bool all_pass = true;
    for (const FixtureReport& report : check_fixture_directory(dir)) {
        std::printf("[%s] %-20s %s\n", report.pass ? "PASS" : "FAIL", report.name.c_str(),
                    report.detail.c_str());
        all_pass = all_pass && report.pass;
    }
    return all_pass;
}

bool cmd_weights(const std::string& config_path, const std::string& out_dir) {
    const json j = load_json_file(config_path);
    const json& tj = require_field(j, "terms", config_path);
    if (!tj.is_array() || tj.empty())
        fail(ErrorCode::Schema, config_path + ": field 'terms' must be a nonempty array");
    std::vector<WeightTerm> terms;
    for (std::size_t i = 0; i < tj.size(); ++i) {
        const std::string where = config_path + ".terms[" + std::to_string(i) + "]";
        terms.push_back(
            WeightTerm{complex_from_json(require_field(tj[i], "gamma", where), where + ".gamma"),
                       complex_from_json(require_field(tj[i], "weight", where), where + ".weight")});
    }
    const std::int64_t n_max = j.contains("n_max") ? require_integer(j, "n_max", config_path)
                                                   : 4096;
    const double tol = j.contains("tol") ? require_number(j, "tol", config_path) : 0.05;

    const WeightSequence weight = almost_periodic_weight(std::move(terms));
    const ClassNReport report = is_class_N(weight, n_max, tol);

    std::string csv = "n,cesaro_abs\n";
    for (std::size_t i = 0; i < report.schedule.size(); ++i) {
        char buffer[96];
        std::snprintf(buffer, sizeof buffer, "%lld,%.17g\n",
                      static_cast<long long>(report.schedule[i]), report.cesaro_abs[i]);
        csv += buffer;
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::Argument, "cannot create '" + out_dir + "': " + ec.message());
    save_text_file((std::filesystem::path(out_dir) / "weights.csv").string(), csv);

    json out;
    out["schema_version"] = kSchemaVersion;
    out["label"] = weight.label();
    out["n_max"] = n_max;
    out["tol"] = tol;
    out["schedule"] = report.schedule;
    out["cesaro_abs"] = report.cesaro_abs;
    out["in_class"] = report.in_class;
    write_json_report(out_dir, "weights.json", out);

    std::printf("%s: final Cesàro mean of |a_n| = %.6g at n = %lld -> %s class N\n",
                weight.label().c_str(), report.cesaro_abs.back(),
                static_cast<long long>(report.schedule.back()),
                report.in_class ? "inside" : "not in");
    std::printf("wrote %s/weights.json, %s/weights.csv\n", out_dir.c_str(), out_dir.c_str());
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entangled multi-Cesàro ergodic averaging laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string fixtures_dir;
    std::string out_dir = "out";
    int workers = 0;
    std::int64_t cache_mb = 256;
    std::uint64_t seed = 1;
    bool write_fixtures = false;

    CLI::App* run = app.add_subcommand("run", "run an experiment config along its schedule");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    const CLI::Option* run_workers =
        run->add_option("--workers", workers, "worker threads (0 = hardware)")
            ->envname("ERGOLAB_WORKERS");
    const CLI::Option* run_cache =
        run->add_option("--cache-mb", cache_mb, "engine cache budget in MiB")
            ->envname("ERGOLAB_CACHE_MB");
    const CLI::Option* run_out =
        run->add_option("--out", out_dir, "output directory")->envname("ERGOLAB_OUT");
    const CLI::Option* run_seed =
        run->add_option("--seed", seed, "sample-point seed")->envname("ERGOLAB_SEED");

    CLI::App* decompose =
        app.add_subcommand("decompose", "split a function into reversible + stable parts");
    decompose->add_option("config", config_path, "decompose config (JSON)")->required();
    decompose->add_option("--out", out_dir, "output directory")->envname("ERGOLAB_OUT");

    CLI::App* probe = app.add_subcommand(
        "probe", "orbit compactness and joint-bound probes for an operator/system pair");
    probe->add_option("config", config_path, "probe config (JSON)")->required();
    probe->add_option("--out", out_dir, "output directory")->envname("ERGOLAB_OUT");

    CLI::App* fixtures =
        app.add_subcommand("fixtures", "regenerate and diff the reference fixtures");
    fixtures->add_option("dir", fixtures_dir, "fixture directory")->required();
    fixtures->add_flag("--write", write_fixtures, "rewrite the default fixtures first");

    CLI::App* weights =
        app.add_subcommand("weights", "Cesàro curve and class-N verdict for a weight spec");
    weights->add_option("config", config_path, "weights config (JSON)")->required();
    weights->add_option("--out", out_dir, "output directory")->envname("ERGOLAB_OUT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // Usage problems are config errors under the exit contract; --help
        // and friends exit cleanly.
        return code == 0 ? 0 : 2;
    }

    if (run->parsed())
        return guarded([&] {
            return cmd_run(config_path, run_workers, workers, run_cache, cache_mb, run_out,
                           out_dir, run_seed, seed);
        });
    if (decompose->parsed())
        return guarded([&] {
            return cmd_decompose(config_path, out_dir);
        });
    if (probe->parsed())
        return guarded(
            [&] { return cmd_probe(config_path, out_dir); });
    if (fixtures->parsed())
        return guarded([&] { return cmd_fixtures(fixtures_dir, write_fixtures); });
    if (weights->parsed())
        return guarded(
            [&] { return cmd_weights(config_path, out_dir); });
    return 2;
}
