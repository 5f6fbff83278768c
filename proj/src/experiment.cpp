#include "ergolab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "ergolab/engine.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/limits.hpp"

namespace ergolab {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

std::string fmt_wall(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6f", v);
    return buffer;
}

std::string point_tag(bool continuous, double point) {
    return (continuous ? "horizon " : "N = ") + fmt_double(point);
}

/// Naive evaluation touches one chain application per slot per lattice
/// point of the used-index lattice; that count is the budget currency.
double naive_equivalent_cost(const ChainSpec& chain, const std::vector<double>& points,
                             double flow_step) {
    const auto used = static_cast<double>(chain.used_classes().size());
    double cost = 0.0;
    for (double p : points) {
        const double lattice = chain.continuous ? std::round(p / flow_step) : p;
        cost += std::pow(lattice, used) * static_cast<double>(chain.m);
    }
    return cost;
}

struct PointRow {
    double point = 0.0;
    std::optional<PointDistance> distance;
    double wall_seconds = 0.0;
};

std::string render_distances_csv(const std::vector<PointRow>& rows) {
    std::ostringstream out;
    out << "point,sup_distance,l2_distance,wall_seconds\n";
    for (const PointRow& row : rows) {
        out << fmt_double(row.point) << ',';
        if (row.distance)
            out << fmt_double(row.distance->sup) << ',' << fmt_double(row.distance->l2);
        else
            out << ',';
        out << ',' << fmt_wall(row.wall_seconds) << '\n';
    }
    return std::move(out).str();
}

std::string render_plot_csv(const std::vector<PointRow>& rows) {
    std::ostringstream out;
    out << "point,sup_distance,l2_distance\n";
    for (const PointRow& row : rows) {
        out << fmt_double(row.point) << ',';
        if (row.distance)
            out << fmt_double(row.distance->sup) << ',' << fmt_double(row.distance->l2);
        else
            out << ',';
        out << '\n';
    }
    return std::move(out).str();
}

/// Averages small enough to embed in the report; big grids stay on the
/// result object only.
constexpr std::size_t kReportRepValues = 1024;

} // namespace

ExperimentPaths experiment_paths(const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path base(out_dir);
    return ExperimentPaths{(base / "report.json").string(), (base / "distances.csv").string(),
                           (base / "plot.csv").string()};
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::vector<double> points = config.schedule.points();
    const ChainSpec& chain = config.chain;

    if (!chain.continuous) {
        for (double p : points)
            if (std::abs(p - std::round(p)) > 1e-9 || p < 1.0)
                fail(ErrorCode::Schema,
                     "schedule points must be positive integers for discrete chains (got " +
                         fmt_double(p) + ")");
    }

    if (config.strategy == Strategy::Naive) {
        const double cost = naive_equivalent_cost(chain, points, config.flow_step);
        if (cost > config.budget_ceiling)
            fail(ErrorCode::Budget,
                 "naive-equivalent cost " + fmt_double(cost) + " exceeds the ceiling " +
                     fmt_double(config.budget_ceiling) +
                     "; use the cached or factorized strategy");
    }

    AverageResult result;
    result.abs_mode = config.abs_mode;
    result.continuous = chain.continuous;
    result.strategy = config.strategy;
    result.samples = config.samples.resolve(chain.input);

    std::vector<cplx> predicted_samples;
    if (config.predictor != Predictor::None) {
        result.predicted_limit = predicted_limit(chain, config.predictor);
        predicted_samples = values_at(*result.predicted_limit, result.samples);
    }

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec)
        fail(ErrorCode::Argument, "cannot create '" + config.out_dir + "': " + ec.message());
    const ExperimentPaths paths = experiment_paths(config.out_dir);

    EngineCache cache(config.cache_mb << 20);
    EngineOptions options;
    options.workers = config.workers;
    options.cache_bytes = config.cache_mb << 20;
    options.cache = &cache;

    std::vector<PointRow> rows;
    json report_points = json::array();

    auto flush = [&](const json* error_block) {
        json report;
        report["schema_version"] = kSchemaVersion;
        report["name"] = config.name;
        report["status"] = error_block ? "error" : "ok";
        if (error_block) report["error"] = *error_block;
        report["config"] = experiment_to_json(config);
        report["strategy"] = strategy_name(config.strategy);
        report["predictor"] = predictor_name(config.predictor);
        report["samples"] = sample_set_to_json(result.samples);
        report["predicted_limit"] =
            result.predicted_limit ? rep_to_json(*result.predicted_limit) : json(nullptr);
        report["points"] = report_points;
        if (config.strategy == Strategy::Cached)
            report["cache"] = {{"hits", cache.hits()}, {"misses", cache.misses()}};
        save_text_file(paths.report_json, report.dump(2) + "\n");
        save_text_file(paths.distances_csv, render_distances_csv(rows));
        save_text_file(paths.plot_csv, render_plot_csv(rows));
    };

    for (double point : points) {
        const auto t0 = std::chrono::steady_clock::now();
        std::optional<FunctionRep> average;
        std::vector<cplx> sample_values;
        try {
            if (chain.continuous) {
                average = flow_entangled_average(chain, point, config.flow_step, options);
                sample_values = values_at(*average, result.samples);
            } else {
                const auto N = static_cast<std::int64_t>(std::llround(point));
                AveragePoint ap =
                    config.abs_mode
                        ? entangled_average_abs_point(chain, N, result.samples, options)
                        : entangled_average_point(chain, N, config.strategy, result.samples,
                                                  options);
                average = std::move(ap.average);
                sample_values = std::move(ap.sample_values);
            }
        } catch (const Error& e) {
            json error_block;
            error_block["at_point"] = point;
            error_block["code"] = error_code_name(e.code());
            error_block["message"] = e.what();
            flush(&error_block);
            fail(e.code(), "schedule point " + point_tag(chain.continuous, point) + ": " +
                               std::string(e.what()));
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();

        PointRow row;
        row.point = point;
        row.wall_seconds = wall;
        if (result.predicted_limit) {
            PointDistance d;
            double sum_sq = 0.0;
            for (std::size_t i = 0; i < sample_values.size(); ++i) {
                const double diff = std::abs(sample_values[i] - predicted_samples[i]);
                d.sup = std::max(d.sup, diff);
                sum_sq += diff * diff;
            }
            d.l2 = std::sqrt(sum_sq / static_cast<double>(sample_values.size()));
            if (average) {
                // Prefer the exact representation distance; fall back to the
                // sample estimate when shapes are not comparable (abs grids
                // against fourier limits, ...).
                try {
                    d.l2 = l2_distance(*average, *result.predicted_limit);
                } catch (const Error&) {
                }
            }
            row.distance = d;
        }
        rows.push_back(row);

        json point_json;
        point_json["point"] = point;
        point_json["wall_seconds"] = wall;
        point_json["sample_values"] = complex_list_to_json(sample_values);
        if (row.distance) {
            point_json["sup_distance"] = row.distance->sup;
            point_json["l2_distance"] = row.distance->l2;
        }
        if (average && average->size() <= kReportRepValues)
            point_json["average"] = rep_to_json(*average);
        report_points.push_back(std::move(point_json));

        result.schedule.push_back(point);
        result.averages.push_back(std::move(average));
        result.sample_values.push_back(std::move(sample_values));
        if (row.distance) result.distances.push_back(*row.distance);
        result.wall_seconds.push_back(wall);
    }

    flush(nullptr);
    return ExperimentOutcome{std::move(result), paths};
}

} // namespace ergolab
