#pragma once

#include <string>

#include "ergolab/chain.hpp"
#include "ergolab/config.hpp"

namespace ergolab {

/// Files a run writes into its output directory.
struct ExperimentPaths {
    std::string report_json;    // structured report with the config echo
    std::string distances_csv;  // schedule point, distances, wall time
    std::string plot_csv;       // timing-free columns; byte-deterministic
};

ExperimentPaths experiment_paths(const std::string& out_dir);

struct ExperimentOutcome {
    AverageResult result;
    ExperimentPaths paths;
};

/// Compute the averages along the schedule, the predicted limit when a
/// predictor is selected, and per-point distances; write report.json,
/// distances.csv, and plot.csv into config.out_dir.
///
/// plot.csv carries no timings and is byte-identical across runs and worker
/// counts for the same config and seed. distances.csv appends the wall time
/// per point and so is identical only up to that column.
///
/// Any error during a schedule point is rethrown tagged with that point
/// after the rows already computed are flushed to disk (the report then
/// carries an "error" block instead of "ok").
ExperimentOutcome run_experiment(const ExperimentConfig& config);

} // namespace ergolab
