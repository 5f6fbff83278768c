#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/chain.hpp"
#include "ergolab/limits.hpp"

namespace ergolab {

/// Version stamp carried by every config, report, and fixture file; a file
/// with a different stamp is refused (Schema error) instead of reinterpreted.
inline constexpr int kSchemaVersion = 1;

/// Geometric schedule start * ratio^i for i = 0..count-1. Points are N
/// values for discrete chains and horizons for flows.
struct ScheduleSpec {
    double start = 64.0;
    double ratio = 4.0;
    int count = 4;

    /// The expanded schedule; Schema error unless start >= 1, ratio > 1,
    /// count >= 3.
    std::vector<double> points() const;
};

/// Where an experiment evaluates its averages: either `count` points drawn
/// reproducibly from `seed`, or an explicit list.
struct SampleSpec {
    int count = 64;
    std::uint64_t seed = 1;
    bool use_explicit = false;
    SampleSet explicit_points;

    /// The concrete sample set for an input of the given representation.
    SampleSet resolve(const FunctionRep& like) const;
};

struct ExperimentConfig {
    std::string name = "experiment";
    ChainSpec chain;
    ScheduleSpec schedule;
    Strategy strategy = Strategy::Cached;
    Predictor predictor = Predictor::None;
    SampleSpec samples;
    bool abs_mode = false;
    /// Quadrature node spacing; required (> 0) iff the chain is continuous.
    double flow_step = 0.0;
    int workers = 0;
    std::size_t cache_mb = 256;
    std::string out_dir = "out";
    /// Ceiling on the naive-equivalent summand count of the whole schedule;
    /// the naive strategy refuses costlier runs (Budget error). Cached and
    /// factorized runs are never refused.
    double budget_ceiling = 2.0e8;

    /// Shape checks beyond what ChainSpec::validate covers; Schema errors.
    void validate() const;
};

// --- JSON building blocks -----------------------------------------------------
//
// Shared by experiment configs, fixtures, and the CLI subcommand inputs.
// Complex numbers are [re, im] pairs. Parsers raise Schema errors that name
// the offending field via `where`; they never throw raw JSON exceptions.

nlohmann::json complex_to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json complex_list_to_json(const std::vector<cplx>& zs);
std::vector<cplx> complex_list_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json rep_to_json(const FunctionRep& f);
FunctionRep rep_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json system_to_json(const SystemDescriptor& s);
SystemDescriptor system_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json operator_to_json(const OperatorSpec& op);
OperatorSpec operator_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json chain_to_json(const ChainSpec& chain);
ChainSpec chain_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json sample_set_to_json(const SampleSet& samples);
SampleSet sample_set_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json experiment_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// parse(serialize(c)) reproduces c's serialization byte for byte — the
/// normal form every report embeds, so configs compare by string equality.
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string serialize_experiment_config(const ExperimentConfig& config);

// --- strict JSON/file plumbing --------------------------------------------------

/// Parse or fail with a Schema error naming `where`; comments rejected.
nlohmann::json parse_json_text(const std::string& text, const std::string& where);
nlohmann::json load_json_file(const std::string& path);

std::string load_text_file(const std::string& path);
void save_text_file(const std::string& path, const std::string& text);

// Field accessors with Schema errors: value at key, or error naming the key.
const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key,
                                    const std::string& where);
std::string require_string(const nlohmann::json& j, const std::string& key,
                           const std::string& where);
double require_number(const nlohmann::json& j, const std::string& key, const std::string& where);
std::int64_t require_integer(const nlohmann::json& j, const std::string& key,
                             const std::string& where);

} // namespace ergolab
