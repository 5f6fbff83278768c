#include "ergolab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "ergolab/errors.hpp"

namespace ergolab {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    fail(ErrorCode::Schema, where + ": " + what);
}

/// Re-tag shape errors raised while assembling parsed pieces (bad alpha
/// length, malformed windows, ...) as Schema errors: for file input the
/// file, not the call site, is at fault.
template <typename Fn>
auto as_schema(const std::string& where, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Schema) throw;
        schema_fail(where, e.what());
    }
}

void require_schema_version(const json& j, const std::string& where) {
    if (!j.is_object()) schema_fail(where, "expected a JSON object");
    const json& v = require_field(j, "schema_version", where);
    if (!v.is_number_integer() || v.get<std::int64_t>() != kSchemaVersion)
        schema_fail(where, "schema_version must be " + std::to_string(kSchemaVersion));
}

} // namespace

// --- field accessors ------------------------------------------------------------

const json& require_field(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) schema_fail(where, "expected a JSON object");
    auto it = j.find(key);
    if (it == j.end()) schema_fail(where, "missing field '" + key + "'");
    return *it;
}

std::string require_string(const json& j, const std::string& key, const std::string& where) {
    const json& v = require_field(j, key, where);
    if (!v.is_string()) schema_fail(where, "field '" + key + "' must be a string");
    return v.get<std::string>();
}

double require_number(const json& j, const std::string& key, const std::string& where) {
    const json& v = require_field(j, key, where);
    if (!v.is_number()) schema_fail(where, "field '" + key + "' must be a number");
    return v.get<double>();
}

std::int64_t require_integer(const json& j, const std::string& key, const std::string& where) {
    const json& v = require_field(j, key, where);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        schema_fail(where, "field '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

// --- complex values ---------------------------------------------------------------

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        schema_fail(where, "complex values are [re, im] number pairs");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

json complex_list_to_json(const std::vector<cplx>& zs) {
    json out = json::array();
    for (cplx z : zs) out.push_back(complex_to_json(z));
    return out;
}

std::vector<cplx> complex_list_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) schema_fail(where, "expected an array of [re, im] pairs");
    std::vector<cplx> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(complex_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

// --- function representations ----------------------------------------------------

json rep_to_json(const FunctionRep& f) {
    json j;
    const auto values = f.data();
    j["values"] = complex_list_to_json(std::vector<cplx>(values.begin(), values.end()));
    switch (f.rep()) {
        case RepKind::Grid: j["rep"] = "grid"; break;
        case RepKind::Fourier:
            j["rep"] = "fourier";
            j["cutoff"] = f.cutoff();
            break;
        case RepKind::Finite: j["rep"] = "finite"; break;
        case RepKind::Cylinder:
            j["rep"] = "cylinder";
            j["lo"] = f.window_lo();
            j["hi"] = f.window_hi();
            break;
    }
    return j;
}

FunctionRep rep_from_json(const json& j, const std::string& where) {
    const std::string kind = require_string(j, "rep", where);
    std::vector<cplx> values =
        complex_list_from_json(require_field(j, "values", where), where + ".values");
    return as_schema(where, [&] {
        if (kind == "grid") return FunctionRep::grid(std::move(values));
        if (kind == "fourier") {
            const auto cutoff = static_cast<int>(require_integer(j, "cutoff", where));
            return FunctionRep::fourier(cutoff, std::move(values));
        }
        if (kind == "finite") return FunctionRep::finite(std::move(values));
        if (kind == "cylinder") {
            const std::int64_t lo = require_integer(j, "lo", where);
            const std::int64_t hi = require_integer(j, "hi", where);
            return FunctionRep::cylinder(lo, hi, std::move(values));
        }
        schema_fail(where, "unknown representation '" + kind + "'");
    });
}

// --- systems ----------------------------------------------------------------------

json system_to_json(const SystemDescriptor& s) {
    json j;
    j["kind"] = system_kind_name(s.kind());
    switch (s.kind()) {
        case SystemKind::Rotation:
        case SystemKind::TorusFlow:
            j["theta"] = s.theta();
            j["cutoff"] = s.cutoff();
            break;
        case SystemKind::Doubling: j["cutoff"] = s.cutoff(); break;
        case SystemKind::FiniteCyclic: j["q"] = s.modulus(); break;
        case SystemKind::BernoulliShift: break;
    }
    return j;
}

SystemDescriptor system_from_json(const json& j, const std::string& where) {
    const std::string kind = require_string(j, "kind", where);
    return as_schema(where, [&] {
        if (kind == "rotation")
            return SystemDescriptor::rotation(
                require_number(j, "theta", where),
                static_cast<int>(require_integer(j, "cutoff", where)));
        if (kind == "golden_rotation")
            return SystemDescriptor::golden_rotation(
                static_cast<int>(require_integer(j, "cutoff", where)));
        if (kind == "doubling")
            return SystemDescriptor::doubling(
                static_cast<int>(require_integer(j, "cutoff", where)));
        if (kind == "finite_cyclic")
            return SystemDescriptor::finite_cyclic(require_integer(j, "q", where));
        if (kind == "bernoulli_shift") return SystemDescriptor::bernoulli_shift();
        if (kind == "torus_flow")
            return SystemDescriptor::torus_flow(
                require_number(j, "theta", where),
                static_cast<int>(require_integer(j, "cutoff", where)));
        schema_fail(where, "unknown system kind '" + kind + "'");
    });
}

// --- operators ----------------------------------------------------------------------

json operator_to_json(const OperatorSpec& op) {
    json j;
    j["kind"] = operator_kind_name(op.kind());
    switch (op.kind()) {
        case OperatorKind::Identity: break;
        case OperatorKind::Volterra: j["power"] = op.power(); break;
        case OperatorKind::FiniteRank: {
            json pairs = json::array();
            for (const auto& [u, v] : op.pairs())
                pairs.push_back(json{{"u", rep_to_json(u)}, {"v", rep_to_json(v)}});
            j["pairs"] = std::move(pairs);
            break;
        }
        case OperatorKind::Multiplication: j["multiplier"] = rep_to_json(op.multiplier()); break;
        case OperatorKind::Matrix:
            j["q"] = op.matrix_modulus();
            j["entries"] = complex_list_to_json(op.matrix_entries());
            break;
    }
    return j;
}

OperatorSpec operator_from_json(const json& j, const std::string& where) {
    const std::string kind = require_string(j, "kind", where);
    return as_schema(where, [&] {
        if (kind == "identity") return OperatorSpec::identity();
        if (kind == "volterra")
            return OperatorSpec::volterra(static_cast<int>(require_integer(j, "power", where)));
        if (kind == "finite_rank") {
            const json& pj = require_field(j, "pairs", where);
            if (!pj.is_array()) schema_fail(where, "field 'pairs' must be an array");
            std::vector<std::pair<FunctionRep, FunctionRep>> pairs;
            for (std::size_t i = 0; i < pj.size(); ++i) {
                const std::string pw = where + ".pairs[" + std::to_string(i) + "]";
                pairs.emplace_back(rep_from_json(require_field(pj[i], "u", pw), pw + ".u"),
                                   rep_from_json(require_field(pj[i], "v", pw), pw + ".v"));
            }
            return OperatorSpec::finite_rank(std::move(pairs));
        }
        if (kind == "multiplication")
            return OperatorSpec::multiplication(
                rep_from_json(require_field(j, "multiplier", where), where + ".multiplier"));
        if (kind == "matrix")
            return OperatorSpec::matrix(
                require_integer(j, "q", where),
                complex_list_from_json(require_field(j, "entries", where), where + ".entries"));
        schema_fail(where, "unknown operator kind '" + kind + "'");
    });
}

// --- chains -----------------------------------------------------------------------

json chain_to_json(const ChainSpec& chain) {
    json j;
    j["m"] = chain.m;
    j["k"] = chain.k;
    j["alpha"] = chain.alpha;
    json systems = json::array();
    for (const auto& s : chain.systems) systems.push_back(system_to_json(s));
    j["systems"] = std::move(systems);
    json ops = json::array();
    for (const auto& op : chain.operators) ops.push_back(operator_to_json(op));
    j["operators"] = std::move(ops);
    json polys = json::array();
    for (const auto& p : chain.exponent_polys) polys.push_back(p.coefficients());
    j["exponent_polys"] = std::move(polys);
    j["input"] = rep_to_json(chain.input);
    j["continuous"] = chain.continuous;
    j["abs_grid_resolution"] = chain.abs_grid_resolution;
    return j;
}

ChainSpec chain_from_json(const json& j, const std::string& where) {
    ChainSpec chain;
    chain.m = static_cast<int>(require_integer(j, "m", where));
    chain.k = static_cast<int>(require_integer(j, "k", where));

    const json& aj = require_field(j, "alpha", where);
    if (!aj.is_array()) schema_fail(where, "field 'alpha' must be an array");
    chain.alpha.clear();
    for (const json& v : aj) {
        if (!v.is_number_integer()) schema_fail(where, "alpha entries must be integers");
        chain.alpha.push_back(v.get<int>());
    }

    const json& sj = require_field(j, "systems", where);
    if (!sj.is_array()) schema_fail(where, "field 'systems' must be an array");
    chain.systems.clear();
    for (std::size_t i = 0; i < sj.size(); ++i)
        chain.systems.push_back(
            system_from_json(sj[i], where + ".systems[" + std::to_string(i) + "]"));

    const json& oj = require_field(j, "operators", where);
    if (!oj.is_array()) schema_fail(where, "field 'operators' must be an array");
    chain.operators.clear();
    for (std::size_t i = 0; i < oj.size(); ++i)
        chain.operators.push_back(
            operator_from_json(oj[i], where + ".operators[" + std::to_string(i) + "]"));

    chain.exponent_polys.clear();
    if (auto it = j.find("exponent_polys"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) schema_fail(where, "field 'exponent_polys' must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& pj = (*it)[i];
            if (!pj.is_array())
                schema_fail(where, "exponent_polys entries are coefficient arrays (low to high)");
            std::vector<std::int64_t> coeffs;
            for (const json& c : pj) {
                if (!c.is_number_integer())
                    schema_fail(where, "polynomial coefficients must be integers");
                coeffs.push_back(c.get<std::int64_t>());
            }
            as_schema(where, [&] { chain.exponent_polys.emplace_back(std::move(coeffs)); });
        }
    }

    chain.input = rep_from_json(require_field(j, "input", where), where + ".input");

    if (auto it = j.find("continuous"); it != j.end()) {
        if (!it->is_boolean()) schema_fail(where, "field 'continuous' must be a boolean");
        chain.continuous = it->get<bool>();
    }
    if (auto it = j.find("abs_grid_resolution"); it != j.end())
        chain.abs_grid_resolution = static_cast<int>(require_integer(j, "abs_grid_resolution", where));

    as_schema(where, [&] { chain.validate(); });
    return chain;
}

// --- sample sets --------------------------------------------------------------------

json sample_set_to_json(const SampleSet& samples) {
    json j;
    switch (samples.kind) {
        case RepKind::Grid:
            j["kind"] = "grid";
            j["xs"] = samples.xs;
            break;
        case RepKind::Fourier:
            j["kind"] = "fourier";
            j["xs"] = samples.xs;
            break;
        case RepKind::Finite:
            j["kind"] = "finite";
            j["residues"] = samples.residues;
            break;
        case RepKind::Cylinder:
            j["kind"] = "cylinder";
            j["seeds"] = samples.seeds;
            break;
    }
    return j;
}

SampleSet sample_set_from_json(const json& j, const std::string& where) {
    SampleSet out;
    const std::string kind = require_string(j, "kind", where);
    auto numbers = [&](const char* key, auto& dst) {
        const json& v = require_field(j, key, where);
        if (!v.is_array()) schema_fail(where, std::string("field '") + key + "' must be an array");
        for (const json& x : v) {
            if (!x.is_number())
                schema_fail(where, std::string("entries of '") + key + "' must be numbers");
            dst.push_back(x.get<typename std::decay_t<decltype(dst)>::value_type>());
        }
    };
    if (kind == "grid" || kind == "fourier") {
        out.kind = kind == "grid" ? RepKind::Grid : RepKind::Fourier;
        numbers("xs", out.xs);
        for (double x : out.xs)
            if (!(x >= 0.0) || !(x < 1.0)) schema_fail(where, "sample xs must lie in [0, 1)");
    } else if (kind == "finite") {
        out.kind = RepKind::Finite;
        numbers("residues", out.residues);
    } else if (kind == "cylinder") {
        out.kind = RepKind::Cylinder;
        numbers("seeds", out.seeds);
    } else {
        schema_fail(where, "unknown sample kind '" + kind + "'");
    }
    if (out.size() == 0) schema_fail(where, "sample sets must not be empty");
    return out;
}

// --- schedules and samples ------------------------------------------------------------

std::vector<double> ScheduleSpec::points() const {
    if (!(start >= 1.0)) fail(ErrorCode::Schema, "schedule.start must be >= 1");
    if (!(ratio > 1.0)) fail(ErrorCode::Schema, "schedule.ratio must be > 1");
    if (count < 3) fail(ErrorCode::Schema, "schedule.count must be >= 3");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    double v = start;
    for (int i = 0; i < count; ++i) {
        out.push_back(v);
        v *= ratio;
    }
    return out;
}

SampleSet SampleSpec::resolve(const FunctionRep& like) const {
    if (use_explicit) {
        if (explicit_points.kind != like.rep())
            fail(ErrorCode::Schema,
                 "samples: explicit points do not match the input representation");
        return explicit_points;
    }
    if (count < 1) fail(ErrorCode::Schema, "samples.count must be >= 1");
    return SampleSet::seeded_for(like, count, seed);
}

void ExperimentConfig::validate() const {
    as_schema("chain", [&] { chain.validate(); });
    (void)schedule.points();
    (void)samples.resolve(chain.input);
    if (name.empty()) fail(ErrorCode::Schema, "name must not be empty");
    if (chain.continuous) {
        if (!(flow_step > 0.0))
            fail(ErrorCode::Schema, "flow_step must be positive for continuous chains");
    } else if (flow_step != 0.0) {
        fail(ErrorCode::Schema, "flow_step is only meaningful for continuous chains");
    }
    if (abs_mode && chain.continuous)
        fail(ErrorCode::Schema, "abs mode is defined for discrete chains only");
    if (workers < 0) fail(ErrorCode::Schema, "workers must be >= 0");
    if (cache_mb < 1) fail(ErrorCode::Schema, "cache_mb must be >= 1");
    if (!(budget_ceiling > 0.0)) fail(ErrorCode::Schema, "budget_ceiling must be positive");
}

// --- experiment configs ---------------------------------------------------------------

json experiment_to_json(const ExperimentConfig& config) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = config.name;
    j["chain"] = chain_to_json(config.chain);
    j["schedule"] = {{"start", config.schedule.start},
                     {"ratio", config.schedule.ratio},
                     {"count", config.schedule.count}};
    j["strategy"] = strategy_name(config.strategy);
    j["predictor"] = predictor_name(config.predictor);
    if (config.samples.use_explicit)
        j["samples"] = {{"explicit", sample_set_to_json(config.samples.explicit_points)}};
    else
        j["samples"] = {{"count", config.samples.count}, {"seed", config.samples.seed}};
    j["abs"] = config.abs_mode;
    if (config.chain.continuous) j["flow_step"] = config.flow_step;
    j["workers"] = config.workers;
    j["cache_mb"] = config.cache_mb;
    j["out_dir"] = config.out_dir;
    j["budget_ceiling"] = config.budget_ceiling;
    return j;
}

ExperimentConfig experiment_from_json(const json& j) {
    const std::string where = "experiment";
    require_schema_version(j, where);
    ExperimentConfig config;
    config.name = require_string(j, "name", where);
    config.chain = chain_from_json(require_field(j, "chain", where), where + ".chain");

    const json& sj = require_field(j, "schedule", where);
    config.schedule.start = require_number(sj, "start", where + ".schedule");
    config.schedule.ratio = require_number(sj, "ratio", where + ".schedule");
    config.schedule.count =
        static_cast<int>(require_integer(sj, "count", where + ".schedule"));

    config.strategy = as_schema(
        where, [&] { return parse_strategy(require_string(j, "strategy", where)); });
    config.predictor = as_schema(
        where, [&] { return parse_predictor(require_string(j, "predictor", where)); });

    const json& pj = require_field(j, "samples", where);
    if (auto it = pj.find("explicit"); it != pj.end()) {
        config.samples.use_explicit = true;
        config.samples.explicit_points = sample_set_from_json(*it, where + ".samples.explicit");
    } else {
        config.samples.count =
            static_cast<int>(require_integer(pj, "count", where + ".samples"));
        const json& seed = require_field(pj, "seed", where + ".samples");
        if (!seed.is_number_integer() && !seed.is_number_unsigned())
            schema_fail(where + ".samples", "field 'seed' must be an integer");
        config.samples.seed = seed.get<std::uint64_t>();
    }

    if (auto it = j.find("abs"); it != j.end()) {
        if (!it->is_boolean()) schema_fail(where, "field 'abs' must be a boolean");
        config.abs_mode = it->get<bool>();
    }
    if (auto it = j.find("flow_step"); it != j.end()) {
        if (!it->is_number()) schema_fail(where, "field 'flow_step' must be a number");
        config.flow_step = it->get<double>();
    }
    if (j.contains("workers"))
        config.workers = static_cast<int>(require_integer(j, "workers", where));
    if (j.contains("cache_mb")) {
        const std::int64_t mb = require_integer(j, "cache_mb", where);
        if (mb < 1) schema_fail(where, "cache_mb must be >= 1");
        config.cache_mb = static_cast<std::size_t>(mb);
    }
    if (j.contains("out_dir")) config.out_dir = require_string(j, "out_dir", where);
    if (j.contains("budget_ceiling"))
        config.budget_ceiling = require_number(j, "budget_ceiling", where);

    config.validate();
    return config;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    return experiment_from_json(parse_json_text(json_text, "experiment config"));
}

std::string serialize_experiment_config(const ExperimentConfig& config) {
    return experiment_to_json(config).dump(2) + "\n";
}

// --- JSON/file plumbing -----------------------------------------------------------------

json parse_json_text(const std::string& text, const std::string& where) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) schema_fail(where, "not valid JSON");
    return j;
}

json load_json_file(const std::string& path) {
    return parse_json_text(load_text_file(path), path);
}

std::string load_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Argument, "cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) fail(ErrorCode::Argument, "failed reading '" + path + "'");
    return std::move(buffer).str();
}

void save_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Argument, "cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) fail(ErrorCode::Argument, "failed writing '" + path + "'");
}

} // namespace ergolab
