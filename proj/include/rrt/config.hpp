#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrt/allocation.hpp"
#include "rrt/learners/model.hpp"
#include "rrt/market_data.hpp"
#include "rrt/walkforward.hpp"

namespace rrt {

/// One fixed configuration per model family for a single target.
struct ModelSet {
    ForestConfig forest;
    ElasticNetConfig elastic_net;
    OlsConfig linear;

    [[nodiscard]] LearnerConfig get(ModelFamily family) const;
};

ModelSet return_model_set();
ModelSet volatility_model_set();

std::vector<LearnerConfig> default_return_grid();
std::vector<LearnerConfig> default_volatility_grid();

struct RunConfig {
    std::string monthly_path;
    std::string daily_path;
    MonthlySchema monthly_schema = MonthlySchema::standard();
    DailySchema daily_schema;
    SplitSpec split;

    std::vector<double> gammas{4.0, 6.0};
    std::vector<WeightBounds> bounds{{0.0, 1.5}, {0.0, 1.0}};
    std::optional<double> trim_quantile = 0.90;
    std::uint64_t master_seed = 1;
    std::size_t seed_count = 5;
    std::vector<double> costs_bps{1.0, 10.0, 14.0};
    Benchmark benchmark = Benchmark::expanding_mean;
    std::size_t threads = 0;
    std::size_t refit_every = 1;
    bool log_volatility_target = false;

    std::vector<ModelFamily> families{ModelFamily::forest, ModelFamily::elastic_net, ModelFamily::linear};
    ModelSet return_models = return_model_set();
    ModelSet volatility_models = volatility_model_set();
    /// "fixed" uses the model sets above; "tuned" reads the output of `tune`.
    std::string model_source = "fixed";
    std::vector<LearnerConfig> return_grid = default_return_grid();
    std::vector<LearnerConfig> volatility_grid = default_volatility_grid();

    std::size_t shap_samples = 1000;
    std::optional<MonthStamp> explain_first;
    std::optional<MonthStamp> explain_last;

    std::string output_dir = "rrt_out";

    /// Per-run seeds, derived from the master seed.
    [[nodiscard]] std::vector<std::uint64_t> seeds() const;
    /// Throws ConfigError on any out-of-range value.
    void validate() const;
};

nlohmann::json learner_to_json(const LearnerConfig& config);
/// `{"learner": "forest" | "elastic_net" | "linear", ...}`.
LearnerConfig learner_from_json(const nlohmann::json& j);

/// Canonical form with every default filled in.
nlohmann::json to_json(const RunConfig& config);
/// Rejects unknown keys and wrong types with ConfigError.
RunConfig config_from_json(const nlohmann::json& j);

/// Sets a dotted key (`split.test_end=2019-12`). The value is parsed as JSON
/// when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Reads the config file (empty path means all defaults) and applies overrides.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

/// 64-bit FNV-1a of the canonical JSON, excluding keys that cannot change
/// results (output directory, thread count). Hex encoded.
std::string config_hash(const RunConfig& config);
std::string fnv1a_hex(const std::string& bytes);

/// Output directory; relative paths resolve against $RRT_OUTPUT_ROOT when set.
std::filesystem::path output_root(const RunConfig& config);

}  // namespace rrt
