#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rrt/allocation.hpp"
#include "rrt/analytics.hpp"
#include "rrt/config.hpp"
#include "rrt/market_data.hpp"
#include "rrt/walkforward.hpp"

namespace rrt {

/// A named result table, written both as delimited text and as JSON.
struct Table {
    using Cell = std::variant<std::string, double, std::int64_t>;

    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void write_csv(std::ostream& out) const;
    [[nodiscard]] nlohmann::json to_json() const;
    static Table from_json(const std::string& name, const nlohmann::json& j);
};

struct Panels {
    PredictorPanel returns;
    PredictorPanel volatility;
};

/// Builds both panels from the raw files named in the config.
Panels build_panels(const RunConfig& config);
/// Reads the canonical panels written by `cmd_ingest`.
Panels load_panels(const RunConfig& config);

struct ResolvedModels {
    std::map<ModelFamily, LearnerConfig> returns;
    std::map<ModelFamily, LearnerConfig> volatility;
    std::string source;  // "fixed" or the tuned file's config hash
};

ResolvedModels resolve_models(const RunConfig& config);

struct BacktestResult {
    nlohmann::json report;
    std::vector<Table> tables;
    std::vector<ForecastSeries> forecasts;
    std::vector<std::pair<std::string, std::vector<WeightSeries>>> weights;  // file stem, series
    Table paths;
    Table vol_timing;
};

/// Runs the holdout backtest in memory.
BacktestResult run_backtest(const Panels& panels, const RunConfig& config, const ResolvedModels& models,
                            std::ostream& log);

/// Subcommands. Each writes under output_root(config) and returns a summary.
nlohmann::json cmd_ingest(const RunConfig& config, std::ostream& log);
nlohmann::json cmd_tune(const RunConfig& config, std::ostream& log);
nlohmann::json cmd_backtest(const RunConfig& config, std::ostream& log);
/// `model_ref` is `family:target`, e.g. `forest:return`. LookupError when unknown.
nlohmann::json cmd_explain(const RunConfig& config, const std::string& model_ref, std::ostream& log);
/// Renders the stored backtest report as text.
void cmd_report(const RunConfig& config, std::ostream& out, std::ostream& log);

}  // namespace rrt
