#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rrt/market_data.hpp"
#include "rrt/walkforward.hpp"

namespace rrt {

struct WeightBounds {
    double low = 0.0;
    double high = 1.5;
};

enum class RewardSource { model, expanding_mean };
enum class RiskSource { model, previous_realized };
enum class ModelFamily { forest, elastic_net, linear, none };

const char* to_string(ModelFamily family) noexcept;
/// Display name used in table rows ("Random Forest", "Elastic Net", "Linear Model").
const char* display_name(ModelFamily family) noexcept;
ModelFamily parse_family(const std::string& text);

/// Which forecasts feed the reward (numerator) and risk (denominator) of the
/// optimal weight.
struct StrategyId {
    RewardSource reward = RewardSource::expanding_mean;
    RiskSource risk = RiskSource::previous_realized;
    ModelFamily family = ModelFamily::none;
    bool buy_hold = false;
    std::string label;

    static StrategyId base();
    static StrategyId buy_and_hold();
    static StrategyId optimal(ModelFamily family);
    static StrategyId returns_only(ModelFamily family);
    static StrategyId volatility_only(ModelFamily family);

    [[nodiscard]] bool needs_return_forecast() const noexcept { return !buy_hold && reward == RewardSource::model; }
    [[nodiscard]] bool needs_volatility_forecast() const noexcept { return !buy_hold && risk == RiskSource::model; }
};

struct WeightSeries {
    std::vector<MonthStamp> months;
    std::vector<double> weights;
    double gamma = 4.0;
    WeightBounds bounds;
    std::string label;
};

/// clip(reward / (gamma * variance), low, high). Throws DomainError unless
/// variance > 0 and gamma > 0.
double optimal_weight(double reward, double variance, double gamma, WeightBounds bounds);

/// Expanding mean of excess returns through t-1 over gamma times the realized
/// variance of t-1. Row 0 has no history and is skipped.
WeightSeries base_weights(const PredictorPanel& panel, RowRange window, double gamma, WeightBounds bounds);

/// clip(c / sigma^2_{t-1}) for a given constant c.
WeightSeries vol_timing_weights(const PredictorPanel& panel, RowRange window, double c, WeightBounds bounds);

struct VolTimingResult {
    WeightSeries weights;
    double constant = 0.0;
    double achieved_std = 0.0;  // monthly std of w_t * excess_t
    bool exact = true;          // false when the target was out of reach under the bounds
};

/// Solves for c so that the managed excess return has monthly standard
/// deviation `target_std` over the whole window. Uses full-window data, so it
/// is a look-ahead reference only.
VolTimingResult vol_timing_constant_weights(const PredictorPanel& panel, RowRange window, double target_std,
                                            WeightBounds bounds);

/// Weights for `id` over `window`. `forecasts` may be null for strategies that
/// need none; otherwise its months must match the window. Throws
/// DependencyError naming a missing forecast column.
WeightSeries strategy_weights(const StrategyId& id, const ForecastSeries* forecasts, const PredictorPanel& panel,
                              RowRange window, double gamma, WeightBounds bounds);

/// Writes `date,strategy,weight` rows.
void write_weights(std::ostream& out, std::span<const WeightSeries> series);

}  // namespace rrt
