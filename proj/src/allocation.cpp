#include "rrt/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rrt/csv.hpp"
#include "rrt/errors.hpp"

namespace rrt {

const char* to_string(ModelFamily family) noexcept {
    switch (family) {
        case ModelFamily::forest: return "forest";
        case ModelFamily::elastic_net: return "elastic_net";
        case ModelFamily::linear: return "linear";
        case ModelFamily::none: return "none";
    }
    return "none";
}

const char* display_name(ModelFamily family) noexcept {
    switch (family) {
        case ModelFamily::forest: return "Random Forest";
        case ModelFamily::elastic_net: return "Elastic Net";
        case ModelFamily::linear: return "Linear Model";
        case ModelFamily::none: return "";
    }
    return "";
}

ModelFamily parse_family(const std::string& text) {
    if (text == "forest") return ModelFamily::forest;
    if (text == "elastic_net") return ModelFamily::elastic_net;
    if (text == "linear") return ModelFamily::linear;
    throw LookupError("unknown model family '" + text + "'");
}

StrategyId StrategyId::base() {
    return StrategyId{RewardSource::expanding_mean, RiskSource::previous_realized, ModelFamily::none, false, "Base"};
}

StrategyId StrategyId::buy_and_hold() {
    return StrategyId{RewardSource::expanding_mean, RiskSource::previous_realized, ModelFamily::none, true, "Mkt"};
}

StrategyId StrategyId::optimal(ModelFamily family) {
    return StrategyId{RewardSource::model, RiskSource::model, family, false,
                      std::string(display_name(family)) + " Optimal"};
}

StrategyId StrategyId::returns_only(ModelFamily family) {
    return StrategyId{RewardSource::model, RiskSource::previous_realized, family, false,
                      std::string(display_name(family)) + " Returns"};
}

StrategyId StrategyId::volatility_only(ModelFamily family) {
    return StrategyId{RewardSource::expanding_mean, RiskSource::model, family, false,
                      std::string(display_name(family)) + " Volatility"};
}

double optimal_weight(double reward, double variance, double gamma, WeightBounds bounds) {
    if (!(variance > 0.0)) throw DomainError("optimal_weight: variance must be positive");
    if (!(gamma > 0.0)) throw DomainError("optimal_weight: risk aversion must be positive");
    return std::clamp(reward / (gamma * variance), bounds.low, bounds.high);
}

namespace {

void check_window(const PredictorPanel& panel, RowRange window) {
    if (window.end > panel.rows() || window.begin > window.end) {
        throw RangeError("allocation: window exceeds panel rows");
    }
}

// Running mean of excess returns over rows [0, t) for each t in window.
std::vector<double> expanding_excess_mean(const PredictorPanel& panel, RowRange window) {
    std::vector<double> out;
    out.reserve(window.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < window.begin; ++i) sum += panel.excess_return[i];
    for (std::size_t t = window.begin; t < window.end; ++t) {
        out.push_back(sum / static_cast<double>(t));
        sum += panel.excess_return[t];
    }
    return out;
}

double monthly_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

WeightSeries base_weights(const PredictorPanel& panel, RowRange window, double gamma, WeightBounds bounds) {
    check_window(panel, window);
    if (window.begin == 0 && !window.empty()) window.begin = 1;
    const auto reward = expanding_excess_mean(panel, window);
    WeightSeries out;
    out.gamma = gamma;
    out.bounds = bounds;
    out.label = StrategyId::base().label;
    for (std::size_t t = window.begin; t < window.end; ++t) {
        out.months.push_back(panel.months[t]);
        out.weights.push_back(
            optimal_weight(reward[t - window.begin], panel.prev_realized_variance[t], gamma, bounds));
    }
    return out;
}

WeightSeries vol_timing_weights(const PredictorPanel& panel, RowRange window, double c, WeightBounds bounds) {
    check_window(panel, window);
    WeightSeries out;
    out.gamma = 0.0;
    out.bounds = bounds;
    out.label = "Volatility Timing";
    for (std::size_t t = window.begin; t < window.end; ++t) {
        const double var = panel.prev_realized_variance[t];
        if (!(var > 0.0)) throw DomainError("vol timing: non-positive realized variance at " + panel.months[t].iso());
        out.months.push_back(panel.months[t]);
        out.weights.push_back(std::clamp(c / var, bounds.low, bounds.high));
    }
    return out;
}

VolTimingResult vol_timing_constant_weights(const PredictorPanel& panel, RowRange window, double target_std,
                                            WeightBounds bounds) {
    check_window(panel, window);
    if (window.size() < 2) throw InsufficientDataError("vol timing: need at least two months");
    if (!(target_std >= 0.0)) throw DomainError("vol timing: target std must be non-negative");

    auto std_for = [&](double c) {
        const auto w = vol_timing_weights(panel, window, c, bounds);
        std::vector<double> managed(w.weights.size());
        for (std::size_t i = 0; i < managed.size(); ++i) {
            managed[i] = w.weights[i] * panel.excess_return[window.begin + i];
        }
        return monthly_std(managed);
    };

    double max_var = 0.0;
    for (std::size_t t = window.begin; t < window.end; ++t) max_var = std::max(max_var, panel.prev_realized_variance[t]);
    double lo = 0.0;
    double hi = std::max(bounds.high, 1.0) * max_var * 2.0;

    VolTimingResult result;
    const double std_lo = std_for(lo);
    const double std_hi = std_for(hi);
    if (target_std <= std_lo) {
        result.constant = lo;
        result.exact = target_std == std_lo;
    } else if (target_std >= std_hi) {
        result.constant = hi;
        result.exact = target_std == std_hi;
    } else {
        for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (std_for(mid) < target_std ? lo : hi) = mid;
        }
        result.constant = 0.5 * (lo + hi);
    }
    result.weights = vol_timing_weights(panel, window, result.constant, bounds);
    result.achieved_std = std_for(result.constant);
    return result;
}

WeightSeries strategy_weights(const StrategyId& id, const ForecastSeries* forecasts, const PredictorPanel& panel,
                              RowRange window, double gamma, WeightBounds bounds) {
    check_window(panel, window);
    WeightSeries out;
    out.gamma = gamma;
    out.bounds = bounds;
    out.label = id.label;

    if (id.buy_hold) {
        out.months.assign(panel.months.begin() + static_cast<std::ptrdiff_t>(window.begin),
                          panel.months.begin() + static_cast<std::ptrdiff_t>(window.end));
        out.weights.assign(window.size(), 1.0);
        return out;
    }
    if (id.needs_return_forecast() && (forecasts == nullptr || !forecasts->has_return())) {
        throw DependencyError("strategy '" + id.label + "' needs column return_forecast");
    }
    if (id.needs_volatility_forecast() && (forecasts == nullptr || !forecasts->has_volatility())) {
        throw DependencyError("strategy '" + id.label + "' needs column vol_forecast");
    }
    if (forecasts != nullptr && (id.needs_return_forecast() || id.needs_volatility_forecast())) {
        if (forecasts->months.size() != window.size() ||
            (window.size() > 0 && forecasts->months.front() != panel.months[window.begin])) {
            throw AlignmentError("strategy '" + id.label + "': forecasts do not cover the window");
        }
    }
    if (window.begin == 0 && !window.empty() && id.reward == RewardSource::expanding_mean) {
        throw InsufficientDataError("strategy '" + id.label + "': no history before " + panel.months[0].iso());
    }

    const auto mean_reward = expanding_excess_mean(panel, window);
    for (std::size_t t = window.begin; t < window.end; ++t) {
        const std::size_t i = t - window.begin;
        const double reward = id.reward == RewardSource::model ? forecasts->return_forecast[i] : mean_reward[i];
        double variance = 0.0;
        if (id.risk == RiskSource::model) {
            const double sigma = std::max(forecasts->volatility_forecast[i], kVolatilityFloor);
            variance = sigma * sigma;
        } else {
            variance = panel.prev_realized_variance[t];
        }
        out.months.push_back(panel.months[t]);
        out.weights.push_back(optimal_weight(reward, variance, gamma, bounds));
    }
    return out;
}

void write_weights(std::ostream& out, std::span<const WeightSeries> series) {
    out << "date,strategy,weight\n";
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.months.size(); ++i) {
            out << s.months[i].yyyymm() << ',' << s.label << ',' << csv::exact(s.weights[i]) << '\n';
        }
    }
}

}  // namespace rrt
