#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrt/learners/model.hpp"
#include "rrt/market_data.hpp"

namespace rrt {

/// Smallest volatility forecast passed downstream (monthly sigma units).
inline constexpr double kVolatilityFloor = 1e-6;

struct WalkOptions {
    /// Drop training rows whose |target| exceeds this quantile, recomputed at
    /// every refit over the current training window. Return panels only.
    std::optional<double> trim_quantile;
    /// Months between refits; 1 refits every month.
    std::size_t refit_every = 1;
    /// Volatility panels only: fit log(sigma^2) and map forecasts back to sigma.
    bool log_target = false;
    std::size_t threads = 1;
    /// Called once per refit with the forecast month and training-row count.
    std::function<void(MonthStamp, std::size_t)> on_fit;
};

/// Out-of-sample forecasts of one target over an evaluation window.
struct TargetForecast {
    std::vector<MonthStamp> months;
    std::vector<double> values;
    RowRange window;  // panel rows forecast
    std::size_t fits = 0;
    std::string model;
};

/// Expanding-window forecasts: for every row t in `window`, fit on rows [0, t)
/// and predict row t. Throws InsufficientDataError when a training window is empty.
TargetForecast walk_forecast(const PredictorPanel& panel, const LearnerConfig& learner, RowRange window,
                             const WalkOptions& options = {});

/// Paired return and volatility forecasts for one model family and seed.
struct ForecastSeries {
    std::vector<MonthStamp> months;
    std::vector<double> return_forecast;      // empty when the family has no return model
    std::vector<double> volatility_forecast;  // empty when absent; floored at kVolatilityFloor
    std::string model;
    std::uint64_t seed = 0;

    [[nodiscard]] bool has_return() const noexcept { return !return_forecast.empty(); }
    [[nodiscard]] bool has_volatility() const noexcept { return !volatility_forecast.empty(); }
};

/// Joins per-target forecasts. Either may be null; both must cover the same months.
ForecastSeries combine_forecasts(const TargetForecast* returns, const TargetForecast* volatility, std::string model,
                                 std::uint64_t seed);

/// Writes `date,return_forecast,vol_forecast,model,seed` rows.
void write_forecasts(std::ostream& out, std::span<const ForecastSeries> series);

enum class Benchmark { expanding_mean, full_mean };
enum class DirectionMode { sign, vs_mean };

const char* to_string(Benchmark b) noexcept;
Benchmark parse_benchmark(const std::string& text);

/// f_bar_t = mean(targets[0..t)) for each row t of `window`.
std::vector<double> expanding_mean_forecasts(std::span<const double> targets, RowRange window);

/// 1 - SSE(forecast) / SSE(benchmark). Throws UndefinedError when the
/// benchmark SSE is zero.
double oos_r_squared(std::span<const double> forecasts, std::span<const double> actuals,
                     std::span<const double> benchmark);
double oos_r_squared(const TargetForecast& forecast, const PredictorPanel& panel, Benchmark benchmark);

/// Share of months where forecast and actual fall on the same side of
/// `centers` (zero counts as the upper side).
double directional_accuracy(std::span<const double> forecasts, std::span<const double> actuals,
                            std::span<const double> centers);
double directional_accuracy(const TargetForecast& forecast, const PredictorPanel& panel, DirectionMode mode);

struct AccuracyReport {
    double r_squared = 0.0;
    double directional_accuracy = 0.0;
    std::size_t n_forecasts = 0;
};

AccuracyReport evaluate(const TargetForecast& forecast, const PredictorPanel& panel, Benchmark benchmark,
                        DirectionMode mode);

struct TuningGrid {
    std::vector<LearnerConfig> candidates;
};

struct TuningOptions {
    WalkOptions walk;
    Benchmark benchmark = Benchmark::expanding_mean;
    /// Forest candidates are scored by mean R^2 over these seeds.
    std::vector<std::uint64_t> seeds{0};
    /// Candidate-level parallelism; 0 means all hardware threads.
    std::size_t threads = 1;
};

struct CandidateScore {
    LearnerConfig config;
    double score = 0.0;
    std::vector<double> per_seed;
    std::string error;  // non-empty when the candidate failed
};

struct TuneResult {
    LearnerKind kind = LearnerKind::forest;
    LearnerConfig best;
    double best_score = 0.0;
    std::vector<CandidateScore> scores;  // grid order
};

/// Scores every candidate by out-of-sample R^2 over `validation` and returns
/// the best per learner kind, in order of first appearance. Equal scores go to
/// the smaller model: fewer trees, then larger lambda, then lower grid index.
std::vector<TuneResult> tune(const PredictorPanel& panel, const TuningGrid& grid, RowRange validation,
                             const TuningOptions& options = {});

}  // namespace rrt
