#include "rrt/walkforward.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "rrt/csv.hpp"
#include "rrt/errors.hpp"
#include "rrt/parallel.hpp"

namespace rrt {

TargetForecast walk_forecast(const PredictorPanel& panel, const LearnerConfig& learner, RowRange window,
                             const WalkOptions& options) {
    if (window.end > panel.rows() || window.begin > window.end) {
        throw RangeError("walk_forecast: window exceeds panel rows");
    }
    if (window.begin == 0 && !window.empty()) {
        throw InsufficientDataError("walk_forecast: empty training window for " + panel.months.front().iso());
    }
    if (options.refit_every == 0) throw ConfigError("walk_forecast: refit_every must be positive");
    const bool volatility = panel.kind == PanelKind::volatility_model;
    if (options.trim_quantile && volatility) {
        throw ConfigError("walk_forecast: outlier trimming applies to return panels only");
    }
    if (options.log_target && !volatility) {
        throw ConfigError("walk_forecast: log target applies to volatility panels only");
    }

    const std::vector<double>& raw = panel.target();
    std::vector<double> logged;
    if (options.log_target) {
        logged.reserve(raw.size());
        for (double s : raw) logged.push_back(std::log(std::pow(std::max(s, kVolatilityFloor), 2.0)));
    }
    const std::vector<double>& fit_target = options.log_target ? logged : raw;

    TargetForecast out;
    out.window = window;
    out.model = describe(learner);
    std::optional<Model> model;
    std::vector<double> x(panel.cols());
    const FitOptions fit_options{options.threads};

    for (std::size_t t = window.begin; t < window.end; ++t) {
        if (!model || (t - window.begin) % options.refit_every == 0) {
            Dataset train;
            if (options.trim_quantile) {
                const auto keep = trim_keep(std::span<const double>(raw.data(), t), *options.trim_quantile);
                train = Dataset::from_panel(panel, keep, fit_target);
            } else {
                train = Dataset::from_panel(panel, RowRange{0, t}, fit_target);
            }
            model.emplace(fit(learner, train, fit_options));
            ++out.fits;
            if (options.on_fit) options.on_fit(panel.months[t], static_cast<std::size_t>(train.rows()));
        }
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = panel.features(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
        double prediction = model->predict(x);
        if (options.log_target) prediction = std::sqrt(std::exp(prediction));
        out.months.push_back(panel.months[t]);
        out.values.push_back(prediction);
    }
    return out;
}

ForecastSeries combine_forecasts(const TargetForecast* returns, const TargetForecast* volatility, std::string model,
                                 std::uint64_t seed) {
    if (returns == nullptr && volatility == nullptr) throw DependencyError("combine_forecasts: no forecasts given");
    if (returns != nullptr && volatility != nullptr && returns->months != volatility->months) {
        throw AlignmentError("combine_forecasts: return and volatility forecasts cover different months");
    }
    ForecastSeries out;
    out.months = returns != nullptr ? returns->months : volatility->months;
    if (returns != nullptr) out.return_forecast = returns->values;
    if (volatility != nullptr) {
        out.volatility_forecast = volatility->values;
        for (double& s : out.volatility_forecast) s = std::max(s, kVolatilityFloor);
    }
    out.model = std::move(model);
    out.seed = seed;
    return out;
}

void write_forecasts(std::ostream& out, std::span<const ForecastSeries> series) {
    out << "date,return_forecast,vol_forecast,model,seed\n";
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.months.size(); ++i) {
            out << s.months[i].yyyymm() << ',' << (s.has_return() ? csv::exact(s.return_forecast[i]) : "") << ','
                << (s.has_volatility() ? csv::exact(s.volatility_forecast[i]) : "") << ',' << s.model << ','
                << s.seed << '\n';
        }
    }
}

const char* to_string(Benchmark b) noexcept {
    return b == Benchmark::expanding_mean ? "expanding_mean" : "full_mean";
}

Benchmark parse_benchmark(const std::string& text) {
    if (text == "expanding_mean") return Benchmark::expanding_mean;
    if (text == "full_mean") return Benchmark::full_mean;
    throw ConfigError("unknown benchmark '" + text + "' (expected expanding_mean or full_mean)");
}

std::vector<double> expanding_mean_forecasts(std::span<const double> targets, RowRange window) {
    if (window.begin == 0 && !window.empty()) throw InsufficientDataError("expanding mean: no history before window");
    std::vector<double> out;
    out.reserve(window.size());
    for (std::size_t t = window.begin; t < window.end; ++t) {
        double sum = 0.0;
        for (std::size_t i = 0; i < t; ++i) sum += targets[i];
        out.push_back(sum / static_cast<double>(t));
    }
    return out;
}

double oos_r_squared(std::span<const double> forecasts, std::span<const double> actuals,
                     std::span<const double> benchmark) {
    if (forecasts.size() != actuals.size() || benchmark.size() != actuals.size()) {
        throw AlignmentError("oos_r_squared: series lengths differ");
    }
    double sse = 0.0;
    double sse_bench = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        sse += (actuals[i] - forecasts[i]) * (actuals[i] - forecasts[i]);
        sse_bench += (actuals[i] - benchmark[i]) * (actuals[i] - benchmark[i]);
    }
    if (!(sse_bench > 0.0)) throw UndefinedError("oos_r_squared: benchmark has zero squared error");
    return 1.0 - sse / sse_bench;
}

namespace {

std::vector<double> actuals_for(const TargetForecast& f, const PredictorPanel& panel) {
    const auto& target = panel.target();
    if (f.window.end > target.size() || f.values.size() != f.window.size()) {
        throw AlignmentError("forecast window does not match panel");
    }
    return {target.begin() + static_cast<std::ptrdiff_t>(f.window.begin),
            target.begin() + static_cast<std::ptrdiff_t>(f.window.end)};
}

}  // namespace

double oos_r_squared(const TargetForecast& forecast, const PredictorPanel& panel, Benchmark benchmark) {
    const auto actual = actuals_for(forecast, panel);
    std::vector<double> bench;
    if (benchmark == Benchmark::expanding_mean) {
        bench = expanding_mean_forecasts(panel.target(), forecast.window);
    } else {
        double mean = 0.0;
        for (double a : actual) mean += a;
        mean /= static_cast<double>(actual.size());
        bench.assign(actual.size(), mean);
    }
    return oos_r_squared(forecast.values, actual, bench);
}

double directional_accuracy(std::span<const double> forecasts, std::span<const double> actuals,
                            std::span<const double> centers) {
    if (forecasts.size() != actuals.size() || centers.size() != actuals.size()) {
        throw AlignmentError("directional_accuracy: series lengths differ");
    }
    if (actuals.empty()) throw InsufficientDataError("directional_accuracy: no forecasts");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        const bool up_forecast = forecasts[i] - centers[i] >= 0.0;
        const bool up_actual = actuals[i] - centers[i] >= 0.0;
        if (up_forecast == up_actual) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(actuals.size());
}

double directional_accuracy(const TargetForecast& forecast, const PredictorPanel& panel, DirectionMode mode) {
    const auto actual = actuals_for(forecast, panel);
    std::vector<double> centers(actual.size(), 0.0);
    if (mode == DirectionMode::vs_mean) centers = expanding_mean_forecasts(panel.target(), forecast.window);
    return directional_accuracy(forecast.values, actual, centers);
}

AccuracyReport evaluate(const TargetForecast& forecast, const PredictorPanel& panel, Benchmark benchmark,
                        DirectionMode mode) {
    AccuracyReport r;
    r.r_squared = oos_r_squared(forecast, panel, benchmark);
    r.directional_accuracy = directional_accuracy(forecast, panel, mode);
    r.n_forecasts = forecast.values.size();
    return r;
}

namespace {

// True when candidate a should win over b at equal scores.
bool smaller_model(const LearnerConfig& a, std::size_t ia, const LearnerConfig& b, std::size_t ib) {
    const auto* fa = std::get_if<ForestConfig>(&a);
    const auto* fb = std::get_if<ForestConfig>(&b);
    if (fa && fb && fa->n_trees != fb->n_trees) return fa->n_trees < fb->n_trees;
    const auto* ea = std::get_if<ElasticNetConfig>(&a);
    const auto* eb = std::get_if<ElasticNetConfig>(&b);
    if (ea && eb && ea->lambda != eb->lambda) return ea->lambda > eb->lambda;
    return ia < ib;
}

}  // namespace

std::vector<TuneResult> tune(const PredictorPanel& panel, const TuningGrid& grid, RowRange validation,
                             const TuningOptions& options) {
    if (grid.candidates.empty()) throw ConfigError("tune: empty grid");
    if (options.seeds.empty()) throw ConfigError("tune: no seeds");

    struct Job {
        std::size_t candidate;
        std::size_t seed_slot;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < grid.candidates.size(); ++c) {
        const bool seeded = kind_of(grid.candidates[c]) == LearnerKind::forest;
        const std::size_t seeds = seeded ? options.seeds.size() : 1;
        for (std::size_t s = 0; s < seeds; ++s) jobs.push_back({c, s});
    }

    std::vector<double> job_score(jobs.size(), 0.0);
    std::vector<std::string> job_error(jobs.size());
    WalkOptions walk = options.walk;
    if (resolve_threads(options.threads) > 1) walk.threads = 1;

    parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        try {
            const auto config = with_seed(grid.candidates[job.candidate], options.seeds[job.seed_slot]);
            const auto forecast = walk_forecast(panel, config, validation, walk);
            job_score[i] = oos_r_squared(forecast, panel, options.benchmark);
        } catch (const std::exception& e) {
            job_error[i] = e.what();
        }
    });

    std::vector<CandidateScore> scores(grid.candidates.size());
    for (std::size_t c = 0; c < grid.candidates.size(); ++c) scores[c].config = grid.candidates[c];
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto& s = scores[jobs[i].candidate];
        if (!job_error[i].empty()) {
            if (s.error.empty()) s.error = job_error[i];
            continue;
        }
        s.per_seed.push_back(job_score[i]);
    }
    for (auto& s : scores) {
        if (!s.error.empty()) {
            s.per_seed.clear();
            continue;
        }
        double sum = 0.0;
        for (double v : s.per_seed) sum += v;
        s.score = sum / static_cast<double>(s.per_seed.size());
    }

    std::vector<TuneResult> results;
    std::map<LearnerKind, std::size_t> slot;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        const auto kind = kind_of(scores[c].config);
        if (!slot.contains(kind)) {
            slot[kind] = results.size();
            results.push_back(TuneResult{kind, scores[c].config, 0.0, {}});
        }
        results[slot[kind]].scores.push_back(scores[c]);
    }

    for (auto& r : results) {
        std::optional<std::size_t> best;
        std::string errors;
        for (std::size_t i = 0; i < r.scores.size(); ++i) {
            const auto& s = r.scores[i];
            if (!s.error.empty()) {
                errors += (errors.empty() ? "" : "; ") + describe(s.config) + ": " + s.error;
                continue;
            }
            if (!best) {
                best = i;
                continue;
            }
            const auto& b = r.scores[*best];
            if (s.score > b.score || (s.score == b.score && smaller_model(s.config, i, b.config, *best))) best = i;
        }
        if (!best) {
            throw NumericalError(std::string("tune: every ") + to_string(r.kind) + " candidate failed: " + errors);
        }
        r.best = r.scores[*best].config;
        r.best_score = r.scores[*best].score;
    }
    return results;
}

}  // namespace rrt
