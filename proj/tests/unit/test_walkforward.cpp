#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rrt/errors.hpp"
#include "rrt/walkforward.hpp"
#include "synthetic.hpp"

using namespace rrt;

namespace {

PredictorPanel hand_panel(const std::vector<double>& targets, PanelKind kind, std::uint64_t seed = 1) {
    PredictorPanel p;
    p.kind = kind;
    p.feature_names = panel_feature_names(kind);
    const auto n = targets.size();
    p.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p.feature_names.size()));
    Rng rng = make_stream(seed, 0);
    for (std::size_t t = 0; t < n; ++t) {
        p.months.push_back(MonthStamp{2000, 1}.plus(static_cast<int>(t)));
        p.excess_return.push_back(kind == PanelKind::return_model ? targets[t] : 0.01);
        p.volatility.push_back(kind == PanelKind::volatility_model ? targets[t] : 0.04);
        p.market_return.push_back(p.excess_return.back() + 0.001);
        p.riskfree.push_back(0.001);
        p.realized_variance.push_back(p.volatility.back() * p.volatility.back());
        p.prev_realized_variance.push_back(0.0016);
        for (Eigen::Index c = 0; c < p.features.cols(); ++c) {
            p.features(static_cast<Eigen::Index>(t), c) = testing::standard_normal(rng);
        }
    }
    return p;
}

}  // namespace

TEST_CASE("prevailing-mean walk gives expanding means") {
    const auto panel = hand_panel({1, 2, 3, 4}, PanelKind::return_model);
    const auto f = walk_forecast(panel, PrevailingMeanConfig{}, RowRange{2, 4});
    REQUIRE(f.values.size() == 2);
    CHECK(f.values[0] == 1.5);
    CHECK(f.values[1] == 2.0);
    CHECK(f.months[0] == panel.months[2]);
    CHECK(f.fits == 2);
}

TEST_CASE("previous-volatility walk returns last month's realized volatility") {
    const auto panel = testing::synthetic_panel({.months = 50}, PanelKind::volatility_model);
    const auto f = walk_forecast(panel, PreviousVolatilityConfig{}, RowRange{10, panel.rows()});
    for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(f.values[i] == panel.volatility[10 + i - 1]);
}

TEST_CASE("one refit per forecast month unless a coarser cadence is set") {
    const auto panel = testing::synthetic_panel({.months = 60}, PanelKind::return_model);
    ForestConfig forest;
    forest.n_trees = 10;
    std::size_t calls = 0;
    std::vector<std::size_t> sizes;
    WalkOptions options;
    options.on_fit = [&](MonthStamp, std::size_t rows) {
        ++calls;
        sizes.push_back(rows);
    };
    const auto f = walk_forecast(panel, forest, RowRange{40, 42}, options);
    CHECK(calls == 2);
    CHECK(f.fits == 2);
    CHECK(sizes == std::vector<std::size_t>{40, 41});

    calls = 0;
    options.refit_every = 3;
    const auto g = walk_forecast(panel, OlsConfig{}, RowRange{40, 50}, options);
    CHECK(calls == 4);
    CHECK(g.values.size() == 10);
}

TEST_CASE("trimming is recomputed on each training window and never touches forecast rows") {
    auto panel = testing::synthetic_panel({.months = 60}, PanelKind::return_model);
    panel.excess_return[45] = 0.9;  // extreme month inside the window
    std::vector<std::size_t> sizes;
    WalkOptions options;
    options.trim_quantile = 0.9;
    options.on_fit = [&](MonthStamp, std::size_t rows) { sizes.push_back(rows); };
    const auto f = walk_forecast(panel, PrevailingMeanConfig{}, RowRange{40, 50}, options);
    REQUIRE(f.values.size() == 10);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const std::size_t t = 40 + i;
        const auto keep = trim_keep(std::span<const double>(panel.excess_return.data(), t), 0.9);
        CHECK(sizes[i] == keep.size());
        double mean = 0.0;
        for (auto k : keep) mean += panel.excess_return[k];
        mean /= static_cast<double>(keep.size());
        CHECK(f.values[i] == doctest::Approx(mean).epsilon(1e-14));
    }
    // The extreme month is still scored.
    const auto a = evaluate(f, panel, Benchmark::expanding_mean, DirectionMode::sign);
    CHECK(a.n_forecasts == 10);

    options.trim_quantile = 0.9;
    const auto vol = testing::synthetic_panel({.months = 60}, PanelKind::volatility_model);
    CHECK_THROWS_AS(walk_forecast(vol, PrevailingMeanConfig{}, RowRange{40, 50}, options), ConfigError);
}

TEST_CASE("log-variance targets map back to volatility") {
    const auto panel = testing::synthetic_panel({.months = 60}, PanelKind::volatility_model);
    WalkOptions options;
    options.log_target = true;
    const auto f = walk_forecast(panel, PrevailingMeanConfig{}, RowRange{30, 32}, options);
    double mean_log = 0.0;
    for (std::size_t t = 0; t < 30; ++t) mean_log += std::log(panel.volatility[t] * panel.volatility[t]);
    mean_log /= 30.0;
    CHECK(f.values[0] == doctest::Approx(std::exp(0.5 * mean_log)).epsilon(1e-12));
}

TEST_CASE("an empty training window is an error") {
    const auto panel = hand_panel({1, 2, 3}, PanelKind::return_model);
    CHECK_THROWS_AS(walk_forecast(panel, PrevailingMeanConfig{}, RowRange{0, 2}), InsufficientDataError);
    CHECK_THROWS_AS(walk_forecast(panel, PrevailingMeanConfig{}, RowRange{1, 5}), RangeError);
}

TEST_CASE("no-lookahead: changing rows at or after t leaves the forecast for t unchanged") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto panel = testing::synthetic_panel({.months = 70, .seed = seed}, PanelKind::volatility_model);
        ForestConfig forest = ForestConfig::volatility_model_defaults();
        forest.n_trees = 8;
        forest.seed = seed;
        const RowRange window{40, 50};
        const auto base = walk_forecast(panel, forest, window);
        const auto lin = walk_forecast(panel, ElasticNetConfig{}, window);
        for (std::size_t t : {std::size_t{40}, std::size_t{44}, std::size_t{49}}) {
            auto moved = panel;
            for (std::size_t r = t; r < moved.rows(); ++r) {
                moved.volatility[r] *= 3.0;
                moved.excess_return[r] = -moved.excess_return[r];
                if (r > t) moved.features.row(static_cast<Eigen::Index>(r)).array() += 1.0;
            }
            const auto a = walk_forecast(moved, forest, window);
            const auto b = walk_forecast(moved, ElasticNetConfig{}, window);
            for (std::size_t i = 0; i <= t - window.begin; ++i) {
                CHECK(a.values[i] == base.values[i]);
                CHECK(b.values[i] == lin.values[i]);
            }
        }
    }
}

TEST_CASE("out-of-sample R^2 reference points") {
    const std::vector<double> actual{0.01, -0.02, 0.03, 0.0};
    const std::vector<double> bench{0.005, 0.004, 0.0, 0.01};
    CHECK(oos_r_squared(actual, actual, bench) == 1.0);
    CHECK(oos_r_squared(bench, actual, bench) == 0.0);
    CHECK_THROWS_AS(oos_r_squared(bench, bench, bench), UndefinedError);
    CHECK_THROWS_AS(oos_r_squared(std::vector<double>{1.0}, actual, bench), AlignmentError);
    const std::vector<double> half{0.0075, -0.008, 0.015, 0.005};
    double sse = 0.0;
    double sse_b = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        sse += (actual[i] - half[i]) * (actual[i] - half[i]);
        sse_b += (actual[i] - bench[i]) * (actual[i] - bench[i]);
    }
    CHECK(oos_r_squared(half, actual, bench) == doctest::Approx(1.0 - sse / sse_b));
}

TEST_CASE("prevailing mean scores zero R^2 against the expanding mean") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto panel = testing::synthetic_panel({.months = 80, .seed = seed}, PanelKind::return_model);
        const auto f = walk_forecast(panel, PrevailingMeanConfig{}, RowRange{20, panel.rows()});
        CHECK(oos_r_squared(f, panel, Benchmark::expanding_mean) == 0.0);
        const auto full = oos_r_squared(f, panel, Benchmark::full_mean);
        CHECK(full <= 0.0);
    }
}

TEST_CASE("expanding-mean benchmark values") {
    const std::vector<double> y{1, 2, 3, 4, 10};
    const auto b = expanding_mean_forecasts(y, RowRange{2, 5});
    CHECK(b == std::vector<double>{1.5, 2.0, 2.5});
    CHECK_THROWS_AS(expanding_mean_forecasts(y, RowRange{0, 2}), InsufficientDataError);
    CHECK(parse_benchmark("full_mean") == Benchmark::full_mean);
    CHECK_THROWS_AS(parse_benchmark("median"), ConfigError);
}

TEST_CASE("directional accuracy bounds and sign flip") {
    const std::vector<double> actual{0.01, -0.02, 0.03, -0.01, 0.02};
    const std::vector<double> zeros(5, 0.0);
    CHECK(directional_accuracy(actual, actual, zeros) == 1.0);
    std::vector<double> neg;
    for (double a : actual) neg.push_back(-a);
    CHECK(directional_accuracy(neg, actual, zeros) == 0.0);

    Rng rng = make_stream(5, 0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> f(25);
        std::vector<double> y(25);
        for (std::size_t i = 0; i < 25; ++i) {
            f[i] = testing::standard_normal(rng);
            y[i] = testing::standard_normal(rng);
        }
        std::vector<double> g;
        for (double v : f) g.push_back(-v);
        const double a = directional_accuracy(f, y, std::vector<double>(25, 0.0));
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        CHECK(directional_accuracy(g, y, std::vector<double>(25, 0.0)) == doctest::Approx(1.0 - a));
    }
    // Zero counts as the upper side.
    CHECK(directional_accuracy(std::vector<double>{0.0}, std::vector<double>{0.5}, std::vector<double>{0.0}) == 1.0);
}

TEST_CASE("volatility direction is measured against the expanding mean") {
    const auto panel = hand_panel({0.04, 0.06, 0.05, 0.02, 0.08}, PanelKind::volatility_model);
    TargetForecast f;
    f.window = RowRange{2, 5};
    f.values = {0.051, 0.049, 0.01};  // centers 0.05, 0.05, 0.0425
    f.months = {panel.months[2], panel.months[3], panel.months[4]};
    CHECK(directional_accuracy(f, panel, DirectionMode::vs_mean) == doctest::Approx(2.0 / 3.0));
    CHECK(directional_accuracy(f, panel, DirectionMode::sign) == doctest::Approx(1.0));
}

TEST_CASE("combined forecasts floor volatility and write one row per month") {
    TargetForecast r;
    r.months = {MonthStamp{2001, 1}, MonthStamp{2001, 2}};
    r.values = {0.01, -0.002};
    TargetForecast v = r;
    v.values = {0.04, -0.5};
    const auto c = combine_forecasts(&r, &v, "forest", 7);
    CHECK(c.volatility_forecast[1] == kVolatilityFloor);
    CHECK(c.return_forecast[1] == -0.002);
    std::ostringstream out;
    write_forecasts(out, std::span<const ForecastSeries>(&c, 1));
    const auto text = out.str();
    CHECK(text.rfind("date,return_forecast,vol_forecast,model,seed\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    v.months.pop_back();
    v.values.pop_back();
    CHECK_THROWS_AS(combine_forecasts(&r, &v, "forest", 7), AlignmentError);
    CHECK_THROWS_AS(combine_forecasts(nullptr, nullptr, "x", 0), DependencyError);
}

TEST_CASE("tuning picks the best candidate and breaks ties toward smaller models") {
    const auto panel = testing::synthetic_panel({.months = 90}, PanelKind::return_model);
    const RowRange validation{60, panel.rows()};

    TuningGrid one;
    one.candidates = {ElasticNetConfig{}};
    const auto single = tune(panel, one, validation);
    REQUIRE(single.size() == 1);
    CHECK(std::get<ElasticNetConfig>(single[0].best).lambda == 0.07);

    ElasticNetConfig a;
    a.lambda = 1e6;
    a.alpha = 1.0;
    ElasticNetConfig b = a;
    b.lambda = 1e7;
    TuningGrid tie;
    tie.candidates = {a, b, OlsConfig{}, OlsConfig{}};
    const auto results = tune(panel, tie, validation);
    REQUIRE(results.size() == 2);
    CHECK(results[0].kind == LearnerKind::elastic_net);
    CHECK(results[0].scores[0].score == results[0].scores[1].score);
    CHECK(std::get<ElasticNetConfig>(results[0].best).lambda == 1e7);
    CHECK(results[1].kind == LearnerKind::ols);

    ForestConfig f1;
    f1.n_trees = 2;
    f1.min_node_fraction = 1.0;
    f1.max_leaves = 2;
    f1.bootstrap = false;
    f1.m_try = 15;
    ForestConfig f2 = f1;
    f2.n_trees = 1;
    TuningGrid trees;
    trees.candidates = {f1, f2};
    const auto forest = tune(panel, trees, validation);
    CHECK(forest[0].scores[0].score == forest[0].scores[1].score);
    CHECK(std::get<ForestConfig>(forest[0].best).n_trees == 1);

    CHECK_THROWS_AS(tune(panel, TuningGrid{}, validation), ConfigError);
}

TEST_CASE("tuning on a linear signal prefers the elastic net and a small penalty") {
    // Excess return strongly linear in the previous month's dp.
    testing::SyntheticSpec spec;
    spec.months = 200;
    spec.signal = 0.03;
    spec.mean_vol = 0.02;
    spec.vol_of_vol = 0.05;
    const auto panel = testing::synthetic_panel(spec, PanelKind::return_model);
    const RowRange validation{120, panel.rows()};

    ElasticNetConfig small;
    small.lambda = 0.0005;
    small.alpha = 1.0;
    ElasticNetConfig large = small;
    large.lambda = 5.0;
    ForestConfig stump;
    stump.n_trees = 20;
    stump.min_node_fraction = 0.95;
    stump.max_leaves = 2;
    stump.m_try = 1;
    TuningGrid grid;
    grid.candidates = {large, small, stump};
    TuningOptions options;
    options.seeds = {1, 2};
    const auto results = tune(panel, grid, validation, options);
    REQUIRE(results.size() == 2);
    CHECK(std::get<ElasticNetConfig>(results[0].best).lambda == 0.0005);
    CHECK(results[0].best_score > 0.2);
    CHECK(results[0].best_score > results[1].best_score);
    CHECK(results[1].scores[0].per_seed.size() == 2);
}
