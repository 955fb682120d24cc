#include <doctest.h>

#include "rrt/errors.hpp"
#include "rrt/learners/model.hpp"
#include "synthetic.hpp"

using namespace rrt;

namespace {

Dataset tiny(std::vector<double> targets, std::vector<std::string> names = {"a", "rvol_lag1"}) {
    Dataset d;
    const auto n = static_cast<Eigen::Index>(targets.size());
    d.features.resize(n, static_cast<Eigen::Index>(names.size()));
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < d.features.cols(); ++c) d.features(r, c) = 0.01 * static_cast<double>(r + c);
    }
    d.targets = Eigen::Map<Eigen::VectorXd>(targets.data(), n);
    d.feature_names = std::move(names);
    return d;
}

}  // namespace

TEST_CASE("prevailing mean predicts the training mean for any query") {
    const auto m = fit(PrevailingMeanConfig{}, tiny({1, 2, 3}));
    CHECK(m.kind() == LearnerKind::prevailing_mean);
    CHECK(m.predict(std::vector<double>{5.0, -1.0}) == 2.0);
    CHECK(m.predict(std::vector<double>{0.0, 0.0}) == 2.0);
    CHECK(fit(PrevailingMeanConfig{}, tiny({1, 2, 3, 6})).predict(std::vector<double>{0.0, 0.0}) == 3.0);
}

TEST_CASE("previous volatility predicts the query's lag-one volatility") {
    const auto m = fit(PreviousVolatilityConfig{}, tiny({0.05, 0.04}));
    CHECK(m.predict(std::vector<double>{0.9, 0.04}) == 0.04);
    CHECK(fit_previous_volatility(tiny({1.0}), "a").feature == 0);
    try {
        fit(PreviousVolatilityConfig{}, tiny({1.0}, {"a", "b"}));
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(e.column() == "rvol_lag1");
    }
}

TEST_CASE("fit dispatches on the learner config") {
    const auto panel = testing::synthetic_panel({.months = 60}, PanelKind::volatility_model);
    const auto data = Dataset::from_panel(panel, RowRange{0, panel.rows()}, panel.volatility);
    ForestConfig forest;
    forest.n_trees = 5;
    CHECK(fit(forest, data).kind() == LearnerKind::forest);
    CHECK(fit(forest, data).get_if<RandomForest>() != nullptr);
    CHECK(fit(ElasticNetConfig{}, data).kind() == LearnerKind::elastic_net);
    CHECK(fit(OlsConfig{}, data).get_if<LinearModel>() != nullptr);

    const auto m = fit(OlsConfig{}, data);
    const auto all = m.predict(data.features);
    std::vector<double> row(static_cast<std::size_t>(data.cols()));
    for (Eigen::Index j = 0; j < data.cols(); ++j) row[static_cast<std::size_t>(j)] = data.features(3, j);
    CHECK(all(3) == m.predict(row));
}

TEST_CASE("config descriptions and seeding") {
    CHECK(describe(ForestConfig::return_model_defaults()) == "forest(B=500,m=4,smin=0.95,kmax=2)");
    CHECK(describe(ElasticNetConfig::volatility_model_defaults()) == "elastic_net(lambda=0.3,alpha=0.1)");
    CHECK(describe(OlsConfig{}) == "linear");
    const auto seeded = with_seed(ForestConfig{}, 77);
    CHECK(std::get<ForestConfig>(seeded).seed == 77);
    CHECK(std::holds_alternative<OlsConfig>(with_seed(OlsConfig{}, 3)));
    CHECK(kind_of(PreviousVolatilityConfig{}) == LearnerKind::previous_volatility);
}

TEST_CASE("datasets reject non-finite values and name mismatches") {
    auto d = tiny({1, 2});
    CHECK_NOTHROW(d.validate());
    d.features(0, 0) = NAN;
    CHECK_THROWS_AS(d.validate(), DataError);
    auto e = tiny({1, 2});
    e.feature_names.pop_back();
    CHECK_THROWS_AS(e.validate(), DataError);
}
