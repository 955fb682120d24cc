#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rrt/learners/dataset.hpp"
#include "rrt/learners/tree.hpp"

namespace rrt {

struct ForestConfig {
    std::size_t n_trees = 500;
    std::size_t m_try = 4;
    double min_node_fraction = 0.95;
    std::size_t max_leaves = 2;
    bool bootstrap = true;
    std::uint64_t seed = 0;

    /// Published settings for the excess-return forest.
    static ForestConfig return_model_defaults();
    /// Published settings for the volatility forest.
    static ForestConfig volatility_model_defaults();

    /// Throws ConfigError on invalid settings for `n_features` predictors.
    void validate(std::size_t n_features) const;
};

/// Bagged ensemble of best-first regression trees with per-node feature
/// subsampling. Tree b draws all randomness from stream (seed, b), so the
/// fitted ensemble does not depend on how many threads grew it.
class RandomForest {
public:
    static RandomForest fit(const Dataset& data, const ForestConfig& config, std::size_t threads = 1);

    /// Mean of the trees' predictions.
    [[nodiscard]] double predict(std::span<const double> x) const;
    [[nodiscard]] const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

private:
    std::vector<RegressionTree> trees_;
};

}  // namespace rrt
