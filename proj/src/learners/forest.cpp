#include "rrt/learners/forest.hpp"

#include <numeric>

#include "rrt/errors.hpp"
#include "rrt/parallel.hpp"

namespace rrt {

ForestConfig ForestConfig::return_model_defaults() {
    ForestConfig c;
    c.n_trees = 500;
    c.m_try = 4;
    c.min_node_fraction = 0.95;
    c.max_leaves = 2;
    return c;
}

ForestConfig ForestConfig::volatility_model_defaults() {
    ForestConfig c;
    c.n_trees = 500;
    c.m_try = 4;
    c.min_node_fraction = 0.01;
    c.max_leaves = 12;
    return c;
}

void ForestConfig::validate(std::size_t n_features) const {
    if (n_trees == 0) throw ConfigError("forest: n_trees must be positive");
    if (m_try == 0) throw ConfigError("forest: m_try must be positive");
    if (m_try > n_features) {
        throw ConfigError("forest: m_try=" + std::to_string(m_try) + " exceeds feature count " +
                          std::to_string(n_features));
    }
    if (!(min_node_fraction > 0.0 && min_node_fraction <= 1.0)) {
        throw ConfigError("forest: min_node_fraction must lie in (0,1]");
    }
    if (max_leaves < 2) throw ConfigError("forest: max_leaves must be at least 2");
}

RandomForest RandomForest::fit(const Dataset& data, const ForestConfig& config, std::size_t threads) {
    data.validate();
    config.validate(static_cast<std::size_t>(data.cols()));

    const auto n = static_cast<std::size_t>(data.rows());
    const TreeParams params{config.m_try, config.min_node_fraction, config.max_leaves};

    RandomForest forest;
    forest.trees_.resize(config.n_trees);
    parallel_for(config.n_trees, threads, [&](std::size_t b) {
        Rng rng = make_stream(config.seed, b);
        std::vector<std::size_t> sample(n);
        if (config.bootstrap) {
            for (auto& s : sample) s = uniform_index(rng, n);
        } else {
            std::iota(sample.begin(), sample.end(), std::size_t{0});
        }
        forest.trees_[b] = RegressionTree::fit(data.features, data.targets, sample, params, rng);
    });
    return forest;
}

double RandomForest::predict(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict(x);
    return sum / static_cast<double>(trees_.size());
}

}  // namespace rrt
