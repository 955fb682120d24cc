#include "rrt/learners/tree.hpp"

#include <algorithm>
#include <numeric>

#include "rrt/errors.hpp"

namespace rrt {

namespace {

struct NodeStats {
    double mean = 0.0;
    double sse = 0.0;
    bool constant = true;
};

NodeStats stats_of(const Eigen::VectorXd& y, std::span<const std::size_t> rows) {
    NodeStats s;
    double sum = 0.0;
    const double first = y(static_cast<Eigen::Index>(rows.front()));
    for (std::size_t r : rows) {
        const double v = y(static_cast<Eigen::Index>(r));
        sum += v;
        if (v != first) s.constant = false;
    }
    s.mean = sum / static_cast<double>(rows.size());
    for (std::size_t r : rows) {
        const double d = y(static_cast<Eigen::Index>(r)) - s.mean;
        s.sse += d * d;
    }
    return s;
}

struct Pending {
    int node = -1;
    std::vector<std::size_t> rows;
    SplitChoice split;
};

}  // namespace

SplitChoice best_split(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                       std::span<const std::size_t> rows, std::span<const std::size_t> candidate_features) {
    SplitChoice best;
    const std::size_t n = rows.size();
    if (n < 2) return best;

    const NodeStats node = stats_of(targets, rows);
    const double tol = 1e-12 * node.sse;

    std::vector<std::pair<double, double>> pairs(n);  // (feature value, centered target)
    for (std::size_t f : candidate_features) {
        const auto col = static_cast<Eigen::Index>(f);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(rows[i]);
            pairs[i] = {features(r, col), targets(r) - node.mean};
        }
        std::sort(pairs.begin(), pairs.end());
        if (pairs.front().first == pairs.back().first) continue;

        double total = 0.0;
        double total_sq = 0.0;
        for (const auto& p : pairs) {
            total += p.second;
            total_sq += p.second * p.second;
        }
        double left = 0.0;
        double left_sq = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left += pairs[i].second;
            left_sq += pairs[i].second * pairs[i].second;
            if (pairs[i].first == pairs[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(n - i - 1);
            const double right = total - left;
            const double right_sq = total_sq - left_sq;
            const double cost = std::max(0.0, left_sq - left * left / nl) + std::max(0.0, right_sq - right * right / nr);
            if (!best.valid() || cost < best.cost - tol) {
                double threshold = 0.5 * (pairs[i].first + pairs[i + 1].first);
                if (!(threshold < pairs[i + 1].first)) threshold = pairs[i].first;
                best.feature = static_cast<int>(f);
                best.threshold = threshold;
                best.cost = cost;
            }
        }
    }
    if (best.valid()) best.gain = node.sse - best.cost;
    return best;
}

RegressionTree RegressionTree::fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                                   std::span<const std::size_t> sample, const TreeParams& params, Rng& rng) {
    const auto p = static_cast<std::size_t>(features.cols());
    if (sample.empty()) throw InsufficientDataError("regression tree: empty sample");
    if (params.m_try == 0 || params.m_try > p) {
        throw ConfigError("regression tree: m_try must lie in [1, " + std::to_string(p) + "]");
    }
    if (params.max_leaves < 2) throw ConfigError("regression tree: max_leaves must be at least 2");

    const double n = static_cast<double>(sample.size());
    const double min_rows = params.min_node_fraction * n;

    std::vector<std::size_t> all_features(p);
    std::iota(all_features.begin(), all_features.end(), std::size_t{0});
    std::vector<std::size_t> candidates;

    auto draw_features = [&]() {
        if (params.m_try == p) {
            candidates = all_features;
            return;
        }
        std::vector<std::size_t> pool = all_features;
        for (std::size_t k = 0; k < params.m_try; ++k) {
            const std::size_t j = k + uniform_index(rng, p - k);
            std::swap(pool[k], pool[j]);
        }
        candidates.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(params.m_try));
        std::sort(candidates.begin(), candidates.end());
    };

    RegressionTree tree;
    std::vector<Pending> frontier;

    auto add_node = [&](std::vector<std::size_t> rows) -> int {
        const NodeStats s = stats_of(targets, rows);
        Node node;
        node.value = s.mean;
        node.count = rows.size();
        node.sse = s.sse;
        tree.nodes_.push_back(node);
        const int id = static_cast<int>(tree.nodes_.size()) - 1;

        const bool large_enough = rows.size() >= 2 && static_cast<double>(rows.size()) + 1e-9 >= min_rows;
        if (!large_enough || s.constant) return id;
        draw_features();
        const SplitChoice choice = best_split(features, targets, rows, candidates);
        if (choice.valid() && choice.gain > 1e-12 * s.sse) {
            frontier.push_back(Pending{id, std::move(rows), choice});
        }
        return id;
    };

    add_node(std::vector<std::size_t>(sample.begin(), sample.end()));
    std::size_t leaves = 1;

    while (leaves < params.max_leaves && !frontier.empty()) {
        std::size_t pick = 0;
        for (std::size_t i = 1; i < frontier.size(); ++i) {
            const auto& a = frontier[i].split;
            const auto& b = frontier[pick].split;
            if (a.gain > b.gain || (a.gain == b.gain && frontier[i].node < frontier[pick].node)) pick = i;
        }
        Pending job = std::move(frontier[pick]);
        frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        const auto col = static_cast<Eigen::Index>(job.split.feature);
        for (std::size_t r : job.rows) {
            (features(static_cast<Eigen::Index>(r), col) <= job.split.threshold ? left_rows : right_rows).push_back(r);
        }
        const int left = add_node(std::move(left_rows));
        const int right = add_node(std::move(right_rows));
        Node& parent = tree.nodes_[static_cast<std::size_t>(job.node)];
        parent.feature = job.split.feature;
        parent.threshold = job.split.threshold;
        parent.left = left;
        parent.right = right;
        ++leaves;
    }
    return tree;
}

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& node = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
    }
    return nodes_[i].value;
}

double RegressionTree::predict_row(const Eigen::MatrixXd& features, Eigen::Index row) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& node = nodes_[i];
        i = static_cast<std::size_t>(features(row, node.feature) <= node.threshold ? node.left : node.right);
    }
    return nodes_[i].value;
}

std::size_t RegressionTree::leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

double RegressionTree::training_cost() const noexcept {
    double total = 0.0;
    for (const auto& n : nodes_) {
        if (n.feature < 0) total += n.sse;
    }
    return total;
}

}  // namespace rrt
