#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "rrt/random.hpp"

namespace rrt {

struct TreeParams {
    std::size_t m_try = 1;            // candidate features drawn per node
    double min_node_fraction = 0.0;   // a node with fewer than this share of the sample is not split
    std::size_t max_leaves = 2;       // growth stops once this many leaves exist
};

/// Best split of one node.
struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double cost = 0.0;  // SSE(left) + SSE(right)
    double gain = 0.0;  // SSE(node) - cost

    [[nodiscard]] bool valid() const noexcept { return feature >= 0; }
};

/// CART regression tree grown best-first: the frontier leaf whose best split
/// removes the most squared error is expanded until `max_leaves` leaves exist
/// or no leaf can be split.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  // -1 for a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;  // mean target of the node's rows
        std::size_t count = 0;
        double sse = 0.0;  // squared error around `value`
    };

    /// Grows a tree on `sample` (row indices into `features`, repeats allowed).
    static RegressionTree fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                              std::span<const std::size_t> sample, const TreeParams& params, Rng& rng);

    [[nodiscard]] double predict(std::span<const double> x) const;
    [[nodiscard]] double predict_row(const Eigen::MatrixXd& features, Eigen::Index row) const;

    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t leaf_count() const noexcept;
    /// Sum of leaf SSEs on the training sample.
    [[nodiscard]] double training_cost() const noexcept;

private:
    std::vector<Node> nodes_;
};

/// Searches every candidate feature for the split minimizing summed child SSE.
/// Thresholds are midpoints between consecutive distinct values; ties resolve
/// to the lowest feature index, then the smallest threshold.
SplitChoice best_split(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                       std::span<const std::size_t> rows, std::span<const std::size_t> candidate_features);

}  // namespace rrt
