#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "rrt/market_data.hpp"

namespace rrt {

/// Design matrix and targets handed to a learner.
struct Dataset {
    Eigen::MatrixXd features;  // n x p
    Eigen::VectorXd targets;   // n
    std::vector<std::string> feature_names;

    [[nodiscard]] Eigen::Index rows() const noexcept { return features.rows(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return features.cols(); }

    /// Throws DataError unless n >= 1, p >= 1, names match p, and all values are finite.
    void validate() const;

    /// Rows `rows` of `panel`, with `target` as the response.
    static Dataset from_panel(const PredictorPanel& panel, std::span<const std::size_t> rows,
                              const std::vector<double>& target);
    static Dataset from_panel(const PredictorPanel& panel, RowRange rows, const std::vector<double>& target);
};

}  // namespace rrt
