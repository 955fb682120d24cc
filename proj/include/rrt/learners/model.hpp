#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <variant>

#include "rrt/learners/dataset.hpp"
#include "rrt/learners/forest.hpp"
#include "rrt/learners/linear.hpp"

namespace rrt {

/// Predicts the mean of the training targets.
struct PrevailingMean {
    double mean = 0.0;
    [[nodiscard]] double predict(std::span<const double>) const noexcept { return mean; }
};

/// Predicts the value of one feature of the query row.
struct PreviousValue {
    std::size_t feature = 0;
    [[nodiscard]] double predict(std::span<const double> x) const { return x[feature]; }
};

struct PrevailingMeanConfig {};
struct PreviousVolatilityConfig {
    std::string feature = "rvol_lag1";
};

using LearnerConfig =
    std::variant<ForestConfig, ElasticNetConfig, OlsConfig, PrevailingMeanConfig, PreviousVolatilityConfig>;

enum class LearnerKind { forest, elastic_net, ols, prevailing_mean, previous_volatility };

[[nodiscard]] LearnerKind kind_of(const LearnerConfig& config) noexcept;
[[nodiscard]] const char* to_string(LearnerKind kind) noexcept;
/// Compact human-readable form, e.g. "forest(B=500,m=4,smin=0.95,kmax=2)".
[[nodiscard]] std::string describe(const LearnerConfig& config);
/// Copy of `config` with the forest seed replaced; other learners are returned unchanged.
[[nodiscard]] LearnerConfig with_seed(LearnerConfig config, std::uint64_t seed);

/// A fitted learner of any kind. Immutable; predict is reentrant.
class Model {
public:
    using Variant = std::variant<RandomForest, LinearModel, PrevailingMean, PreviousValue>;

    Model(LearnerKind kind, Variant fitted) : kind_(kind), fitted_(std::move(fitted)) {}

    [[nodiscard]] LearnerKind kind() const noexcept { return kind_; }
    [[nodiscard]] double predict(std::span<const double> x) const;
    [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& rows) const;

    template <typename T>
    [[nodiscard]] const T* get_if() const noexcept {
        return std::get_if<T>(&fitted_);
    }

private:
    LearnerKind kind_;
    Variant fitted_;
};

struct FitOptions {
    std::size_t threads = 1;  // forest tree-growing parallelism
};

Model fit(const LearnerConfig& config, const Dataset& data, const FitOptions& options = {});

/// Baselines, exposed for direct use.
PrevailingMean fit_prevailing_mean(const Dataset& data);
/// Throws SchemaError when `feature` is not a column of `data`.
PreviousValue fit_previous_volatility(const Dataset& data, const std::string& feature = "rvol_lag1");

}  // namespace rrt
