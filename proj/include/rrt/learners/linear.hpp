#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "rrt/learners/dataset.hpp"

namespace rrt {

/// y = intercept + coefficients . x
struct LinearModel {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    bool converged = true;   // false when an iterative fit hit its iteration cap
    std::size_t iterations = 0;

    [[nodiscard]] double predict(std::span<const double> x) const;
};

struct ElasticNetConfig {
    double lambda = 0.07;
    double alpha = 0.1;
    std::size_t max_iterations = 100000;
    double tolerance = 1e-10;  // on the largest coefficient change in one sweep
    bool standardize = true;

    static ElasticNetConfig return_model_defaults();
    static ElasticNetConfig volatility_model_defaults();

    void validate() const;
};

struct ElasticNetFit {
    LinearModel model;
    /// Objective after each full coordinate sweep, evaluated in the working
    /// (centered, and if requested standardized) coordinates.
    std::vector<double> objective_trace;
};

/// Soft-thresholding operator S(z, g) = sign(z) max(|z| - g, 0).
[[nodiscard]] double soft_threshold(double z, double threshold) noexcept;

/// Minimizes (1/T) sum (y - mu - X b)^2 + lambda (alpha |b|_1 + (1-alpha)/2 |b|_2^2)
/// by cyclic coordinate descent on the covariance (Gram) form. The intercept
/// is not penalized. With standardization on, the penalty applies to
/// coefficients of unit-variance features and results are mapped back.
ElasticNetFit fit_elastic_net(const Dataset& data, const ElasticNetConfig& config);

struct OlsConfig {
    bool ridge_fallback = false;  // add 1e-10 to the normal equations when rank deficient
};

/// Least squares with intercept. Throws SingularityError for a rank-deficient
/// design unless `ridge_fallback` is set.
LinearModel fit_ols(const Dataset& data, const OlsConfig& config = {});

}  // namespace rrt
