#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rrt/learners/model.hpp"

namespace rrt {

using PredictFn = std::function<double(std::span<const double>)>;

/// (M-1) / (C(M, size) * size * (M - size)). DomainError for size 0 or M.
double shap_kernel_weight(std::size_t M, std::size_t size);

struct ShapOptions {
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    /// Sample coalitions even when full enumeration would fit in `samples`.
    bool force_sampling = false;
};

struct ShapExplanation {
    double phi0 = 0.0;  // f(reference)
    std::vector<double> phi;
    std::vector<double> query;
    std::vector<double> reference;
    std::size_t n_samples = 0;  // coalitions evaluated
    bool enumerated = false;
};

/// Kernel SHAP with absent features set to `reference`. Coalitions are
/// enumerated when all 2^M - 2 fit within `samples`; otherwise sizes are drawn
/// in proportion to total kernel weight and masks come in complementary pairs.
/// Local accuracy is imposed exactly by eliminating the last attribution.
ShapExplanation explain(const PredictFn& f, std::span<const double> query, std::span<const double> reference,
                        const ShapOptions& options = {});
ShapExplanation explain(const Model& model, std::span<const double> query, std::span<const double> reference,
                        const ShapOptions& options = {});

struct AttributionSummary {
    std::string model;
    std::vector<std::string> features;
    std::vector<double> mean_phi;
    std::vector<double> mean_abs_phi;
    std::vector<double> mean_positive;  // mean of max(phi, 0)
    std::vector<double> mean_negative;  // mean of min(phi, 0)
    std::size_t rows = 0;
};

/// Column means, used as reference values.
std::vector<double> column_means(const Eigen::MatrixXd& rows);

/// Explains every row of `rows`; row i uses seed stream (options.seed, i), so
/// results do not depend on `threads`.
AttributionSummary mean_attributions(const PredictFn& f, const Eigen::MatrixXd& rows,
                                     std::span<const double> reference, std::vector<std::string> features,
                                     std::string model, const ShapOptions& options = {}, std::size_t threads = 1);

/// Writes `feature,mean_phi,mean_abs_phi,model` rows.
void write_attributions(std::ostream& out, std::span<const AttributionSummary> tables);

}  // namespace rrt
