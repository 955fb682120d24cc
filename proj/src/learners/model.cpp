#include "rrt/learners/model.hpp"

#include <cmath>
#include <sstream>

#include "rrt/errors.hpp"

namespace rrt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

LearnerKind kind_of(const LearnerConfig& config) noexcept {
    return std::visit(overloaded{
                          [](const ForestConfig&) { return LearnerKind::forest; },
                          [](const ElasticNetConfig&) { return LearnerKind::elastic_net; },
                          [](const OlsConfig&) { return LearnerKind::ols; },
                          [](const PrevailingMeanConfig&) { return LearnerKind::prevailing_mean; },
                          [](const PreviousVolatilityConfig&) { return LearnerKind::previous_volatility; },
                      },
                      config);
}

const char* to_string(LearnerKind kind) noexcept {
    switch (kind) {
        case LearnerKind::forest: return "forest";
        case LearnerKind::elastic_net: return "elastic_net";
        case LearnerKind::ols: return "linear";
        case LearnerKind::prevailing_mean: return "prevailing_mean";
        case LearnerKind::previous_volatility: return "previous_volatility";
    }
    return "unknown";
}

std::string describe(const LearnerConfig& config) {
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const ForestConfig& c) {
                       out << "forest(B=" << c.n_trees << ",m=" << c.m_try << ",smin=" << c.min_node_fraction
                           << ",kmax=" << c.max_leaves << (c.bootstrap ? "" : ",nobootstrap") << ")";
                   },
                   [&](const ElasticNetConfig& c) {
                       out << "elastic_net(lambda=" << c.lambda << ",alpha=" << c.alpha
                           << (c.standardize ? "" : ",raw") << ")";
                   },
                   [&](const OlsConfig&) { out << "linear"; },
                   [&](const PrevailingMeanConfig&) { out << "prevailing_mean"; },
                   [&](const PreviousVolatilityConfig& c) { out << "previous_volatility(" << c.feature << ")"; },
               },
               config);
    return out.str();
}

LearnerConfig with_seed(LearnerConfig config, std::uint64_t seed) {
    if (auto* forest = std::get_if<ForestConfig>(&config)) forest->seed = seed;
    return config;
}

double Model::predict(std::span<const double> x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, fitted_);
}

Eigen::VectorXd Model::predict(const Eigen::MatrixXd& rows) const {
    Eigen::VectorXd out(rows.rows());
    std::vector<double> x(static_cast<std::size_t>(rows.cols()));
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < rows.cols(); ++j) x[static_cast<std::size_t>(j)] = rows(i, j);
        out(i) = predict(x);
    }
    return out;
}

PrevailingMean fit_prevailing_mean(const Dataset& data) {
    if (data.targets.size() == 0) throw InsufficientDataError("prevailing mean: no training rows");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < data.targets.size(); ++i) sum += data.targets(i);
    return PrevailingMean{sum / static_cast<double>(data.targets.size())};
}

PreviousValue fit_previous_volatility(const Dataset& data, const std::string& feature) {
    for (std::size_t j = 0; j < data.feature_names.size(); ++j) {
        if (data.feature_names[j] == feature) return PreviousValue{j};
    }
    throw SchemaError(feature, "previous_volatility baseline");
}

Model fit(const LearnerConfig& config, const Dataset& data, const FitOptions& options) {
    return std::visit(overloaded{
                          [&](const ForestConfig& c) {
                              return Model(LearnerKind::forest, RandomForest::fit(data, c, options.threads));
                          },
                          [&](const ElasticNetConfig& c) {
                              return Model(LearnerKind::elastic_net, fit_elastic_net(data, c).model);
                          },
                          [&](const OlsConfig& c) { return Model(LearnerKind::ols, fit_ols(data, c)); },
                          [&](const PrevailingMeanConfig&) {
                              return Model(LearnerKind::prevailing_mean, fit_prevailing_mean(data));
                          },
                          [&](const PreviousVolatilityConfig& c) {
                              return Model(LearnerKind::previous_volatility, fit_previous_volatility(data, c.feature));
                          },
                      },
                      config);
}

}  // namespace rrt
