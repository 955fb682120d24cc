#include "rrt/learners/linear.hpp"

#include <cmath>

#include "rrt/errors.hpp"

namespace rrt {

double LinearModel::predict(std::span<const double> x) const {
    double y = intercept;
    for (Eigen::Index j = 0; j < coefficients.size(); ++j) y += coefficients(j) * x[static_cast<std::size_t>(j)];
    return y;
}

ElasticNetConfig ElasticNetConfig::return_model_defaults() {
    ElasticNetConfig c;
    c.lambda = 0.07;
    c.alpha = 0.1;
    return c;
}

ElasticNetConfig ElasticNetConfig::volatility_model_defaults() {
    ElasticNetConfig c;
    c.lambda = 0.3;
    c.alpha = 0.1;
    return c;
}

void ElasticNetConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("elastic net: lambda must be >= 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("elastic net: alpha must lie in [0,1]");
    if (max_iterations == 0) throw ConfigError("elastic net: max_iterations must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("elastic net: tolerance must be positive");
}

double soft_threshold(double z, double threshold) noexcept {
    if (z > threshold) return z - threshold;
    if (z < -threshold) return z + threshold;
    return 0.0;
}

ElasticNetFit fit_elastic_net(const Dataset& data, const ElasticNetConfig& config) {
    data.validate();
    config.validate();
    const Eigen::Index n = data.rows();
    const Eigen::Index p = data.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    const Eigen::RowVectorXd means = data.features.colwise().mean();
    Eigen::MatrixXd z = data.features.rowwise() - means;
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
    if (config.standardize) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double sd = std::sqrt(z.col(j).squaredNorm() * inv_n);
            scale(j) = sd;
            if (sd > 0.0) z.col(j) /= sd;
        }
    }
    const double y_mean = data.targets.mean();
    const Eigen::VectorXd yc = data.targets.array() - y_mean;

    const Eigen::MatrixXd gram = (z.transpose() * z) * inv_n;
    const Eigen::VectorXd cov = (z.transpose() * yc) * inv_n;
    const double yy = yc.squaredNorm() * inv_n;

    const double l1 = config.lambda * config.alpha;
    const double l2 = config.lambda * (1.0 - config.alpha);

    auto objective = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& gb) {
        const double loss = yy - 2.0 * b.dot(cov) + b.dot(gb);
        return loss + l1 * b.lpNorm<1>() + 0.5 * l2 * b.squaredNorm();
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd g_beta = Eigen::VectorXd::Zero(p);  // gram * beta

    ElasticNetFit fit;
    bool converged = false;
    std::size_t sweep = 0;
    while (sweep < config.max_iterations) {
        ++sweep;
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double gjj = gram(j, j);
            const double denom = gjj + 0.5 * l2;
            if (gjj <= 0.0 || denom <= 0.0) continue;
            const double rho = cov(j) - g_beta(j) + gjj * beta(j);
            const double updated = soft_threshold(rho, 0.5 * l1) / denom;
            const double delta = updated - beta(j);
            if (delta != 0.0) {
                beta(j) = updated;
                g_beta.noalias() += gram.col(j) * delta;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        fit.objective_trace.push_back(objective(beta, g_beta));
        if (max_change < config.tolerance) {
            converged = true;
            break;
        }
    }

    LinearModel& model = fit.model;
    model.coefficients.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        model.coefficients(j) = scale(j) > 0.0 ? beta(j) / scale(j) : 0.0;
    }
    model.intercept = y_mean - means.dot(model.coefficients);
    model.converged = converged;
    model.iterations = sweep;
    return fit;
}

LinearModel fit_ols(const Dataset& data, const OlsConfig& config) {
    data.validate();
    const Eigen::Index n = data.rows();
    const Eigen::Index p = data.cols();
    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = data.features;

    Eigen::VectorXd solution;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (n > p && qr.rank() == p + 1) {
        solution = qr.solve(data.targets);
    } else if (config.ridge_fallback) {
        Eigen::MatrixXd normal = design.transpose() * design;
        normal.diagonal().array() += 1e-10;
        solution = normal.ldlt().solve(design.transpose() * data.targets);
    } else {
        throw SingularityError("ols: design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                               std::to_string(p + 1) + ")");
    }

    LinearModel model;
    model.intercept = solution(0);
    model.coefficients = solution.tail(p);
    return model;
}

}  // namespace rrt
