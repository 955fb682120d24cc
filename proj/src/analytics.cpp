#include "rrt/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rrt/errors.hpp"

namespace rrt {

std::vector<double> PortfolioPath::excess_returns() const {
    std::vector<double> out(strategy_return.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = strategy_return[i] - riskfree[i];
    return out;
}

std::vector<double> PortfolioPath::market_excess() const {
    std::vector<double> out(market.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = market[i] - riskfree[i];
    return out;
}

PortfolioPath portfolio_path(const WeightSeries& weights, std::span<const MonthStamp> months,
                             std::span<const double> market, std::span<const double> riskfree) {
    const std::size_t n = weights.weights.size();
    if (weights.months.size() != n || months.size() != n || market.size() != n || riskfree.size() != n) {
        throw AlignmentError("portfolio_path: series lengths differ for '" + weights.label + "'");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (months[i] != weights.months[i]) {
            throw AlignmentError("portfolio_path: month " + months[i].iso() + " does not match weight month " +
                                 weights.months[i].iso());
        }
    }
    PortfolioPath path;
    path.label = weights.label;
    path.months = weights.months;
    path.weights = weights.weights;
    path.market.assign(market.begin(), market.end());
    path.riskfree.assign(riskfree.begin(), riskfree.end());
    path.strategy_return.resize(n);
    path.wealth.resize(n);
    double wealth = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights.weights[i];
        path.strategy_return[i] = w * market[i] + (1.0 - w) * riskfree[i];
        wealth *= 1.0 + path.strategy_return[i];
        path.wealth[i] = wealth;
    }
    return path;
}

PortfolioPath portfolio_path(const WeightSeries& weights, const PredictorPanel& panel) {
    const std::size_t n = weights.months.size();
    std::vector<double> market(n);
    std::vector<double> riskfree(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = panel.row_of(weights.months[i]);
        market[i] = panel.market_return[row];
        riskfree[i] = panel.riskfree[row];
    }
    return portfolio_path(weights, weights.months, market, riskfree);
}

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

SharpeStats sharpe(const PortfolioPath& path) {
    if (path.size() < 12) throw InsufficientDataError("sharpe: need at least 12 months for '" + path.label + "'");
    SharpeStats s;
    s.months = path.size();
    s.annual_return = 12.0 * mean_of(path.strategy_return);
    s.annual_std = std::sqrt(12.0) * std_of(path.strategy_return);
    const auto excess = path.excess_returns();
    const double sd = std_of(excess);
    if (!(sd > 0.0)) throw UndefinedError("sharpe: excess returns of '" + path.label + "' have zero spread");
    s.sharpe = 12.0 * mean_of(excess) / (std::sqrt(12.0) * sd);
    return s;
}

double utility(double r, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("utility: risk aversion must be positive");
    if (!(r > -1.0)) throw DomainError("utility: gross return must be positive");
    if (gamma == 1.0) return std::log1p(r);
    const double k = 1.0 - gamma;
    return std::expm1(k * std::log1p(r)) / k;
}

double inverse_utility(double u, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("inverse_utility: risk aversion must be positive");
    if (gamma == 1.0) return std::expm1(u);
    const double k = 1.0 - gamma;
    const double inner = k * u;
    if (!(inner > -1.0)) throw DomainError("inverse_utility: utility outside the range of the power function");
    return std::expm1(std::log1p(inner) / k);
}

UtilityStats utility_metrics(const PortfolioPath& path, double gamma) {
    if (path.size() == 0) throw InsufficientDataError("utility_metrics: empty path");
    UtilityStats s;
    double total = 0.0;
    for (double r : path.strategy_return) total += utility(r, gamma);
    s.mean_utility = total / static_cast<double>(path.size());
    s.ce_monthly = inverse_utility(s.mean_utility, gamma);
    s.ce_annual = std::expm1(12.0 * std::log1p(s.ce_monthly));
    s.terminal_wealth = path.wealth.back();
    return s;
}

DrawdownSeries drawdown(std::span<const double> wealth, double initial) {
    if (wealth.empty()) throw InsufficientDataError("drawdown: empty wealth path");
    DrawdownSeries out;
    out.drawdown.reserve(wealth.size());
    double peak = initial;
    for (double w : wealth) {
        peak = std::max(peak, w);
        const double dd = w / peak - 1.0;
        out.drawdown.push_back(dd);
        out.max_drawdown = std::max(out.max_drawdown, -dd);
    }
    return out;
}

RegressionFit robust_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, std::vector<std::string> names,
                         CovarianceType covariance) {
    const auto n = design.rows();
    const auto k = design.cols();
    if (y.size() != n) throw AlignmentError("robust_ols: response and design lengths differ");
    if (n <= k) throw InsufficientDataError("robust_ols: need more observations than regressors");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) throw SingularityError("robust_ols: regressors are collinear");

    RegressionFit fit;
    fit.names = std::move(names);
    fit.n_obs = static_cast<std::size_t>(n);
    fit.coefficients = qr.solve(y);
    fit.residuals = y - design * fit.coefficients;

    const Eigen::MatrixXd bread = (design.transpose() * design).inverse();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e2 = fit.residuals(i) * fit.residuals(i);
        meat.noalias() += e2 * design.row(i).transpose() * design.row(i);
    }
    Eigen::MatrixXd cov = bread * meat * bread;
    if (covariance == CovarianceType::hc1) cov *= static_cast<double>(n) / static_cast<double>(n - k);
    fit.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.t_stats = fit.coefficients.cwiseQuotient(fit.std_errors);

    const double mean_y = y.mean();
    const double sst = (y.array() - mean_y).square().sum();
    const double ssr = fit.residuals.squaredNorm();
    fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    return fit;
}

namespace {

Eigen::MatrixXd base_design(std::span<const double> fa, std::span<const double> fb, Eigen::Index extra) {
    if (fa.size() != fb.size()) throw AlignmentError("regression: series lengths differ");
    if (fa.size() <= 2) throw InsufficientDataError("regression: need more than two observations");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(fa.size()), 2 + extra);
    for (std::size_t i = 0; i < fa.size(); ++i) {
        x(static_cast<Eigen::Index>(i), 0) = 1.0;
        x(static_cast<Eigen::Index>(i), 1) = fb[i];
    }
    return x;
}

Eigen::VectorXd as_vector(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

RegressionFit alpha_regression(std::span<const double> fa, std::span<const double> fb, CovarianceType covariance) {
    return robust_ols(base_design(fa, fb, 0), as_vector(fa), {"alpha", "beta"}, covariance);
}

RegressionFit hm_test(std::span<const double> fa, std::span<const double> fb, CovarianceType covariance) {
    auto x = base_design(fa, fb, 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 2) = std::max(0.0, x(i, 1));
    return robust_ols(x, as_vector(fa), {"alpha", "beta", "gamma"}, covariance);
}

RegressionFit tm_test(std::span<const double> fa, std::span<const double> fb, CovarianceType covariance) {
    auto x = base_design(fa, fb, 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 2) = x(i, 1) * x(i, 1);
    return robust_ols(x, as_vector(fa), {"alpha", "beta", "gamma"}, covariance);
}

std::vector<double> turnover(std::span<const double> weights) {
    std::vector<double> out(weights.size(), 0.0);
    for (std::size_t i = 1; i < weights.size(); ++i) out[i] = std::abs(weights[i] - weights[i - 1]);
    return out;
}

double post_cost_alpha(const PortfolioPath& path, double cost_bps) {
    const auto dw = turnover(path.weights);
    auto fa = path.excess_returns();
    const double c = cost_bps * 1e-4;
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] -= c * dw[i];
    return alpha_regression(fa, path.market_excess()).annual_alpha();
}

CostRow cost_analysis(const PortfolioPath& path, double leverage_cap, std::span<const double> cost_bps) {
    if (path.size() < 3) throw InsufficientDataError("cost_analysis: need at least three months");
    CostRow row;
    row.label = path.label;
    row.leverage_cap = leverage_cap;
    const auto dw = turnover(path.weights);
    double total = 0.0;
    for (std::size_t i = 1; i < dw.size(); ++i) total += dw[i];
    row.mean_turnover = total / static_cast<double>(dw.size() - 1);
    row.annual_return = 12.0 * mean_of(path.strategy_return);
    row.alpha = post_cost_alpha(path, 0.0);
    row.cost_bps.assign(cost_bps.begin(), cost_bps.end());
    for (double c : cost_bps) row.post_cost_alpha.push_back(post_cost_alpha(path, c));

    if (total == 0.0) {
        row.break_even_bps = std::numeric_limits<double>::infinity();
        return row;
    }
    // Alpha is affine in the cost; take the exact root and confirm the
    // midpoint sits on the line before trusting it.
    const double probe = 100.0;
    const double a_probe = post_cost_alpha(path, probe);
    const double a_mid = post_cost_alpha(path, probe / 2.0);
    const double slope = (row.alpha - a_probe) / probe;
    const double scale = std::abs(row.alpha) + std::abs(a_probe) + 1e-12;
    row.linear = std::abs(a_mid - 0.5 * (row.alpha + a_probe)) <= 1e-9 * scale;
    if (row.linear) {
        row.break_even_bps = slope != 0.0 ? row.alpha / slope : std::numeric_limits<double>::infinity();
        return row;
    }

    double lo = 0.0;
    double hi = probe;
    double a_lo = row.alpha;
    double a_hi = a_probe;
    while ((a_lo > 0.0) == (a_hi > 0.0) && hi < 1e7) {
        lo = hi;
        a_lo = a_hi;
        hi *= 2.0;
        a_hi = post_cost_alpha(path, hi);
    }
    if ((a_lo > 0.0) == (a_hi > 0.0)) {
        row.break_even_bps = std::numeric_limits<double>::quiet_NaN();
        return row;
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double a = post_cost_alpha(path, mid);
        if ((a > 0.0) == (a_lo > 0.0)) {
            lo = mid;
            a_lo = a;
        } else {
            hi = mid;
        }
    }
    row.break_even_bps = 0.5 * (lo + hi);
    return row;
}

std::vector<CostRow> transaction_cost_table(std::span<const PortfolioPath> paths, std::span<const double> caps,
                                            std::span<const double> cost_bps) {
    if (paths.size() != caps.size()) throw AlignmentError("transaction_cost_table: one cap per path required");
    std::vector<CostRow> rows;
    rows.reserve(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) rows.push_back(cost_analysis(paths[i], caps[i], cost_bps));
    return rows;
}

}  // namespace rrt
