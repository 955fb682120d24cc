#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rrt/allocation.hpp"
#include "rrt/market_data.hpp"

namespace rrt {

struct PortfolioPath {
    std::string label;
    std::vector<MonthStamp> months;
    std::vector<double> weights;
    std::vector<double> market;           // simple market return
    std::vector<double> riskfree;         // simple risk-free return
    std::vector<double> strategy_return;  // w*R + (1-w)*Rf
    std::vector<double> wealth;           // after each month, starting from 1.0

    [[nodiscard]] std::size_t size() const noexcept { return months.size(); }
    [[nodiscard]] std::vector<double> excess_returns() const;
    [[nodiscard]] std::vector<double> market_excess() const;
};

/// Compounds w_t*R_t + (1-w_t)*Rf_t from wealth 1.0. `months`, `market` and
/// `riskfree` must line up with the weights exactly (AlignmentError otherwise).
PortfolioPath portfolio_path(const WeightSeries& weights, std::span<const MonthStamp> months,
                             std::span<const double> market, std::span<const double> riskfree);
/// Looks up market and risk-free returns for the weight months in `panel`.
PortfolioPath portfolio_path(const WeightSeries& weights, const PredictorPanel& panel);

struct SharpeStats {
    double annual_return = 0.0;  // 12 * mean monthly return
    double annual_std = 0.0;     // sqrt(12) * std monthly return
    double sharpe = 0.0;         // annualized, on excess returns
    std::size_t months = 0;
};

/// Needs at least 12 months; UndefinedError when excess returns have zero spread.
SharpeStats sharpe(const PortfolioPath& path);

/// Power utility of gross return 1 + r; log utility when gamma == 1.
double utility(double r, double gamma);
/// Inverse of `utility`: the simple return with utility u.
double inverse_utility(double u, double gamma);

struct UtilityStats {
    double mean_utility = 0.0;
    double ce_monthly = 0.0;
    double ce_annual = 0.0;  // (1 + ce_monthly)^12 - 1
    double terminal_wealth = 0.0;
};

/// DomainError for gamma <= 0 or a gross return <= 0.
UtilityStats utility_metrics(const PortfolioPath& path, double gamma);

struct DrawdownSeries {
    std::vector<double> drawdown;  // wealth / running max - 1, running max starts at the initial wealth
    double max_drawdown = 0.0;     // positive magnitude
};

/// `wealth` holds values after each month; `initial` is the starting wealth.
DrawdownSeries drawdown(std::span<const double> wealth, double initial = 1.0);

enum class CovarianceType { hc0, hc1 };

struct RegressionFit {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd residuals;
    double r_squared = 0.0;
    std::size_t n_obs = 0;

    [[nodiscard]] double alpha() const { return coefficients(0); }
    [[nodiscard]] double annual_alpha() const { return 12.0 * coefficients(0); }
    [[nodiscard]] double annual_alpha_se() const { return 12.0 * std_errors(0); }
    [[nodiscard]] double beta() const { return coefficients(1); }
    /// Coefficient on the timing term of HM/TM regressions.
    [[nodiscard]] double timing() const { return coefficients(2); }
    [[nodiscard]] double timing_t() const { return t_stats(2); }
};

/// OLS of y on the columns of `design` with heteroskedasticity-consistent
/// standard errors. SingularityError when the design is rank deficient.
RegressionFit robust_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, std::vector<std::string> names,
                         CovarianceType covariance = CovarianceType::hc0);

/// f_a on [1, f_b].
RegressionFit alpha_regression(std::span<const double> fa, std::span<const double> fb,
                               CovarianceType covariance = CovarianceType::hc0);
/// f_a on [1, f_b, max(0, f_b)].
RegressionFit hm_test(std::span<const double> fa, std::span<const double> fb,
                      CovarianceType covariance = CovarianceType::hc0);
/// f_a on [1, f_b, f_b^2].
RegressionFit tm_test(std::span<const double> fa, std::span<const double> fb,
                      CovarianceType covariance = CovarianceType::hc0);

/// |w_t - w_{t-1}| for t >= 1; the first month carries no turnover.
std::vector<double> turnover(std::span<const double> weights);

/// Annualized alpha against the market after charging cost_bps per unit of
/// turnover each month.
double post_cost_alpha(const PortfolioPath& path, double cost_bps);

struct CostRow {
    std::string label;
    double leverage_cap = 0.0;
    double mean_turnover = 0.0;  // mean |dw| over months 2..n
    double annual_return = 0.0;  // gross of costs
    double alpha = 0.0;          // annualized, pre-cost
    std::vector<double> cost_bps;
    std::vector<double> post_cost_alpha;  // aligned with cost_bps
    double break_even_bps = 0.0;          // +inf when turnover is zero
    bool linear = true;                   // false when the root was bracketed numerically
};

CostRow cost_analysis(const PortfolioPath& path, double leverage_cap, std::span<const double> cost_bps);
std::vector<CostRow> transaction_cost_table(std::span<const PortfolioPath> paths, std::span<const double> caps,
                                            std::span<const double> cost_bps);

}  // namespace rrt
