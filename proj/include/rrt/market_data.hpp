#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrt/month.hpp"

namespace rrt {

namespace csv {
struct Table;
}

/// One named monthly series with contiguous months.
struct RawSeries {
    std::string name;
    std::vector<MonthStamp> months;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] MonthStamp first() const { return months.front(); }
    [[nodiscard]] MonthStamp last() const { return months.back(); }
    /// Value for `m`; throws RangeError when outside the covered range.
    [[nodiscard]] double at(MonthStamp m) const;
};

/// Maps logical series names to header names in a monthly file.
struct MonthlySchema {
    std::string date_column = "date";
    std::map<std::string, std::string> columns;
    char delimiter = ',';

    /// Identity mapping for `date,mkt,rf,dp,ep,bm,ntis,tbl,tms,dfy,infl,corpr,ltr,svar,npy`.
    static MonthlySchema standard();
};

struct DailySchema {
    std::string date_column = "date";
    std::string value_column = "mktrf";
    char delimiter = ',';
    double scale = 1.0;  // multiply raw values (0.01 for files quoted in percent)
};

inline constexpr std::size_t kMinTradingDays = 10;

/// Daily excess returns for one calendar month.
struct DailyGroup {
    MonthStamp month;
    std::vector<int> days;  // day of month, strictly increasing
    std::vector<double> excess;
};

class DailyReturns {
public:
    DailyReturns() = default;
    /// Groups must be in strictly increasing month order and each hold at least
    /// kMinTradingDays entries.
    explicit DailyReturns(std::vector<DailyGroup> groups);

    [[nodiscard]] const std::vector<DailyGroup>& groups() const noexcept { return groups_; }
    [[nodiscard]] const DailyGroup* find(MonthStamp m) const;
    [[nodiscard]] bool empty() const noexcept { return groups_.empty(); }

private:
    std::vector<DailyGroup> groups_;
};

std::vector<RawSeries> parse_monthly(const csv::Table& table, const MonthlySchema& schema);
std::vector<RawSeries> load_monthly(const std::string& path, const MonthlySchema& schema);

DailyReturns parse_daily(const csv::Table& table, const DailySchema& schema);
DailyReturns load_daily(const std::string& path, const DailySchema& schema);

/// Within-month sum of squared deviations of daily excess returns from their
/// mean, over however many trading days are present.
double realized_variance(std::span<const double> daily, std::size_t min_days = kMinTradingDays);
double realized_variance(const DailyGroup& group);

enum class PanelKind { return_model, volatility_model };

const char* to_string(PanelKind kind);

/// Macro predictors shared by both panels, in column order.
const std::vector<std::string>& macro_predictor_names();
/// Full feature list for a panel kind (15 columns).
std::vector<std::string> panel_feature_names(PanelKind kind);

struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
    [[nodiscard]] bool empty() const noexcept { return end <= begin; }
};

/// Aligned monthly rows. Row t holds month-t targets and predictors observed
/// through month t-1.
struct PredictorPanel {
    PanelKind kind = PanelKind::return_model;
    std::vector<MonthStamp> months;
    std::vector<double> excess_return;           // R_t - Rf_t, simple
    std::vector<double> volatility;              // realized sigma of month t
    std::vector<double> market_return;           // R_t
    std::vector<double> riskfree;                // Rf_t
    std::vector<double> realized_variance;       // sigma^2_t
    std::vector<double> prev_realized_variance;  // sigma^2_{t-1}
    std::vector<std::string> feature_names;
    Eigen::MatrixXd features;  // rows x features

    [[nodiscard]] std::size_t rows() const noexcept { return months.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return feature_names.size(); }

    /// The modelling target for this panel's kind.
    [[nodiscard]] const std::vector<double>& target() const noexcept {
        return kind == PanelKind::return_model ? excess_return : volatility;
    }

    [[nodiscard]] std::optional<std::size_t> feature_index(const std::string& name) const;
    /// Row for month `m`; throws RangeError when absent.
    [[nodiscard]] std::size_t row_of(MonthStamp m) const;
    /// Rows whose months fall in [first, last].
    [[nodiscard]] RowRange range(MonthStamp first, MonthStamp last) const;

    [[nodiscard]] PredictorPanel slice(RowRange rows) const;
    [[nodiscard]] PredictorPanel select(std::span<const std::size_t> rows) const;

    /// Throws DataError when any invariant (sizes, finiteness, ordering) fails.
    void validate() const;
};

/// Builds the lagged panel. Rows without three months of history are dropped.
PredictorPanel build_panel(const std::vector<RawSeries>& series, const DailyReturns& daily, PanelKind kind);

/// Canonical panel file: `date`, the six target/return columns, then features,
/// with values printed round-trip exact.
void write_panel(std::ostream& out, const PredictorPanel& panel);
/// Reads a file written by write_panel; SchemaError when the feature columns
/// do not match `kind`.
PredictorPanel read_panel(std::istream& in, PanelKind kind, const std::string& source);
PredictorPanel read_panel_file(const std::string& path, PanelKind kind);

/// Linear-interpolation sample quantile (type 7) of `values`, q in [0,1].
double quantile(std::vector<double> values, double q);

/// Indices of `targets` kept after dropping those whose magnitude exceeds the
/// q-quantile of magnitudes. Ties at the cutoff are kept.
std::vector<std::size_t> trim_keep(std::span<const double> targets, double q);

/// Drops rows whose |excess return| exceeds the q-quantile within the panel.
/// Call this only on a training window.
PredictorPanel trim_outliers(const PredictorPanel& panel, double q = 0.90);

struct SplitSpec {
    MonthStamp train_end{1957, 12};
    MonthStamp validation_end{1988, 12};
    MonthStamp test_end{2019, 12};
};

struct SplitRanges {
    RowRange train;
    RowRange validation;
    RowRange test;
};

struct PanelSplit {
    PredictorPanel train;
    PredictorPanel validation;
    PredictorPanel test;
};

/// Row ranges for each partition. Throws RangeError when a boundary lies
/// outside the panel or a partition would be empty.
SplitRanges split_ranges(const PredictorPanel& panel, const SplitSpec& spec);
PanelSplit split(const PredictorPanel& panel, const SplitSpec& spec);

}  // namespace rrt
