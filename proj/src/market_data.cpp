#include "rrt/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "rrt/csv.hpp"
#include "rrt/errors.hpp"

namespace rrt {

namespace {

const std::vector<std::string> kMacro = {"dp",   "ep",  "bm",   "ntis",  "tbl", "tms",
                                         "dfy",  "infl", "corpr", "ltr", "svar"};

const RawSeries& require(const std::vector<RawSeries>& series, const std::string& name) {
    for (const auto& s : series) {
        if (s.name == name) return s;
    }
    throw SchemaError(name, "build_panel");
}

void check_contiguous(const std::vector<MonthStamp>& months, const std::string& what) {
    for (std::size_t i = 1; i < months.size(); ++i) {
        if (months[i] <= months[i - 1]) {
            throw DataError(what + ": months not strictly increasing at " + months[i].iso());
        }
        if (months[i] != months[i - 1].next()) {
            const auto missing = months[i - 1].next();
            throw GapError(missing.yyyymm(), what + ": gap, first missing month " + missing.iso());
        }
    }
}

}  // namespace

double RawSeries::at(MonthStamp m) const {
    if (values.empty() || m < first() || m > last()) {
        throw RangeError(name + ": month " + m.iso() + " outside series range");
    }
    return values[static_cast<std::size_t>(m.ordinal() - first().ordinal())];
}

MonthlySchema MonthlySchema::standard() {
    MonthlySchema schema;
    for (const char* name : {"mkt", "rf", "dp", "ep", "bm", "ntis", "tbl", "tms", "dfy", "infl", "corpr",
                             "ltr", "svar", "npy"}) {
        schema.columns.emplace(name, name);
    }
    return schema;
}

DailyReturns::DailyReturns(std::vector<DailyGroup> groups) : groups_(std::move(groups)) {
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        const auto& group = groups_[g];
        if (g > 0 && group.month <= groups_[g - 1].month) {
            throw DataError("daily returns: months out of order at " + group.month.iso());
        }
        if (group.days.size() != group.excess.size()) {
            throw DataError("daily returns: day/value size mismatch in " + group.month.iso());
        }
        if (group.excess.size() < kMinTradingDays) {
            throw InsufficientDataError("daily returns: " + group.month.iso() + " has " +
                                        std::to_string(group.excess.size()) + " trading days, need " +
                                        std::to_string(kMinTradingDays));
        }
        for (std::size_t d = 1; d < group.days.size(); ++d) {
            if (group.days[d] <= group.days[d - 1]) {
                throw DataError("daily returns: day indices not increasing in " + group.month.iso());
            }
        }
    }
}

const DailyGroup* DailyReturns::find(MonthStamp m) const {
    auto it = std::lower_bound(groups_.begin(), groups_.end(), m,
                               [](const DailyGroup& g, MonthStamp key) { return g.month < key; });
    if (it == groups_.end() || it->month != m) return nullptr;
    return &*it;
}

std::vector<RawSeries> parse_monthly(const csv::Table& table, const MonthlySchema& schema) {
    const auto date_col = table.column(schema.date_column);
    if (!date_col) throw SchemaError(schema.date_column, table.source);

    std::vector<std::pair<std::string, std::size_t>> mapped;
    for (const auto& [logical, header] : schema.columns) {
        const auto col = table.column(header);
        if (!col) throw SchemaError(header, table.source);
        mapped.emplace_back(logical, *col);
    }

    std::vector<MonthStamp> months;
    months.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        try {
            months.push_back(MonthStamp::parse(row.fields[*date_col]));
        } catch (const DataError& e) {
            throw DataError(table.source + ":" + std::to_string(row.line) + ": " + e.what());
        }
    }
    check_contiguous(months, table.source);

    std::vector<RawSeries> out;
    out.reserve(mapped.size());
    for (const auto& [logical, col] : mapped) {
        RawSeries s;
        s.name = logical;
        s.months = months;
        s.values.reserve(table.rows.size());
        for (const auto& row : table.rows) s.values.push_back(csv::parse_number(row.fields[col], table, row));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<RawSeries> load_monthly(const std::string& path, const MonthlySchema& schema) {
    return parse_monthly(csv::read_file(path, schema.delimiter), schema);
}

DailyReturns parse_daily(const csv::Table& table, const DailySchema& schema) {
    const auto date_col = table.column(schema.date_column);
    if (!date_col) throw SchemaError(schema.date_column, table.source);
    const auto value_col = table.column(schema.value_column);
    if (!value_col) throw SchemaError(schema.value_column, table.source);

    std::vector<DailyGroup> groups;
    for (const auto& row : table.rows) {
        const auto& text = row.fields[*date_col];
        if (text.size() != 8) {
            throw DataError(table.source + ":" + std::to_string(row.line) + ": malformed date '" + text + "'");
        }
        const double yyyymmdd = csv::parse_number(text, table, row);
        const int ymd = static_cast<int>(yyyymmdd);
        const MonthStamp month = MonthStamp::from_yyyymm(ymd / 100);
        const int day = ymd % 100;
        const double value = csv::parse_number(row.fields[*value_col], table, row) * schema.scale;
        if (groups.empty() || groups.back().month != month) {
            groups.push_back(DailyGroup{month, {}, {}});
        }
        groups.back().days.push_back(day);
        groups.back().excess.push_back(value);
    }
    return DailyReturns(std::move(groups));
}

DailyReturns load_daily(const std::string& path, const DailySchema& schema) {
    return parse_daily(csv::read_file(path, schema.delimiter), schema);
}

double realized_variance(std::span<const double> daily, std::size_t min_days) {
    if (daily.empty() || daily.size() < min_days) {
        throw InsufficientDataError("realized variance needs at least " + std::to_string(std::max<std::size_t>(min_days, 1)) +
                                    " daily observations, got " + std::to_string(daily.size()));
    }
    double mean = 0.0;
    for (double f : daily) mean += f;
    mean /= static_cast<double>(daily.size());
    double ss = 0.0;
    for (double f : daily) ss += (f - mean) * (f - mean);
    return ss;
}

double realized_variance(const DailyGroup& group) { return realized_variance(group.excess); }

const char* to_string(PanelKind kind) {
    return kind == PanelKind::return_model ? "return_model" : "volatility_model";
}

const std::vector<std::string>& macro_predictor_names() { return kMacro; }

std::vector<std::string> panel_feature_names(PanelKind kind) {
    std::vector<std::string> names = kMacro;
    names.emplace_back("exret_lag1");
    const char* stem = kind == PanelKind::return_model ? "npy_lag" : "rvol_lag";
    for (int lag = 1; lag <= 3; ++lag) names.push_back(stem + std::to_string(lag));
    return names;
}

std::optional<std::size_t> PredictorPanel::feature_index(const std::string& name) const {
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        if (feature_names[j] == name) return j;
    }
    return std::nullopt;
}

std::size_t PredictorPanel::row_of(MonthStamp m) const {
    if (months.empty() || m < months.front() || m > months.back()) {
        throw RangeError("month " + m.iso() + " outside panel range");
    }
    return static_cast<std::size_t>(m.ordinal() - months.front().ordinal());
}

RowRange PredictorPanel::range(MonthStamp first, MonthStamp last) const {
    const auto lo = std::lower_bound(months.begin(), months.end(), first);
    const auto hi = std::upper_bound(months.begin(), months.end(), last);
    const auto b = static_cast<std::size_t>(lo - months.begin());
    const auto e = static_cast<std::size_t>(hi - months.begin());
    return RowRange{b, std::max(b, e)};
}

PredictorPanel PredictorPanel::slice(RowRange r) const {
    std::vector<std::size_t> idx(r.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = r.begin + i;
    return select(idx);
}

PredictorPanel PredictorPanel::select(std::span<const std::size_t> rows_wanted) const {
    PredictorPanel out;
    out.kind = kind;
    out.feature_names = feature_names;
    out.features.resize(static_cast<Eigen::Index>(rows_wanted.size()), features.cols());
    Eigen::Index k = 0;
    for (std::size_t r : rows_wanted) {
        out.months.push_back(months.at(r));
        out.excess_return.push_back(excess_return[r]);
        out.volatility.push_back(volatility[r]);
        out.market_return.push_back(market_return[r]);
        out.riskfree.push_back(riskfree[r]);
        out.realized_variance.push_back(realized_variance[r]);
        out.prev_realized_variance.push_back(prev_realized_variance[r]);
        out.features.row(k++) = features.row(static_cast<Eigen::Index>(r));
    }
    return out;
}

void PredictorPanel::validate() const {
    const std::size_t n = months.size();
    const bool sizes_ok = excess_return.size() == n && volatility.size() == n && market_return.size() == n &&
                          riskfree.size() == n && realized_variance.size() == n &&
                          prev_realized_variance.size() == n && static_cast<std::size_t>(features.rows()) == n &&
                          static_cast<std::size_t>(features.cols()) == feature_names.size();
    if (!sizes_ok) throw DataError("panel: column sizes disagree");
    for (std::size_t i = 1; i < n; ++i) {
        if (months[i] <= months[i - 1]) throw DataError("panel: months not increasing at " + months[i].iso());
    }
    if (!features.allFinite()) throw DataError("panel: non-finite feature value");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(excess_return[i]) || !std::isfinite(volatility[i]) ||
            !std::isfinite(prev_realized_variance[i])) {
            throw DataError("panel: non-finite target at " + months[i].iso());
        }
    }
}

PredictorPanel build_panel(const std::vector<RawSeries>& series, const DailyReturns& daily, PanelKind kind) {
    const auto& mkt = require(series, "mkt");
    const auto& rf = require(series, "rf");
    std::vector<const RawSeries*> macro;
    for (const auto& name : kMacro) macro.push_back(&require(series, name));
    const RawSeries* npy = kind == PanelKind::return_model ? &require(series, "npy") : nullptr;

    if (daily.empty()) throw InsufficientDataError("build_panel: no daily returns");

    // Common coverage of every input.
    MonthStamp first = std::max(mkt.first(), rf.first());
    MonthStamp last = std::min(mkt.last(), rf.last());
    for (const auto* s : macro) {
        first = std::max(first, s->first());
        last = std::min(last, s->last());
    }
    if (npy != nullptr) {
        first = std::max(first, npy->first());
        last = std::min(last, npy->last());
    }
    first = std::max(first, daily.groups().front().month);
    last = std::min(last, daily.groups().back().month);

    const int span = months_between(first, last);
    if (span <= 3) {
        throw InsufficientDataError("build_panel: common range " + first.iso() + ".." + last.iso() +
                                    " too short for three lags");
    }

    // Realized variance for every month in the common range.
    std::vector<double> rv(static_cast<std::size_t>(span));
    for (int i = 0; i < span; ++i) {
        const auto m = first.plus(i);
        const auto* group = daily.find(m);
        if (group == nullptr) {
            throw GapError(m.yyyymm(), "daily returns: no observations for " + m.iso());
        }
        rv[static_cast<std::size_t>(i)] = realized_variance(*group);
    }

    PredictorPanel panel;
    panel.kind = kind;
    panel.feature_names = panel_feature_names(kind);
    const auto rows = static_cast<std::size_t>(span - 3);
    panel.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(panel.feature_names.size()));

    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t i = r + 3;  // offset into the common range
        const MonthStamp t = first.plus(static_cast<int>(i));
        const MonthStamp t1 = t.prev();
        panel.months.push_back(t);
        const double excess = mkt.at(t) - rf.at(t);
        panel.excess_return.push_back(excess);
        panel.market_return.push_back(mkt.at(t));
        panel.riskfree.push_back(rf.at(t));
        panel.realized_variance.push_back(rv[i]);
        panel.volatility.push_back(std::sqrt(rv[i]));
        panel.prev_realized_variance.push_back(rv[i - 1]);

        const auto row = static_cast<Eigen::Index>(r);
        Eigen::Index c = 0;
        for (const auto* s : macro) panel.features(row, c++) = s->at(t1);
        panel.features(row, c++) = mkt.at(t1) - rf.at(t1);
        for (int lag = 1; lag <= 3; ++lag) {
            if (kind == PanelKind::return_model) {
                panel.features(row, c++) = npy->at(t.plus(-lag));
            } else {
                panel.features(row, c++) = std::sqrt(rv[i - static_cast<std::size_t>(lag)]);
            }
        }
    }
    panel.validate();
    return panel;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InsufficientDataError("quantile of empty set");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<std::size_t> trim_keep(std::span<const double> targets, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("trim quantile must lie in (0,1]");
    std::vector<std::size_t> keep;
    if (targets.empty()) return keep;
    std::vector<double> mags(targets.size());
    std::transform(targets.begin(), targets.end(), mags.begin(), [](double v) { return std::abs(v); });
    const double cutoff = q >= 1.0 ? *std::max_element(mags.begin(), mags.end()) : quantile(mags, q);
    keep.reserve(targets.size());
    for (std::size_t i = 0; i < mags.size(); ++i) {
        if (mags[i] <= cutoff) keep.push_back(i);
    }
    return keep;
}

PredictorPanel trim_outliers(const PredictorPanel& panel, double q) {
    const auto keep = trim_keep(panel.excess_return, q);
    return panel.select(keep);
}

SplitRanges split_ranges(const PredictorPanel& panel, const SplitSpec& spec) {
    if (!(spec.train_end < spec.validation_end && spec.validation_end < spec.test_end)) {
        throw RangeError("split: boundaries must satisfy train_end < validation_end < test_end");
    }
    if (panel.rows() == 0) throw RangeError("split: empty panel");
    const MonthStamp first = panel.months.front();
    const MonthStamp last = panel.months.back();
    if (spec.train_end < first || spec.test_end > last) {
        throw RangeError("split: boundaries " + spec.train_end.iso() + ".." + spec.test_end.iso() +
                         " outside panel range " + first.iso() + ".." + last.iso());
    }
    SplitRanges out;
    out.train = panel.range(first, spec.train_end);
    out.validation = panel.range(spec.train_end.next(), spec.validation_end);
    out.test = panel.range(spec.validation_end.next(), spec.test_end);
    if (out.train.empty() || out.validation.empty() || out.test.empty()) {
        throw RangeError("split: a partition is empty");
    }
    return out;
}

PanelSplit split(const PredictorPanel& panel, const SplitSpec& spec) {
    const auto r = split_ranges(panel, spec);
    return PanelSplit{panel.slice(r.train), panel.slice(r.validation), panel.slice(r.test)};
}

namespace {

const std::vector<std::string> kPanelColumns = {"excess_return", "volatility", "market_return", "riskfree",
                                                "realized_variance", "prev_realized_variance"};

}  // namespace

void write_panel(std::ostream& out, const PredictorPanel& panel) {
    panel.validate();
    out << "date";
    for (const auto& c : kPanelColumns) out << ',' << c;
    for (const auto& f : panel.feature_names) out << ',' << f;
    out << '\n';
    for (std::size_t i = 0; i < panel.rows(); ++i) {
        out << panel.months[i].yyyymm() << ',' << csv::exact(panel.excess_return[i]) << ','
            << csv::exact(panel.volatility[i]) << ',' << csv::exact(panel.market_return[i]) << ','
            << csv::exact(panel.riskfree[i]) << ',' << csv::exact(panel.realized_variance[i]) << ','
            << csv::exact(panel.prev_realized_variance[i]);
        for (Eigen::Index j = 0; j < panel.features.cols(); ++j) {
            out << ',' << csv::exact(panel.features(static_cast<Eigen::Index>(i), j));
        }
        out << '\n';
    }
}

PredictorPanel read_panel(std::istream& in, PanelKind kind, const std::string& source) {
    const auto table = csv::read(in, ',', source);
    const auto features = panel_feature_names(kind);
    std::vector<std::string> expected{"date"};
    expected.insert(expected.end(), kPanelColumns.begin(), kPanelColumns.end());
    expected.insert(expected.end(), features.begin(), features.end());
    for (std::size_t j = 0; j < expected.size(); ++j) {
        if (j >= table.header.size() || table.header[j] != expected[j]) {
            throw SchemaError(expected[j], source + " (" + to_string(kind) + " panel)");
        }
    }
    PredictorPanel p;
    p.kind = kind;
    p.feature_names = features;
    p.features.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(features.size()));
    std::vector<double>* columns[] = {&p.excess_return,    &p.volatility,       &p.market_return,
                                      &p.riskfree,         &p.realized_variance, &p.prev_realized_variance};
    Eigen::Index r = 0;
    for (const auto& row : table.rows) {
        if (row.fields.size() != expected.size()) {
            throw DataError(source + ":" + std::to_string(row.line) + ": expected " +
                            std::to_string(expected.size()) + " fields");
        }
        p.months.push_back(MonthStamp::parse(row.fields[0]));
        for (std::size_t c = 0; c < kPanelColumns.size(); ++c) {
            columns[c]->push_back(csv::parse_number(row.fields[1 + c], table, row));
        }
        for (std::size_t j = 0; j < features.size(); ++j) {
            p.features(r, static_cast<Eigen::Index>(j)) =
                csv::parse_number(row.fields[1 + kPanelColumns.size() + j], table, row);
        }
        ++r;
    }
    check_contiguous(p.months, source);
    p.validate();
    return p;
}

PredictorPanel read_panel_file(const std::string& path, PanelKind kind) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open panel file " + path);
    return read_panel(in, kind, path);
}

}  // namespace rrt
