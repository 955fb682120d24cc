#include "rrt/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "rrt/csv.hpp"
#include "rrt/errors.hpp"
#include "rrt/explain.hpp"

namespace rrt {

using nlohmann::json;
namespace fs = std::filesystem;

void Table::write_csv(std::ostream& out) const {
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        out << csv::exact(v);
                    } else {
                        out << v;
                    }
                },
                row[j]);
        }
        out << '\n';
    }
}

json Table::to_json() const {
    json rows_json = json::array();
    for (const auto& row : rows) {
        json r = json::array();
        for (const auto& cell : row) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        if (std::isfinite(v)) {
                            r.push_back(v);
                        } else {
                            r.push_back(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
                        }
                    } else {
                        r.push_back(v);
                    }
                },
                cell);
        }
        rows_json.push_back(std::move(r));
    }
    return json{{"columns", columns}, {"rows", rows_json}};
}

Table Table::from_json(const std::string& name, const json& j) {
    Table t;
    t.name = name;
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
        std::vector<Cell> row;
        for (const auto& c : r) {
            if (c.is_number_integer()) {
                row.emplace_back(c.get<std::int64_t>());
            } else if (c.is_number()) {
                row.emplace_back(c.get<double>());
            } else if (c.is_string()) {
                const auto s = c.get<std::string>();
                if (s == "nan") {
                    row.emplace_back(std::numeric_limits<double>::quiet_NaN());
                } else if (s == "inf") {
                    row.emplace_back(std::numeric_limits<double>::infinity());
                } else if (s == "-inf") {
                    row.emplace_back(-std::numeric_limits<double>::infinity());
                } else {
                    row.emplace_back(s);
                }
            } else {
                row.emplace_back(std::string());
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

namespace {

constexpr const char* kReturnPanelFile = "return_panel.csv";
constexpr const char* kVolatilityPanelFile = "volatility_panel.csv";

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    ensure_dir(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string seed_label(std::uint64_t seed) { return std::to_string(seed); }

json seeds_json(const std::vector<std::uint64_t>& seeds) {
    json out = json::array();
    for (auto s : seeds) out.push_back(std::to_string(s));
    return out;
}

ModelFamily family_of(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::forest: return ModelFamily::forest;
        case LearnerKind::elastic_net: return ModelFamily::elastic_net;
        case LearnerKind::ols: return ModelFamily::linear;
        default: break;
    }
    throw ConfigError(std::string("tuning grids accept forest, elastic_net and linear learners, not ") +
                      to_string(kind));
}

WalkOptions return_walk(const RunConfig& c) {
    WalkOptions w;
    w.trim_quantile = c.trim_quantile;
    w.refit_every = c.refit_every;
    w.threads = c.threads;
    return w;
}

WalkOptions volatility_walk(const RunConfig& c) {
    WalkOptions w;
    w.refit_every = c.refit_every;
    w.log_target = c.log_volatility_target;
    w.threads = c.threads;
    return w;
}

}  // namespace

Panels build_panels(const RunConfig& config) {
    if (config.monthly_path.empty()) throw ConfigError("data.monthly: path to the monthly file is not set");
    if (config.daily_path.empty()) throw ConfigError("data.daily: path to the daily file is not set");
    const auto series = load_monthly(config.monthly_path, config.monthly_schema);
    const auto daily = load_daily(config.daily_path, config.daily_schema);
    Panels p;
    p.returns = build_panel(series, daily, PanelKind::return_model);
    p.volatility = build_panel(series, daily, PanelKind::volatility_model);
    return p;
}

Panels load_panels(const RunConfig& config) {
    const fs::path dir = output_root(config) / "panels";
    for (const char* f : {kReturnPanelFile, kVolatilityPanelFile}) {
        if (!fs::exists(dir / f)) throw DependencyError("missing " + (dir / f).string() + "; run ingest first");
    }
    Panels p;
    p.returns = read_panel_file((dir / kReturnPanelFile).string(), PanelKind::return_model);
    p.volatility = read_panel_file((dir / kVolatilityPanelFile).string(), PanelKind::volatility_model);
    if (p.returns.months != p.volatility.months) {
        throw AlignmentError("return and volatility panels cover different months");
    }
    return p;
}

json cmd_ingest(const RunConfig& config, std::ostream& log) {
    const auto panels = build_panels(config);
    const fs::path dir = output_root(config) / "panels";
    json manifest{{"config_hash", config_hash(config)}};
    json inputs = json::object();
    inputs["monthly"] = {{"path", config.monthly_path}, {"fnv1a", fnv1a_hex(read_text(config.monthly_path))}};
    inputs["daily"] = {{"path", config.daily_path}, {"fnv1a", fnv1a_hex(read_text(config.daily_path))}};
    manifest["inputs"] = inputs;
    json list = json::array();
    for (const auto* panel : {&panels.returns, &panels.volatility}) {
        const std::string file = panel->kind == PanelKind::return_model ? kReturnPanelFile : kVolatilityPanelFile;
        std::ostringstream text;
        write_panel(text, *panel);
        write_text(dir / file, text.str());
        list.push_back({{"kind", to_string(panel->kind)},
                        {"file", file},
                        {"rows", panel->rows()},
                        {"first", panel->months.front().iso()},
                        {"last", panel->months.back().iso()},
                        {"features", panel->feature_names},
                        {"fnv1a", fnv1a_hex(text.str())}});
        log << "ingest: " << to_string(panel->kind) << " panel " << panel->rows() << " rows "
            << panel->months.front().iso() << ".." << panel->months.back().iso() << '\n';
    }
    manifest["panels"] = list;
    write_text(dir / "manifest.json", dump(manifest));
    return manifest;
}

json cmd_tune(const RunConfig& config, std::ostream& log) {
    const auto panels = load_panels(config);
    const auto ranges = split_ranges(panels.returns, config.split);
    json out{{"config_hash", config_hash(config)},
             {"seeds", seeds_json(config.seeds())},
             {"validation",
              {{"first", panels.returns.months[ranges.validation.begin].iso()},
               {"last", panels.returns.months[ranges.validation.end - 1].iso()}}},
             {"benchmark", to_string(config.benchmark)}};
    json selections = json::object();
    json candidates = json::object();

    for (const bool volatility : {false, true}) {
        const std::string target = volatility ? "volatility" : "return";
        const auto& grid = volatility ? config.volatility_grid : config.return_grid;
        if (grid.empty()) throw ConfigError("tuning." + target + ": empty grid");
        for (const auto& c : grid) (void)family_of(kind_of(c));
        TuningOptions options;
        options.walk = volatility ? volatility_walk(config) : return_walk(config);
        options.benchmark = config.benchmark;
        options.seeds = config.seeds();
        options.threads = 1;
        const auto& panel = volatility ? panels.volatility : panels.returns;
        log << "tune: " << target << " grid of " << grid.size() << " candidates\n";
        const auto results = tune(panel, TuningGrid{grid}, ranges.validation, options);
        json sel = json::object();
        json cand = json::array();
        for (const auto& r : results) {
            const auto family = family_of(r.kind);
            sel[to_string(family)] = {{"config", learner_to_json(r.best)}, {"validation_r2", r.best_score}};
            log << "tune: " << target << ' ' << to_string(family) << " -> " << describe(r.best)
                << " R2=" << r.best_score << '\n';
            for (const auto& s : r.scores) {
                json entry{{"config", learner_to_json(s.config)}};
                if (s.error.empty()) {
                    entry["validation_r2"] = s.score;
                    entry["per_seed"] = s.per_seed;
                } else {
                    entry["error"] = s.error;
                }
                cand.push_back(entry);
            }
        }
        selections[target] = sel;
        candidates[target] = cand;
    }
    out["selections"] = selections;
    out["candidates"] = candidates;
    write_text(output_root(config) / "tune" / "tuned.json", dump(out));
    return out;
}

ResolvedModels resolve_models(const RunConfig& config) {
    ResolvedModels m;
    if (config.model_source == "fixed") {
        m.source = "fixed";
        for (auto f : config.families) {
            m.returns[f] = config.return_models.get(f);
            m.volatility[f] = config.volatility_models.get(f);
        }
        return m;
    }
    const fs::path path = output_root(config) / "tune" / "tuned.json";
    if (!fs::exists(path)) throw DependencyError("model_source is 'tuned' but " + path.string() + " is missing; run tune");
    const json tuned = read_json(path);
    m.source = "tuned:" + tuned.value("config_hash", std::string("unknown"));
    for (auto f : config.families) {
        for (const std::string target : {"return", "volatility"}) {
            const auto& sel = tuned.at("selections").at(target);
            if (!sel.contains(to_string(f))) {
                throw DependencyError(std::string("tuned.json has no ") + to_string(f) + " selection for " + target);
            }
            auto cfg = learner_from_json(sel.at(to_string(f)).at("config"));
            (target == "return" ? m.returns : m.volatility)[f] = cfg;
        }
    }
    return m;
}

namespace {

using Metrics = std::map<std::string, double>;

struct StrategyItem {
    StrategyId id;
    const ForecastSeries* forecasts = nullptr;
    std::string seed;  // "all" for strategies without seed dependence
    std::string group;
};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

// Runs `fn`, recording undefined statistics as NaN with a note.
template <class Fn>
void guarded(Fn fn, const std::string& what, std::vector<std::string>& notes) {
    try {
        fn();
    } catch (const UndefinedError& e) {
        notes.push_back(what + ": " + e.what());
    } catch (const SingularityError& e) {
        notes.push_back(what + ": " + e.what());
    }
}

Metrics strategy_metrics(const PortfolioPath& path, double gamma, double cap, const std::vector<double>& costs,
                         const std::string& what, std::vector<std::string>& notes) {
    Metrics m;
    for (const char* k : {"annual_return", "annual_std", "sharpe", "max_drawdown", "mean_utility", "ce_annual",
                          "terminal_wealth", "alpha_annual", "alpha_se_annual", "alpha_t", "beta", "r_squared",
                          "n_obs", "hm_gamma", "hm_t", "tm_gamma", "tm_t", "mean_turnover", "break_even_bps"}) {
        m[k] = nan();
    }
    for (double c : costs) m["alpha_at_" + csv::fixed(c, 0) + "bps"] = nan();

    guarded(
        [&] {
            const auto s = sharpe(path);
            m["annual_return"] = s.annual_return;
            m["annual_std"] = s.annual_std;
            m["sharpe"] = s.sharpe;
        },
        what + " sharpe", notes);
    m["annual_return"] = 12.0 * [&] {
        double sum = 0.0;
        for (double r : path.strategy_return) sum += r;
        return sum / static_cast<double>(path.size());
    }();
    m["max_drawdown"] = drawdown(path.wealth).max_drawdown;
    const auto u = utility_metrics(path, gamma);
    m["mean_utility"] = u.mean_utility;
    m["ce_annual"] = u.ce_annual;
    m["terminal_wealth"] = u.terminal_wealth;

    const auto fa = path.excess_returns();
    const auto fb = path.market_excess();
    guarded(
        [&] {
            const auto a = alpha_regression(fa, fb);
            m["alpha_annual"] = a.annual_alpha();
            m["alpha_se_annual"] = a.annual_alpha_se();
            m["alpha_t"] = a.t_stats(0);
            m["beta"] = a.beta();
            m["r_squared"] = a.r_squared;
            m["n_obs"] = static_cast<double>(a.n_obs);
        },
        what + " alpha", notes);
    guarded(
        [&] {
            const auto h = hm_test(fa, fb);
            m["hm_gamma"] = h.timing();
            m["hm_t"] = h.timing_t();
        },
        what + " HM", notes);
    guarded(
        [&] {
            const auto t = tm_test(fa, fb);
            m["tm_gamma"] = t.timing();
            m["tm_t"] = t.timing_t();
        },
        what + " TM", notes);
    guarded(
        [&] {
            const auto row = cost_analysis(path, cap, costs);
            m["mean_turnover"] = row.mean_turnover;
            m["break_even_bps"] = row.break_even_bps;
            for (std::size_t i = 0; i < costs.size(); ++i) {
                m["alpha_at_" + csv::fixed(costs[i], 0) + "bps"] = row.post_cost_alpha[i];
            }
        },
        what + " costs", notes);
    return m;
}

Metrics mean_metrics(const std::vector<Metrics>& runs) {
    Metrics out;
    for (const auto& [k, v] : runs.front()) {
        double sum = 0.0;
        for (const auto& r : runs) sum += r.at(k);
        out[k] = sum / static_cast<double>(runs.size());
    }
    return out;
}

std::string bound_text(double v) { return csv::fixed(v, 2); }

}  // namespace

BacktestResult run_backtest(const Panels& panels, const RunConfig& config, const ResolvedModels& models,
                            std::ostream& log) {
    const auto& R = panels.returns;
    const auto& V = panels.volatility;
    if (R.months != V.months) throw AlignmentError("return and volatility panels cover different months");
    const auto ranges = split_ranges(R, config.split);
    const RowRange test = ranges.test;
    const auto seeds = config.seeds();
    std::vector<std::string> notes;

    BacktestResult result;

    // Forecasts.
    struct FamilyRun {
        ModelFamily family;
        std::vector<std::string> seed_labels;
        std::vector<TargetForecast> returns;
        std::vector<TargetForecast> volatility;
        std::vector<ForecastSeries> combined;
    };
    std::vector<FamilyRun> runs;
    for (auto family : config.families) {
        FamilyRun run{family, {}, {}, {}, {}};
        const bool seeded = family == ModelFamily::forest;
        const std::vector<std::uint64_t> run_seeds = seeded ? seeds : std::vector<std::uint64_t>{0};
        for (auto seed : run_seeds) {
            log << "backtest: " << to_string(family) << (seeded ? " seed " + seed_label(seed) : "") << '\n';
            run.returns.push_back(
                walk_forecast(R, with_seed(models.returns.at(family), seed), test, return_walk(config)));
            run.volatility.push_back(
                walk_forecast(V, with_seed(models.volatility.at(family), seed), test, volatility_walk(config)));
            run.seed_labels.push_back(seeded ? seed_label(seed) : "all");
        }
        for (std::size_t i = 0; i < run.returns.size(); ++i) {
            run.combined.push_back(combine_forecasts(&run.returns[i], &run.volatility[i], to_string(family),
                                                     seeded ? run_seeds[i] : 0));
        }
        runs.push_back(std::move(run));
    }
    WalkOptions plain;
    plain.refit_every = config.refit_every;
    const auto prevailing = walk_forecast(R, PrevailingMeanConfig{}, test, plain);
    const auto previous = walk_forecast(V, PreviousVolatilityConfig{}, test, plain);

    for (const auto& run : runs) {
        for (const auto& c : run.combined) result.forecasts.push_back(c);
    }
    result.forecasts.push_back(combine_forecasts(&prevailing, &previous, "baseline", 0));

    // Forecast accuracy.
    Table accuracy{"accuracy", {"model", "target", "seed", "r_squared", "directional_accuracy", "n"}, {}};
    auto add_accuracy = [&](const std::string& model, const std::string& target, const std::string& seed,
                            double r2, double da, std::size_t n) {
        accuracy.rows.push_back({model, target, seed, r2, da, static_cast<std::int64_t>(n)});
    };
    auto accuracy_rows = [&](const std::string& model, const std::vector<TargetForecast>& fs,
                             const std::vector<std::string>& labels, const PredictorPanel& panel,
                             const std::string& target, DirectionMode mode) {
        double r2_sum = 0.0;
        double da_sum = 0.0;
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const auto rep = evaluate(fs[i], panel, config.benchmark, mode);
            add_accuracy(model, target, labels[i], rep.r_squared, rep.directional_accuracy, rep.n_forecasts);
            r2_sum += rep.r_squared;
            da_sum += rep.directional_accuracy;
        }
        if (fs.size() > 1) {
            const double k = static_cast<double>(fs.size());
            add_accuracy(model, target, "mean", r2_sum / k, da_sum / k, fs.front().values.size());
        }
    };
    accuracy_rows("prevailing_mean", {prevailing}, {"all"}, R, "return", DirectionMode::sign);
    for (const auto& run : runs) {
        accuracy_rows(to_string(run.family), run.returns, run.seed_labels, R, "return", DirectionMode::sign);
    }
    accuracy_rows("previous_volatility", {previous}, {"all"}, V, "volatility", DirectionMode::vs_mean);
    for (const auto& run : runs) {
        accuracy_rows(to_string(run.family), run.volatility, run.seed_labels, V, "volatility",
                      DirectionMode::vs_mean);
    }

    // Strategies.
    std::vector<std::string> cost_columns;
    for (double c : config.costs_bps) cost_columns.push_back("alpha_at_" + csv::fixed(c, 0) + "bps");
    const std::vector<std::string> key{"strategy", "gamma", "low", "high", "seed"};
    auto with_key = [&](std::vector<std::string> cols) {
        std::vector<std::string> out = key;
        out.insert(out.end(), cols.begin(), cols.end());
        return out;
    };
    Table performance{"performance", with_key({"annual_return", "annual_std", "sharpe", "max_drawdown"}), {}};
    Table utility_table{"utility", with_key({"mean_utility", "ce_annual", "terminal_wealth"}), {}};
    Table alphas{"alphas", with_key({"alpha_annual", "alpha_se_annual", "alpha_t", "beta", "r_squared", "n_obs"}), {}};
    Table timing{"timing", with_key({"hm_gamma", "hm_t", "tm_gamma", "tm_t"}), {}};
    std::vector<std::string> cost_cols{"mean_turnover", "annual_return", "alpha_annual"};
    cost_cols.insert(cost_cols.end(), cost_columns.begin(), cost_columns.end());
    cost_cols.push_back("break_even_bps");
    Table costs{"costs", with_key(cost_cols), {}};
    result.paths = Table{"paths",
                         {"date", "strategy", "gamma", "low", "high", "seed", "weight", "strategy_return", "wealth",
                          "drawdown"},
                         {}};

    auto emit = [&](const std::string& label, double gamma, WeightBounds b, const std::string& seed,
                    const Metrics& m) {
        const std::vector<Table::Cell> k{label, gamma, b.low, b.high, seed};
        auto row = [&](Table& t) {
            std::vector<Table::Cell> r = k;
            for (std::size_t j = key.size(); j < t.columns.size(); ++j) r.emplace_back(m.at(t.columns[j]));
            t.rows.push_back(std::move(r));
        };
        row(performance);
        row(utility_table);
        row(alphas);
        row(timing);
        row(costs);
    };

    for (double gamma : config.gammas) {
        for (const auto& b : config.bounds) {
            std::vector<StrategyItem> items;
            items.push_back({StrategyId::buy_and_hold(), nullptr, "all", "Mkt"});
            items.push_back({StrategyId::base(), nullptr, "all", "Base"});
            for (const auto& run : runs) {
                for (const auto& make : {&StrategyId::optimal, &StrategyId::returns_only, &StrategyId::volatility_only}) {
                    const auto id = make(run.family);
                    for (std::size_t i = 0; i < run.combined.size(); ++i) {
                        items.push_back({id, &run.combined[i], run.seed_labels[i], id.label});
                    }
                }
            }
            std::vector<WeightSeries> weight_series;
            std::map<std::string, std::vector<Metrics>> grouped;
            std::vector<std::string> group_order;
            for (const auto& item : items) {
                auto w = strategy_weights(item.id, item.forecasts, R, test, gamma, b);
                if (item.seed != "all") w.label = item.id.label + "#" + item.seed;
                const auto path = portfolio_path(w, R);
                const std::string what = w.label + " gamma=" + csv::fixed(gamma, 2) + " bounds=" +
                                         bound_text(b.low) + ".." + bound_text(b.high);
                const auto m = strategy_metrics(path, gamma, b.high, config.costs_bps, what, notes);
                emit(item.id.label, gamma, b, item.seed, m);
                if (!grouped.contains(item.group)) group_order.push_back(item.group);
                grouped[item.group].push_back(m);

                const auto dd = drawdown(path.wealth);
                for (std::size_t i = 0; i < path.size(); ++i) {
                    result.paths.rows.push_back({std::to_string(path.months[i].yyyymm()), item.id.label, gamma, b.low,
                                                 b.high, item.seed, path.weights[i], path.strategy_return[i],
                                                 path.wealth[i], dd.drawdown[i]});
                }
                weight_series.push_back(std::move(w));
            }
            for (const auto& g : group_order) {
                if (grouped[g].size() > 1) emit(g, gamma, b, "mean", mean_metrics(grouped[g]));
            }
            result.weights.emplace_back("weights_g" + csv::fixed(gamma, 2) + "_b" + bound_text(b.low) + "-" +
                                            bound_text(b.high),
                                        std::move(weight_series));
        }
    }

    // Reference volatility-timing weights scaled to buy-and-hold risk.
    result.vol_timing = Table{"vol_timing", {"date", "gamma", "base_weight", "vol_timing_weight", "difference"}, {}};
    json vol_notes = json::array();
    {
        const auto& b = config.bounds.front();
        std::vector<double> mkt_excess(R.excess_return.begin() + static_cast<std::ptrdiff_t>(test.begin),
                                       R.excess_return.begin() + static_cast<std::ptrdiff_t>(test.end));
        double mean = 0.0;
        for (double x : mkt_excess) mean += x;
        mean /= static_cast<double>(mkt_excess.size());
        double ss = 0.0;
        for (double x : mkt_excess) ss += (x - mean) * (x - mean);
        const double target = std::sqrt(ss / static_cast<double>(mkt_excess.size() - 1));
        const auto vt = vol_timing_constant_weights(R, test, target, b);
        vol_notes.push_back({{"constant", vt.constant}, {"achieved_std", vt.achieved_std}, {"target_std", target},
                             {"exact", vt.exact}, {"low", b.low}, {"high", b.high}});
        if (!vt.exact) notes.push_back("vol timing: target standard deviation not reachable under the bounds");
        for (double gamma : config.gammas) {
            const auto base = base_weights(R, test, gamma, b);
            for (std::size_t i = 0; i < base.months.size(); ++i) {
                const double v = vt.weights.weights[i];
                result.vol_timing.rows.push_back(
                    {std::to_string(base.months[i].yyyymm()), gamma, base.weights[i], v, v - base.weights[i]});
            }
        }
    }

    result.tables = {accuracy, performance, utility_table, alphas, timing, costs};

    json model_json = json::object();
    for (auto f : config.families) {
        model_json[to_string(f)] = {{"return", learner_to_json(models.returns.at(f))},
                                    {"volatility", learner_to_json(models.volatility.at(f))}};
    }
    json tables = json::object();
    for (const auto& t : result.tables) tables[t.name] = t.to_json();
    result.report = json{
        {"provenance",
         {{"config_hash", config_hash(config)},
          {"seeds", seeds_json(seeds)},
          {"model_source", models.source},
          {"models", model_json},
          {"benchmark", to_string(config.benchmark)},
          {"data_range",
           {{"panel_first", R.months.front().iso()},
            {"panel_last", R.months.back().iso()},
            {"test_first", R.months[test.begin].iso()},
            {"test_last", R.months[test.end - 1].iso()},
            {"test_months", test.size()}}}}},
        {"tables", tables},
        {"vol_timing", vol_notes},
        {"notes", notes},
        {"footnotes",
         json::array({"annual_return in the costs table is gross of trading costs",
                      "costs are charged on risky-weight turnover from the second test month onward"})},
    };
    return result;
}

json cmd_backtest(const RunConfig& config, std::ostream& log) {
    const auto panels = load_panels(config);
    const auto models = resolve_models(config);
    const auto result = run_backtest(panels, config, models, log);
    const fs::path dir = output_root(config) / "backtest";
    const std::string stamp = config_hash(config);

    auto write_table = [&](const Table& t) {
        std::ostringstream text;
        text << "# config_hash " << stamp << '\n';
        t.write_csv(text);
        write_text(dir / (t.name + ".csv"), text.str());
    };
    for (const auto& t : result.tables) write_table(t);
    write_table(result.paths);
    write_table(result.vol_timing);
    {
        std::ostringstream text;
        text << "# config_hash " << stamp << '\n';
        write_forecasts(text, result.forecasts);
        write_text(dir / "forecasts.csv", text.str());
    }
    for (const auto& [stem, series] : result.weights) {
        std::ostringstream text;
        text << "# config_hash " << stamp << '\n';
        write_weights(text, series);
        write_text(dir / (stem + ".csv"), text.str());
    }
    write_text(dir / "report.json", dump(result.report));
    log << "backtest: wrote " << (dir / "report.json").string() << '\n';
    return result.report;
}

json cmd_explain(const RunConfig& config, const std::string& model_ref, std::ostream& log) {
    const auto colon = model_ref.find(':');
    const std::string family_text = model_ref.substr(0, colon);
    const std::string target = colon == std::string::npos ? "" : model_ref.substr(colon + 1);
    ModelFamily family = ModelFamily::none;
    try {
        family = parse_family(family_text);
    } catch (const LookupError&) {
        throw LookupError("unknown model reference '" + model_ref + "' (expected family:target, e.g. forest:return)");
    }
    if (target != "return" && target != "volatility") {
        throw LookupError("unknown model reference '" + model_ref + "': target must be return or volatility");
    }
    if (std::find(config.families.begin(), config.families.end(), family) == config.families.end()) {
        throw LookupError("model family '" + family_text + "' is not enabled in this configuration");
    }

    const auto panels = load_panels(config);
    const auto models = resolve_models(config);
    const bool volatility = target == "volatility";
    const auto& panel = volatility ? panels.volatility : panels.returns;
    const auto ranges = split_ranges(panel, config.split);
    const MonthStamp first = config.explain_first.value_or(panel.months[ranges.test.begin]);
    const MonthStamp last = config.explain_last.value_or(panel.months[ranges.test.end - 1]);
    const RowRange rows = panel.range(first, last);
    if (rows.empty() || rows.begin == 0) throw RangeError("explain: month range has no rows with training history");

    // One fit on all history before the range, as the first walk-forward refit would see it.
    Dataset train;
    std::vector<double> logged;
    const std::vector<double>* target_values = &panel.target();
    if (volatility && config.log_volatility_target) {
        for (double s : panel.target()) logged.push_back(std::log(std::max(s, kVolatilityFloor) * std::max(s, kVolatilityFloor)));
        target_values = &logged;
    }
    if (!volatility && config.trim_quantile) {
        const auto keep = trim_keep(std::span<const double>(panel.target().data(), rows.begin), *config.trim_quantile);
        train = Dataset::from_panel(panel, keep, *target_values);
    } else {
        train = Dataset::from_panel(panel, RowRange{0, rows.begin}, *target_values);
    }
    const auto learner = with_seed((volatility ? models.volatility : models.returns).at(family), config.seeds().front());
    const Model model = fit(learner, train, FitOptions{config.threads});
    const auto reference = column_means(train.features);
    const Eigen::MatrixXd query = panel.features.middleRows(static_cast<Eigen::Index>(rows.begin),
                                                            static_cast<Eigen::Index>(rows.size()));
    ShapOptions options;
    options.samples = config.shap_samples;
    options.seed = config.seeds().front();
    log << "explain: " << model_ref << " over " << rows.size() << " months\n";
    const auto summary =
        mean_attributions([&](std::span<const double> x) { return model.predict(x); }, query, reference,
                          panel.feature_names, model_ref, options, config.threads);

    const fs::path dir = output_root(config) / "explain";
    const std::string stem = to_string(family) + std::string("_") + target;
    {
        std::ostringstream text;
        text << "# config_hash " << config_hash(config) << '\n';
        write_attributions(text, std::span<const AttributionSummary>(&summary, 1));
        write_text(dir / (stem + ".csv"), text.str());
    }
    json features = json::array();
    for (std::size_t j = 0; j < summary.features.size(); ++j) {
        features.push_back({{"feature", summary.features[j]},
                            {"mean_phi", summary.mean_phi[j]},
                            {"mean_abs_phi", summary.mean_abs_phi[j]},
                            {"mean_positive", summary.mean_positive[j]},
                            {"mean_negative", summary.mean_negative[j]}});
    }
    json out{{"config_hash", config_hash(config)},
             {"model", model_ref},
             {"learner", learner_to_json(learner)},
             {"seed", std::to_string(options.seed)},
             {"samples", options.samples},
             {"first", first.iso()},
             {"last", last.iso()},
             {"rows", summary.rows},
             {"training_rows", train.rows()},
             {"output_space", volatility && config.log_volatility_target ? "log_variance" : target},
             {"features", features}};
    write_text(dir / (stem + ".json"), dump(out));
    return out;
}

void cmd_report(const RunConfig& config, std::ostream& out, std::ostream& log) {
    const fs::path path = output_root(config) / "backtest" / "report.json";
    if (!fs::exists(path)) throw DependencyError("missing " + path.string() + "; run backtest first");
    const json report = read_json(path);
    const auto& prov = report.at("provenance");
    const std::string stored = prov.at("config_hash").get<std::string>();
    const std::string current = config_hash(config);
    if (stored != current) {
        log << "report: warning: stored config hash " << stored << " differs from current " << current << '\n';
    }
    std::ostringstream text;
    text << "config_hash " << stored << '\n';
    text << "seeds";
    for (const auto& s : prov.at("seeds")) text << ' ' << s.get<std::string>();
    text << '\n';
    const auto& range = prov.at("data_range");
    text << "test " << range.at("test_first").get<std::string>() << ".." << range.at("test_last").get<std::string>()
         << " (" << range.at("test_months").get<std::size_t>() << " months)\n";
    for (const char* name : {"accuracy", "performance", "utility", "alphas", "timing", "costs"}) {
        if (!report.at("tables").contains(name)) continue;
        const auto t = Table::from_json(name, report.at("tables").at(name));
        std::vector<std::vector<std::string>> cells;
        cells.push_back(t.columns);
        for (const auto& row : t.rows) {
            std::vector<std::string> r;
            for (const auto& c : row) {
                if (const auto* d = std::get_if<double>(&c)) {
                    r.push_back(csv::fixed(*d, 4));
                } else if (const auto* i = std::get_if<std::int64_t>(&c)) {
                    r.push_back(std::to_string(*i));
                } else {
                    r.push_back(std::get<std::string>(c));
                }
            }
            cells.push_back(std::move(r));
        }
        std::vector<std::size_t> width(t.columns.size(), 0);
        for (const auto& r : cells) {
            for (std::size_t j = 0; j < r.size() && j < width.size(); ++j) width[j] = std::max(width[j], r[j].size());
        }
        text << '\n' << '[' << name << "]\n";
        for (const auto& r : cells) {
            for (std::size_t j = 0; j < r.size(); ++j) {
                text << (j ? "  " : "") << r[j] << std::string(width[j] - r[j].size(), ' ');
            }
            text << '\n';
        }
    }
    if (!report.at("notes").empty()) {
        text << "\nnotes\n";
        for (const auto& n : report.at("notes")) text << "  " << n.get<std::string>() << '\n';
    }
    write_text(output_root(config) / "backtest" / "report.txt", text.str());
    out << text.str();
}

}  // namespace rrt
