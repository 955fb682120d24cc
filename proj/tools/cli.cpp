#include "cli.hpp"

#include <CLI11.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "rrt/config.hpp"
#include "rrt/errors.hpp"
#include "rrt/pipeline.hpp"

namespace rrt {

namespace {

int exit_code(ErrorFamily family) {
    switch (family) {
        case ErrorFamily::config: return 2;
        case ErrorFamily::data: return 3;
        case ErrorFamily::numerical: return 4;
    }
    return 1;
}

const char* family_name(ErrorFamily family) {
    switch (family) {
        case ErrorFamily::config: return "config";
        case ErrorFamily::data: return "data";
        case ErrorFamily::numerical: return "numerical";
    }
    return "unknown";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Walk-forward reward-risk timing backtests with from-scratch learners"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "JSON run configuration (defaults apply when omitted)");
    app.add_option("-s,--set", overrides, "Override a config key, e.g. --set split.test_end=2019-12")
        ->take_all()
        ->allow_extra_args(false);

    auto* ingest = app.add_subcommand("ingest", "Build the return and volatility panels from raw files");
    auto* tune = app.add_subcommand("tune", "Select hyperparameters by validation R^2");
    auto* backtest = app.add_subcommand("backtest", "Run the holdout backtest and write all tables");
    auto* explain = app.add_subcommand("explain", "Mean Kernel SHAP attributions for one model");
    auto* report = app.add_subcommand("report", "Print the stored backtest report");

    std::string model_ref;
    std::string from;
    std::string to;
    explain->add_option("-m,--model", model_ref, "Model reference family:target, e.g. forest:return")->required();
    explain->add_option("--from", from, "First month (yyyy-mm)");
    explain->add_option("--to", to, "Last month (yyyy-mm)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!from.empty()) overrides.push_back("shap.first=\"" + from + "\"");
        if (!to.empty()) overrides.push_back("shap.last=\"" + to + "\"");
        const RunConfig config = load_config(config_path, overrides);
        nlohmann::json summary;
        if (ingest->parsed()) {
            summary = cmd_ingest(config, err);
        } else if (tune->parsed()) {
            summary = cmd_tune(config, err);
        } else if (backtest->parsed()) {
            const auto r = cmd_backtest(config, err);
            summary = r.at("provenance");
        } else if (explain->parsed()) {
            summary = cmd_explain(config, model_ref, err);
        } else if (report->parsed()) {
            cmd_report(config, out, err);
            return 0;
        }
        out << summary.dump(2) << '\n';
        return 0;
    } catch (const Error& e) {
        err << "error (" << family_name(e.family()) << "): " << e.what() << '\n';
        return exit_code(e.family());
    } catch (const nlohmann::json::exception& e) {
        err << "error (config): " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace rrt
