#include "rrt/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "rrt/errors.hpp"
#include "rrt/random.hpp"

namespace rrt {

using nlohmann::json;

LearnerConfig ModelSet::get(ModelFamily family) const {
    switch (family) {
        case ModelFamily::forest: return forest;
        case ModelFamily::elastic_net: return elastic_net;
        case ModelFamily::linear: return linear;
        case ModelFamily::none: break;
    }
    throw LookupError("no learner for model family 'none'");
}

ModelSet return_model_set() {
    return ModelSet{ForestConfig::return_model_defaults(), ElasticNetConfig::return_model_defaults(), OlsConfig{}};
}

ModelSet volatility_model_set() {
    return ModelSet{ForestConfig::volatility_model_defaults(), ElasticNetConfig::volatility_model_defaults(),
                    OlsConfig{}};
}

std::vector<std::uint64_t> RunConfig::seeds() const {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < seed_count; ++i) out.push_back(make_stream(master_seed, i)());
    return out;
}

void RunConfig::validate() const {
    if (gammas.empty()) throw ConfigError("gammas: at least one risk aversion required");
    for (double g : gammas) {
        if (!(g > 0.0)) throw ConfigError("gammas: values must be positive");
    }
    if (bounds.empty()) throw ConfigError("bounds: at least one pair required");
    for (const auto& b : bounds) {
        if (!(b.low <= b.high)) throw ConfigError("bounds: low must not exceed high");
    }
    if (trim_quantile && !(*trim_quantile > 0.0 && *trim_quantile <= 1.0)) {
        throw ConfigError("trim_quantile: must lie in (0, 1]");
    }
    if (seed_count == 0) throw ConfigError("seeds.count: must be positive");
    for (double c : costs_bps) {
        if (!(c >= 0.0)) throw ConfigError("costs_bps: values must be non-negative");
    }
    if (refit_every == 0) throw ConfigError("refit_every: must be positive");
    if (families.empty()) throw ConfigError("families: at least one model family required");
    if (model_source != "fixed" && model_source != "tuned") {
        throw ConfigError("model_source: expected 'fixed' or 'tuned'");
    }
    if (shap_samples == 0) throw ConfigError("shap.samples: must be positive");
    if (explain_first && explain_last && *explain_last < *explain_first) {
        throw ConfigError("explain: last month precedes first month");
    }
    if (!(split.train_end < split.validation_end && split.validation_end < split.test_end)) {
        throw ConfigError("split: boundaries must be increasing");
    }
    for (const ModelSet* set : {&return_models, &volatility_models}) {
        set->elastic_net.validate();
        if (set->forest.n_trees == 0 || set->forest.m_try == 0 || set->forest.max_leaves < 2 ||
            !(set->forest.min_node_fraction >= 0.0 && set->forest.min_node_fraction <= 1.0)) {
            throw ConfigError("models: invalid forest configuration " + describe(set->forest));
        }
    }
}

std::vector<LearnerConfig> default_return_grid() {
    std::vector<LearnerConfig> grid;
    for (double smin : {0.95, 0.5}) {
        for (std::size_t kmax : {2, 4}) {
            ForestConfig f = ForestConfig::return_model_defaults();
            f.min_node_fraction = smin;
            f.max_leaves = kmax;
            grid.emplace_back(f);
        }
    }
    for (double lambda : {0.01, 0.07, 0.3}) {
        for (double alpha : {0.1, 0.5}) {
            ElasticNetConfig e = ElasticNetConfig::return_model_defaults();
            e.lambda = lambda;
            e.alpha = alpha;
            grid.emplace_back(e);
        }
    }
    grid.emplace_back(OlsConfig{});
    return grid;
}

std::vector<LearnerConfig> default_volatility_grid() {
    std::vector<LearnerConfig> grid;
    for (double smin : {0.01, 0.05}) {
        for (std::size_t kmax : {6, 12}) {
            ForestConfig f = ForestConfig::volatility_model_defaults();
            f.min_node_fraction = smin;
            f.max_leaves = kmax;
            grid.emplace_back(f);
        }
    }
    for (double lambda : {0.01, 0.07, 0.3}) {
        for (double alpha : {0.1, 0.5}) {
            ElasticNetConfig e = ElasticNetConfig::volatility_model_defaults();
            e.lambda = lambda;
            e.alpha = alpha;
            grid.emplace_back(e);
        }
    }
    grid.emplace_back(OlsConfig{});
    return grid;
}

namespace {

// Reads typed keys from one JSON object and rejects anything left over.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
        if (!j_.is_object()) throw ConfigError(context_ + ": expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(context_ + "." + key + ": wrong type");
        }
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) throw ConfigError(context_ + ": unknown key '" + key + "'");
        }
    }

    [[nodiscard]] const std::string& context() const noexcept { return context_; }

private:
    const json& j_;
    std::string context_;
    std::set<std::string> seen_;
};

MonthStamp month_from_json(const json& j, const std::string& context) {
    try {
        if (j.is_number_integer()) return MonthStamp::from_yyyymm(j.get<int>());
        if (j.is_string()) return MonthStamp::parse(j.get<std::string>());
    } catch (const Error&) {
    }
    throw ConfigError(context + ": expected a month as yyyymm or \"yyyy-mm\"");
}

char delimiter_from(const std::string& text, const std::string& context) {
    if (text == "\\t" || text == "tab") return '\t';
    if (text.size() != 1) throw ConfigError(context + ": delimiter must be a single character");
    return text[0];
}

std::string delimiter_to(char c) { return c == '\t' ? "tab" : std::string(1, c); }

json forest_to_json(const ForestConfig& f) {
    return json{{"learner", "forest"},         {"n_trees", f.n_trees},       {"m_try", f.m_try},
                {"min_node_fraction", f.min_node_fraction}, {"max_leaves", f.max_leaves},
                {"bootstrap", f.bootstrap}};
}

json elastic_net_to_json(const ElasticNetConfig& e) {
    return json{{"learner", "elastic_net"},       {"lambda", e.lambda},       {"alpha", e.alpha},
                {"max_iterations", e.max_iterations}, {"tolerance", e.tolerance}, {"standardize", e.standardize}};
}

json model_set_to_json(const ModelSet& s) {
    return json{{"forest", forest_to_json(s.forest)},
                {"elastic_net", elastic_net_to_json(s.elastic_net)},
                {"linear", learner_to_json(s.linear)}};
}

template <class T>
T expect_learner(const json& j, const std::string& context, const std::string& kind) {
    json copy = j;
    if (copy.is_object() && !copy.contains("learner")) copy["learner"] = kind;
    const auto config = learner_from_json(copy);
    if (const auto* c = std::get_if<T>(&config)) return *c;
    throw ConfigError(context + ": learner kind does not match the key");
}

void model_set_from_json(const json& j, ModelSet& set, const std::string& context) {
    ObjectReader r(j, context);
    if (r.has("forest")) set.forest = expect_learner<ForestConfig>(r.at("forest"), context + ".forest", "forest");
    if (r.has("elastic_net")) {
        set.elastic_net = expect_learner<ElasticNetConfig>(r.at("elastic_net"), context + ".elastic_net", "elastic_net");
    }
    if (r.has("linear")) set.linear = expect_learner<OlsConfig>(r.at("linear"), context + ".linear", "linear");
    r.finish();
}

std::vector<LearnerConfig> grid_from_json(const json& j, const std::string& context) {
    if (!j.is_array()) throw ConfigError(context + ": expected an array of learner objects");
    std::vector<LearnerConfig> grid;
    for (const auto& item : j) grid.push_back(learner_from_json(item));
    return grid;
}

json grid_to_json(const std::vector<LearnerConfig>& grid) {
    json out = json::array();
    for (const auto& c : grid) out.push_back(learner_to_json(c));
    return out;
}

}  // namespace

json learner_to_json(const LearnerConfig& config) {
    if (const auto* f = std::get_if<ForestConfig>(&config)) return forest_to_json(*f);
    if (const auto* e = std::get_if<ElasticNetConfig>(&config)) return elastic_net_to_json(*e);
    if (const auto* o = std::get_if<OlsConfig>(&config)) {
        return json{{"learner", "linear"}, {"ridge_fallback", o->ridge_fallback}};
    }
    if (std::holds_alternative<PrevailingMeanConfig>(config)) return json{{"learner", "prevailing_mean"}};
    const auto& p = std::get<PreviousVolatilityConfig>(config);
    return json{{"learner", "previous_volatility"}, {"feature", p.feature}};
}

LearnerConfig learner_from_json(const json& j) {
    ObjectReader r(j, "learner");
    std::string kind;
    r.read("learner", kind);
    LearnerConfig out;
    if (kind == "forest") {
        ForestConfig f;
        r.read("n_trees", f.n_trees);
        r.read("m_try", f.m_try);
        r.read("min_node_fraction", f.min_node_fraction);
        r.read("max_leaves", f.max_leaves);
        r.read("bootstrap", f.bootstrap);
        out = f;
    } else if (kind == "elastic_net") {
        ElasticNetConfig e;
        r.read("lambda", e.lambda);
        r.read("alpha", e.alpha);
        r.read("max_iterations", e.max_iterations);
        r.read("tolerance", e.tolerance);
        r.read("standardize", e.standardize);
        e.validate();
        out = e;
    } else if (kind == "linear") {
        OlsConfig o;
        r.read("ridge_fallback", o.ridge_fallback);
        out = o;
    } else {
        throw ConfigError("learner: unknown kind '" + kind + "' (expected forest, elastic_net or linear)");
    }
    r.finish();
    return out;
}

json to_json(const RunConfig& c) {
    json columns = json::object();
    for (const auto& [logical, header] : c.monthly_schema.columns) columns[logical] = header;
    json bounds = json::array();
    for (const auto& b : c.bounds) bounds.push_back(json::array({b.low, b.high}));
    json families = json::array();
    for (auto f : c.families) families.push_back(to_string(f));
    return json{
        {"data",
         {{"monthly", c.monthly_path},
          {"daily", c.daily_path},
          {"monthly_schema",
           {{"date", c.monthly_schema.date_column},
            {"columns", columns},
            {"delimiter", delimiter_to(c.monthly_schema.delimiter)}}},
          {"daily_schema",
           {{"date", c.daily_schema.date_column},
            {"value", c.daily_schema.value_column},
            {"delimiter", delimiter_to(c.daily_schema.delimiter)},
            {"scale", c.daily_schema.scale}}}}},
        {"split",
         {{"train_end", c.split.train_end.iso()},
          {"validation_end", c.split.validation_end.iso()},
          {"test_end", c.split.test_end.iso()}}},
        {"gammas", c.gammas},
        {"bounds", bounds},
        {"trim_quantile", c.trim_quantile ? json(*c.trim_quantile) : json(nullptr)},
        {"seeds", {{"master", c.master_seed}, {"count", c.seed_count}}},
        {"costs_bps", c.costs_bps},
        {"benchmark", to_string(c.benchmark)},
        {"threads", c.threads},
        {"refit_every", c.refit_every},
        {"log_volatility_target", c.log_volatility_target},
        {"families", families},
        {"models", {{"return", model_set_to_json(c.return_models)}, {"volatility", model_set_to_json(c.volatility_models)}}},
        {"model_source", c.model_source},
        {"tuning", {{"return", grid_to_json(c.return_grid)}, {"volatility", grid_to_json(c.volatility_grid)}}},
        {"shap",
         {{"samples", c.shap_samples},
          {"first", c.explain_first ? json(c.explain_first->iso()) : json(nullptr)},
          {"last", c.explain_last ? json(c.explain_last->iso()) : json(nullptr)}}},
        {"output_dir", c.output_dir},
    };
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    ObjectReader root(j, "config");

    if (root.has("data")) {
        ObjectReader d(root.at("data"), "data");
        d.read("monthly", c.monthly_path);
        d.read("daily", c.daily_path);
        if (d.has("monthly_schema")) {
            ObjectReader m(d.at("monthly_schema"), "data.monthly_schema");
            m.read("date", c.monthly_schema.date_column);
            if (m.has("columns")) {
                ObjectReader cols(m.at("columns"), "data.monthly_schema.columns");
                for (auto& [logical, header] : c.monthly_schema.columns) cols.read(logical, header);
                cols.finish();
            }
            std::string delim = delimiter_to(c.monthly_schema.delimiter);
            m.read("delimiter", delim);
            c.monthly_schema.delimiter = delimiter_from(delim, "data.monthly_schema");
            m.finish();
        }
        if (d.has("daily_schema")) {
            ObjectReader m(d.at("daily_schema"), "data.daily_schema");
            m.read("date", c.daily_schema.date_column);
            m.read("value", c.daily_schema.value_column);
            m.read("scale", c.daily_schema.scale);
            std::string delim = delimiter_to(c.daily_schema.delimiter);
            m.read("delimiter", delim);
            c.daily_schema.delimiter = delimiter_from(delim, "data.daily_schema");
            m.finish();
        }
        d.finish();
    }
    if (root.has("split")) {
        ObjectReader s(root.at("split"), "split");
        if (s.has("train_end")) c.split.train_end = month_from_json(s.at("train_end"), "split.train_end");
        if (s.has("validation_end")) {
            c.split.validation_end = month_from_json(s.at("validation_end"), "split.validation_end");
        }
        if (s.has("test_end")) c.split.test_end = month_from_json(s.at("test_end"), "split.test_end");
        s.finish();
    }
    root.read("gammas", c.gammas);
    if (root.has("bounds")) {
        const auto& b = root.at("bounds");
        if (!b.is_array()) throw ConfigError("bounds: expected an array of [low, high] pairs");
        c.bounds.clear();
        for (const auto& pair : b) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
                throw ConfigError("bounds: expected [low, high] pairs");
            }
            c.bounds.push_back(WeightBounds{pair[0].get<double>(), pair[1].get<double>()});
        }
    }
    if (root.has("trim_quantile")) {
        const auto& t = root.at("trim_quantile");
        if (t.is_null()) {
            c.trim_quantile.reset();
        } else if (t.is_number()) {
            c.trim_quantile = t.get<double>();
        } else {
            throw ConfigError("trim_quantile: expected a number or null");
        }
    }
    if (root.has("seeds")) {
        ObjectReader s(root.at("seeds"), "seeds");
        s.read("master", c.master_seed);
        s.read("count", c.seed_count);
        s.finish();
    }
    root.read("costs_bps", c.costs_bps);
    if (root.has("benchmark")) {
        const auto& b = root.at("benchmark");
        if (!b.is_string()) throw ConfigError("benchmark: expected a string");
        c.benchmark = parse_benchmark(b.get<std::string>());
    }
    root.read("threads", c.threads);
    root.read("refit_every", c.refit_every);
    root.read("log_volatility_target", c.log_volatility_target);
    if (root.has("families")) {
        std::vector<std::string> names;
        try {
            names = root.at("families").get<std::vector<std::string>>();
        } catch (const json::exception&) {
            throw ConfigError("families: expected an array of strings");
        }
        c.families.clear();
        for (const auto& n : names) {
            try {
                c.families.push_back(parse_family(n));
            } catch (const LookupError& e) {
                throw ConfigError(std::string("families: ") + e.what());
            }
        }
    }
    if (root.has("models")) {
        ObjectReader m(root.at("models"), "models");
        if (m.has("return")) model_set_from_json(m.at("return"), c.return_models, "models.return");
        if (m.has("volatility")) model_set_from_json(m.at("volatility"), c.volatility_models, "models.volatility");
        m.finish();
    }
    root.read("model_source", c.model_source);
    if (root.has("tuning")) {
        ObjectReader t(root.at("tuning"), "tuning");
        if (t.has("return")) c.return_grid = grid_from_json(t.at("return"), "tuning.return");
        if (t.has("volatility")) c.volatility_grid = grid_from_json(t.at("volatility"), "tuning.volatility");
        t.finish();
    }
    if (root.has("shap")) {
        ObjectReader s(root.at("shap"), "shap");
        s.read("samples", c.shap_samples);
        if (s.has("first") && !s.at("first").is_null()) c.explain_first = month_from_json(s.at("first"), "shap.first");
        if (s.has("last") && !s.at("last").is_null()) c.explain_last = month_from_json(s.at("last"), "shap.last");
        s.finish();
    }
    root.read("output_dir", c.output_dir);
    root.finish();
    c.validate();
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    json* node = &doc;
    std::stringstream parts(key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!node->is_object()) throw ConfigError("override '" + key + "': '" + path[i] + "' is not an object");
        node = &(*node)[path[i]];
        if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw ConfigError("override '" + key + "': parent is not an object");
    (*node)[path.back()] = value;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("config " + path + ": " + e.what());
        }
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const RunConfig& config) {
    json j = to_json(config);
    j.erase("output_dir");
    j.erase("threads");
    return fnv1a_hex(j.dump());
}

std::filesystem::path output_root(const RunConfig& config) {
    std::filesystem::path p(config.output_dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("RRT_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
            return std::filesystem::path(root) / p;
        }
    }
    return p;
}

}  // namespace rrt
