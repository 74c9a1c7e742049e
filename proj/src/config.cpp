#include "lsmc/config.hpp"

#include "lsmc/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace lsmc {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

// Object reader that remembers which keys were consumed, so leftovers can be
// rejected as unknown.
class Reader {
public:
    Reader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    [[nodiscard]] const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = find(key);
        if (!v) throw ConfigError(join(path_, key) + ": required field missing");
        return *v;
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const json* v = fallback ? find(key) : &require(key);
        if (!v) return *fallback;
        if (!v->is_number()) throw ConfigError(join(path_, key) + ": expected a number");
        return v->get<double>();
    }

    std::uint64_t unsigned_int(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
        const json* v = fallback ? find(key) : &require(key);
        if (!v) return *fallback;
        return as_unsigned(*v, join(path_, key));
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        const json* v = fallback ? find(key) : &require(key);
        if (!v) return *fallback;
        if (!v->is_string()) throw ConfigError(join(path_, key) + ": expected a string");
        return v->get<std::string>();
    }

    void finish() const {
        for (const auto& [key, value] : doc_.items()) {
            if (!seen_.contains(key)) throw ConfigError(join(path_, key) + ": unknown key");
        }
    }

    [[nodiscard]] std::string child(const std::string& key) const { return join(path_, key); }

    static std::uint64_t as_unsigned(const json& v, const std::string& where) {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) throw ConfigError(where + ": must be non-negative");
        throw ConfigError(where + ": expected an integer");
    }

private:
    [[nodiscard]] std::string where() const { return path_.empty() ? "config" : path_; }

    const json& doc_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<std::size_t> size_list(const json& v, const std::string& where) {
    std::vector<std::size_t> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(Reader::as_unsigned(v[i], where + "[" + std::to_string(i) + "]"));
        }
        if (out.empty()) throw ConfigError(where + ": list must not be empty");
        return out;
    }
    out.push_back(Reader::as_unsigned(v, where));
    return out;
}

ProcessKind process_kind(const std::string& name) {
    if (name == "brownian") return ProcessKind::brownian;
    if (name == "gbm") return ProcessKind::gbm;
    if (name == "basket_tree") return ProcessKind::basket_tree;
    throw ConfigError("process.kind: unknown process '" + name + "'");
}

std::string process_name(ProcessKind kind) {
    switch (kind) {
    case ProcessKind::brownian: return "brownian";
    case ProcessKind::gbm: return "gbm";
    case ProcessKind::basket_tree: return "basket_tree";
    }
    return "?";
}

FeatureKind feature_kind(const std::string& name) {
    if (name == "terminal") return FeatureKind::terminal;
    if (name == "path_integral") return FeatureKind::path_integral;
    if (name == "pair_u_T") return FeatureKind::pair_u_T;
    if (name == "basket_sum") return FeatureKind::basket_sum;
    throw ConfigError("feature.kind: unknown feature '" + name + "'");
}

std::string feature_name(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::terminal: return "terminal";
    case FeatureKind::path_integral: return "path_integral";
    case FeatureKind::pair_u_T: return "pair_u_T";
    case FeatureKind::basket_sum: return "basket_sum";
    }
    return "?";
}

} // namespace

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    Reader top(doc, "");

    const json& version = top.require("schema_version");
    if (!version.is_number_integer()) throw ConfigError("schema_version: expected an integer");
    cfg.schema_version = version.get<int>();
    if (cfg.schema_version != kSchemaVersion) {
        throw ConfigError("schema_version: unsupported version " + std::to_string(cfg.schema_version) +
                          " (expected " + std::to_string(kSchemaVersion) + ")");
    }
    cfg.name = top.string("name", "experiment");

    {
        Reader r(top.require("process"), "process");
        cfg.process.kind = process_kind(r.string("kind"));
        cfg.process.horizon = r.number("horizon");
        cfg.process.volatility = r.number("volatility", 0.0);
        cfg.process.spot = r.number("spot", 1.0);
        cfg.process.dimension = static_cast<int>(r.unsigned_int("dimension", 1));
        r.finish();
    }
    {
        Reader r(top.require("payoff"), "payoff");
        const std::string kind = r.string("kind");
        try {
            cfg.payoff.kind = payoff_kind_from_string(kind);
        } catch (const ConfigError&) {
            throw ConfigError("payoff.kind: unknown payoff '" + kind + "'");
        }
        cfg.payoff.strike = r.number("strike", 0.0);
        r.finish();
    }
    cfg.feature.kind = FeatureKind::terminal;
    cfg.feature.eval_time = cfg.process.horizon;
    if (const json* f = top.find("feature")) {
        Reader r(*f, "feature");
        cfg.feature.kind = feature_kind(r.string("kind", "terminal"));
        cfg.feature.eval_time = r.number("time", cfg.process.horizon);
        r.finish();
    }
    if (const json* o = top.find("oracle")) {
        Reader r(*o, "oracle");
        const std::string kind = r.string("kind", "closed_form");
        if (kind == "closed_form") cfg.oracle.kind = OracleKind::closed_form;
        else if (kind == "gauss_quadrature") cfg.oracle.kind = OracleKind::gauss_quadrature;
        else throw ConfigError("oracle.kind: unknown oracle '" + kind + "'");
        cfg.oracle.quadrature_points = r.unsigned_int("points", cfg.oracle.quadrature_points);
        cfg.oracle.tolerance = r.number("tolerance", cfg.oracle.tolerance);
        r.finish();
    }
    {
        Reader r(top.require("sweep"), "sweep");
        const std::string kind = r.string("kind");
        if (kind == "growing_K") cfg.sweep = SweepKind::growing_K;
        else if (kind == "fixed_K") cfg.sweep = SweepKind::fixed_K;
        else throw ConfigError("sweep.kind: unknown sweep '" + kind + "'");
        cfg.K_list = size_list(r.require("K"), r.child("K"));
        const json* rule = r.find("N_rule");
        const json* list = r.find("N");
        if (rule && list) throw ConfigError("sweep.N_rule: give either N_rule or N, not both");
        if (rule) {
            Reader nr(*rule, r.child("N_rule"));
            NRule n;
            n.c = nr.number("c", n.c);
            n.b = nr.number("b", n.b);
            nr.finish();
            cfg.n_rule = n;
        } else if (list) {
            cfg.N_list = size_list(*list, r.child("N"));
        } else if (cfg.sweep == SweepKind::growing_K) {
            cfg.n_rule = NRule{};
        }
        r.finish();
    }
    {
        const std::string est = top.string("estimator", "later");
        if (est == "later") cfg.estimator = EstimatorKind::later;
        else if (est == "compare") cfg.estimator = EstimatorKind::compare;
        else throw ConfigError("estimator: unknown estimator '" + est + "'");
    }
    if (const json* t = top.find("condition_time")) {
        if (!t->is_number()) throw ConfigError("condition_time: expected a number");
        cfg.condition_time = t->get<double>();
    } else if (cfg.estimator == EstimatorKind::compare) {
        throw ConfigError("condition_time: required when estimator is compare");
    }
    cfg.repetitions = top.unsigned_int("repetitions", cfg.repetitions);
    cfg.seed = top.unsigned_int("seed", cfg.seed);
    if (const json* e = top.find("evaluation")) {
        Reader r(*e, "evaluation");
        const std::string method = r.string("method", "quadrature");
        if (method == "quadrature") cfg.eval = EvalMethod::quadrature;
        else if (method == "fresh_sample") cfg.eval = EvalMethod::fresh_sample;
        else throw ConfigError("evaluation.method: unknown method '" + method + "'");
        cfg.eval_multiplier = r.number("multiplier", cfg.eval_multiplier);
        r.finish();
    }
    cfg.domain_epsilon = top.number("domain_epsilon", cfg.domain_epsilon);
    const std::uint64_t threads = top.unsigned_int("threads", 0);
    if (threads > 1024) throw ConfigError("threads: at most 1024");
    cfg.threads = static_cast<unsigned>(threads);
    top.finish();

    cfg.validate();
    return cfg;
}

json read_config_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return json::parse(text.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_config_json(path));
}

json config_to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["schema_version"] = cfg.schema_version;
    doc["name"] = cfg.name;
    doc["process"] = {{"kind", process_name(cfg.process.kind)},
                      {"horizon", cfg.process.horizon},
                      {"volatility", cfg.process.volatility},
                      {"spot", cfg.process.spot},
                      {"dimension", cfg.process.dimension}};
    doc["payoff"] = {{"kind", to_string(cfg.payoff.kind)}, {"strike", cfg.payoff.strike}};
    doc["feature"] = {{"kind", feature_name(cfg.feature.kind)}, {"time", cfg.feature.eval_time}};
    doc["oracle"] = {{"kind", cfg.oracle.kind == OracleKind::closed_form ? "closed_form" : "gauss_quadrature"},
                     {"points", cfg.oracle.quadrature_points},
                     {"tolerance", cfg.oracle.tolerance}};
    json sweep;
    sweep["kind"] = cfg.sweep == SweepKind::growing_K ? "growing_K" : "fixed_K";
    sweep["K"] = cfg.K_list;
    if (cfg.n_rule) sweep["N_rule"] = {{"c", cfg.n_rule->c}, {"b", cfg.n_rule->b}};
    else sweep["N"] = cfg.N_list;
    doc["sweep"] = sweep;
    doc["estimator"] = cfg.estimator == EstimatorKind::later ? "later" : "compare";
    if (cfg.estimator == EstimatorKind::compare) doc["condition_time"] = cfg.condition_time;
    doc["repetitions"] = cfg.repetitions;
    doc["seed"] = cfg.seed;
    doc["evaluation"] = {{"method", cfg.eval == EvalMethod::quadrature ? "quadrature" : "fresh_sample"},
                         {"multiplier", cfg.eval_multiplier}};
    doc["domain_epsilon"] = cfg.domain_epsilon;
    doc["threads"] = cfg.threads;
    return doc;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' must have the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
        if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

} // namespace lsmc
