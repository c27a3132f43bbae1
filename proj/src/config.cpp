#include "mrfgraft/config.hpp"

#include <fstream>
#include <set>

namespace mrfgraft {

using nlohmann::json;

std::vector<std::size_t> anchored_range(std::size_t start, std::size_t stop, std::size_t step) {
    if (step == 0) throw ConfigError("range: step must be positive");
    std::vector<std::size_t> out;
    if (start > stop) return out;
    out.push_back(start);
    for (std::size_t v = (start / step + 1) * step; v <= stop; v += step) out.push_back(v);
    return out;
}

json default_config_json() { return config_to_json(RunConfig{}); }

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

// Keys under these paths are user-chosen (column names).
const std::set<std::string> kFreeFormSections = {"data.cardinalities", "data.discretize"};

void check_keys(const json& user, const json& defaults, const std::string& prefix) {
    if (!user.is_object()) return;
    for (const auto& [key, value] : user.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!defaults.is_object() || !defaults.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
        if (kFreeFormSections.contains(path)) continue;
        if (value.is_object() && !defaults.at(key).is_null()) check_keys(value, defaults.at(key), path);
    }
}

template <typename T>
T get(const json& doc, const char* section, const char* key) {
    const std::string path = std::string(section) + "." + key;
    try {
        return doc.at(section).at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + path + "': " + e.what());
    }
}

template <typename T>
std::optional<T> get_optional(const json& doc, const char* section, const char* key) {
    const auto& v = doc.at(section).at(key);
    if (v.is_null()) return std::nullopt;
    return get<T>(doc, section, key);
}

}  // namespace

json config_to_json(const RunConfig& c) {
    const auto& l = c.learner;
    json cards = json::object();
    for (const auto& [name, card] : c.data.csv.cardinalities) cards[name] = card;
    json rules = json::object();
    for (const auto& [name, r] : c.data.csv.discretize) rules[name] = {{"lo", r.lo}, {"hi", r.hi}, {"bins", r.bins}};
    return {
        {"seed", c.seed},
        {"engine", to_string(l.engine.kind)},
        {"bp", {{"damping", l.engine.bp.damping}, {"tol", l.engine.bp.tol}, {"max_iters", l.engine.bp.max_iters}}},
        {"opt", {{"tol", l.opt.tol}, {"max_inner", l.opt.max_inner}, {"backtrack_beta", l.opt.backtrack_beta}}},
        {"reg",
         {{"lambda", l.reg.lambda},
          {"lambda2", l.reg.lambda2},
          {"alpha", l.reg.alpha},
          {"penalize_nodes", l.reg.penalize_nodes}}},
        {"search",
         {{"rho0", l.rho0},
          {"reservoir_size", optional_json(l.reservoir_size)},
          {"t_max", optional_json(l.t_max)},
          {"c_hat", optional_json(l.c_hat)},
          {"eager_pq", l.eager_pq}}},
        {"learner",
         {{"method", to_string(l.method)},
          {"edge_budget", optional_json(l.edge_budget)},
          {"structure_heuristics", l.structure_heuristics},
          {"sweep_lambda", c.lambda_sweep}}},
        {"data",
         {{"train", c.data.train},
          {"test", c.data.test},
          {"true_edges", c.data.true_edges},
          {"cardinalities", cards},
          {"discretize", rules}}},
        {"synthetic",
         {{"n", c.synthetic.n},
          {"cardinality", c.synthetic.cardinality},
          {"mean", c.synthetic.prior.mean},
          {"sigma_v", c.synthetic.prior.sigma_node},
          {"sigma_e", c.synthetic.prior.sigma_edge},
          {"count", c.synthetic.count},
          {"burn_in", c.synthetic.gibbs.burn_in},
          {"thinning", c.synthetic.gibbs.thinning},
          {"train_fraction", c.synthetic.train_fraction}}},
        {"evaluate", {{"model", c.evaluate.model}, {"data", c.evaluate.data}, {"true_edges", c.evaluate.true_edges}}},
        {"simulate",
         {{"n", c.simulate.n},
          {"sizes", c.simulate.sizes},
          {"sizes_range", nullptr},
          {"trials", c.simulate.trials}}},
        {"output", {{"dir", c.output.dir}, {"trace_format", c.output.trace_format}, {"wall_time", c.output.wall_time}}},
    };
}

RunConfig config_from_json(const json& user) {
    if (!user.is_object()) throw ConfigError("config: top level must be a JSON object");
    json doc = default_config_json();
    check_keys(user, doc, "");
    doc.merge_patch(user);
    // merge_patch drops keys set to null; put them back as null
    const json defaults = default_config_json();
    for (const auto& [section, body] : defaults.items()) {
        if (!doc.contains(section)) doc[section] = body.is_object() ? json::object() : json(nullptr);
        if (body.is_object())
            for (const auto& [key, value] : body.items())
                if (!doc[section].contains(key)) doc[section][key] = nullptr;
    }

    RunConfig c;
    try {
        c.seed = doc.at("seed").get<std::uint64_t>();
        c.learner.engine.kind = parse_engine_kind(doc.at("engine").get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    auto& l = c.learner;
    l.seed = c.seed;
    l.engine.bp.damping = get<double>(doc, "bp", "damping");
    l.engine.bp.tol = get<double>(doc, "bp", "tol");
    l.engine.bp.max_iters = get<int>(doc, "bp", "max_iters");
    l.opt.tol = get<double>(doc, "opt", "tol");
    l.opt.max_inner = get<int>(doc, "opt", "max_inner");
    l.opt.backtrack_beta = get<double>(doc, "opt", "backtrack_beta");
    l.reg.lambda = get<double>(doc, "reg", "lambda");
    l.reg.lambda2 = get<double>(doc, "reg", "lambda2");
    l.reg.alpha = get<double>(doc, "reg", "alpha");
    l.reg.penalize_nodes = get<bool>(doc, "reg", "penalize_nodes");
    l.rho0 = get<double>(doc, "search", "rho0");
    l.reservoir_size = get_optional<std::size_t>(doc, "search", "reservoir_size");
    l.t_max = get_optional<std::size_t>(doc, "search", "t_max");
    l.c_hat = get_optional<double>(doc, "search", "c_hat");
    l.eager_pq = get<bool>(doc, "search", "eager_pq");
    try {
        l.method = parse_method(get<std::string>(doc, "learner", "method"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    l.edge_budget = get_optional<std::size_t>(doc, "learner", "edge_budget");
    l.structure_heuristics = get<bool>(doc, "learner", "structure_heuristics");
    c.lambda_sweep = get<std::vector<double>>(doc, "learner", "sweep_lambda");

    c.data.train = get<std::string>(doc, "data", "train");
    c.data.test = get<std::string>(doc, "data", "test");
    c.data.true_edges = get<std::string>(doc, "data", "true_edges");
    for (const auto& [name, card] : doc.at("data").at("cardinalities").items()) {
        if (!card.is_number_integer()) throw ConfigError("config: data.cardinalities." + name + " must be an integer");
        c.data.csv.cardinalities[name] = card.get<int>();
    }
    for (const auto& [name, rule] : doc.at("data").at("discretize").items()) {
        try {
            c.data.csv.discretize[name] = {rule.at("lo").get<double>(), rule.at("hi").get<double>(),
                                           rule.at("bins").get<int>()};
        } catch (const json::exception&) {
            throw ConfigError("config: data.discretize." + name + " needs numeric lo, hi and integer bins");
        }
        const auto& r = c.data.csv.discretize[name];
        if (!(r.lo < r.hi) || r.bins < 2) throw ConfigError("config: data.discretize." + name + " needs lo < hi and bins >= 2");
    }

    auto& s = c.synthetic;
    s.n = get<std::size_t>(doc, "synthetic", "n");
    s.cardinality = get<int>(doc, "synthetic", "cardinality");
    s.prior.mean = get<double>(doc, "synthetic", "mean");
    s.prior.sigma_node = get<double>(doc, "synthetic", "sigma_v");
    s.prior.sigma_edge = get<double>(doc, "synthetic", "sigma_e");
    s.count = get<std::size_t>(doc, "synthetic", "count");
    s.gibbs.burn_in = get<std::size_t>(doc, "synthetic", "burn_in");
    s.gibbs.thinning = get<std::size_t>(doc, "synthetic", "thinning");
    s.train_fraction = get<double>(doc, "synthetic", "train_fraction");

    c.evaluate.model = get<std::string>(doc, "evaluate", "model");
    c.evaluate.data = get<std::string>(doc, "evaluate", "data");
    c.evaluate.true_edges = get<std::string>(doc, "evaluate", "true_edges");

    c.simulate.n = get<std::size_t>(doc, "simulate", "n");
    c.simulate.sizes = get<std::vector<std::size_t>>(doc, "simulate", "sizes");
    if (const auto& range = doc.at("simulate").at("sizes_range"); !range.is_null()) {
        if (range.is_object())
            for (const auto& [key, value] : range.items())
                if (key != "start" && key != "stop" && key != "step")
                    throw ConfigError("config: unknown key 'simulate.sizes_range." + key + "'");
        try {
            c.simulate.sizes = anchored_range(range.at("start").get<std::size_t>(), range.at("stop").get<std::size_t>(),
                                              range.at("step").get<std::size_t>());
        } catch (const json::exception&) {
            throw ConfigError("config: simulate.sizes_range needs integer start, stop and step");
        }
    }
    c.simulate.trials = get<std::size_t>(doc, "simulate", "trials");

    c.output.dir = get<std::string>(doc, "output", "dir");
    c.output.trace_format = get<std::string>(doc, "output", "trace_format");
    c.output.wall_time = get<bool>(doc, "output", "wall_time");

    // range checks
    try {
        l.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!(l.engine.bp.damping >= 0.0 && l.engine.bp.damping < 1.0)) throw ConfigError("config: bp.damping must lie in [0, 1)");
    if (l.engine.bp.max_iters < 1) throw ConfigError("config: bp.max_iters must be >= 1");
    if (l.opt.max_inner < 1) throw ConfigError("config: opt.max_inner must be >= 1");
    if (!(l.opt.backtrack_beta > 0.0 && l.opt.backtrack_beta < 1.0))
        throw ConfigError("config: opt.backtrack_beta must lie in (0, 1)");
    for (double lam : c.lambda_sweep)
        if (!(lam > 0.0)) throw ConfigError("config: learner.sweep_lambda values must be positive");
    if (s.n < 3) throw ConfigError("config: synthetic.n must be at least 3, got " + std::to_string(s.n));
    if (s.cardinality < 2) throw ConfigError("config: synthetic.cardinality must be at least 2");
    if (!(s.prior.sigma_node > 0.0 && s.prior.sigma_edge > 0.0)) throw ConfigError("config: synthetic sigmas must be positive");
    if (s.count < 2) throw ConfigError("config: synthetic.count must be at least 2");
    if (s.gibbs.thinning < 1) throw ConfigError("config: synthetic.thinning must be >= 1");
    if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) throw ConfigError("config: synthetic.train_fraction must lie in (0, 1)");
    if (c.simulate.trials < 1) throw ConfigError("config: simulate.trials must be >= 1");
    if (c.output.trace_format != "csv" && c.output.trace_format != "jsonl")
        throw ConfigError("config: output.trace_format must be csv or jsonl");
    return c;
}

json load_config_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("config: '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("--set: malformed key '" + key + "'");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

}  // namespace mrfgraft
