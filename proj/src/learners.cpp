#include "mrfgraft/learners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "mrfgraft/format.hpp"

namespace mrfgraft {

Method parse_method(const std::string& name) {
    if (name == "eg" || name == "edge_grafting") return Method::edge_grafting;
    if (name == "first_hit" || name == "first-hit") return Method::first_hit;
    if (name == "bceg" || name == "best_choice") return Method::best_choice;
    throw std::invalid_argument("unknown method '" + name + "' (expected eg, first_hit or bceg)");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::edge_grafting: return "eg";
        case Method::first_hit: return "first_hit";
        case Method::best_choice: return "bceg";
    }
    return "?";
}

void LearnerConfig::validate() const {
    reg.validate();
    if (!(reg.lambda > 0.0)) throw std::invalid_argument("learner: lambda must be positive for grafting");
    if (reservoir_size && *reservoir_size < 1) throw std::invalid_argument("learner: reservoir_size must be >= 1");
    if (t_max && *t_max < 1) throw std::invalid_argument("learner: t_max must be >= 1");
    if (edge_budget && *edge_budget < 1) throw std::invalid_argument("learner: edge_budget must be >= 1");
    if (c_hat && !(*c_hat >= 0.0 && *c_hat <= 1.0)) throw std::invalid_argument("learner: c_hat must lie in [0, 1]");
}

double recall(const std::vector<EdgeId>& true_edges, const std::vector<EdgeId>& learned_edges) {
    const std::set<EdgeId> truth(true_edges.begin(), true_edges.end());
    if (truth.empty()) return 1.0;
    const std::set<EdgeId> learned(learned_edges.begin(), learned_edges.end());
    std::size_t hits = 0;
    for (const auto& e : truth) hits += learned.contains(e) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace {

using Clock = std::chrono::steady_clock;

// State shared by all learners: model, statistics, beliefs and counters.
class Session {
public:
    Session(const DiscreteDataset& data, const LearnerConfig& config, const LearnerHooks& hooks)
        : data_(data),
          config_(config),
          hooks_(hooks),
          stats_(data),
          problem_{stats_, config.engine, config.reg},
          start_(Clock::now()) {
        config_.validate();
        result_.model = MrfModel(data.spec());
    }

    [[nodiscard]] std::size_t n() const { return data_.num_variables(); }
    [[nodiscard]] double lambda() const { return config_.reg.lambda; }
    [[nodiscard]] const LearnerConfig& config() const { return config_; }
    SufficientStatsStore& stats() { return stats_; }
    MrfModel& model() { return result_.model; }
    LearnResult& result() { return result_; }

    [[nodiscard]] std::size_t budget_left() const {
        if (!config_.edge_budget) return std::numeric_limits<std::size_t>::max();
        const std::size_t used = result_.activation_order.size();
        return used >= *config_.edge_budget ? 0 : *config_.edge_budget - used;
    }
    [[nodiscard]] bool all_edges_active() const { return result_.model.edge_count() == candidate_edge_count(n()); }

    // Fit the current active set and refresh beliefs.
    void optimize() {
        const auto fit = optimize_active_set(result_.model, problem_, config_.opt);
        objective_ = fit.objective;
        result_.optimizer_iterations += static_cast<std::uint64_t>(fit.iterations);
        beliefs_ = compute_beliefs(result_.model, config_.engine);
    }

    double score(const EdgeId& e) { return edge_score(result_.model, beliefs_, stats_, e); }

    double test(const EdgeId& e) {
        ++result_.edges_tested;
        return score(e);
    }

    void activate(const EdgeId& e) {
        if (result_.activation_order.empty()) result_.tables_before_first_activation = stats_.tables_computed();
        result_.model.activate_edge(e);
        result_.activation_order.push_back(e);
        result_.tables_at_activation.push_back(stats_.tables_computed());
    }

    void record_round(std::vector<EdgeId> activated) {
        TraceRecord r;
        r.round = result_.trace.rounds.size() + 1;
        r.edges_active = result_.model.edge_count();
        r.tables_computed = stats_.tables_computed();
        r.edges_tested = result_.edges_tested;
        r.optimizer_iterations = result_.optimizer_iterations;
        r.objective = objective_;
        if (hooks_.test_data) r.nlpl = nlpl(result_.model, *hooks_.test_data);
        if (hooks_.true_edges) r.recall = recall(*hooks_.true_edges, result_.model.active_edges());
        if (hooks_.record_wall_time)
            r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
        r.activated = std::move(activated);
        result_.trace.rounds.push_back(r);
        if (hooks_.on_round) hooks_.on_round(result_.trace.rounds.back());
    }

    LearnResult finish() {
        result_.tables_computed = stats_.tables_computed();
        return std::move(result_);
    }

private:
    const DiscreteDataset& data_;
    LearnerConfig config_;
    const LearnerHooks& hooks_;
    SufficientStatsStore stats_;
    Problem problem_;
    Beliefs beliefs_;
    double objective_ = 0.0;
    Clock::time_point start_;
    LearnResult result_;
};

}  // namespace

LearnResult edge_grafting(const DiscreteDataset& data, const LearnerConfig& config, const LearnerHooks& hooks) {
    Session session(data, config, hooks);
    session.stats().precompute_all();
    session.optimize();
    const std::size_t n = session.n();
    while (session.budget_left() > 0 && !session.all_edges_active()) {
        std::optional<EdgeId> best;
        double best_score = -1.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const EdgeId e{i, j};
                if (session.model().is_active(e)) continue;
                const double s = session.test(e);
                if (s > best_score) {
                    best_score = s;
                    best = e;
                }
            }
        if (!best || !activation_test_c2(best_score, session.lambda())) {
            session.result().converged = true;
            break;
        }
        session.activate(*best);
        session.optimize();
        session.record_round({*best});
    }
    if (session.all_edges_active()) session.result().converged = true;
    return session.finish();
}

LearnResult best_choice_edge_grafting(const DiscreteDataset& data, const LearnerConfig& config,
                                      const LearnerHooks& hooks) {
    Session session(data, config, hooks);
    const std::size_t n = session.n();
    const double lambda = session.lambda();
    const std::size_t capacity = config.reservoir_size.value_or(n);
    const std::size_t t_max = config.t_max.value_or(std::max<std::size_t>(1, n / 10));
    const double c_hat = config.c_hat.value_or(n > 1 ? std::min(1.0, 4.0 / static_cast<double>(n - 1)) : 1.0);
    const double alpha = config.reg.alpha;

    PrioritySearchSpace space(n, config.seed, config.rho0, config.eager_pq);
    Reservoir reservoir(capacity);
    FrozenContainer frozen;

    auto notify = [&] {
        if (hooks.on_search_state) hooks.on_search_state({session.model(), space, reservoir, frozen, lambda});
    };
    auto test_next = [&] {
        const EdgeId e = space.select_next_edge();
        reservoir_offer(reservoir, frozen, e, session.test(e), lambda);
        notify();
    };

    session.optimize();

    // Fill the reservoir, at most one pass over the candidate space.
    while (!reservoir.full() && space.has_candidates()) {
        test_next();
        ++session.result().fill_tests;
    }

    while (session.budget_left() > 0 && !session.all_edges_active()) {
        if (config.structure_heuristics)
            reorganize_pq(space, session.model().hub_set(c_hat),
                          [&](const EdgeId& e) { return session.model().is_active(e) || reservoir.contains(e); });

        // Test t_max edges. With an empty reservoir keep testing until an edge
        // passes or every inactive edge has been tested against the current model.
        std::size_t tests = 0;
        bool refilled = false;
        for (;;) {
            if (tests >= t_max && !reservoir.empty()) break;
            if (!space.has_candidates()) {
                if (frozen.empty() || refilled) break;
                refill_from_frozen(space, frozen);
                refilled = true;
                continue;
            }
            test_next();
            ++tests;
        }

        auto batch = activation_set(reservoir, alpha);
        if (batch.empty()) {
            session.result().converged = true;
            break;
        }
        if (batch.size() > session.budget_left()) batch.resize(session.budget_left());
        for (const auto& e : batch) {
            reservoir.erase(e);
            session.activate(e);
        }
        session.optimize();
        refresh_reservoir(reservoir, frozen, [&](const EdgeId& e) { return session.score(e); }, lambda);
        notify();
        session.record_round(batch);
    }
    if (session.all_edges_active()) session.result().converged = true;
    session.result().sample_draws = space.sample_draws();
    return session.finish();
}

LearnResult first_hit(const DiscreteDataset& data, const LearnerConfig& config, const LearnerHooks& hooks) {
    LearnerConfig single = config;
    single.reservoir_size = 1;
    single.t_max = 1;
    single.reg.alpha = 1.0;
    return best_choice_edge_grafting(data, single, hooks);
}

LearnResult learn(const DiscreteDataset& data, const LearnerConfig& config, const LearnerHooks& hooks) {
    switch (config.method) {
        case Method::edge_grafting: return edge_grafting(data, config, hooks);
        case Method::first_hit: return first_hit(data, config, hooks);
        case Method::best_choice: return best_choice_edge_grafting(data, config, hooks);
    }
    throw std::invalid_argument("learn: unknown method");
}

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; }

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(round_output(*v)) : nlohmann::json(nullptr);
}

}  // namespace

void write_trace_csv_header(std::ostream& out) {
    out << "round,edges_active,tables_computed,edges_tested,objective,nlpl,recall,wall_ms\n";
}

void write_trace_csv_row(std::ostream& out, const TraceRecord& r) {
    out << r.round << ',' << r.edges_active << ',' << r.tables_computed << ',' << r.edges_tested << ','
        << format_real(r.objective) << ',' << optional_cell(r.nlpl) << ',' << optional_cell(r.recall) << ','
        << format_real(r.wall_ms) << '\n';
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
    write_trace_csv_header(out);
    for (const auto& r : trace.rounds) write_trace_csv_row(out, r);
}

std::string trace_record_json(const TraceRecord& r) {
    nlohmann::json activated = nlohmann::json::array();
    for (const auto& e : r.activated) activated.push_back({e.i, e.j});
    const nlohmann::json j = {
        {"round", r.round},
        {"edges_active", r.edges_active},
        {"tables_computed", r.tables_computed},
        {"edges_tested", r.edges_tested},
        {"optimizer_iterations", r.optimizer_iterations},
        {"objective", round_output(r.objective)},
        {"nlpl", optional_json(r.nlpl)},
        {"recall", optional_json(r.recall)},
        {"wall_ms", round_output(r.wall_ms)},
        {"activated", activated},
    };
    return j.dump();
}

void write_trace_jsonl(std::ostream& out, const RunTrace& trace) {
    for (const auto& r : trace.rounds) out << trace_record_json(r) << '\n';
}

RunTrace read_trace_jsonl(std::istream& in) {
    RunTrace trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::json::parse(line);
        TraceRecord r;
        r.round = j.at("round").get<std::size_t>();
        r.edges_active = j.at("edges_active").get<std::size_t>();
        r.tables_computed = j.at("tables_computed").get<std::uint64_t>();
        r.edges_tested = j.at("edges_tested").get<std::uint64_t>();
        r.optimizer_iterations = j.value("optimizer_iterations", std::uint64_t{0});
        r.objective = j.at("objective").get<double>();
        if (!j.at("nlpl").is_null()) r.nlpl = j.at("nlpl").get<double>();
        if (!j.at("recall").is_null()) r.recall = j.at("recall").get<double>();
        r.wall_ms = j.at("wall_ms").get<double>();
        for (const auto& e : j.at("activated")) r.activated.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
        trace.rounds.push_back(std::move(r));
    }
    return trace;
}

}  // namespace mrfgraft
