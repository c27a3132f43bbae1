#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mrfgraft/data.hpp"
#include "mrfgraft/inference.hpp"
#include "mrfgraft/model.hpp"
#include "mrfgraft/objective.hpp"
#include "mrfgraft/search.hpp"

namespace mrfgraft {

enum class Method { edge_grafting, first_hit, best_choice };

Method parse_method(const std::string& name);  // "eg" | "first_hit" | "bceg"
std::string to_string(Method method);

struct LearnerConfig {
    Method method = Method::best_choice;
    RegularizationParams reg;
    EngineConfig engine;
    OptimizerOptions opt;

    std::optional<std::size_t> reservoir_size;  // default n
    std::optional<std::size_t> t_max;           // default max(1, n / 10)
    std::optional<std::size_t> edge_budget;     // default unlimited
    std::optional<double> c_hat;                // default 4 / (n - 1)
    bool structure_heuristics = true;
    bool eager_pq = false;
    double rho0 = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TraceRecord {
    std::size_t round = 0;
    std::size_t edges_active = 0;
    std::uint64_t tables_computed = 0;
    std::uint64_t edges_tested = 0;
    std::uint64_t optimizer_iterations = 0;
    double objective = 0.0;
    std::optional<double> nlpl;
    std::optional<double> recall;
    double wall_ms = 0.0;
    std::vector<EdgeId> activated;

    bool operator==(const TraceRecord&) const = default;
};

struct RunTrace {
    std::vector<TraceRecord> rounds;
    bool operator==(const RunTrace&) const = default;
};

// Read-only view of the search containers, handed to observers after every
// edge test and after every activation round.
struct SearchStateView {
    const MrfModel& model;
    const PrioritySearchSpace& space;
    const Reservoir& reservoir;
    const FrozenContainer& frozen;
    double lambda;
};

struct LearnerHooks {
    const DiscreteDataset* test_data = nullptr;       // adds held-out NLPL to each record
    const std::vector<EdgeId>* true_edges = nullptr;  // adds recall to each record
    bool record_wall_time = true;
    std::function<void(const TraceRecord&)> on_round;
    std::function<void(const SearchStateView&)> on_search_state;
};

struct LearnResult {
    MrfModel model;
    RunTrace trace;
    std::vector<EdgeId> activation_order;
    // tables_computed at the moment each edge was activated
    std::vector<std::uint64_t> tables_at_activation;
    std::uint64_t tables_before_first_activation = 0;
    std::uint64_t fill_tests = 0;  // edge tests spent filling the reservoir (best-choice only)
    std::uint64_t tables_computed = 0;
    std::uint64_t edges_tested = 0;
    std::uint64_t optimizer_iterations = 0;
    std::uint64_t sample_draws = 0;
    bool converged = false;  // stopped because no edge violates the activation test
};

// Exhaustive edge grafting: precompute every pairwise table, then repeatedly
// activate the highest-scoring violating edge.
LearnResult edge_grafting(const DiscreteDataset& data, const LearnerConfig& config, const LearnerHooks& hooks = {});

// Reservoir-based streaming activation with prioritized search.
LearnResult best_choice_edge_grafting(const DiscreteDataset& data, const LearnerConfig& config,
                                      const LearnerHooks& hooks = {});

// Best-choice with a one-slot reservoir, one test per round and alpha = 1.
LearnResult first_hit(const DiscreteDataset& data, const LearnerConfig& config, const LearnerHooks& hooks = {});

// Dispatches on config.method.
LearnResult learn(const DiscreteDataset& data, const LearnerConfig& config, const LearnerHooks& hooks = {});

// |true ∩ learned| / |true|, or 1 for an empty true set.
double recall(const std::vector<EdgeId>& true_edges, const std::vector<EdgeId>& learned_edges);

// Trace files. CSV columns: round, edges_active, tables_computed, edges_tested,
// objective, nlpl, recall, wall_ms. Empty cells mark absent optional values.
void write_trace_csv_header(std::ostream& out);
void write_trace_csv_row(std::ostream& out, const TraceRecord& record);
void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_trace_jsonl(std::ostream& out, const RunTrace& trace);
std::string trace_record_json(const TraceRecord& record);
RunTrace read_trace_jsonl(std::istream& in);

}  // namespace mrfgraft
