#pragma once

#include <cstdint>
#include <vector>

#include "mrfgraft/data.hpp"
#include "mrfgraft/model.hpp"

namespace mrfgraft {

// Scale-free graph on n >= 3 nodes with exactly 2n - 4 edges: a seed path
// 0-1-2, then every later node attaches two edges to distinct existing nodes
// drawn with probability proportional to their degree. Edges sorted.
std::vector<EdgeId> preferential_attachment(std::size_t n, std::uint64_t seed);

struct ParameterPrior {
    double mean = 0.0;
    double sigma_node = 0.5;
    double sigma_edge = 1.0;
};

// Model over `edges` with every node weight ~ N(mean, sigma_node) and every
// edge weight ~ N(mean, sigma_edge).
MrfModel sample_parameters(const std::vector<EdgeId>& edges, const VariableSpec& spec, const ParameterPrior& prior,
                           std::uint64_t seed);

struct GibbsOptions {
    std::size_t burn_in = 200;  // sweeps discarded before the first kept sample
    std::size_t thinning = 5;   // sweeps per kept sample
};

// Systematic-scan Gibbs sampler started from a uniform random state.
DiscreteDataset gibbs_sample(const MrfModel& model, std::size_t count, const GibbsOptions& options,
                             std::uint64_t seed);

struct GroundTruth {
    MrfModel model;
    std::vector<EdgeId> true_edges;
};

GroundTruth generate_ground_truth(std::size_t n, int cardinality, const ParameterPrior& prior, std::uint64_t seed);

struct RankSimulationRow {
    std::size_t reservoir_size = 0;
    double mean_rank = 0.0;
    std::uint64_t min_rank = 0;
    std::uint64_t max_rank = 0;
    double expected_rank = 0.0;  // (M + 1) / (|R| + 1), M = C(n, 2)
};

// For each reservoir size, draw |R| distinct ranks from {1..C(n,2)} per trial
// and record the smallest; summarize over trials.
std::vector<RankSimulationRow> reservoir_rank_simulation(std::size_t n, const std::vector<std::size_t>& reservoir_sizes,
                                                         std::size_t trials, std::uint64_t seed);

}  // namespace mrfgraft
