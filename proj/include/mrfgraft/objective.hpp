#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "mrfgraft/data.hpp"
#include "mrfgraft/inference.hpp"
#include "mrfgraft/model.hpp"

namespace mrfgraft {

struct RegularizationParams {
    double lambda = 0.01;   // group-l1 weight
    double lambda2 = 0.0;   // ridge weight
    double alpha = 1.0;     // activation confidence
    bool penalize_nodes = true;

    void validate() const;
};

struct OptimizerOptions {
    double tol = 1e-6;  // relative objective change
    int max_inner = 250;
    double backtrack_beta = 0.5;
    double initial_step = 1.0;
    double min_step = 1e-14;
};

class OptimizerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bundles what the loss needs: the data (through the statistics store), the
// expectation engine, and the regularization weights.
//
// With the exact engine the loss is the average negative log likelihood
// log Z(w) - <w, E_D[f]>. With loopy BP the loss is the negative log
// pseudolikelihood, while BP beliefs still drive activation scores.
struct Problem {
    SufficientStatsStore& stats;
    EngineConfig engine;
    RegularizationParams reg;
};

// d_g: s_v for a node group, s_i * s_j for an edge group.
std::size_t group_dimension(const MrfModel& model, std::size_t group);

// Per-group gradient of the smooth part, aligned with MrfModel groups.
struct GradientBundle {
    std::vector<std::vector<double>> groups;
};

double group_penalty(const MrfModel& model, const RegularizationParams& reg);
double smooth_objective(const MrfModel& model, const Problem& problem);
double full_objective(const MrfModel& model, const Problem& problem);

// Gradient of smooth_objective, ridge term included.
GradientBundle smooth_gradient(const MrfModel& model, const Problem& problem);

// E_w[f] - E_D[f] for group g using the given beliefs (no ridge term).
std::vector<double> group_gradient(const MrfModel& model, const Beliefs& beliefs, SufficientStatsStore& stats,
                                   std::size_t group);

// p̂_w(e) - p_D(e) for any edge, active or not.
std::vector<double> edge_gradient(const MrfModel& model, const Beliefs& beliefs, SufficientStatsStore& stats,
                                  const EdgeId& e);

// ||p̂_w(e) - p_D(e)||_2 / d_e
double edge_score(const MrfModel& model, const Beliefs& beliefs, SufficientStatsStore& stats, const EdgeId& e);

inline bool activation_test_c2(double score, double lambda) { return score > lambda; }

// max over inactive edges of (s_e - lambda); -inf when every edge is active.
double kkt_inactive_residual(const MrfModel& model, SufficientStatsStore& stats, const EngineConfig& engine,
                             double lambda);

// Block soft-threshold w * max(0, 1 - step * lambda * d / ||w||).
std::vector<double> prox_group(std::span<const double> w, double step, double lambda, std::size_t dim);

// Largest norm of the minimal subgradient of the full objective over groups.
double stationarity_residual(const MrfModel& model, const Problem& problem);

struct OptimizeResult {
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    std::vector<double> history;  // full objective after each accepted step, starting value first
};

// Proximal gradient with backtracking over the current groups of `model`.
// Throws OptimizerError when the step size underflows.
OptimizeResult optimize_active_set(MrfModel& model, const Problem& problem, const OptimizerOptions& options = {});

}  // namespace mrfgraft
