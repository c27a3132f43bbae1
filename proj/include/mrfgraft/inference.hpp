#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mrfgraft/data.hpp"
#include "mrfgraft/model.hpp"

namespace mrfgraft {

enum class EngineKind { exact, loopy_bp };

EngineKind parse_engine_kind(const std::string& name);  // "exact" | "bp"
std::string to_string(EngineKind kind);

struct BpOptions {
    double damping = 0.5;
    double tol = 1e-8;
    int max_iters = 500;
};

struct EngineConfig {
    EngineKind kind = EngineKind::loopy_bp;
    BpOptions bp;
};

// Joint state spaces larger than this are refused by the enumeration engine.
inline constexpr double kExactStateCap = 1e7;

// Product of cardinalities, as a double to avoid overflow.
double joint_state_count(const VariableSpec& spec);

struct Beliefs {
    std::vector<std::vector<double>> node;  // per variable, length s_v
    std::vector<std::vector<double>> edge;  // per active edge (model order), row-major s_i x s_j
    double log_partition = std::numeric_limits<double>::quiet_NaN();  // exact engine only
    bool converged = true;
    int iterations = 0;
    std::vector<double> residuals;  // max message change per BP iteration
};

// Brute-force marginals and log Z. Throws std::length_error above kExactStateCap.
Beliefs exact_marginals(const MrfModel& model);

// Synchronous damped sum-product in log space on the active graph. A run that
// hits max_iters returns its beliefs with converged = false.
Beliefs loopy_bp(const MrfModel& model, const BpOptions& options = {});

Beliefs compute_beliefs(const MrfModel& model, const EngineConfig& engine);

// Model pair marginal for e: the edge belief when e is active, otherwise the
// outer product of the two node beliefs.
std::vector<double> pair_marginal_estimate(const Beliefs& beliefs, const MrfModel& model, const EdgeId& e);

// θ_i(a) + Σ_{j∈N(i)} θ_ij(a, x_j) for every state a of variable i.
void conditional_logits(const MrfModel& model, std::span<const std::int32_t> x, std::size_t i,
                        std::span<double> out);

// p(x_i = · | x_N(i)).
std::vector<double> conditional_distribution(const MrfModel& model, std::span<const std::int32_t> x,
                                             std::size_t i);

// Negative log pseudolikelihood averaged over instances.
double nlpl(const MrfModel& model, const DiscreteDataset& data);

// log Σ exp(v), stable for large magnitudes.
double log_sum_exp(std::span<const double> v);

}  // namespace mrfgraft
