#include "mrfgraft/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>

namespace mrfgraft {

void RegularizationParams::validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("regularization: lambda must be >= 0");
    if (!(lambda2 >= 0.0)) throw std::invalid_argument("regularization: lambda2 must be >= 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("regularization: alpha must lie in [0, 1]");
}

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double group_lambda(const MrfModel& model, const RegularizationParams& reg, std::size_t g) {
    return model.is_node_group(g) && !reg.penalize_nodes ? 0.0 : reg.lambda;
}

GradientBundle zero_bundle(const MrfModel& model) {
    GradientBundle bundle;
    bundle.groups.resize(model.group_count());
    for (std::size_t g = 0; g < model.group_count(); ++g) bundle.groups[g].assign(model.group_weights(g).size(), 0.0);
    return bundle;
}

// Node i's conditional depends only on x_i and its neighbors' states, so the
// rows are folded into distinct neighbor patterns with per-state counts.
// Valid for one active set.
class PatternTable {
public:
    PatternTable(const MrfModel& model, const DiscreteDataset& data) : rows_(data.num_rows()) {
        const std::size_t n = model.num_variables();
        nodes_.resize(n);
        std::vector<std::int32_t> key_states;
        for (std::size_t i = 0; i < n; ++i) {
            auto& node = nodes_[i];
            node.states = static_cast<std::size_t>(model.cardinality(i));
            std::uint64_t radix = 1;
            bool packable = true;
            for (const auto& nb : model.neighbors(i)) {
                node.neighbors.push_back(nb);
                const auto sj = static_cast<std::uint64_t>(model.cardinality(nb.node));
                if (radix > std::numeric_limits<std::uint64_t>::max() / sj) packable = false;
                radix *= sj;
            }
            std::unordered_map<std::uint64_t, std::size_t> index;
            for (std::size_t m = 0; m < rows_; ++m) {
                const auto x = data.row(m);
                std::size_t slot = node.totals.size();
                if (packable) {
                    std::uint64_t key = 0;
                    for (const auto& nb : node.neighbors)
                        key = key * static_cast<std::uint64_t>(model.cardinality(nb.node)) +
                              static_cast<std::uint64_t>(x[nb.node]);
                    const auto [it, fresh] = index.try_emplace(key, slot);
                    slot = it->second;
                    if (!fresh) {
                        node.counts[slot * node.states + static_cast<std::size_t>(x[i])] += 1.0;
                        node.totals[slot] += 1.0;
                        continue;
                    }
                }
                for (const auto& nb : node.neighbors) node.pattern.push_back(x[nb.node]);
                node.counts.resize(node.counts.size() + node.states, 0.0);
                node.counts[slot * node.states + static_cast<std::size_t>(x[i])] = 1.0;
                node.totals.push_back(1.0);
            }
        }
    }

    // Average negative log pseudolikelihood; fills the gradient when requested.
    double evaluate(const MrfModel& model, GradientBundle* grad) const {
        const std::size_t n = model.num_variables();
        std::vector<double> p(static_cast<std::size_t>(model.spec().max_cardinality()));
        std::vector<const double*> weights;
        std::vector<double*> grads;
        std::vector<std::size_t> stride_a, stride_j;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& node = nodes_[i];
            const std::size_t si = node.states;
            const std::size_t deg = node.neighbors.size();
            weights.clear();
            grads.clear();
            stride_a.clear();
            stride_j.clear();
            for (const auto& nb : node.neighbors) {
                const auto sj = static_cast<std::size_t>(model.cardinality(nb.node));
                weights.push_back(model.edge_weights(nb.edge).data());
                grads.push_back(grad ? grad->groups[n + nb.edge].data() : nullptr);
                stride_a.push_back(nb.owner_is_first ? sj : 1);
                stride_j.push_back(nb.owner_is_first ? 1 : si);
            }
            const auto theta = model.node_weights(i);
            double* gi = grad ? grad->groups[i].data() : nullptr;
            for (std::size_t q = 0; q < node.totals.size(); ++q) {
                const std::int32_t* xs = node.pattern.data() + q * deg;
                const double* counts = node.counts.data() + q * si;
                for (std::size_t a = 0; a < si; ++a) p[a] = theta[a];
                for (std::size_t t = 0; t < deg; ++t) {
                    const double* w = weights[t] + static_cast<std::size_t>(xs[t]) * stride_j[t];
                    for (std::size_t a = 0; a < si; ++a) p[a] += w[a * stride_a[t]];
                }
                double peak = p[0];
                for (std::size_t a = 1; a < si; ++a) peak = std::max(peak, p[a]);
                double observed = 0.0, sum = 0.0;
                for (std::size_t a = 0; a < si; ++a) {
                    observed += counts[a] * p[a];
                    p[a] = std::exp(p[a] - peak);
                    sum += p[a];
                }
                const double weight = node.totals[q];
                total += weight * (peak + std::log(sum)) - observed;
                if (!grad) continue;
                const double scale = weight / sum;
                for (std::size_t a = 0; a < si; ++a) p[a] = p[a] * scale - counts[a];
                for (std::size_t a = 0; a < si; ++a) gi[a] += p[a];
                for (std::size_t t = 0; t < deg; ++t) {
                    double* g = grads[t] + static_cast<std::size_t>(xs[t]) * stride_j[t];
                    for (std::size_t a = 0; a < si; ++a) g[a * stride_a[t]] += p[a];
                }
            }
        }
        const double inv = 1.0 / static_cast<double>(rows_);
        if (grad)
            for (auto& g : grad->groups)
                for (double& v : g) v *= inv;
        return total * inv;
    }

private:
    struct Node {
        std::size_t states = 0;
        std::vector<MrfModel::Neighbor> neighbors;
        std::vector<std::int32_t> pattern;  // neighbor states, one block per pattern
        std::vector<double> counts;         // per pattern, count of each state of the node
        std::vector<double> totals;         // rows per pattern
    };
    std::size_t rows_;
    std::vector<Node> nodes_;
};

// log Z - <w, E_D[f]> from exact enumeration; beliefs returned for the gradient.
double exact_nll(const MrfModel& model, SufficientStatsStore& stats, Beliefs* beliefs_out) {
    Beliefs beliefs = exact_marginals(model);
    double data_term = 0.0;
    for (std::size_t v = 0; v < model.num_variables(); ++v) {
        const auto w = model.node_weights(v);
        const auto p = stats.node_marginal(v);
        for (std::size_t a = 0; a < w.size(); ++a) data_term += w[a] * p[a];
    }
    for (std::size_t k = 0; k < model.edge_count(); ++k) {
        const auto w = model.edge_weights(k);
        const auto table = stats.edge_table(model.active_edges()[k]);
        for (std::size_t t = 0; t < w.size(); ++t) data_term += w[t] * table[t];
    }
    const double value = beliefs.log_partition - data_term;
    if (beliefs_out) *beliefs_out = std::move(beliefs);
    return value;
}

double smooth_value_and_gradient(const MrfModel& model, const Problem& problem, GradientBundle* grad,
                                 const PatternTable* table = nullptr) {
    double value = 0.0;
    if (problem.engine.kind == EngineKind::exact) {
        Beliefs beliefs;
        value = exact_nll(model, problem.stats, grad ? &beliefs : nullptr);
        if (grad) {
            *grad = zero_bundle(model);
            for (std::size_t g = 0; g < model.group_count(); ++g)
                grad->groups[g] = group_gradient(model, beliefs, problem.stats, g);
        }
    } else {
        if (grad) *grad = zero_bundle(model);
        value = table ? table->evaluate(model, grad) : PatternTable(model, problem.stats.data()).evaluate(model, grad);
    }
    const double ridge = problem.reg.lambda2;
    value += ridge * model.squared_norm();
    if (grad && ridge != 0.0)
        for (std::size_t g = 0; g < model.group_count(); ++g) {
            const auto w = model.group_weights(g);
            for (std::size_t t = 0; t < w.size(); ++t) grad->groups[g][t] += 2.0 * ridge * w[t];
        }
    return value;
}

}  // namespace

std::size_t group_dimension(const MrfModel& model, std::size_t group) { return model.group_weights(group).size(); }

double group_penalty(const MrfModel& model, const RegularizationParams& reg) {
    double total = 0.0;
    for (std::size_t g = 0; g < model.group_count(); ++g) {
        const double lam = group_lambda(model, reg, g);
        if (lam == 0.0) continue;
        const auto w = model.group_weights(g);
        total += lam * static_cast<double>(w.size()) * norm2(w);
    }
    return total;
}

double smooth_objective(const MrfModel& model, const Problem& problem) {
    return smooth_value_and_gradient(model, problem, nullptr);
}

double full_objective(const MrfModel& model, const Problem& problem) {
    return smooth_objective(model, problem) + group_penalty(model, problem.reg);
}

GradientBundle smooth_gradient(const MrfModel& model, const Problem& problem) {
    GradientBundle grad;
    smooth_value_and_gradient(model, problem, &grad);
    return grad;
}

std::vector<double> group_gradient(const MrfModel& model, const Beliefs& beliefs, SufficientStatsStore& stats,
                                   std::size_t group) {
    if (model.is_node_group(group)) {
        const auto& b = beliefs.node[group];
        const auto p = stats.node_marginal(group);
        std::vector<double> g(b.size());
        for (std::size_t a = 0; a < b.size(); ++a) g[a] = b[a] - p[a];
        return g;
    }
    return edge_gradient(model, beliefs, stats, model.active_edges().at(group - model.num_variables()));
}

std::vector<double> edge_gradient(const MrfModel& model, const Beliefs& beliefs, SufficientStatsStore& stats,
                                  const EdgeId& e) {
    auto g = pair_marginal_estimate(beliefs, model, e);
    const auto table = stats.edge_table(e);
    for (std::size_t t = 0; t < g.size(); ++t) g[t] -= table[t];
    return g;
}

double edge_score(const MrfModel& model, const Beliefs& beliefs, SufficientStatsStore& stats, const EdgeId& e) {
    const auto g = edge_gradient(model, beliefs, stats, e);
    return norm2(g) / static_cast<double>(g.size());
}

double kkt_inactive_residual(const MrfModel& model, SufficientStatsStore& stats, const EngineConfig& engine,
                             double lambda) {
    const Beliefs beliefs = compute_beliefs(model, engine);
    double worst = -std::numeric_limits<double>::infinity();
    const std::size_t n = model.num_variables();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const EdgeId e{i, j};
            if (model.is_active(e)) continue;
            worst = std::max(worst, edge_score(model, beliefs, stats, e) - lambda);
        }
    return worst;
}

std::vector<double> prox_group(std::span<const double> w, double step, double lambda, std::size_t dim) {
    if (!(step > 0.0)) throw std::invalid_argument("prox_group: step must be positive");
    std::vector<double> out(w.begin(), w.end());
    const double threshold = step * lambda * static_cast<double>(dim);
    if (threshold == 0.0) return out;
    const double norm = norm2(w);
    const double scale = norm > threshold ? 1.0 - threshold / norm : 0.0;
    for (double& x : out) x *= scale;
    return out;
}

double stationarity_residual(const MrfModel& model, const Problem& problem) {
    const auto grad = smooth_gradient(model, problem);
    double worst = 0.0;
    for (std::size_t g = 0; g < model.group_count(); ++g) {
        const auto w = model.group_weights(g);
        const double radius = group_lambda(model, problem.reg, g) * static_cast<double>(w.size());
        const double wnorm = norm2(w);
        double r = 0.0;
        if (wnorm > 0.0) {
            std::vector<double> sub(grad.groups[g]);
            for (std::size_t t = 0; t < w.size(); ++t) sub[t] += radius * w[t] / wnorm;
            r = norm2(sub);
        } else {
            r = std::max(0.0, norm2(grad.groups[g]) - radius);
        }
        worst = std::max(worst, r);
    }
    return worst;
}

OptimizeResult optimize_active_set(MrfModel& model, const Problem& problem, const OptimizerOptions& options) {
    problem.reg.validate();
    if (!(options.backtrack_beta > 0.0 && options.backtrack_beta < 1.0))
        throw std::invalid_argument("optimizer: backtrack_beta must lie in (0, 1)");

    const std::size_t groups = model.group_count();
    std::vector<std::size_t> offset(groups + 1, 0);
    std::vector<double> lambdas(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        offset[g + 1] = offset[g] + model.group_weights(g).size();
        lambdas[g] = group_lambda(model, problem.reg, g);
    }
    auto flatten = [&](const GradientBundle& b, std::vector<double>& flat) {
        flat.clear();
        for (const auto& g : b.groups) flat.insert(flat.end(), g.begin(), g.end());
    };

    // w: last accepted iterate, y: extrapolated point (FISTA with restart)
    std::vector<double> w = model.flat_weights();
    std::vector<double> y = w, trial(w.size()), grad;
    GradientBundle bundle;
    const std::optional<PatternTable> table =
        problem.engine.kind == EngineKind::exact ? std::nullopt
                                                 : std::optional<PatternTable>(std::in_place, model, problem.stats.data());
    const PatternTable* tp = table ? &*table : nullptr;
    auto full = [&] { return smooth_value_and_gradient(model, problem, nullptr, tp) + group_penalty(model, problem.reg); };
    double objective = full();
    double momentum = 1.0;
    bool at_w = true;  // y == w

    OptimizeResult result;
    result.history.push_back(objective);
    double step = options.initial_step;

    for (int it = 0; it < options.max_inner; ++it) {
        model.set_flat_weights(y);
        const double f_y = smooth_value_and_gradient(model, problem, &bundle, tp);
        flatten(bundle, grad);
        double f_trial = 0.0;
        bool stalled = false;
        for (;;) {
            for (std::size_t g = 0; g < groups; ++g) {
                std::vector<double> z(y.begin() + static_cast<std::ptrdiff_t>(offset[g]),
                                      y.begin() + static_cast<std::ptrdiff_t>(offset[g + 1]));
                for (std::size_t t = 0; t < z.size(); ++t) z[t] -= step * grad[offset[g] + t];
                const auto p = prox_group(z, step, lambdas[g], z.size());
                std::copy(p.begin(), p.end(), trial.begin() + static_cast<std::ptrdiff_t>(offset[g]));
            }
            double linear = 0.0, quad = 0.0;
            for (std::size_t t = 0; t < y.size(); ++t) {
                const double d = trial[t] - y[t];
                linear += grad[t] * d;
                quad += d * d;
            }
            if (quad == 0.0) {
                stalled = true;  // prox-gradient fixed point
                break;
            }
            model.set_flat_weights(trial);
            f_trial = smooth_value_and_gradient(model, problem, nullptr, tp);
            const double slack = 1e-12 * std::max(1.0, std::abs(f_y));
            if (std::isfinite(f_trial) && f_trial <= f_y + linear + quad / (2.0 * step) + slack) break;
            step *= options.backtrack_beta;
            if (step < options.min_step) {
                model.set_flat_weights(w);
                throw OptimizerError("optimizer: step size underflow after " + std::to_string(it) + " iterations");
            }
        }
        if (stalled) {
            if (at_w) {
                result.converged = true;
                break;
            }
            y = w;  // momentum overshot into a fixed point of y; retry from w
            momentum = 1.0;
            at_w = true;
            continue;
        }
        const double next_objective = f_trial + group_penalty(model, problem.reg);
        if (next_objective > objective && !at_w) {
            // restart: drop the momentum and take a plain step from w
            y = w;
            momentum = 1.0;
            at_w = true;
            continue;
        }
        ++result.iterations;
        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        const double beta = (momentum - 1.0) / next_momentum;
        for (std::size_t t = 0; t < y.size(); ++t) y[t] = trial[t] + beta * (trial[t] - w[t]);
        at_w = beta == 0.0;
        w = trial;
        momentum = next_momentum;
        result.history.push_back(std::min(next_objective, objective));
        const bool small_change =
            std::abs(objective - next_objective) <= options.tol * std::max(1.0, std::abs(objective));
        objective = std::min(objective, next_objective);
        if (small_change) {
            result.converged = true;
            break;
        }
        step /= options.backtrack_beta;
    }
    model.set_flat_weights(w);
    result.objective = full();
    return result;
}

}  // namespace mrfgraft
