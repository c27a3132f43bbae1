#include "mrfgraft/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrfgraft {

EngineKind parse_engine_kind(const std::string& name) {
    if (name == "exact") return EngineKind::exact;
    if (name == "bp" || name == "loopy_bp") return EngineKind::loopy_bp;
    throw std::invalid_argument("unknown engine '" + name + "' (expected exact or bp)");
}

std::string to_string(EngineKind kind) { return kind == EngineKind::exact ? "exact" : "bp"; }

double joint_state_count(const VariableSpec& spec) {
    double total = 1.0;
    for (int s : spec.cardinalities) total *= s;
    return total;
}

double log_sum_exp(std::span<const double> v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    const double peak = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(peak)) return peak;
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - peak);
    return peak + std::log(sum);
}

namespace {

double joint_energy(const MrfModel& model, const std::vector<std::int32_t>& x) {
    double energy = 0.0;
    for (std::size_t v = 0; v < model.num_variables(); ++v) energy += model.node_weights(v)[x[v]];
    const auto& edges = model.active_edges();
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto sj = static_cast<std::size_t>(model.cardinality(edges[k].j));
        energy += model.edge_weights(k)[static_cast<std::size_t>(x[edges[k].i]) * sj + x[edges[k].j]];
    }
    return energy;
}

// Mixed-radix increment; returns false after the last configuration.
bool next_state(std::vector<std::int32_t>& x, const VariableSpec& spec) {
    for (std::size_t v = 0; v < x.size(); ++v) {
        if (++x[v] < spec.cardinalities[v]) return true;
        x[v] = 0;
    }
    return false;
}

void normalize_in_place(std::vector<double>& p) {
    double total = 0.0;
    for (double x : p) total += x;
    for (double& x : p) x /= total;
}

}  // namespace

Beliefs exact_marginals(const MrfModel& model) {
    const auto& spec = model.spec();
    if (joint_state_count(spec) > kExactStateCap)
        throw std::length_error("exact_marginals: joint state space of " + std::to_string(joint_state_count(spec)) +
                                " configurations exceeds the enumeration cap");
    const std::size_t n = model.num_variables();
    const auto& edges = model.active_edges();

    std::vector<std::int32_t> x(n, 0);
    double peak = -std::numeric_limits<double>::infinity();
    do {
        peak = std::max(peak, joint_energy(model, x));
    } while (next_state(x, spec));

    Beliefs out;
    out.node.resize(n);
    for (std::size_t v = 0; v < n; ++v) out.node[v].assign(static_cast<std::size_t>(model.cardinality(v)), 0.0);
    out.edge.resize(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k)
        out.edge[k].assign(static_cast<std::size_t>(model.cardinality(edges[k].i)) * model.cardinality(edges[k].j), 0.0);

    double total = 0.0;
    std::fill(x.begin(), x.end(), 0);
    do {
        const double weight = std::exp(joint_energy(model, x) - peak);
        total += weight;
        for (std::size_t v = 0; v < n; ++v) out.node[v][static_cast<std::size_t>(x[v])] += weight;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const auto sj = static_cast<std::size_t>(model.cardinality(edges[k].j));
            out.edge[k][static_cast<std::size_t>(x[edges[k].i]) * sj + x[edges[k].j]] += weight;
        }
    } while (next_state(x, spec));

    for (auto& p : out.node)
        for (double& v : p) v /= total;
    for (auto& p : out.edge)
        for (double& v : p) v /= total;
    out.log_partition = peak + std::log(total);
    return out;
}

Beliefs loopy_bp(const MrfModel& model, const BpOptions& options) {
    if (!(options.damping >= 0.0 && options.damping < 1.0))
        throw std::invalid_argument("loopy_bp: damping must lie in [0, 1)");
    const std::size_t n = model.num_variables();
    const auto& edges = model.active_edges();
    const std::size_t m = edges.size();

    // message 2k flows i -> j (length s_j), message 2k + 1 flows j -> i (length s_i)
    std::vector<std::size_t> offset(2 * m + 1, 0);
    for (std::size_t k = 0; k < m; ++k) {
        offset[2 * k + 1] = offset[2 * k] + static_cast<std::size_t>(model.cardinality(edges[k].j));
        offset[2 * k + 2] = offset[2 * k + 1] + static_cast<std::size_t>(model.cardinality(edges[k].i));
    }
    std::vector<double> messages(offset.back());
    for (std::size_t k = 0; k < m; ++k) {
        const double to_j = -std::log(static_cast<double>(model.cardinality(edges[k].j)));
        const double to_i = -std::log(static_cast<double>(model.cardinality(edges[k].i)));
        std::fill(messages.begin() + offset[2 * k], messages.begin() + offset[2 * k + 1], to_j);
        std::fill(messages.begin() + offset[2 * k + 1], messages.begin() + offset[2 * k + 2], to_i);
    }
    auto incoming_to = [&](const MrfModel::Neighbor& nb) {
        // message from nb.node into the owner
        return nb.owner_is_first ? 2 * std::size_t{nb.edge} + 1 : 2 * std::size_t{nb.edge};
    };

    std::vector<std::vector<double>> node_sum(n);
    auto accumulate_node_sums = [&](const std::vector<double>& msgs) {
        for (std::size_t v = 0; v < n; ++v) {
            const auto theta = model.node_weights(v);
            node_sum[v].assign(theta.begin(), theta.end());
            for (const auto& nb : model.neighbors(v)) {
                const std::size_t in = incoming_to(nb);
                for (std::size_t a = 0; a < node_sum[v].size(); ++a) node_sum[v][a] += msgs[offset[in] + a];
            }
        }
    };

    Beliefs out;
    std::vector<double> next(messages.size());
    std::vector<double> cavity;
    std::vector<double> terms;
    bool converged = m == 0;
    int iter = 0;
    while (!converged && iter < options.max_iters) {
        ++iter;
        accumulate_node_sums(messages);
        double residual = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            for (int dir = 0; dir < 2; ++dir) {
                const std::size_t src = dir == 0 ? edges[k].i : edges[k].j;
                const std::size_t dst = dir == 0 ? edges[k].j : edges[k].i;
                const std::size_t out_msg = 2 * k + dir;
                const std::size_t back_msg = 2 * k + 1 - dir;
                const auto s_src = static_cast<std::size_t>(model.cardinality(src));
                const auto s_dst = static_cast<std::size_t>(model.cardinality(dst));
                const auto w = model.edge_weights(k);
                cavity.resize(s_src);
                for (std::size_t a = 0; a < s_src; ++a) cavity[a] = node_sum[src][a] - messages[offset[back_msg] + a];
                terms.resize(s_src);
                double* target = next.data() + offset[out_msg];
                for (std::size_t b = 0; b < s_dst; ++b) {
                    for (std::size_t a = 0; a < s_src; ++a) {
                        const double pair = dir == 0 ? w[a * s_dst + b] : w[b * s_src + a];
                        terms[a] = cavity[a] + pair;
                    }
                    target[b] = log_sum_exp(terms);
                }
                const double norm = log_sum_exp(std::span<const double>(target, s_dst));
                for (std::size_t b = 0; b < s_dst; ++b) {
                    const double fresh = std::exp(target[b] - norm);
                    const double old = std::exp(messages[offset[out_msg] + b]);
                    const double damped = (1.0 - options.damping) * fresh + options.damping * old;
                    residual = std::max(residual, std::abs(damped - old));
                    target[b] = std::log(damped);
                }
            }
        }
        messages.swap(next);
        out.residuals.push_back(residual);
        converged = residual < options.tol;
    }
    out.converged = converged;
    out.iterations = iter;

    accumulate_node_sums(messages);
    out.node.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        const double z = log_sum_exp(node_sum[v]);
        out.node[v].resize(node_sum[v].size());
        for (std::size_t a = 0; a < node_sum[v].size(); ++a) out.node[v][a] = std::exp(node_sum[v][a] - z);
    }
    out.edge.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = edges[k].i;
        const std::size_t j = edges[k].j;
        const auto si = static_cast<std::size_t>(model.cardinality(i));
        const auto sj = static_cast<std::size_t>(model.cardinality(j));
        const auto w = model.edge_weights(k);
        std::vector<double> logb(si * sj);
        for (std::size_t a = 0; a < si; ++a)
            for (std::size_t b = 0; b < sj; ++b)
                logb[a * sj + b] = (node_sum[i][a] - messages[offset[2 * k + 1] + a]) +
                                   (node_sum[j][b] - messages[offset[2 * k] + b]) + w[a * sj + b];
        const double z = log_sum_exp(logb);
        out.edge[k].resize(si * sj);
        for (std::size_t t = 0; t < logb.size(); ++t) out.edge[k][t] = std::exp(logb[t] - z);
    }
    for (auto& p : out.node) normalize_in_place(p);
    for (auto& p : out.edge) normalize_in_place(p);
    return out;
}

Beliefs compute_beliefs(const MrfModel& model, const EngineConfig& engine) {
    return engine.kind == EngineKind::exact ? exact_marginals(model) : loopy_bp(model, engine.bp);
}

std::vector<double> pair_marginal_estimate(const Beliefs& beliefs, const MrfModel& model, const EdgeId& e) {
    if (const auto index = model.edge_index(e)) return beliefs.edge[*index];
    const auto& pi = beliefs.node[e.i];
    const auto& pj = beliefs.node[e.j];
    std::vector<double> table(pi.size() * pj.size());
    for (std::size_t a = 0; a < pi.size(); ++a)
        for (std::size_t b = 0; b < pj.size(); ++b) table[a * pj.size() + b] = pi[a] * pj[b];
    return table;
}

void conditional_logits(const MrfModel& model, std::span<const std::int32_t> x, std::size_t i,
                        std::span<double> out) {
    const auto theta = model.node_weights(i);
    std::copy(theta.begin(), theta.end(), out.begin());
    const int si = model.cardinality(i);
    for (const auto& nb : model.neighbors(i)) {
        const auto w = model.edge_weights(nb.edge);
        const int xj = x[nb.node];
        if (nb.owner_is_first) {
            const auto sj = static_cast<std::size_t>(model.cardinality(nb.node));
            for (int a = 0; a < si; ++a) out[a] += w[static_cast<std::size_t>(a) * sj + xj];
        } else {
            const auto row = static_cast<std::size_t>(xj) * si;
            for (int a = 0; a < si; ++a) out[a] += w[row + a];
        }
    }
}

std::vector<double> conditional_distribution(const MrfModel& model, std::span<const std::int32_t> x,
                                             std::size_t i) {
    std::vector<double> p(static_cast<std::size_t>(model.cardinality(i)));
    conditional_logits(model, x, i, p);
    const double z = log_sum_exp(p);
    for (double& v : p) v = std::exp(v - z);
    return p;
}

double nlpl(const MrfModel& model, const DiscreteDataset& data) {
    if (data.spec().cardinalities != model.spec().cardinalities)
        throw std::invalid_argument("nlpl: dataset and model disagree on variables");
    const std::size_t n = model.num_variables();
    std::vector<double> logits(static_cast<std::size_t>(model.spec().max_cardinality()));
    double total = 0.0;
    for (std::size_t m = 0; m < data.num_rows(); ++m) {
        const auto x = data.row(m);
        for (std::size_t i = 0; i < n; ++i) {
            const std::span<double> li(logits.data(), static_cast<std::size_t>(model.cardinality(i)));
            conditional_logits(model, x, i, li);
            total += log_sum_exp(li) - li[x[i]];
        }
    }
    return total / static_cast<double>(data.num_rows());
}

}  // namespace mrfgraft
