#include "mrfgraft/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrfgraft {

VariableSpec VariableSpec::uniform(std::size_t n, int cardinality) {
    VariableSpec spec;
    spec.names.reserve(n);
    for (std::size_t v = 0; v < n; ++v) spec.names.push_back("x" + std::to_string(v));
    spec.cardinalities.assign(n, cardinality);
    spec.validate();
    return spec;
}

int VariableSpec::max_cardinality() const {
    return cardinalities.empty() ? 0 : *std::max_element(cardinalities.begin(), cardinalities.end());
}

void VariableSpec::validate() const {
    if (names.size() != cardinalities.size())
        throw std::invalid_argument("variable spec: " + std::to_string(names.size()) + " names but " +
                                    std::to_string(cardinalities.size()) + " cardinalities");
    for (std::size_t v = 0; v < cardinalities.size(); ++v)
        if (cardinalities[v] < 2)
            throw std::invalid_argument("variable spec: cardinality of '" + names[v] + "' is " +
                                        std::to_string(cardinalities[v]) + ", need at least 2");
}

EdgeId::EdgeId(std::size_t a, std::size_t b) {
    if (a == b) throw std::invalid_argument("edge id: self-loop on variable " + std::to_string(a));
    i = static_cast<std::uint32_t>(std::min(a, b));
    j = static_cast<std::uint32_t>(std::max(a, b));
}

std::string to_string(const EdgeId& e) { return std::to_string(e.i) + "-" + std::to_string(e.j); }

EdgeId parse_edge_id(const std::string& text) {
    const auto dash = text.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == text.size())
        throw std::invalid_argument("edge id: expected 'i-j', got '" + text + "'");
    std::size_t used_a = 0, used_b = 0;
    const auto a = std::stoul(text.substr(0, dash), &used_a);
    const auto b = std::stoul(text.substr(dash + 1), &used_b);
    if (used_a != dash || used_b != text.size() - dash - 1)
        throw std::invalid_argument("edge id: expected 'i-j', got '" + text + "'");
    return {a, b};
}

std::uint64_t edge_rank(const EdgeId& e, std::size_t n) {
    // pairs (i, *) before row e.i: Σ_{k<i} (n-1-k)
    const std::uint64_t i = e.i;
    return i * (2 * n - i - 1) / 2 + (e.j - e.i - 1);
}

EdgeId edge_from_rank(std::uint64_t rank, std::size_t n) {
    std::uint64_t i = 0;
    std::uint64_t row = n - 1;
    while (rank >= row) {
        rank -= row;
        ++i;
        --row;
    }
    return {static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1 + rank)};
}

std::uint64_t parameter_count(const VariableSpec& spec) {
    std::uint64_t node_total = 0;
    std::uint64_t sum = 0;
    std::uint64_t sum_sq = 0;
    for (int s : spec.cardinalities) {
        node_total += static_cast<std::uint64_t>(s);
        sum += static_cast<std::uint64_t>(s);
        sum_sq += static_cast<std::uint64_t>(s) * s;
    }
    // Σ_{i<j} s_i s_j = ((Σ s)^2 - Σ s^2) / 2
    return node_total + (sum * sum - sum_sq) / 2;
}

MrfModel::MrfModel(VariableSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    node_weights_.reserve(spec_.size());
    for (int s : spec_.cardinalities) node_weights_.emplace_back(static_cast<std::size_t>(s), 0.0);
    adjacency_.resize(spec_.size());
}

std::optional<std::size_t> MrfModel::edge_index(const EdgeId& e) const {
    const auto it = edge_index_.find(e);
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
}

std::size_t MrfModel::activate_edge(const EdgeId& e) {
    if (e.j >= num_variables())
        throw std::out_of_range("activate_edge: edge " + to_string(e) + " outside " +
                                std::to_string(num_variables()) + " variables");
    if (is_active(e)) throw std::invalid_argument("activate_edge: edge " + to_string(e) + " already active");
    const std::size_t index = edges_.size();
    edges_.push_back(e);
    edge_weights_.emplace_back(static_cast<std::size_t>(cardinality(e.i)) * cardinality(e.j), 0.0);
    edge_index_.emplace(e, index);
    adjacency_[e.i].push_back({e.j, static_cast<std::uint32_t>(index), true});
    adjacency_[e.j].push_back({e.i, static_cast<std::uint32_t>(index), false});
    return index;
}

double MrfModel::degree_centrality(std::size_t v) const {
    if (num_variables() < 2) throw std::invalid_argument("degree_centrality: need at least 2 variables");
    return static_cast<double>(degree(v)) / static_cast<double>(num_variables() - 1);
}

std::vector<std::size_t> MrfModel::hub_set(double c_hat) const {
    std::vector<std::size_t> hubs;
    if (num_variables() < 2) return hubs;
    for (std::size_t v = 0; v < num_variables(); ++v)
        if (degree_centrality(v) > c_hat) hubs.push_back(v);
    return hubs;
}

std::span<double> MrfModel::group_weights(std::size_t g) {
    if (g < node_weights_.size()) return node_weights_[g];
    return edge_weights_.at(g - node_weights_.size());
}

std::span<const double> MrfModel::group_weights(std::size_t g) const {
    if (g < node_weights_.size()) return node_weights_[g];
    return edge_weights_.at(g - node_weights_.size());
}

double MrfModel::squared_norm() const {
    double total = 0.0;
    for (const auto& w : node_weights_)
        for (double x : w) total += x * x;
    for (const auto& w : edge_weights_)
        for (double x : w) total += x * x;
    return total;
}

std::size_t MrfModel::weight_count() const {
    std::size_t total = 0;
    for (std::size_t g = 0; g < group_count(); ++g) total += group_weights(g).size();
    return total;
}

std::vector<double> MrfModel::flat_weights() const {
    std::vector<double> flat;
    flat.reserve(weight_count());
    for (std::size_t g = 0; g < group_count(); ++g) {
        const auto w = group_weights(g);
        flat.insert(flat.end(), w.begin(), w.end());
    }
    return flat;
}

void MrfModel::set_flat_weights(std::span<const double> flat) {
    if (flat.size() != weight_count()) throw std::invalid_argument("set_flat_weights: size mismatch");
    std::size_t pos = 0;
    for (std::size_t g = 0; g < group_count(); ++g) {
        auto w = group_weights(g);
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                  flat.begin() + static_cast<std::ptrdiff_t>(pos + w.size()), w.begin());
        pos += w.size();
    }
}

}  // namespace mrfgraft
