#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mrfgraft {

struct VariableSpec {
    std::vector<std::string> names;
    std::vector<int> cardinalities;

    // n variables named x0..x{n-1}, each with `cardinality` states.
    static VariableSpec uniform(std::size_t n, int cardinality);

    [[nodiscard]] std::size_t size() const { return cardinalities.size(); }
    [[nodiscard]] int max_cardinality() const;

    // Throws std::invalid_argument when names/cardinalities disagree or a cardinality is < 2.
    void validate() const;

    bool operator==(const VariableSpec&) const = default;
};

// Unordered variable pair stored with i < j.
struct EdgeId {
    std::uint32_t i = 0;
    std::uint32_t j = 0;

    EdgeId() = default;
    EdgeId(std::size_t a, std::size_t b);

    [[nodiscard]] bool touches(std::size_t v) const { return i == v || j == v; }
    [[nodiscard]] bool adjacent(const EdgeId& o) const {
        return touches(o.i) || touches(o.j);
    }

    auto operator<=>(const EdgeId&) const = default;
};

struct EdgeIdHash {
    std::size_t operator()(const EdgeId& e) const noexcept {
        const std::uint64_t key = (static_cast<std::uint64_t>(e.i) << 32) | e.j;
        return std::hash<std::uint64_t>{}(key * 0x9E3779B97F4A7C15ULL);
    }
};

// "i-j"
std::string to_string(const EdgeId& e);
EdgeId parse_edge_id(const std::string& text);

inline std::uint64_t candidate_edge_count(std::size_t n) {
    return n < 2 ? 0 : static_cast<std::uint64_t>(n) * (n - 1) / 2;
}

// Position of edge (i,j) in the lexicographic enumeration of all pairs, and back.
std::uint64_t edge_rank(const EdgeId& e, std::size_t n);
EdgeId edge_from_rank(std::uint64_t rank, std::size_t n);

// Σ_i s_i + Σ_{i<j} s_i s_j for the fully connected pairwise model.
std::uint64_t parameter_count(const VariableSpec& spec);

// Discrete pairwise log-linear MRF: one weight per node state and one weight per
// state pair of every active edge. Inactive edges implicitly carry zero weights.
class MrfModel {
public:
    struct Neighbor {
        std::uint32_t node;   // the other endpoint
        std::uint32_t edge;   // index into active_edges()
        bool owner_is_first;  // owner is the edge's i endpoint
    };

    MrfModel() = default;
    explicit MrfModel(VariableSpec spec);

    [[nodiscard]] const VariableSpec& spec() const { return spec_; }
    [[nodiscard]] std::size_t num_variables() const { return spec_.size(); }
    [[nodiscard]] int cardinality(std::size_t v) const { return spec_.cardinalities[v]; }

    [[nodiscard]] std::span<double> node_weights(std::size_t v) { return node_weights_[v]; }
    [[nodiscard]] std::span<const double> node_weights(std::size_t v) const { return node_weights_[v]; }

    // Activation order is preserved; edge indices are stable.
    [[nodiscard]] const std::vector<EdgeId>& active_edges() const { return edges_; }
    [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }
    [[nodiscard]] bool is_active(const EdgeId& e) const { return edge_index_.contains(e); }
    [[nodiscard]] std::optional<std::size_t> edge_index(const EdgeId& e) const;

    // Adds e with a zero-initialized s_i x s_j weight table. Returns its index.
    std::size_t activate_edge(const EdgeId& e);

    // Row-major s_i x s_j table for edge (i, j).
    [[nodiscard]] std::span<double> edge_weights(std::size_t index) { return edge_weights_[index]; }
    [[nodiscard]] std::span<const double> edge_weights(std::size_t index) const { return edge_weights_[index]; }

    // Weight of edge `nb` with the owner in state a and the neighbor in state b.
    [[nodiscard]] double pair_weight(const Neighbor& nb, std::size_t owner, int a, int b) const {
        const auto& w = edge_weights_[nb.edge];
        if (nb.owner_is_first) return w[static_cast<std::size_t>(a) * cardinality(nb.node) + b];
        return w[static_cast<std::size_t>(b) * cardinality(owner) + a];
    }

    [[nodiscard]] std::span<const Neighbor> neighbors(std::size_t v) const { return adjacency_[v]; }
    [[nodiscard]] std::size_t degree(std::size_t v) const { return adjacency_[v].size(); }

    // |N_v| / (n - 1). Throws when n < 2.
    [[nodiscard]] double degree_centrality(std::size_t v) const;
    // Nodes with centrality strictly above c_hat, ascending.
    [[nodiscard]] std::vector<std::size_t> hub_set(double c_hat) const;

    // Parameter groups: [0, n) are nodes, [n, n + edge_count) are active edges.
    [[nodiscard]] std::size_t group_count() const { return node_weights_.size() + edges_.size(); }
    [[nodiscard]] std::span<double> group_weights(std::size_t g);
    [[nodiscard]] std::span<const double> group_weights(std::size_t g) const;
    [[nodiscard]] bool is_node_group(std::size_t g) const { return g < node_weights_.size(); }

    // Sum of squares over every weight.
    [[nodiscard]] double squared_norm() const;

    // All weights concatenated in group order, and the inverse.
    [[nodiscard]] std::vector<double> flat_weights() const;
    void set_flat_weights(std::span<const double> flat);
    [[nodiscard]] std::size_t weight_count() const;

private:
    VariableSpec spec_;
    std::vector<std::vector<double>> node_weights_;
    std::vector<EdgeId> edges_;
    std::vector<std::vector<double>> edge_weights_;
    std::unordered_map<EdgeId, std::size_t, EdgeIdHash> edge_index_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

}  // namespace mrfgraft
