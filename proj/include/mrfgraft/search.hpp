#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "mrfgraft/indexed_heap.hpp"
#include "mrfgraft/model.hpp"
#include "mrfgraft/random.hpp"

namespace mrfgraft {

class SearchExhausted : public std::runtime_error {
public:
    SearchExhausted() : std::runtime_error("search space exhausted") {}
};

// v_e = 1 - s_e / lambda
inline double violation_offset(double score, double lambda) { return 1.0 - score / lambda; }

// Tested edges that were not kept, with their violation offsets.
class FrozenContainer {
public:
    void freeze(const EdgeId& e, double offset) { offsets_[e] = offset; }
    [[nodiscard]] bool contains(const EdgeId& e) const { return offsets_.contains(e); }
    [[nodiscard]] std::size_t size() const { return offsets_.size(); }
    [[nodiscard]] bool empty() const { return offsets_.empty(); }
    [[nodiscard]] double offset(const EdgeId& e) const { return offsets_.at(e); }
    [[nodiscard]] const std::map<EdgeId, double>& entries() const { return offsets_; }
    void clear() { offsets_.clear(); }

private:
    std::map<EdgeId, double> offsets_;
};

// Bounded set of candidate edges that passed the activation test, with O(log |R|)
// access to the lowest-scoring entry.
class Reservoir {
public:
    explicit Reservoir(std::size_t capacity);

    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] std::size_t size() const { return scores_.size(); }
    [[nodiscard]] bool empty() const { return scores_.empty(); }
    [[nodiscard]] bool full() const { return scores_.size() >= capacity_; }
    [[nodiscard]] bool contains(const EdgeId& e) const { return scores_.contains(e); }
    [[nodiscard]] double score(const EdgeId& e) const { return scores_.priority(e); }

    [[nodiscard]] EdgeId min_edge() const { return scores_.top().key; }
    [[nodiscard]] double min_score() const { return scores_.top().priority; }
    [[nodiscard]] double max_score() const;
    [[nodiscard]] double mean_score() const;

    void insert(const EdgeId& e, double score);
    void update(const EdgeId& e, double score) { scores_.update(e, score); }
    void erase(const EdgeId& e) { scores_.erase(e); }

    // Highest score first; ties by edge id.
    [[nodiscard]] std::vector<std::pair<EdgeId, double>> ranked() const;

private:
    std::size_t capacity_;
    IndexedMinHeap<EdgeId, double, EdgeIdHash> scores_;
};

enum class OfferResult { inserted, replaced_min, frozen };

// Reservoir admission for a freshly scored edge. Edges that fail the activation
// test, lose to a full reservoir, or get evicted go to `frozen`.
OfferResult reservoir_offer(Reservoir& reservoir, FrozenContainer& frozen, const EdgeId& e, double score,
                            double lambda);

// Rescores every held edge and freezes those that no longer pass. Returns the
// number of dropped edges.
std::size_t refresh_reservoir(Reservoir& reservoir, FrozenContainer& frozen,
                              const std::function<double(const EdgeId&)>& rescore, double lambda);

// Edges scoring at least (1 - alpha) * mean + alpha * max, best first, skipping
// any edge that shares an endpoint with one already chosen. alpha = 1 yields the
// single best edge.
std::vector<EdgeId> activation_set(const Reservoir& reservoir, double alpha);

// Lazily represented priority queue over all candidate edges. Edges never
// touched ("unseen") implicitly sit at the default priority rho0 and are reached
// by rejection sampling; everything else lives in an indexed min-heap.
class PrioritySearchSpace {
public:
    PrioritySearchSpace(std::size_t n, std::uint64_t seed, double rho0 = 0.0, bool eager = false);

    [[nodiscard]] std::size_t num_variables() const { return n_; }
    [[nodiscard]] double rho0() const { return rho0_; }
    [[nodiscard]] const IndexedMinHeap<EdgeId, double, EdgeIdHash>& heap() const { return heap_; }
    [[nodiscard]] bool is_seen(const EdgeId& e) const { return seen_.contains(e); }
    [[nodiscard]] std::size_t seen_count() const { return seen_.size(); }
    [[nodiscard]] std::uint64_t unseen_count() const { return candidate_edge_count(n_) - seen_.size(); }
    [[nodiscard]] bool has_candidates() const { return !heap_.empty() || unseen_count() > 0; }

    // Heap head when it beats rho0, otherwise a uniformly drawn unseen edge,
    // otherwise the heap head. Throws SearchExhausted when nothing is left.
    EdgeId select_next_edge();

    // Inserts an edge into the heap, marking it seen.
    void push(const EdgeId& e, double priority);
    // Lower a heap entry's priority by `amount`, or insert an unseen edge at rho0 - amount.
    // Seen edges outside the heap are left alone. Returns true when something changed.
    bool prioritize(const EdgeId& e, double amount = 1.0);

    // Rejection-sampling draws, including collisions with seen edges.
    [[nodiscard]] std::uint64_t sample_draws() const { return sample_draws_; }
    [[nodiscard]] std::uint64_t sampled_selections() const { return sampled_selections_; }

private:
    std::size_t n_;
    double rho0_;
    Rng rng_;
    IndexedMinHeap<EdgeId, double, EdgeIdHash> heap_;
    std::unordered_set<EdgeId, EdgeIdHash> seen_;
    std::uint64_t sample_draws_ = 0;
    std::uint64_t sampled_selections_ = 0;

    EdgeId sample_unseen();
};

// For every hub h and every other node v, prioritize (h, v) unless `skip` says
// the edge is not searchable (active or held in the reservoir).
void reorganize_pq(PrioritySearchSpace& space, const std::vector<std::size_t>& hubs,
                   const std::function<bool(const EdgeId&)>& skip = {});

// Moves every frozen edge into the heap with its violation offset as priority.
// Requires an empty heap.
void refill_from_frozen(PrioritySearchSpace& space, FrozenContainer& frozen);

}  // namespace mrfgraft
