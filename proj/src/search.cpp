#include "mrfgraft/search.hpp"

#include <algorithm>

namespace mrfgraft {

Reservoir::Reservoir(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("reservoir: capacity must be at least 1");
}

double Reservoir::max_score() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& entry : scores_.entries()) best = std::max(best, entry.priority);
    return best;
}

double Reservoir::mean_score() const {
    if (empty()) return 0.0;
    // sum in ranked order so the result does not depend on heap layout
    double total = 0.0;
    for (const auto& [e, s] : ranked()) total += s;
    return total / static_cast<double>(size());
}

void Reservoir::insert(const EdgeId& e, double score) {
    if (full()) throw std::logic_error("reservoir: insert into a full reservoir");
    scores_.insert(e, score);
}

std::vector<std::pair<EdgeId, double>> Reservoir::ranked() const {
    std::vector<std::pair<EdgeId, double>> out;
    out.reserve(size());
    for (const auto& entry : scores_.entries()) out.emplace_back(entry.key, entry.priority);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

OfferResult reservoir_offer(Reservoir& reservoir, FrozenContainer& frozen, const EdgeId& e, double score,
                            double lambda) {
    if (score > lambda) {
        if (!reservoir.full()) {
            reservoir.insert(e, score);
            return OfferResult::inserted;
        }
        if (reservoir.min_score() < score) {
            const EdgeId evicted = reservoir.min_edge();
            frozen.freeze(evicted, violation_offset(reservoir.min_score(), lambda));
            reservoir.erase(evicted);
            reservoir.insert(e, score);
            return OfferResult::replaced_min;
        }
    }
    frozen.freeze(e, violation_offset(score, lambda));
    return OfferResult::frozen;
}

std::size_t refresh_reservoir(Reservoir& reservoir, FrozenContainer& frozen,
                              const std::function<double(const EdgeId&)>& rescore, double lambda) {
    std::size_t dropped = 0;
    for (const auto& [e, old_score] : reservoir.ranked()) {
        const double score = rescore(e);
        if (score > lambda) {
            reservoir.update(e, score);
        } else {
            reservoir.erase(e);
            frozen.freeze(e, violation_offset(score, lambda));
            ++dropped;
        }
    }
    return dropped;
}

std::vector<EdgeId> activation_set(const Reservoir& reservoir, double alpha) {
    std::vector<EdgeId> chosen;
    if (reservoir.empty()) return chosen;
    const auto ranked = reservoir.ranked();
    if (alpha >= 1.0) return {ranked.front().first};
    // clamped so rounding never pushes the threshold above the best score
    const double tau = std::min(ranked.front().second, (1.0 - alpha) * reservoir.mean_score() + alpha * ranked.front().second);
    for (const auto& [e, s] : ranked) {
        if (s < tau) break;
        const bool clashes = std::any_of(chosen.begin(), chosen.end(), [&](const EdgeId& c) { return c.adjacent(e); });
        if (!clashes) chosen.push_back(e);
    }
    return chosen;
}

PrioritySearchSpace::PrioritySearchSpace(std::size_t n, std::uint64_t seed, double rho0, bool eager)
    : n_(n), rho0_(rho0), rng_(seed) {
    if (n < 2) throw std::invalid_argument("search space: need at least 2 variables");
    if (eager)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) push({i, j}, rho0);
}

void PrioritySearchSpace::push(const EdgeId& e, double priority) {
    heap_.insert(e, priority);
    seen_.insert(e);
}

bool PrioritySearchSpace::prioritize(const EdgeId& e, double amount) {
    if (heap_.contains(e)) {
        heap_.decrease_key(e, heap_.priority(e) - amount);
        return true;
    }
    if (!seen_.contains(e)) {
        push(e, rho0_ - amount);
        return true;
    }
    return false;
}

EdgeId PrioritySearchSpace::sample_unseen() {
    for (;;) {
        ++sample_draws_;
        const auto a = rng_.uniform_index(n_);
        auto b = rng_.uniform_index(n_ - 1);
        if (b >= a) ++b;
        const EdgeId e{a, b};
        if (!seen_.contains(e)) return e;
    }
}

EdgeId PrioritySearchSpace::select_next_edge() {
    if (!heap_.empty() && heap_.top().priority < rho0_) return heap_.extract_min().key;
    if (unseen_count() > 0) {
        const EdgeId e = sample_unseen();
        seen_.insert(e);
        ++sampled_selections_;
        return e;
    }
    if (!heap_.empty()) return heap_.extract_min().key;
    throw SearchExhausted();
}

void reorganize_pq(PrioritySearchSpace& space, const std::vector<std::size_t>& hubs,
                   const std::function<bool(const EdgeId&)>& skip) {
    const std::size_t n = space.num_variables();
    for (std::size_t h : hubs)
        for (std::size_t v = 0; v < n; ++v) {
            if (v == h) continue;
            const EdgeId e{h, v};
            if (skip && skip(e)) continue;
            space.prioritize(e, 1.0);
        }
}

void refill_from_frozen(PrioritySearchSpace& space, FrozenContainer& frozen) {
    if (!space.heap().empty()) throw std::logic_error("refill_from_frozen: priority queue is not empty");
    for (const auto& [e, offset] : frozen.entries()) space.push(e, offset);
    frozen.clear();
}

}  // namespace mrfgraft
