#pragma once

// Randomized invariant suites. Each returns how many cases it checked and a
// description of the first failure, if any.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrfgraft/data.hpp"
#include "mrfgraft/indexed_heap.hpp"
#include "mrfgraft/learners.hpp"
#include "mrfgraft/search.hpp"
#include "mrfgraft/synthetic.hpp"
#include "oracles.hpp"

namespace props {

struct SuiteResult {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;

    void fail(const std::string& why) {
        if (failures++ == 0) first_failure = why;
    }
};

inline mrfgraft::DiscreteDataset small_sample(std::uint64_t seed, std::size_t n, int card, std::size_t rows) {
    const auto truth = mrfgraft::generate_ground_truth(n, card, {}, seed);
    return mrfgraft::gibbs_sample(truth.model, rows, {50, 2}, seed + 1);
}

// Every candidate edge sits in exactly one of: active set, reservoir, frozen
// container, heap, unseen pool. Also checks that reservoir members pass C2.
inline std::pair<SuiteResult, SuiteResult> conservation_and_c2(std::size_t runs, std::uint64_t seed) {
    SuiteResult conservation{"edge conservation across containers"};
    SuiteResult c2{"reservoir members pass the activation test"};
    std::mt19937_64 rng(seed);
    for (std::size_t run = 0; run < runs; ++run) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(4, 7)(rng);
        const auto data = small_sample(seed + run * 7919, n, 2, 300);
        mrfgraft::LearnerConfig cfg;
        cfg.method = mrfgraft::Method::best_choice;
        cfg.reg.lambda = std::uniform_real_distribution<double>(0.002, 0.03)(rng);
        cfg.reg.alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        cfg.reservoir_size = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
        cfg.t_max = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        cfg.eager_pq = rng() % 4 == 0;
        cfg.structure_heuristics = rng() % 2 == 0;
        cfg.c_hat = 0.3;
        cfg.seed = rng();
        mrfgraft::LearnerHooks hooks;
        hooks.record_wall_time = false;
        hooks.on_search_state = [&](const mrfgraft::SearchStateView& s) {
            ++conservation.cases;
            std::size_t counted = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const mrfgraft::EdgeId e{i, j};
                    const int places = int(s.model.is_active(e)) + int(s.reservoir.contains(e)) +
                                       int(s.frozen.contains(e)) + int(s.space.heap().contains(e)) +
                                       int(!s.space.is_seen(e));
                    counted += places == 1 ? 1 : 0;
                    if (places != 1) {
                        conservation.fail("edge " + mrfgraft::to_string(e) + " held in " + std::to_string(places) +
                                          " containers");
                        return;
                    }
                }
            if (counted != mrfgraft::candidate_edge_count(n)) conservation.fail("edge count mismatch");
            ++c2.cases;
            for (const auto& [e, score] : s.reservoir.ranked())
                if (!(score > s.lambda)) {
                    c2.fail("reservoir edge " + mrfgraft::to_string(e) + " has score " + std::to_string(score) +
                            " <= lambda");
                    return;
                }
        };
        mrfgraft::learn(data, cfg, hooks);
    }
    return {conservation, c2};
}

// activation_set returns a matching of edges at or above the threshold, led by
// the best edge.
inline SuiteResult matching_batches(std::size_t cases, std::uint64_t seed) {
    SuiteResult r{"activation batches are matchings above tau"};
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        ++r.cases;
        const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 12)(rng);
        const std::size_t cap = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
        mrfgraft::Reservoir res(cap);
        std::uniform_real_distribution<double> score(0.01, 1.0);
        std::uniform_int_distribution<std::size_t> node(0, n - 1);
        for (int attempt = 0; attempt < 40 && !res.full(); ++attempt) {
            const std::size_t a = node(rng), b = node(rng);
            if (a == b) continue;
            const mrfgraft::EdgeId e{a, b};
            if (!res.contains(e)) res.insert(e, std::round(score(rng) * 20.0) / 20.0);  // force ties
        }
        const double alpha = c % 5 == 0 ? 1.0 : std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const auto batch = mrfgraft::activation_set(res, alpha);
        if (res.empty()) {
            if (!batch.empty()) r.fail("non-empty batch from empty reservoir");
            continue;
        }
        // independent threshold computation
        double sum = 0.0, best = -1.0;
        for (const auto& [e, s] : res.ranked()) {
            sum += s;
            best = std::max(best, s);
        }
        const double tau = (1.0 - alpha) * sum / static_cast<double>(res.size()) + alpha * best;
        if (batch.empty() || res.score(batch.front()) != best) r.fail("batch does not start with the best edge");
        if (alpha >= 1.0 && batch.size() != 1) r.fail("alpha = 1 must give a single edge");
        for (std::size_t x = 0; x < batch.size(); ++x) {
            if (!res.contains(batch[x])) r.fail("batch edge not in reservoir");
            if (res.score(batch[x]) < tau - 1e-12) r.fail("batch edge below tau");
            for (std::size_t y = x + 1; y < batch.size(); ++y)
                if (batch[x].adjacent(batch[y])) r.fail("batch edges share an endpoint");
        }
        // maximality: every skipped edge above tau touches a chosen one
        if (alpha < 1.0)
            for (const auto& [e, s] : res.ranked()) {
                if (s < tau || std::find(batch.begin(), batch.end(), e) != batch.end()) continue;
                const bool blocked = std::any_of(batch.begin(), batch.end(), [&](const auto& b) { return b.adjacent(e); });
                if (!blocked) r.fail("edge " + mrfgraft::to_string(e) + " above tau was skipped without a conflict");
            }
    }
    return r;
}

// Random operation streams against a sorted-vector model of the heap.
inline SuiteResult heap_vs_sort(std::size_t cases, std::uint64_t seed) {
    SuiteResult r{"indexed heap agrees with a sorted list"};
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        ++r.cases;
        mrfgraft::IndexedMinHeap<int, double> heap;
        std::map<int, double> model;
        const int keys = std::uniform_int_distribution<int>(1, 30)(rng);
        std::uniform_int_distribution<int> key(0, keys - 1);
        std::uniform_int_distribution<int> op(0, 5);
        std::uniform_int_distribution<int> prio(-5, 5);  // small range forces ties
        auto oracle_min = [&] {
            std::vector<std::pair<double, int>> v;
            for (const auto& [k, p] : model) v.emplace_back(p, k);
            std::sort(v.begin(), v.end());
            return v.front();
        };
        bool ok = true;
        for (int step = 0; step < 60 && ok; ++step) {
            const int k = key(rng);
            switch (op(rng)) {
                case 0:
                case 1:
                    if (!model.contains(k)) {
                        const double p = prio(rng);
                        heap.insert(k, p);
                        model[k] = p;
                    }
                    break;
                case 2:
                    if (!model.empty()) {
                        const auto [p, mk] = oracle_min();
                        const auto top = heap.extract_min();
                        if (top.key != mk || top.priority != p) ok = false;
                        model.erase(mk);
                    }
                    break;
                case 3:
                    if (model.contains(k)) {
                        const double p = model[k] - std::uniform_int_distribution<int>(0, 3)(rng);
                        heap.decrease_key(k, p);
                        model[k] = p;
                    }
                    break;
                case 4:
                    if (model.contains(k)) {
                        heap.erase(k);
                        model.erase(k);
                    }
                    break;
                case 5:
                    if (model.contains(k)) {
                        const double p = prio(rng);
                        heap.update(k, p);
                        model[k] = p;
                    }
                    break;
            }
            if (heap.size() != model.size()) ok = false;
            if (ok && !model.empty()) {
                const auto [p, mk] = oracle_min();
                if (heap.top().key != mk || heap.top().priority != p) ok = false;
            }
        }
        // drain: must come out in (priority, key) order
        std::vector<std::pair<double, int>> expected;
        for (const auto& [k, p] : model) expected.emplace_back(p, k);
        std::sort(expected.begin(), expected.end());
        for (const auto& [p, k] : expected) {
            if (!ok) break;
            const auto top = heap.extract_min();
            if (top.key != k || top.priority != p) ok = false;
        }
        if (ok && !heap.empty()) ok = false;
        if (!ok) r.fail("divergence in case " + std::to_string(c));
    }
    return r;
}

// Cached pairwise tables sum to one, marginalize to the node marginals and match
// direct counting.
inline SuiteResult marginal_consistency(std::size_t cases, std::uint64_t seed) {
    SuiteResult r{"pairwise statistics marginalize to node statistics"};
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        ++r.cases;
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
        mrfgraft::VariableSpec spec = mrfgraft::VariableSpec::uniform(n, 2);
        for (auto& s : spec.cardinalities) s = std::uniform_int_distribution<int>(2, 5)(rng);
        const auto data = oracle::random_data(rng, spec, std::uniform_int_distribution<std::size_t>(1, 80)(rng));
        mrfgraft::SufficientStatsStore store(data);
        const std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
        const std::size_t j = std::uniform_int_distribution<std::size_t>(i + 1, n - 1)(rng);
        const auto table = store.edge_table({i, j});
        const auto direct = oracle::pair_frequency(data, i, j);
        const auto pi = oracle::node_frequency(data, i), pj = oracle::node_frequency(data, j);
        const auto si = static_cast<std::size_t>(spec.cardinalities[i]), sj = static_cast<std::size_t>(spec.cardinalities[j]);
        double total = 0.0;
        for (double v : table) total += v;
        bool ok = std::abs(total - 1.0) < 1e-12 && oracle::max_abs_diff(table, direct) < 1e-12;
        for (std::size_t a = 0; a < si && ok; ++a) {
            double row = 0.0;
            for (std::size_t b = 0; b < sj; ++b) row += table[a * sj + b];
            ok = std::abs(row - pi[a]) < 1e-12 && std::abs(row - store.node_marginal(i)[a]) < 1e-12;
        }
        for (std::size_t b = 0; b < sj && ok; ++b) {
            double col = 0.0;
            for (std::size_t a = 0; a < si; ++a) col += table[a * sj + b];
            ok = std::abs(col - pj[b]) < 1e-12 && std::abs(col - store.node_marginal(j)[b]) < 1e-12;
        }
        if (!ok) r.fail("inconsistent table for edge " + mrfgraft::to_string({i, j}) + " in case " + std::to_string(c));
    }
    return r;
}

inline std::vector<SuiteResult> run_all(std::uint64_t seed) {
    auto [conservation, c2] = conservation_and_c2(25, seed);
    return {conservation, matching_batches(300, seed + 1), c2, heap_vs_sort(300, seed + 2),
            marginal_consistency(300, seed + 3)};
}

}  // namespace props
