#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "mrfgraft/indexed_heap.hpp"
#include "mrfgraft/search.hpp"

using namespace mrfgraft;

TEST_SUITE("search") {

TEST_CASE("heap basics and tie order") {
    IndexedMinHeap<EdgeId, double, EdgeIdHash> h;
    h.insert({2, 3}, 1.0);
    h.insert({0, 5}, 1.0);
    h.insert({1, 2}, 0.5);
    CHECK_THROWS(h.insert({1, 2}, 0.0));
    CHECK(h.top().key == EdgeId{1, 2});
    h.decrease_key({2, 3}, 0.5);
    CHECK_THROWS(h.decrease_key({2, 3}, 4.0));
    CHECK(h.extract_min().key == EdgeId{1, 2});
    CHECK(h.extract_min().key == EdgeId{2, 3});
    CHECK(h.extract_min().key == EdgeId{0, 5});
    CHECK(h.empty());
}

TEST_CASE("heap extraction order matches sorting on random insertions") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        IndexedMinHeap<int, double> h;
        std::vector<std::pair<double, int>> ref;
        for (int k = 0; k < 100; ++k) {
            const double p = std::uniform_int_distribution<int>(0, 20)(rng);
            h.insert(k, p);
            ref.emplace_back(p, k);
        }
        std::sort(ref.begin(), ref.end());
        for (const auto& [p, k] : ref) {
            const auto e = h.extract_min();
            REQUIRE(e.key == k);
            REQUIRE(e.priority == p);
        }
    }
}

TEST_CASE("reservoir offer") {
    const double lambda = 0.1;
    SUBCASE("failing edge is frozen with its offset") {
        Reservoir r(2);
        FrozenContainer f;
        CHECK(reservoir_offer(r, f, {0, 1}, 0.05, lambda) == OfferResult::frozen);
        CHECK(f.offset({0, 1}) == doctest::Approx(0.5));
        CHECK(r.empty());
    }
    SUBCASE("better edge replaces the minimum") {
        Reservoir r(2);
        FrozenContainer f;
        reservoir_offer(r, f, {0, 1}, 0.2, lambda);
        reservoir_offer(r, f, {0, 2}, 0.4, lambda);
        CHECK(reservoir_offer(r, f, {1, 2}, 0.3, lambda) == OfferResult::replaced_min);
        CHECK(f.contains({0, 1}));
        CHECK(f.offset({0, 1}) == doctest::Approx(-1.0));
        CHECK(r.contains({1, 2}));
        CHECK(r.min_score() == doctest::Approx(0.3));
    }
    SUBCASE("passing edge that loses to a full reservoir is frozen") {
        Reservoir r(1);
        FrozenContainer f;
        reservoir_offer(r, f, {0, 1}, 0.2, lambda);
        CHECK(reservoir_offer(r, f, {1, 2}, 0.15, lambda) == OfferResult::frozen);
        CHECK(r.contains({0, 1}));
        CHECK(f.contains({1, 2}));
    }
    SUBCASE("score equal to lambda fails") {
        Reservoir r(1);
        FrozenContainer f;
        CHECK(reservoir_offer(r, f, {0, 1}, 0.1, lambda) == OfferResult::frozen);
    }
    CHECK_THROWS(Reservoir(0));
}

TEST_CASE("reservoir minimum is nondecreasing while full") {
    std::mt19937_64 rng(7);
    Reservoir r(5);
    FrozenContainer f;
    double last_min = -1.0;
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = i + 1; j < 30; ++j) {
            reservoir_offer(r, f, {i, j}, std::uniform_real_distribution<double>(0.0, 1.0)(rng), 0.1);
            if (r.full()) {
                CHECK(r.min_score() >= last_min);
                last_min = r.min_score();
            }
        }
}

TEST_CASE("refresh reservoir") {
    const double lambda = 0.1;
    Reservoir r(3);
    FrozenContainer f;
    r.insert({0, 1}, 0.3);
    r.insert({0, 2}, 0.4);
    r.insert({1, 2}, 0.5);
    SUBCASE("unchanged scores") {
        CHECK(refresh_reservoir(r, f, [&](const EdgeId& e) { return r.score(e); }, lambda) == 0);
        CHECK(r.size() == 3);
        CHECK(f.empty());
    }
    SUBCASE("one edge falls below lambda") {
        CHECK(refresh_reservoir(r, f, [&](const EdgeId& e) { return e == EdgeId{0, 2} ? 0.05 : 0.3; }, lambda) == 1);
        CHECK(f.contains({0, 2}));
        CHECK(f.offset({0, 2}) == doctest::Approx(0.5));
        CHECK(r.size() == 2);
        CHECK(r.score({1, 2}) == doctest::Approx(0.3));
    }
    SUBCASE("everything falls below lambda") {
        CHECK(refresh_reservoir(r, f, [](const EdgeId&) { return 0.0; }, lambda) == 3);
        CHECK(r.empty());
        CHECK(f.size() == 3);
    }
}

TEST_CASE("activation set examples") {
    SUBCASE("alpha = 1 selects only the maximum") {
        Reservoir r(3);
        r.insert({0, 1}, 0.2);
        r.insert({2, 3}, 0.5);
        r.insert({4, 5}, 0.9);
        CHECK(activation_set(r, 1.0) == std::vector<EdgeId>{{4, 5}});
    }
    SUBCASE("alpha = 0 thresholds at the mean") {
        Reservoir r(2);
        r.insert({0, 1}, 0.2);
        r.insert({2, 3}, 0.6);
        CHECK(activation_set(r, 0.0) == std::vector<EdgeId>{{2, 3}});
    }
    SUBCASE("adjacent edges are skipped") {
        Reservoir r(2);
        r.insert({0, 1}, 0.9);
        r.insert({1, 2}, 0.8);
        CHECK(activation_set(r, 0.0) == std::vector<EdgeId>{{0, 1}});
    }
    SUBCASE("smaller alpha admits more edges") {
        Reservoir r(4);
        r.insert({0, 1}, 0.9);
        r.insert({2, 3}, 0.7);
        r.insert({4, 5}, 0.5);
        r.insert({6, 7}, 0.3);
        CHECK(activation_set(r, 1.0).size() == 1);
        CHECK(activation_set(r, 0.25).size() >= activation_set(r, 0.75).size());
        CHECK(activation_set(r, 0.0).size() == 2);  // mean 0.6
    }
    CHECK(activation_set(Reservoir(1), 0.5).empty());
}

TEST_CASE("selection prefers prioritized edges and otherwise samples") {
    SUBCASE("nothing seen on three nodes") {
        PrioritySearchSpace a(3, 42), b(3, 42);
        std::set<EdgeId> drawn;
        for (int k = 0; k < 3; ++k) {
            const auto e = a.select_next_edge();
            CHECK(e == b.select_next_edge());
            drawn.insert(e);
        }
        CHECK(drawn.size() == 3);
        CHECK_FALSE(a.has_candidates());
        CHECK_THROWS_AS(a.select_next_edge(), SearchExhausted);
    }
    SUBCASE("heap head below rho0 wins") {
        PrioritySearchSpace s(10, 1);
        s.push({3, 7}, -1.0);
        CHECK(s.select_next_edge() == EdgeId{3, 7});
    }
    SUBCASE("heap head above rho0 loses to unseen edges") {
        PrioritySearchSpace s(10, 1);
        s.push({3, 7}, 0.5);
        CHECK(s.select_next_edge() != EdgeId{3, 7});
        CHECK(s.heap().contains({3, 7}));
    }
    SUBCASE("uniform draws over unseen edges") {
        std::map<EdgeId, int> counts;
        for (std::uint64_t seed = 0; seed < 3000; ++seed) ++counts[PrioritySearchSpace(3, seed).select_next_edge()];
        for (const auto& [e, c] : counts) CHECK(std::abs(c - 1000) < 120);
    }
    SUBCASE("eager initialization fills the heap") {
        PrioritySearchSpace s(6, 0, 0.0, true);
        CHECK(s.heap().size() == 15);
        CHECK(s.unseen_count() == 0);
        CHECK(s.select_next_edge() == EdgeId{0, 1});
        CHECK(s.select_next_edge() == EdgeId{0, 2});
    }
}

TEST_CASE("rejection sampling rarely collides when few edges are seen") {
    const std::size_t n = 1000;
    PrioritySearchSpace s(n, 5);
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    while (s.seen_count() < 2 * n) {
        const std::size_t a = node(rng), b = node(rng);
        if (a != b && !s.is_seen({a, b})) s.push({a, b}, 1.0 + static_cast<double>(a));
    }
    // drain only through sampling: heap priorities stay above rho0
    const auto before = s.sample_draws();
    for (int k = 0; k < 10000; ++k) s.select_next_edge();
    const double per_selection = static_cast<double>(s.sample_draws() - before) / 10000.0;
    // geometric retries: selection k faces a seen fraction of (2n + k) / M
    const double pairs = static_cast<double>(candidate_edge_count(n));
    double expected = 0.0;
    for (int k = 0; k < 10000; ++k) expected += pairs / (pairs - static_cast<double>(2 * n + k));
    expected /= 10000.0;
    CHECK(per_selection == doctest::Approx(expected).epsilon(0.005));
    CHECK(per_selection < 1.03);
    CHECK(s.sampled_selections() == 10000);
}

TEST_CASE("reorganize_pq") {
    SUBCASE("no hubs leaves the space unchanged") {
        PrioritySearchSpace s(5, 0);
        reorganize_pq(s, {});
        CHECK(s.heap().empty());
        CHECK(s.seen_count() == 0);
    }
    SUBCASE("one hub inserts its unseen edges at rho0 - 1") {
        PrioritySearchSpace s(5, 0);
        reorganize_pq(s, {2}, [](const EdgeId& e) { return e == EdgeId{1, 2}; });
        CHECK(s.heap().size() == 3);
        CHECK(s.heap().priority({2, 4}) == -1.0);
        CHECK_FALSE(s.heap().contains({1, 2}));
        reorganize_pq(s, {2});
        CHECK(s.heap().priority({2, 4}) == -2.0);
        CHECK(s.heap().priority({1, 2}) == -1.0);
    }
    SUBCASE("tested edges outside the heap are not resurrected") {
        PrioritySearchSpace s(3, 0);
        s.push({0, 1}, -1.0);
        CHECK(s.select_next_edge() == EdgeId{0, 1});
        CHECK_FALSE(s.prioritize({0, 1}));
    }
}

TEST_CASE("refill from frozen") {
    PrioritySearchSpace s(4, 3);
    FrozenContainer f;
    f.freeze({0, 1}, 0.3);
    f.freeze({2, 3}, 0.7);
    s.push({1, 2}, 0.0);
    CHECK_THROWS_AS(refill_from_frozen(s, f), std::logic_error);
    while (s.has_candidates()) s.select_next_edge();
    refill_from_frozen(s, f);
    CHECK(f.empty());
    std::vector<EdgeId> order;
    while (s.has_candidates()) order.push_back(s.select_next_edge());
    CHECK(order.size() == 2);
    CHECK(order.front() == EdgeId{0, 1});

    PrioritySearchSpace fresh(5, 1);
    FrozenContainer none;
    refill_from_frozen(fresh, none);
    CHECK(fresh.has_candidates());
    CHECK(fresh.select_next_edge().j < 5);
}

TEST_CASE("violation offset") {
    CHECK(violation_offset(0.05, 0.1) == doctest::Approx(0.5));
    CHECK(violation_offset(0.0, 0.1) == 1.0);
    CHECK(violation_offset(0.3, 0.1) < 0.0);
}

}
