#include "mrfgraft/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "mrfgraft/inference.hpp"
#include "mrfgraft/random.hpp"

namespace mrfgraft {

std::vector<EdgeId> preferential_attachment(std::size_t n, std::uint64_t seed) {
    if (n < 3) throw std::invalid_argument("preferential_attachment: need at least 3 nodes, got " + std::to_string(n));
    Rng rng(seed);
    std::set<EdgeId> edges{{0, 1}, {1, 2}};
    // every edge endpoint appears once, so a uniform draw is degree-proportional
    std::vector<std::size_t> endpoints{0, 1, 1, 2};
    for (std::size_t v = 3; v < n; ++v) {
        const std::size_t first = endpoints[rng.uniform_index(endpoints.size())];
        std::size_t second = first;
        while (second == first) second = endpoints[rng.uniform_index(endpoints.size())];
        for (std::size_t target : {first, second}) {
            edges.insert({v, target});
            endpoints.push_back(v);
            endpoints.push_back(target);
        }
    }
    return {edges.begin(), edges.end()};
}

MrfModel sample_parameters(const std::vector<EdgeId>& edges, const VariableSpec& spec, const ParameterPrior& prior,
                           std::uint64_t seed) {
    if (!(prior.sigma_node > 0.0 && prior.sigma_edge > 0.0))
        throw std::invalid_argument("sample_parameters: standard deviations must be positive");
    Rng rng(seed);
    MrfModel model(spec);
    for (std::size_t v = 0; v < spec.size(); ++v)
        for (double& w : model.node_weights(v)) w = rng.normal(prior.mean, prior.sigma_node);
    for (const auto& e : edges) {
        const std::size_t k = model.activate_edge(e);
        for (double& w : model.edge_weights(k)) w = rng.normal(prior.mean, prior.sigma_edge);
    }
    return model;
}

DiscreteDataset gibbs_sample(const MrfModel& model, std::size_t count, const GibbsOptions& options,
                             std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("gibbs_sample: count must be at least 1");
    if (options.thinning < 1) throw std::invalid_argument("gibbs_sample: thinning must be at least 1");
    Rng rng(seed);
    const std::size_t n = model.num_variables();
    std::vector<std::int32_t> x(n);
    for (std::size_t v = 0; v < n; ++v)
        x[v] = static_cast<std::int32_t>(rng.uniform_index(static_cast<std::uint64_t>(model.cardinality(v))));

    std::vector<double> p(static_cast<std::size_t>(model.spec().max_cardinality()));
    auto sweep = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            const std::span<double> li(p.data(), static_cast<std::size_t>(model.cardinality(i)));
            conditional_logits(model, x, i, li);
            const double peak = *std::max_element(li.begin(), li.end());
            for (double& v : li) v = std::exp(v - peak);
            x[i] = static_cast<std::int32_t>(rng.categorical(li));
        }
    };

    for (std::size_t s = 0; s < options.burn_in; ++s) sweep();
    std::vector<std::int32_t> values;
    values.reserve(count * n);
    for (std::size_t kept = 0; kept < count; ++kept) {
        for (std::size_t s = 0; s < options.thinning; ++s) sweep();
        values.insert(values.end(), x.begin(), x.end());
    }
    return {model.spec(), std::move(values)};
}

GroundTruth generate_ground_truth(std::size_t n, int cardinality, const ParameterPrior& prior, std::uint64_t seed) {
    // distinct streams for structure and parameters
    auto edges = preferential_attachment(n, seed);
    auto model = sample_parameters(edges, VariableSpec::uniform(n, cardinality), prior, seed ^ 0x5DEECE66DULL);
    return {std::move(model), std::move(edges)};
}

std::vector<RankSimulationRow> reservoir_rank_simulation(std::size_t n, const std::vector<std::size_t>& reservoir_sizes,
                                                         std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("reservoir_rank_simulation: trials must be at least 1");
    const std::uint64_t population = candidate_edge_count(n);
    Rng rng(seed);
    std::vector<RankSimulationRow> rows;
    rows.reserve(reservoir_sizes.size());
    for (std::size_t size : reservoir_sizes) {
        if (size < 1 || size > population)
            throw std::invalid_argument("reservoir_rank_simulation: reservoir size " + std::to_string(size) +
                                        " outside [1, " + std::to_string(population) + "]");
        RankSimulationRow row;
        row.reservoir_size = size;
        row.min_rank = std::numeric_limits<std::uint64_t>::max();
        double total = 0.0;
        std::unordered_set<std::uint64_t> drawn;
        for (std::size_t t = 0; t < trials; ++t) {
            // Floyd's algorithm: `size` distinct ranks from 1..population
            drawn.clear();
            std::uint64_t smallest = std::numeric_limits<std::uint64_t>::max();
            for (std::uint64_t j = population - size + 1; j <= population; ++j) {
                const std::uint64_t r = 1 + rng.uniform_index(j);
                const std::uint64_t pick = drawn.insert(r).second ? r : (drawn.insert(j), j);
                smallest = std::min(smallest, pick);
            }
            total += static_cast<double>(smallest);
            row.min_rank = std::min(row.min_rank, smallest);
            row.max_rank = std::max(row.max_rank, smallest);
        }
        row.mean_rank = total / static_cast<double>(trials);
        row.expected_rank = static_cast<double>(population + 1) / static_cast<double>(size + 1);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mrfgraft
