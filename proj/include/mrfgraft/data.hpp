#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mrfgraft/model.hpp"

namespace mrfgraft {

// N complete assignments of 0-based states, stored row-major.
class DiscreteDataset {
public:
    DiscreteDataset() = default;
    DiscreteDataset(VariableSpec spec, std::vector<std::int32_t> row_major_values);
    static DiscreteDataset from_rows(VariableSpec spec, const std::vector<std::vector<int>>& rows);

    [[nodiscard]] const VariableSpec& spec() const { return spec_; }
    [[nodiscard]] std::size_t num_rows() const { return rows_; }
    [[nodiscard]] std::size_t num_variables() const { return spec_.size(); }
    [[nodiscard]] int value(std::size_t row, std::size_t var) const {
        return values_[row * spec_.size() + var];
    }
    [[nodiscard]] std::span<const std::int32_t> row(std::size_t m) const {
        return {values_.data() + m * spec_.size(), spec_.size()};
    }
    [[nodiscard]] const std::vector<std::int32_t>& values() const { return values_; }

    // Rows selected by index, in the given order.
    [[nodiscard]] DiscreteDataset subset(std::span<const std::size_t> rows) const;

    bool operator==(const DiscreteDataset&) const = default;

private:
    VariableSpec spec_;
    std::size_t rows_ = 0;
    std::vector<std::int32_t> values_;
};

// Equal-width binning of [lo, hi] into k states; values outside are clamped
// and hi itself lands in the top state.
int discretize_interval(double value, double lo, double hi, int k);

struct IntervalRule {
    double lo = 0.0;
    double hi = 1.0;
    int bins = 2;
};

struct CsvOptions {
    // Declared state counts by column name; undeclared columns use max value + 1 (at least 2).
    std::map<std::string, int> cardinalities;
    // Columns holding real values to be binned.
    std::map<std::string, IntervalRule> discretize;
};

DiscreteDataset read_csv(std::istream& in, const CsvOptions& options = {});
DiscreteDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_csv(std::ostream& out, const DiscreteDataset& data);
void save_csv(const std::filesystem::path& path, const DiscreteDataset& data);

// Seeded shuffle split. Train gets ceil(N * fraction) rows, clamped so that
// neither side is empty.
std::pair<DiscreteDataset, DiscreteDataset> split(const DiscreteDataset& data, double train_fraction,
                                                  std::uint64_t seed);

std::vector<std::vector<double>> node_marginals(const DiscreteDataset& data);

// Row-major s_i x s_j table of empirical joint frequencies. Not cached.
std::vector<double> count_edge_table(const DiscreteDataset& data, const EdgeId& e);

// Empirical node marginals plus lazily built pairwise tables, with counters
// that record how much statistics work has been done. The dataset must
// outlive the store.
class SufficientStatsStore {
public:
    explicit SufficientStatsStore(const DiscreteDataset& data,
                                  std::optional<std::size_t> lru_capacity = std::nullopt);
    SufficientStatsStore(const SufficientStatsStore&) = delete;
    SufficientStatsStore& operator=(const SufficientStatsStore&) = delete;

    [[nodiscard]] const DiscreteDataset& data() const { return *data_; }
    [[nodiscard]] std::span<const double> node_marginal(std::size_t v) const { return node_marginals_[v]; }
    [[nodiscard]] const std::vector<std::vector<double>>& node_marginals() const { return node_marginals_; }

    // Cached table for e, computed on first request. Safe to call concurrently.
    std::vector<double> edge_table(const EdgeId& e);
    [[nodiscard]] bool has_table(const EdgeId& e) const;

    void precompute_all();

    // Number of table computations, including recomputation after LRU eviction.
    [[nodiscard]] std::uint64_t tables_computed() const;
    // N per table computation.
    [[nodiscard]] std::uint64_t rows_scanned() const;
    [[nodiscard]] std::size_t cached_tables() const;
    [[nodiscard]] std::vector<EdgeId> cached_edges() const;

private:
    struct CacheEntry {
        std::vector<double> table;
        std::list<EdgeId>::iterator recency;
    };

    const DiscreteDataset* data_;
    std::vector<std::vector<double>> node_marginals_;
    std::optional<std::size_t> lru_capacity_;

    mutable std::mutex mutex_;
    std::unordered_map<EdgeId, CacheEntry, EdgeIdHash> cache_;
    std::list<EdgeId> recency_;  // most recent first
    std::uint64_t tables_computed_ = 0;
    std::uint64_t rows_scanned_ = 0;
};

}  // namespace mrfgraft
