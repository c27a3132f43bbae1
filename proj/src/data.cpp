#include "mrfgraft/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mrfgraft/random.hpp"

namespace mrfgraft {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

std::optional<long long> parse_integer(const std::string& cell) {
    long long value = 0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

std::optional<double> parse_real(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        if (used != cell.size()) return std::nullopt;
        return value;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

DiscreteDataset::DiscreteDataset(VariableSpec spec, std::vector<std::int32_t> row_major_values)
    : spec_(std::move(spec)), values_(std::move(row_major_values)) {
    spec_.validate();
    const std::size_t n = spec_.size();
    if (n == 0) throw std::invalid_argument("dataset: no variables");
    if (values_.empty()) throw std::invalid_argument("dataset: no instances");
    if (values_.size() % n != 0)
        throw std::invalid_argument("dataset: value count is not a multiple of the variable count");
    rows_ = values_.size() / n;
    for (std::size_t m = 0; m < rows_; ++m)
        for (std::size_t v = 0; v < n; ++v) {
            const auto x = values_[m * n + v];
            if (x < 0 || x >= spec_.cardinalities[v])
                throw std::out_of_range("dataset: row " + std::to_string(m) + " column '" + spec_.names[v] +
                                        "' has state " + std::to_string(x) + " outside [0, " +
                                        std::to_string(spec_.cardinalities[v]) + ")");
        }
}

DiscreteDataset DiscreteDataset::from_rows(VariableSpec spec, const std::vector<std::vector<int>>& rows) {
    std::vector<std::int32_t> values;
    values.reserve(rows.size() * spec.size());
    for (const auto& r : rows) {
        if (r.size() != spec.size()) throw std::invalid_argument("dataset: ragged row");
        values.insert(values.end(), r.begin(), r.end());
    }
    return {std::move(spec), std::move(values)};
}

DiscreteDataset DiscreteDataset::subset(std::span<const std::size_t> rows) const {
    const std::size_t n = spec_.size();
    std::vector<std::int32_t> values;
    values.reserve(rows.size() * n);
    for (std::size_t m : rows) {
        const auto r = row(m);
        values.insert(values.end(), r.begin(), r.end());
    }
    return {spec_, std::move(values)};
}

int discretize_interval(double value, double lo, double hi, int k) {
    if (!std::isfinite(value)) throw std::invalid_argument("discretize_interval: non-finite value");
    if (!(lo < hi)) throw std::invalid_argument("discretize_interval: need lo < hi");
    if (k < 2) throw std::invalid_argument("discretize_interval: need at least 2 bins");
    const double clamped = std::clamp(value, lo, hi);
    const double width = (hi - lo) / k;
    const auto state = static_cast<int>(std::floor((clamped - lo) / width));
    return std::min(state, k - 1);
}

DiscreteDataset read_csv(std::istream& in, const CsvOptions& options) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const auto names = split_fields(line);
    const std::size_t n = names.size();
    for (const auto& name : names)
        if (name.empty()) throw std::invalid_argument("csv: empty column name in header");

    std::vector<const IntervalRule*> rules(n, nullptr);
    for (std::size_t v = 0; v < n; ++v) {
        const auto it = options.discretize.find(names[v]);
        if (it != options.discretize.end()) rules[v] = &it->second;
    }

    std::vector<std::int32_t> values;
    std::vector<int> observed_max(n, 0);
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != n)
            throw std::invalid_argument("csv: line " + std::to_string(line_number) + " has " +
                                        std::to_string(fields.size()) + " fields, header has " +
                                        std::to_string(n));
        for (std::size_t v = 0; v < n; ++v) {
            int state = 0;
            if (rules[v]) {
                const auto real = parse_real(fields[v]);
                if (!real)
                    throw std::invalid_argument("csv: line " + std::to_string(line_number) + " column '" +
                                                names[v] + "' is not numeric: '" + fields[v] + "'");
                state = discretize_interval(*real, rules[v]->lo, rules[v]->hi, rules[v]->bins);
            } else {
                const auto integer = parse_integer(fields[v]);
                if (!integer)
                    throw std::invalid_argument("csv: line " + std::to_string(line_number) + " column '" +
                                                names[v] + "' holds '" + fields[v] +
                                                "', which is not an integer state and has no discretization rule");
                if (*integer < 0 || *integer > std::numeric_limits<std::int32_t>::max())
                    throw std::out_of_range("csv: line " + std::to_string(line_number) + " column '" + names[v] +
                                            "' has negative or oversized state " + fields[v]);
                state = static_cast<int>(*integer);
            }
            observed_max[v] = std::max(observed_max[v], state);
            values.push_back(state);
        }
    }
    if (values.empty()) throw std::invalid_argument("csv: no instances");

    VariableSpec spec;
    spec.names = names;
    spec.cardinalities.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (rules[v]) {
            spec.cardinalities[v] = rules[v]->bins;
        } else if (const auto it = options.cardinalities.find(names[v]); it != options.cardinalities.end()) {
            if (observed_max[v] >= it->second)
                throw std::out_of_range("csv: column '" + names[v] + "' has state " +
                                        std::to_string(observed_max[v]) + " but declared cardinality " +
                                        std::to_string(it->second));
            spec.cardinalities[v] = it->second;
        } else {
            spec.cardinalities[v] = std::max(2, observed_max[v] + 1);
        }
    }
    return {std::move(spec), std::move(values)};
}

DiscreteDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path.string() + "'");
    return read_csv(in, options);
}

void write_csv(std::ostream& out, const DiscreteDataset& data) {
    const auto& names = data.spec().names;
    for (std::size_t v = 0; v < names.size(); ++v) out << (v ? "," : "") << names[v];
    out << '\n';
    for (std::size_t m = 0; m < data.num_rows(); ++m) {
        const auto r = data.row(m);
        for (std::size_t v = 0; v < r.size(); ++v) out << (v ? "," : "") << r[v];
        out << '\n';
    }
}

void save_csv(const std::filesystem::path& path, const DiscreteDataset& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot write '" + path.string() + "'");
    write_csv(out, data);
    if (!out) throw std::runtime_error("csv: write failed for '" + path.string() + "'");
}

std::pair<DiscreteDataset, DiscreteDataset> split(const DiscreteDataset& data, double train_fraction,
                                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split: train fraction must lie in (0, 1)");
    const std::size_t total = data.num_rows();
    if (total < 2) throw std::invalid_argument("split: need at least 2 instances");
    // the 1e-9 guard keeps exact products such as 0.95 * 20000 from rounding up
    auto train = static_cast<std::size_t>(std::ceil(static_cast<double>(total) * train_fraction - 1e-9));
    train = std::clamp<std::size_t>(train, 1, total - 1);

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());
    const std::span<const std::size_t> all(order);
    return {data.subset(all.first(train)), data.subset(all.subspan(train))};
}

std::vector<std::vector<double>> node_marginals(const DiscreteDataset& data) {
    const std::size_t n = data.num_variables();
    std::vector<std::vector<double>> marginals(n);
    for (std::size_t v = 0; v < n; ++v) marginals[v].assign(static_cast<std::size_t>(data.spec().cardinalities[v]), 0.0);
    for (std::size_t m = 0; m < data.num_rows(); ++m) {
        const auto r = data.row(m);
        for (std::size_t v = 0; v < n; ++v) marginals[v][static_cast<std::size_t>(r[v])] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(data.num_rows());
    for (auto& p : marginals)
        for (double& x : p) x *= inv;
    return marginals;
}

std::vector<double> count_edge_table(const DiscreteDataset& data, const EdgeId& e) {
    const std::size_t n = data.num_variables();
    if (e.j >= n) throw std::out_of_range("edge table: edge " + to_string(e) + " outside the dataset");
    const auto sj = static_cast<std::size_t>(data.spec().cardinalities[e.j]);
    std::vector<double> table(static_cast<std::size_t>(data.spec().cardinalities[e.i]) * sj, 0.0);
    const auto* values = data.values().data();
    for (std::size_t m = 0; m < data.num_rows(); ++m, values += n)
        table[static_cast<std::size_t>(values[e.i]) * sj + static_cast<std::size_t>(values[e.j])] += 1.0;
    const double inv = 1.0 / static_cast<double>(data.num_rows());
    for (double& x : table) x *= inv;
    return table;
}

SufficientStatsStore::SufficientStatsStore(const DiscreteDataset& data, std::optional<std::size_t> lru_capacity)
    : data_(&data), node_marginals_(mrfgraft::node_marginals(data)), lru_capacity_(lru_capacity) {
    if (lru_capacity_ && *lru_capacity_ == 0) throw std::invalid_argument("stats store: LRU capacity must be positive");
}

std::vector<double> SufficientStatsStore::edge_table(const EdgeId& e) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(e); it != cache_.end()) {
            recency_.splice(recency_.begin(), recency_, it->second.recency);
            return it->second.table;
        }
    }
    auto table = count_edge_table(*data_, e);
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(e); it != cache_.end()) return it->second.table;  // lost the race
    recency_.push_front(e);
    cache_.emplace(e, CacheEntry{table, recency_.begin()});
    ++tables_computed_;
    rows_scanned_ += data_->num_rows();
    if (lru_capacity_ && cache_.size() > *lru_capacity_) {
        cache_.erase(recency_.back());
        recency_.pop_back();
    }
    return table;
}

bool SufficientStatsStore::has_table(const EdgeId& e) const {
    std::lock_guard lock(mutex_);
    return cache_.contains(e);
}

void SufficientStatsStore::precompute_all() {
    const std::size_t n = data_->num_variables();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edge_table({i, j});
}

std::uint64_t SufficientStatsStore::tables_computed() const {
    std::lock_guard lock(mutex_);
    return tables_computed_;
}

std::uint64_t SufficientStatsStore::rows_scanned() const {
    std::lock_guard lock(mutex_);
    return rows_scanned_;
}

std::size_t SufficientStatsStore::cached_tables() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::vector<EdgeId> SufficientStatsStore::cached_edges() const {
    std::lock_guard lock(mutex_);
    std::vector<EdgeId> edges;
    edges.reserve(cache_.size());
    for (const auto& [e, entry] : cache_) edges.push_back(e);
    std::sort(edges.begin(), edges.end());
    return edges;
}

}  // namespace mrfgraft
