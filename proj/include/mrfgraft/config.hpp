#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrfgraft/data.hpp"
#include "mrfgraft/learners.hpp"
#include "mrfgraft/synthetic.hpp"

namespace mrfgraft {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DataConfig {
    std::string train;
    std::string test;
    std::string true_edges;
    CsvOptions csv;
};

struct SyntheticConfig {
    std::size_t n = 20;
    int cardinality = 5;
    ParameterPrior prior;
    std::size_t count = 5000;
    GibbsOptions gibbs;
    double train_fraction = 0.95;
};

struct EvaluateConfig {
    std::string model;
    std::string data;
    std::string true_edges;
};

struct SimulateConfig {
    std::size_t n = 400;
    std::vector<std::size_t> sizes{1, 10, 50, 100, 500};
    std::size_t trials = 100;
};

struct OutputConfig {
    std::string dir = "out";
    std::string trace_format = "csv";  // csv | jsonl
    bool wall_time = false;
};

struct RunConfig {
    std::uint64_t seed = 1;
    LearnerConfig learner;
    std::vector<double> lambda_sweep;
    DataConfig data;
    SyntheticConfig synthetic;
    EvaluateConfig evaluate;
    SimulateConfig simulate;
    OutputConfig output;
};

// Grid {start} ∪ {k * step : start < k * step <= stop}.
std::vector<std::size_t> anchored_range(std::size_t start, std::size_t stop, std::size_t step);

// Every key with its default value; null marks "derived from the data".
nlohmann::json default_config_json();

// Parses a configuration document layered over the defaults. Unknown keys and
// out-of-range values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);

nlohmann::json load_config_document(const std::filesystem::path& path);
// "a.b.c=value"; value is parsed as JSON when possible, otherwise kept as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace mrfgraft
