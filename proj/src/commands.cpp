#include "mrfgraft/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrfgraft/format.hpp"
#include "mrfgraft/serialization.hpp"

namespace mrfgraft {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path prepare_dir(const std::string& dir) {
    const fs::path out(dir);
    fs::create_directories(out);
    return out;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError("config: " + what + " is not set");
    if (!fs::exists(path)) throw std::runtime_error(what + ": file '" + path + "' does not exist");
}

// Secondary files are read with the primary data's state counts so that
// a value absent from one split does not shrink a variable.
CsvOptions declared_options(const CsvOptions& base, const VariableSpec& spec) {
    CsvOptions opts = base;
    for (std::size_t v = 0; v < spec.size(); ++v) opts.cardinalities[spec.names[v]] = spec.cardinalities[v];
    return opts;
}

void check_same_spec(const VariableSpec& model, const VariableSpec& data, const std::string& what) {
    if (model == data) return;
    std::ostringstream msg;
    msg << what << ": variables do not match the model (model has " << model.size() << " variables, data has "
        << data.size() << ")";
    for (std::size_t v = 0; v < std::min(model.size(), data.size()); ++v)
        if (model.names[v] != data.names[v] || model.cardinalities[v] != data.cardinalities[v]) {
            msg << "; first difference at column " << v << " (" << model.names[v] << "/" << model.cardinalities[v]
                << " vs " << data.names[v] << "/" << data.cardinalities[v] << ")";
            break;
        }
    throw std::invalid_argument(msg.str());
}

struct LearnInputs {
    DiscreteDataset train;
    std::optional<DiscreteDataset> test;
    std::optional<std::vector<EdgeId>> true_edges;
};

LearnInputs load_learn_inputs(const RunConfig& config) {
    require_file(config.data.train, "data.train");
    LearnInputs in{load_csv(config.data.train, config.data.csv), std::nullopt, std::nullopt};
    if (!config.data.test.empty()) {
        require_file(config.data.test, "data.test");
        in.test = load_csv(config.data.test, declared_options(config.data.csv, in.train.spec()));
        check_same_spec(in.train.spec(), in.test->spec(), "data.test");
    }
    if (!config.data.true_edges.empty()) {
        require_file(config.data.true_edges, "data.true_edges");
        in.true_edges = load_edge_list(config.data.true_edges);
    }
    return in;
}

void run_one(const RunConfig& config, const LearnerConfig& learner, const LearnInputs& in, const fs::path& dir,
             std::ostream& log) {
    fs::create_directories(dir);
    const bool jsonl = config.output.trace_format == "jsonl";
    auto trace = open_output(dir / (jsonl ? "trace.jsonl" : "trace.csv"));
    if (!jsonl) write_trace_csv_header(trace);

    LearnerHooks hooks;
    hooks.test_data = in.test ? &*in.test : nullptr;
    hooks.true_edges = in.true_edges ? &*in.true_edges : nullptr;
    hooks.record_wall_time = config.output.wall_time;
    hooks.on_round = [&](const TraceRecord& r) {
        if (jsonl)
            trace << trace_record_json(r) << '\n';
        else
            write_trace_csv_row(trace, r);
        trace.flush();
    };

    const auto result = learn(in.train, learner, hooks);
    save_model(dir / "model.json", result.model);
    save_edge_list(dir / "edges.txt", result.model.active_edges());
    log << "learn: method=" << to_string(learner.method) << " lambda=" << format_real(learner.reg.lambda)
        << " edges=" << result.model.edge_count() << " rounds=" << result.trace.rounds.size()
        << " tables=" << result.tables_computed << " converged=" << (result.converged ? "yes" : "no") << " -> "
        << dir.string() << '\n';
}

}  // namespace

void cmd_generate(const RunConfig& config, std::ostream& log) {
    const auto& s = config.synthetic;
    const auto truth = generate_ground_truth(s.n, s.cardinality, s.prior, config.seed);
    const auto sample = gibbs_sample(truth.model, s.count, s.gibbs, config.seed + 1);
    const auto [train, test] = split(sample, s.train_fraction, config.seed + 2);

    const auto dir = prepare_dir(config.output.dir);
    save_model(dir / "ground_truth.json", truth.model);
    save_edge_list(dir / "true_edges.txt", truth.true_edges);
    save_csv(dir / "train.csv", train);
    save_csv(dir / "test.csv", test);
    log << "generate: n=" << s.n << " edges=" << truth.true_edges.size() << " train=" << train.num_rows()
        << " test=" << test.num_rows() << " -> " << dir.string() << '\n';
}

void cmd_learn(const RunConfig& config, std::ostream& log) {
    const auto in = load_learn_inputs(config);
    const auto dir = prepare_dir(config.output.dir);
    {
        auto out = open_output(dir / "config.json");
        out << config_to_json(config).dump(2) << '\n';
    }
    if (config.lambda_sweep.empty()) {
        run_one(config, config.learner, in, dir, log);
        return;
    }
    for (double lambda : config.lambda_sweep) {
        LearnerConfig learner = config.learner;
        learner.reg.lambda = lambda;
        run_one(config, learner, in, dir / ("lambda_" + format_real(lambda)), log);
    }
}

void cmd_evaluate(const RunConfig& config, std::ostream& out) {
    require_file(config.evaluate.model, "evaluate.model");
    require_file(config.evaluate.data, "evaluate.data");
    const auto model = load_model(config.evaluate.model);
    const auto data = load_csv(config.evaluate.data, declared_options(config.data.csv, model.spec()));
    check_same_spec(model.spec(), data.spec(), "evaluate.data");

    SufficientStatsStore stats(data);
    const Problem problem{stats, config.learner.engine, config.learner.reg};
    json report;
    report["objective"] = round_output(full_objective(model, problem));
    report["nlpl"] = round_output(nlpl(model, data));
    if (!config.evaluate.true_edges.empty()) {
        require_file(config.evaluate.true_edges, "evaluate.true_edges");
        report["recall"] = round_output(recall(load_edge_list(config.evaluate.true_edges), model.active_edges()));
    }
    report["parameter_count"] = model.weight_count();
    report["active_edges"] = model.edge_count();

    const std::string text = report.dump(2) + "\n";
    const auto dir = prepare_dir(config.output.dir);
    open_output(dir / "report.json") << text;
    out << text;
}

void cmd_simulate_reservoir(const RunConfig& config, std::ostream& log) {
    const auto& s = config.simulate;
    if (s.sizes.empty()) throw ConfigError("config: simulate.sizes (or simulate.sizes_range) is empty");
    const auto rows = reservoir_rank_simulation(s.n, s.sizes, s.trials, config.seed);
    const auto dir = prepare_dir(config.output.dir);
    auto out = open_output(dir / "reservoir_ranks.csv");
    out << "reservoir_size,mean_rank,min_rank,max_rank,expected_rank\n";
    for (const auto& r : rows)
        out << r.reservoir_size << ',' << format_real(r.mean_rank) << ',' << r.min_rank << ',' << r.max_rank << ','
            << format_real(r.expected_rank) << '\n';
    log << "simulate-reservoir: " << rows.size() << " rows -> " << (dir / "reservoir_ranks.csv").string() << '\n';
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structure learning for discrete pairwise Markov random fields"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    bool print_config = false;

    struct Command {
        const char* name;
        const char* help;
        void (*run)(const RunConfig&, std::ostream&);
    };
    const Command commands[] = {
        {"generate", "Sample a scale-free ground-truth model and Gibbs train/test data", cmd_generate},
        {"learn", "Learn a structure from training data", cmd_learn},
        {"evaluate", "Score a learned model on data", cmd_evaluate},
        {"simulate-reservoir", "Simulate the best rank held by a random reservoir", cmd_simulate_reservoir},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--set", overrides, "key=value override, e.g. reg.lambda=0.01")->take_all();
        sub->add_flag("--print-config", print_config, "Print the resolved configuration and exit");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    }

    RunConfig config;
    try {
        json doc = config_path.empty() ? json::object() : load_config_document(config_path);
        for (const auto& o : overrides) apply_override(doc, o);
        config = config_from_json(doc);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (print_config) {
        out << config_to_json(config).dump(2) << '\n';
        return kExitOk;
    }

    for (const auto& c : commands) {
        if (!app.got_subcommand(c.name)) continue;
        try {
            c.run(config, out);
            return kExitOk;
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::exception& e) {
            err << "error: " << c.name << ": " << e.what() << '\n';
            return kExitRuntime;
        }
    }
    return kExitUsage;
}

}  // namespace mrfgraft
