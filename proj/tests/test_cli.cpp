#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mrfgraft/commands.hpp"

using namespace mrfgraft;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mrfgraft_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> generate_args(const fs::path& dir) {
    return {"generate", "--set", "output.dir=" + dir.string(), "--set", "synthetic.n=8", "--set",
            "synthetic.cardinality=2", "--set", "synthetic.count=600", "--set", "seed=7"};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config defaults, overrides and validation") {
    const auto c = config_from_json(nlohmann::json::object());
    CHECK(c.learner.method == Method::best_choice);
    CHECK(c.synthetic.n == 20);

    auto doc = nlohmann::json::object();
    apply_override(doc, "reg.lambda=0.5");
    apply_override(doc, "learner.method=eg");
    apply_override(doc, "search.reservoir_size=7");
    apply_override(doc, "data.cardinalities.rating=5");
    const auto d = config_from_json(doc);
    CHECK(d.learner.reg.lambda == 0.5);
    CHECK(d.learner.method == Method::edge_grafting);
    CHECK(d.learner.reservoir_size == 7u);
    CHECK(d.data.csv.cardinalities.at("rating") == 5);
    CHECK(config_from_json(config_to_json(d)).learner.reg.lambda == 0.5);

    CHECK_THROWS_AS(config_from_json({{"reg", {{"lamda", 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"reg", {{"alpha", 2.0}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"engine", "gibbs"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"synthetic", {{"n", 2}}}}), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
}

TEST_CASE("anchored range") {
    const auto r = anchored_range(1, 500, 10);
    CHECK(r.size() == 51);
    CHECK(r.front() == 1);
    CHECK(r[1] == 10);
    CHECK(r.back() == 500);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"learn", "--config", "/nonexistent/config.json"}).code == kExitUsage);
    CHECK(cli({"learn", "--set", "reg.nope=1"}).code == kExitUsage);
    const auto small = cli({"generate", "--set", "synthetic.n=2"});
    CHECK(small.code == kExitUsage);
    CHECK(small.err.find("synthetic.n") != std::string::npos);
    CHECK(cli({"generate", "--help"}).code == kExitOk);
}

TEST_CASE("generate writes four deterministic files") {
    const auto a = scratch("gen_a"), b = scratch("gen_b");
    REQUIRE(cli(generate_args(a)).code == kExitOk);
    REQUIRE(cli(generate_args(b)).code == kExitOk);
    for (const char* f : {"ground_truth.json", "true_edges.txt", "train.csv", "test.csv"}) {
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("learn, sweep and evaluate") {
    const auto dir = scratch("learn");
    REQUIRE(cli(generate_args(dir)).code == kExitOk);
    const std::vector<std::string> data{"--set", "data.train=" + (dir / "train.csv").string(),
                                        "--set", "data.test=" + (dir / "test.csv").string(),
                                        "--set", "data.true_edges=" + (dir / "true_edges.txt").string(),
                                        "--set", "reg.lambda=0.005"};
    auto learn_args = [&](const fs::path& out, std::vector<std::string> extra) {
        std::vector<std::string> args{"learn", "--set", "output.dir=" + out.string()};
        args.insert(args.end(), data.begin(), data.end());
        args.insert(args.end(), extra.begin(), extra.end());
        return args;
    };

    SUBCASE("eg trace has one activation per round and reruns are byte-identical") {
        REQUIRE(cli(learn_args(dir / "eg1", {"--set", "learner.method=eg", "--set", "output.trace_format=jsonl"})).code == kExitOk);
        REQUIRE(cli(learn_args(dir / "eg2", {"--set", "learner.method=eg", "--set", "output.trace_format=jsonl"})).code == kExitOk);
        for (const char* f : {"model.json", "edges.txt", "trace.jsonl"}) CHECK(slurp(dir / "eg1" / f) == slurp(dir / "eg2" / f));
        std::istringstream lines(slurp(dir / "eg1" / "trace.jsonl"));
        std::string line;
        int rounds = 0;
        while (std::getline(lines, line)) {
            CHECK(nlohmann::json::parse(line).at("activated").size() == 1);
            ++rounds;
        }
        CHECK(rounds > 0);
    }
    SUBCASE("alpha = 1 never batches more edges per round than alpha = 0.25") {
        REQUIRE(cli(learn_args(dir / "a1", {"--set", "reg.alpha=1", "--set", "output.trace_format=jsonl"})).code == kExitOk);
        REQUIRE(cli(learn_args(dir / "a025", {"--set", "reg.alpha=0.25", "--set", "output.trace_format=jsonl"})).code == kExitOk);
        auto max_batch = [&](const fs::path& p) {
            std::istringstream lines(slurp(p));
            std::string line;
            std::size_t best = 0;
            while (std::getline(lines, line)) best = std::max(best, nlohmann::json::parse(line).at("activated").size());
            return best;
        };
        CHECK(max_batch(dir / "a1" / "trace.jsonl") <= 1);
        CHECK(max_batch(dir / "a1" / "trace.jsonl") <= max_batch(dir / "a025" / "trace.jsonl"));
    }
    SUBCASE("sweep writes one trace per lambda") {
        REQUIRE(cli(learn_args(dir / "sweep", {"--set", "learner.sweep_lambda=[0.001,0.01,0.1]"})).code == kExitOk);
        for (const char* lam : {"0.001", "0.01", "0.1"}) CHECK(fs::exists(dir / "sweep" / (std::string("lambda_") + lam) / "trace.csv"));
    }
    SUBCASE("evaluate reports metrics and ground truth beats the empty model") {
        const std::vector<std::string> common{"--set", "evaluate.data=" + (dir / "train.csv").string(), "--set",
                                              "evaluate.true_edges=" + (dir / "true_edges.txt").string()};
        auto eval = [&](const fs::path& model, const fs::path& out) {
            std::vector<std::string> args{"evaluate", "--set", "evaluate.model=" + model.string(), "--set", "output.dir=" + out.string()};
            args.insert(args.end(), common.begin(), common.end());
            const auto r = cli(args);
            REQUIRE(r.code == kExitOk);
            return nlohmann::json::parse(r.out);
        };
        const auto truth = eval(dir / "ground_truth.json", dir / "eval_truth");
        CHECK(truth.at("recall") == 1.0);
        CHECK(truth.at("active_edges") == 12);
        CHECK(truth.contains("parameter_count"));
        CHECK(fs::exists(dir / "eval_truth" / "report.json"));

        {
            std::ofstream empty(dir / "empty.json");
            empty << R"({"variables":{"names":["x0","x1","x2","x3","x4","x5","x6","x7"],"cardinalities":[2,2,2,2,2,2,2,2]},)"
                  << R"("node_weights":[[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]],"active_edges":[],"edge_weights":{}})";
        }
        const auto zero = eval(dir / "empty.json", dir / "eval_empty");
        CHECK(truth.at("nlpl").get<double>() <= zero.at("nlpl").get<double>());

        const auto missing = cli({"evaluate", "--set", "evaluate.model=" + (dir / "ground_truth.json").string(), "--set",
                                  "evaluate.data=" + (dir / "nope.csv").string()});
        CHECK(missing.code == kExitRuntime);
        CHECK(missing.err.find("nope.csv") != std::string::npos);

        {
            std::ofstream wrong(dir / "wrong.csv");
            wrong << "a,b\n0,1\n";
        }
        CHECK(cli({"evaluate", "--set", "evaluate.model=" + (dir / "ground_truth.json").string(), "--set",
                   "evaluate.data=" + (dir / "wrong.csv").string(), "--set", "output.dir=" + (dir / "w").string()})
                  .code == kExitRuntime);
    }
    SUBCASE("missing training file is a runtime error") {
        CHECK(cli({"learn", "--set", "data.train=/nonexistent.csv"}).code == kExitRuntime);
    }
}

TEST_CASE("simulate-reservoir rows and determinism") {
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    const std::string range = R"(simulate.sizes_range={"start":1,"stop":500,"step":10})";
    REQUIRE(cli({"simulate-reservoir", "--set", range, "--set", "output.dir=" + a.string()}).code == kExitOk);
    REQUIRE(cli({"simulate-reservoir", "--set", range, "--set", "output.dir=" + b.string()}).code == kExitOk);
    const auto text = slurp(a / "reservoir_ranks.csv");
    CHECK(text == slurp(b / "reservoir_ranks.csv"));
    CHECK(std::count(text.begin(), text.end(), '\n') == 52);
    CHECK(text.rfind("reservoir_size,mean_rank,min_rank,max_rank,expected_rank\n1,", 0) == 0);
    CHECK(text.find("\n10,") != std::string::npos);
    CHECK(cli({"simulate-reservoir", "--set", "simulate.sizes=[]"}).code == kExitUsage);
}

TEST_CASE("config file with overrides") {
    const auto dir = scratch("cfg");
    {
        std::ofstream cfg(dir / "run.json");
        cfg << R"({"seed": 3, "simulate": {"n": 30, "sizes": [1, 5], "trials": 10}, "output": {"dir": ")" << (dir / "o").string() << "\"}}";
    }
    const auto r = cli({"simulate-reservoir", "--config", (dir / "run.json").string(), "--set", "simulate.trials=20", "--print-config"});
    REQUIRE(r.code == kExitOk);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("simulate").at("trials") == 20);
    CHECK(doc.at("simulate").at("n") == 30);
    CHECK(doc.at("seed") == 3);
}

}
