#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mrfgraft/commands.hpp"
#include "mrfgraft/learners.hpp"
#include "mrfgraft/serialization.hpp"
#include "mrfgraft/synthetic.hpp"

namespace py = pybind11;
using namespace mrfgraft;

namespace {

DiscreteDataset dataset_from_rows(const std::vector<std::vector<int>>& rows, const std::vector<int>& cardinalities) {
    VariableSpec spec = VariableSpec::uniform(cardinalities.size(), 2);
    spec.cardinalities = cardinalities;
    return DiscreteDataset::from_rows(spec, rows);
}

std::vector<std::vector<int>> dataset_rows(const DiscreteDataset& d) {
    std::vector<std::vector<int>> rows(d.num_rows());
    for (std::size_t r = 0; r < d.num_rows(); ++r) {
        const auto row = d.row(r);
        rows[r].assign(row.begin(), row.end());
    }
    return rows;
}

py::tuple run_cli_py(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Structure learning for discrete pairwise Markov random fields";

    py::class_<EdgeId>(m, "EdgeId")
        .def(py::init<std::size_t, std::size_t>())
        .def_readonly("i", &EdgeId::i)
        .def_readonly("j", &EdgeId::j)
        .def("__eq__", [](const EdgeId& a, const EdgeId& b) { return a == b; })
        .def("__hash__", [](const EdgeId& e) { return EdgeIdHash{}(e); })
        .def("__repr__", [](const EdgeId& e) { return to_string(e); })
        .def("__iter__", [](const EdgeId& e) { return py::iter(py::make_tuple(e.i, e.j)); });

    py::class_<VariableSpec>(m, "VariableSpec")
        .def_static("uniform", &VariableSpec::uniform, py::arg("n"), py::arg("cardinality"))
        .def_readwrite("names", &VariableSpec::names)
        .def_readwrite("cardinalities", &VariableSpec::cardinalities);

    py::class_<DiscreteDataset>(m, "Dataset")
        .def(py::init(&dataset_from_rows), py::arg("rows"), py::arg("cardinalities"))
        .def_property_readonly("spec", &DiscreteDataset::spec)
        .def_property_readonly("num_rows", &DiscreteDataset::num_rows)
        .def("rows", &dataset_rows);

    py::class_<MrfModel>(m, "Model")
        .def_property_readonly("spec", &MrfModel::spec)
        .def_property_readonly("active_edges", &MrfModel::active_edges)
        .def_property_readonly("edge_count", &MrfModel::edge_count)
        .def_property_readonly("weight_count", &MrfModel::weight_count)
        .def("flat_weights", &MrfModel::flat_weights);

    py::class_<TraceRecord>(m, "TraceRecord")
        .def_readonly("round", &TraceRecord::round)
        .def_readonly("edges_active", &TraceRecord::edges_active)
        .def_readonly("tables_computed", &TraceRecord::tables_computed)
        .def_readonly("edges_tested", &TraceRecord::edges_tested)
        .def_readonly("objective", &TraceRecord::objective)
        .def_readonly("nlpl", &TraceRecord::nlpl)
        .def_readonly("recall", &TraceRecord::recall)
        .def_readonly("activated", &TraceRecord::activated);

    py::class_<LearnResult>(m, "LearnResult")
        .def_readonly("model", &LearnResult::model)
        .def_property_readonly("trace", [](const LearnResult& r) { return r.trace.rounds; })
        .def_readonly("activation_order", &LearnResult::activation_order)
        .def_readonly("tables_computed", &LearnResult::tables_computed)
        .def_readonly("edges_tested", &LearnResult::edges_tested)
        .def_readonly("converged", &LearnResult::converged);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def_readonly("model", &GroundTruth::model)
        .def_readonly("true_edges", &GroundTruth::true_edges);

    py::class_<RankSimulationRow>(m, "RankSimulationRow")
        .def_readonly("reservoir_size", &RankSimulationRow::reservoir_size)
        .def_readonly("mean_rank", &RankSimulationRow::mean_rank)
        .def_readonly("min_rank", &RankSimulationRow::min_rank)
        .def_readonly("max_rank", &RankSimulationRow::max_rank)
        .def_readonly("expected_rank", &RankSimulationRow::expected_rank);

    m.def(
        "generate_ground_truth",
        [](std::size_t n, int cardinality, std::uint64_t seed) { return generate_ground_truth(n, cardinality, {}, seed); },
        py::arg("n"), py::arg("cardinality"), py::arg("seed") = 0);
    m.def(
        "gibbs_sample",
        [](const MrfModel& model, std::size_t count, std::uint64_t seed, std::size_t burn_in, std::size_t thinning) {
            return gibbs_sample(model, count, {burn_in, thinning}, seed);
        },
        py::arg("model"), py::arg("count"), py::arg("seed") = 0, py::arg("burn_in") = 200, py::arg("thinning") = 5);
    m.def(
        "learn",
        [](const DiscreteDataset& data, const std::string& method, double lambda, double lambda2, double alpha,
           std::optional<std::size_t> edge_budget, std::optional<std::size_t> reservoir_size,
           std::optional<std::size_t> t_max, bool structure_heuristics, std::uint64_t seed) {
            LearnerConfig c;
            c.method = parse_method(method);
            c.reg.lambda = lambda;
            c.reg.lambda2 = lambda2;
            c.reg.alpha = alpha;
            c.edge_budget = edge_budget;
            c.reservoir_size = reservoir_size;
            c.t_max = t_max;
            c.structure_heuristics = structure_heuristics;
            c.seed = seed;
            LearnerHooks hooks;
            hooks.record_wall_time = false;
            return learn(data, c, hooks);
        },
        py::arg("data"), py::arg("method") = "bceg", py::arg("lam") = 0.01, py::arg("lambda2") = 0.0,
        py::arg("alpha") = 1.0, py::arg("edge_budget") = py::none(), py::arg("reservoir_size") = py::none(),
        py::arg("t_max") = py::none(), py::arg("structure_heuristics") = true, py::arg("seed") = 0);
    m.def("nlpl", &nlpl, py::arg("model"), py::arg("data"));
    m.def("recall", &recall, py::arg("true_edges"), py::arg("learned_edges"));
    m.def(
        "parameter_count", [](std::size_t n, int s) { return parameter_count(VariableSpec::uniform(n, s)); },
        py::arg("n"), py::arg("cardinality"));
    m.def("reservoir_rank_simulation", &reservoir_rank_simulation, py::arg("n"), py::arg("sizes"),
          py::arg("trials"), py::arg("seed") = 0);
    m.def("load_csv", [](const std::filesystem::path& p) { return load_csv(p); }, py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));
    m.def("save_model", &save_model, py::arg("path"), py::arg("model"));
    m.def("run_cli", &run_cli_py, py::arg("args"),
          "Run a CLI invocation in-process; returns (exit_code, stdout, stderr).");
}
