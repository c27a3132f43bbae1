"""Structure learning for discrete pairwise Markov random fields."""

from ._core import (
    Dataset,
    EdgeId,
    GroundTruth,
    LearnResult,
    Model,
    RankSimulationRow,
    TraceRecord,
    VariableSpec,
    generate_ground_truth,
    gibbs_sample,
    learn,
    load_csv,
    load_model,
    nlpl,
    parameter_count,
    recall,
    reservoir_rank_simulation,
    run_cli,
    save_model,
)

__all__ = [
    "Dataset",
    "EdgeId",
    "GroundTruth",
    "LearnResult",
    "Model",
    "RankSimulationRow",
    "TraceRecord",
    "VariableSpec",
    "generate_ground_truth",
    "gibbs_sample",
    "learn",
    "load_csv",
    "load_model",
    "nlpl",
    "parameter_count",
    "recall",
    "reservoir_rank_simulation",
    "run_cli",
    "save_model",
]
