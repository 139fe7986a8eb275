"""Decision-focused learning toolkit (Python bindings to the C++ core)."""

from ._core import (
    Dataset,
    DysConfig,
    DysForwardRecord,
    DysLayer,
    LinearModel,
    Problem,
    evaluate_regret,
    generate,
    illustrate_1d,
    knapsack_demo,
    load_dataset,
    loss,
    normalized_regret,
    set_quiet,
    simulate_top1,
    top1_qp_exact,
    train,
)

__all__ = [
    "Dataset",
    "DysConfig",
    "DysForwardRecord",
    "DysLayer",
    "LinearModel",
    "Problem",
    "evaluate_regret",
    "generate",
    "illustrate_1d",
    "knapsack_demo",
    "load_dataset",
    "loss",
    "normalized_regret",
    "set_quiet",
    "simulate_top1",
    "top1_qp_exact",
    "train",
]
