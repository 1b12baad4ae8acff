"""Bi-level hyperparameter optimization: MY-HPO, SHO and search baselines."""

from ._core import (
    Error,
    best_response,
    format_cell,
    grad_w_train,
    grad_w_val,
    gradcheck,
    grid_candidates,
    load_csv,
    load_idx,
    myhpo_run,
    run_experiment,
    search_run,
    sho_run,
    split_best_response,
    synthesize,
    train_loss,
    val_loss,
    validate_config,
)

__all__ = [
    "Error",
    "best_response",
    "format_cell",
    "grad_w_train",
    "grad_w_val",
    "gradcheck",
    "grid_candidates",
    "load_csv",
    "load_idx",
    "myhpo_run",
    "run_experiment",
    "search_run",
    "sho_run",
    "split_best_response",
    "synthesize",
    "train_loss",
    "val_loss",
    "validate_config",
]
