"""Voxel grid CNN scoring of protein-ligand poses."""

from ._voxscore import (  # noqa: F401
    DataError,
    Error,
    Model,
    atom_density,
    build_final_model,
    label_pose,
    logit,
    lr_at,
    make_folds,
    parse_structure,
    pearson,
    roc_auc,
    run_cli,
    topn,
    voxelize,
)

__all__ = [
    "DataError",
    "Error",
    "Model",
    "atom_density",
    "build_final_model",
    "label_pose",
    "logit",
    "lr_at",
    "make_folds",
    "parse_structure",
    "pearson",
    "roc_auc",
    "run_cli",
    "topn",
    "voxelize",
]
