"""Toolkit for quantifying how capable a two-qubit process is of creating
steering and Bell correlations.

The pipeline runs in stages, one module each: circuit-level simulation of
tomography experiments (:mod:`corrcap.simulator`), state and process
reconstruction (:mod:`corrcap.tomography`), classical-model structure
(:mod:`corrcap.localmodels`), conic-program capability measures
(:mod:`corrcap.quantifiers`), and a sweep harness with figure rendering
(:mod:`corrcap.experiments`, :mod:`corrcap.report`). The most common
entry points are re-exported here.
"""
from __future__ import annotations

from .channels import (
    KrausChannel,
    NoiseModel,
    ProcessMatrix,
    ideal_process,
    preset_noise_model,
    process_from_kraus,
)
from .experiments import ResultRow, SweepConfig, export, run_sweep
from .quantifiers import (
    QuantifierReport,
    composition_deficit,
    incapable_fidelity,
    quantify,
    robustness,
    unable_fidelity,
    verify_report,
)
from .simulator import TomographyDataset, load_dataset, save_dataset, simulate_dataset
from .tomography import process_fidelity, reconstruct_process

__version__ = "0.1.0"

__all__ = [
    "KrausChannel",
    "NoiseModel",
    "ProcessMatrix",
    "QuantifierReport",
    "ResultRow",
    "SweepConfig",
    "TomographyDataset",
    "__version__",
    "composition_deficit",
    "export",
    "ideal_process",
    "incapable_fidelity",
    "load_dataset",
    "preset_noise_model",
    "process_fidelity",
    "process_from_kraus",
    "quantify",
    "reconstruct_process",
    "robustness",
    "run_sweep",
    "save_dataset",
    "simulate_dataset",
    "unable_fidelity",
    "verify_report",
]
