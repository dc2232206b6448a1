"""Experiment orchestration over wire-protocol trainer backends.

An experiment enumerates a learning-rate grid over a pre-built folded
dataset, runs the cross-validation protocol for each grid point through a
trainer backend (subprocess or HTTP), and emits a report whose rows carry
the fixed metric column set: ROC AUC binary, best threshold, macro recall,
macro precision, balanced accuracy, macro F1.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .dataset_builder import FoldedDataset
from .eval_metrics import cross_validate
from .wire import call_trainer, make_train_request

REPORT_COLUMNS = (
    "roc_auc_binary",
    "best_threshold",
    "recall_macro",
    "precision_macro",
    "balanced_accuracy",
    "f1_macro",
)


@dataclass
class ExperimentConfig:
    name: str
    context_variant: str = "both_speakers"
    extension_width: int = 8
    learning_rates: tuple[float, ...] = (1e-6, 3e-6, 5e-6, 7e-6, 9e-6)
    epochs: int = 5
    batch_size: int = 16
    weight_decay: float = 0.01
    max_length: int = 128
    seed: int = 0
    trainer: str = ""
    criterion: str = "f1_macro"

    def __post_init__(self):
        if not self.learning_rates:
            raise ValueError("learning_rates must be non-empty")
        for lr in self.learning_rates:
            if lr <= 0:
                raise ValueError(f"learning rate must be positive: {lr}")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {k: v for k, v in obj.items() if k in known}
        if "learning_rates" in kwargs:
            kwargs["learning_rates"] = tuple(float(x) for x in kwargs["learning_rates"])
        return cls(**kwargs)

    def hyperparameters(self, learning_rate: float) -> dict:
        return {
            "learning_rate": learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "weight_decay": self.weight_decay,
            "max_length": self.max_length,
            "seed": self.seed,
        }


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def dataset_hash(folded: FoldedDataset) -> str:
    h = hashlib.sha256()
    for item in folded.inputs:
        h.update(json.dumps(item.to_dict(), sort_keys=True, ensure_ascii=False).encode())
    return h.hexdigest()[:16]


class WireBackend:
    """Adapts a wire-protocol trainer locator to the cross_validate backend
    callable, capturing per-epoch curves and backend info from each call."""

    def __init__(self, locator: str, hyperparameters: dict, timeout: float = 600.0):
        self.locator = locator
        self.hyperparameters = hyperparameters
        self.timeout = timeout
        self.curves: list[list[dict]] = []
        self.backend_info: str | None = None

    def __call__(self, train, validation, evaluation) -> list[float]:
        request = make_train_request(
            self.hyperparameters, train, validation, evaluation
        )
        response = call_trainer(request, self.locator, timeout=self.timeout)
        self.curves.append(response["per_epoch"])
        self.backend_info = response["backend_info"]
        return [float(s) for s in response["eval_scores"]]


def run_experiment(config: ExperimentConfig, folded: FoldedDataset) -> dict:
    """Run the learning-rate grid and return the report dict.

    One row per grid point with exactly the REPORT_COLUMNS metric set; the
    final training run's per-epoch validation curves are attached per row.
    Deterministic given seed, dataset, and a deterministic backend.
    """
    rows = []
    curves = {}
    backend_info = None
    for lr in config.learning_rates:
        backend = WireBackend(config.trainer, config.hyperparameters(lr))
        cv = cross_validate(folded, backend, criterion=config.criterion)
        row = {"row_label": f"lr_{lr:g}", "learning_rate": lr}
        row.update({c: cv.test_report.to_dict()[c] for c in REPORT_COLUMNS})
        rows.append(row)
        # last curve belongs to the final train-on-all-non-test run
        curves[f"lr_{lr:g}"] = backend.curves[-1]
        backend_info = backend.backend_info
    return {
        "name": config.name,
        "columns": list(REPORT_COLUMNS),
        "rows": rows,
        "per_epoch_curves": curves,
        "provenance": {
            "dataset_hash": dataset_hash(folded),
            "context_variant": config.context_variant,
            "extension_width": config.extension_width,
            "n_folds": folded.n_folds,
            "test_fold": folded.test_fold,
            "epochs": config.epochs,
            "batch_size": config.batch_size,
            "weight_decay": config.weight_decay,
            "max_length": config.max_length,
            "seed": config.seed,
            "criterion": config.criterion,
            "trainer": config.trainer,
            "backend_info": backend_info,
        },
    }


def load_reference_results() -> dict:
    """The shipped reference-results fixture (report-format tests only)."""
    text = resources.files("overlapkit.data").joinpath("reference_results.json").read_text("utf-8")
    return json.loads(text)
