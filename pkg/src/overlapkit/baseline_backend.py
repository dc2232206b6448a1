"""Wire-protocol adapter around the native baseline classifier.

Lets the experiment harness drive the bag-of-n-grams logistic regression
through the same trainer contract as external backends.  Run with
``python -m overlapkit.baseline_backend``.

The request's transformer-scale learning rate is multiplied by
``--lr-scale`` (default 1e5, so 7e-6 becomes 0.7) because full-batch
logistic regression needs step sizes orders of magnitude larger than
fine-tuning does; the effective rate is echoed in backend_info.  Training
is split into the requested number of epochs so the per-epoch validation
curve has the expected length.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import baseline_classifier as bc
from .eval_metrics import UndefinedMetricError, roc_auc
from .wire import SCHEMA_VERSION

EPOCH_STEPS = 40  # gradient steps per reported epoch


@dataclass(frozen=True)
class _Example:
    segment_a: str
    segment_b: str
    label: str = ""


def _examples(items: list[dict]) -> list[_Example]:
    return [
        _Example(x["segment_a"], x["segment_b"], x.get("label", "")) for x in items
    ]


def _labels(examples: list[_Example]) -> np.ndarray:
    return np.array([1.0 if x.label == "competitive" else 0.0 for x in examples])


def serve(request: dict, lr_scale: float, min_df: int) -> dict:
    hp = request["hyperparameters"]
    epochs = int(hp["epochs"])
    lr = float(hp["learning_rate"]) * lr_scale
    l2 = float(hp["weight_decay"]) * 1e-2  # weight decay reinterpreted as L2

    train = _examples(request["train"])
    validation = _examples(request["validation"])
    evaluation = _examples(request["evaluation"])

    corpus = [(x.segment_a, x.segment_b) for x in train]
    vocab = bc.fit_vocabulary(corpus, min_df=min_df)
    X = bc.featurize_matrix(corpus, vocab)
    y = _labels(train)
    X_val = bc.featurize_matrix([(x.segment_a, x.segment_b) for x in validation], vocab)
    y_val = _labels(validation)

    weights = np.zeros(X.shape[1] + 1)
    per_epoch = []
    for epoch in range(1, epochs + 1):
        for _ in range(EPOCH_STEPS):
            _, grad = bc.logreg_loss_and_grad(weights, X, y, l2)
            weights = weights - lr * grad
        if len(validation):
            val_loss, _ = bc.logreg_loss_and_grad(weights, X_val, y_val, 0.0)
            val_scores = bc._sigmoid(X_val @ weights[:-1] + weights[-1])
            try:
                val_auc = roc_auc(list(val_scores), [int(v) for v in y_val])
            except UndefinedMetricError:
                val_auc = 0.5
        else:
            val_loss, val_auc = 0.0, 0.5
        per_epoch.append(
            {"epoch": epoch, "val_loss": float(val_loss), "val_roc_auc": float(val_auc)}
        )

    model = bc.LogRegModel(weights=weights, l2_lambda=l2)
    eval_scores = bc.score_inputs(evaluation, model, vocab)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "train_response",
        "per_epoch": per_epoch,
        "eval_scores": eval_scores,
        "backend_info": (
            f"overlapkit baseline backend: tf-idf 1-2grams + logreg, "
            f"effective_lr={lr:g}, l2={l2:g}, steps_per_epoch={EPOCH_STEPS}"
        ),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lr-scale", type=float, default=1e5)
    parser.add_argument("--min-df", type=int, default=2)
    args = parser.parse_args(argv)

    request = json.loads(sys.stdin.readline())
    response = serve(request, lr_scale=args.lr_scale, min_df=args.min_df)
    sys.stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
