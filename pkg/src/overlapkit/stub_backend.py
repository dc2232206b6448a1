"""Stub trainer backend for tests and dry runs.

Reads one TrainRequest line from stdin and writes one TrainResponse line:
``constant`` mode scores every evaluation example the same, ``lexicon``
mode scores by competitive-marker token presence.  Run with
``python -m overlapkit.stub_backend``.
"""

from __future__ import annotations

import argparse
import json
import sys

from .baseline_classifier import tokenize
from .synth import default_competitive_lexicon
from .wire import SCHEMA_VERSION


def score_example(example: dict, mode: str, constant: float) -> float:
    if mode == "constant":
        return constant
    markers = set(default_competitive_lexicon())
    tokens = set(tokenize(example["segment_a"])) | set(tokenize(example["segment_b"]))
    return 0.9 if tokens & markers else 0.1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mode", choices=("constant", "lexicon"), default="constant")
    parser.add_argument("--score", type=float, default=0.5)
    args = parser.parse_args(argv)

    request = json.loads(sys.stdin.readline())
    epochs = int(request["hyperparameters"]["epochs"])
    response = {
        "schema_version": SCHEMA_VERSION,
        "kind": "train_response",
        "per_epoch": [
            {"epoch": e + 1, "val_loss": 0.6931, "val_roc_auc": 0.5}
            for e in range(epochs)
        ],
        "eval_scores": [
            score_example(x, args.mode, args.score) for x in request["evaluation"]
        ],
        "backend_info": f"overlapkit stub backend (mode={args.mode})",
    }
    sys.stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
