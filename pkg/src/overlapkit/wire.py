"""Trainer wire protocol: versioned line-delimited JSON messages.

One TrainRequest line goes to the backend (subprocess stdin or HTTP POST
body); one TrainResponse line comes back.  Unknown fields are ignored on
read.  Every response is validated against the schema invariants before
any metric is computed; violations raise ProtocolError naming the first
invalid field.

Request (kind "train_request"):
    schema_version: 1
    hyperparameters: {learning_rate, epochs, batch_size, weight_decay,
                      max_length, seed, [warmup_steps], [gradient_clip]}
    train:      [{segment_a, segment_b, label}]
    validation: [{segment_a, segment_b, label}]
    evaluation: [{segment_a, segment_b}]

Response (kind "train_response"):
    schema_version: 1
    per_epoch:   [{epoch, val_loss, val_roc_auc}]  (length == epochs)
    eval_scores: [float in [0,1]]                  (length == len(evaluation))
    backend_info: str
"""

from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass
from typing import Mapping, Sequence

SCHEMA_VERSION = 1


class ProtocolError(ValueError):
    """Backend response violated the wire schema."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"protocol error in {field!r}: {message}")


class TrainerBackendError(RuntimeError):
    """The backend process or endpoint itself failed."""


def make_train_request(
    hyperparameters: Mapping,
    train: Sequence,
    validation: Sequence,
    evaluation: Sequence,
) -> dict:
    def labeled(x):
        return {"segment_a": x.segment_a, "segment_b": x.segment_b, "label": x.label}

    def unlabeled(x):
        return {"segment_a": x.segment_a, "segment_b": x.segment_b}

    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "train_request",
        "hyperparameters": dict(hyperparameters),
        "train": [labeled(x) for x in train],
        "validation": [labeled(x) for x in validation],
        "evaluation": [unlabeled(x) for x in evaluation],
    }


def validate_train_response(obj, n_eval: int, epochs: int) -> dict:
    """Check every TrainResponse invariant; returns the validated dict."""
    if not isinstance(obj, dict):
        raise ProtocolError("response", f"expected object, got {type(obj).__name__}")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ProtocolError("schema_version", f"expected {SCHEMA_VERSION}, got {obj.get('schema_version')!r}")
    if obj.get("kind") != "train_response":
        raise ProtocolError("kind", f"expected 'train_response', got {obj.get('kind')!r}")

    per_epoch = obj.get("per_epoch")
    if not isinstance(per_epoch, list):
        raise ProtocolError("per_epoch", "missing or not a list")
    if len(per_epoch) != epochs:
        raise ProtocolError("per_epoch", f"expected {epochs} entries, got {len(per_epoch)}")
    for i, entry in enumerate(per_epoch):
        if not isinstance(entry, dict):
            raise ProtocolError(f"per_epoch[{i}]", "not an object")
        for key in ("epoch", "val_loss", "val_roc_auc"):
            if not isinstance(entry.get(key), (int, float)) or isinstance(entry.get(key), bool):
                raise ProtocolError(f"per_epoch[{i}].{key}", f"missing or non-numeric: {entry.get(key)!r}")

    scores = obj.get("eval_scores")
    if not isinstance(scores, list):
        raise ProtocolError("eval_scores", "missing or not a list")
    if len(scores) != n_eval:
        raise ProtocolError("eval_scores", f"expected {n_eval} scores, got {len(scores)}")
    for i, s in enumerate(scores):
        if not isinstance(s, (int, float)) or isinstance(s, bool):
            raise ProtocolError(f"eval_scores[{i}]", f"non-numeric score: {s!r}")
        if not 0.0 <= s <= 1.0:
            raise ProtocolError(f"eval_scores[{i}]", f"score out of [0,1]: {s}")

    if not isinstance(obj.get("backend_info"), str):
        raise ProtocolError("backend_info", "missing or not a string")
    return obj


def decode_train_response(raw: str | bytes, n_eval: int, epochs: int) -> dict:
    """Parse and validate one response line; any malformation becomes a
    ProtocolError (never a crash)."""
    try:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        obj = json.loads(raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError("response", f"undecodable message: {exc}") from None
    return validate_train_response(obj, n_eval=n_eval, epochs=epochs)


def call_trainer(request: dict, backend: str, timeout: float = 600.0) -> dict:
    """Send one TrainRequest to the backend locator and return the validated
    TrainResponse.

    The locator is either an HTTP(S) URL (one POST with the JSON body) or a
    shell command line (spawned once; one request line on stdin, one
    response line expected on stdout).
    """
    n_eval = len(request["evaluation"])
    epochs = int(request["hyperparameters"]["epochs"])
    if backend.startswith(("http://", "https://")):
        import requests

        try:
            resp = requests.post(backend, json=request, timeout=timeout)
        except requests.RequestException as exc:
            raise TrainerBackendError(f"HTTP backend failed: {exc}") from exc
        if resp.status_code != 200:
            raise TrainerBackendError(
                f"HTTP backend returned {resp.status_code}: {resp.text[:500]}"
            )
        return decode_train_response(resp.text, n_eval=n_eval, epochs=epochs)

    argv = shlex.split(backend)
    try:
        proc = subprocess.run(
            argv,
            input=json.dumps(request, ensure_ascii=False) + "\n",
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired as exc:
        raise TrainerBackendError(f"backend timed out after {timeout}s") from exc
    except OSError as exc:
        raise TrainerBackendError(f"failed to spawn backend {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        raise TrainerBackendError(
            f"backend exited with {proc.returncode}; stderr: {proc.stderr[-2000:]}"
        )
    line = proc.stdout.strip().splitlines()
    if not line:
        raise ProtocolError("response", "backend produced no output line")
    return decode_train_response(line[0], n_eval=n_eval, epochs=epochs)
