"""Fine-tuning backend for the line-delimited JSON wire protocol.

One request per process invocation: a single train_request line on stdin,
a single train_response line on stdout.  Diagnostics go to stderr only, so
stdout stays a clean one-line channel.

The checkpoint defaults to ``DeepPavlov/rubert-base-cased-conversational``
and can be overridden with the ``RUBERT_MODEL`` environment variable (a hub
id or a local path).  The model cache location follows the standard
``HF_HOME`` environment variable.  Optimization is decoupled-weight-decay
Adam with a linear decay schedule — the de-facto defaults of the
transformers fine-tuning toolchain.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

import numpy as np
import torch
from sklearn.metrics import roc_auc_score
from torch.optim import AdamW
from transformers import (
    AutoModelForSequenceClassification,
    AutoTokenizer,
    get_linear_schedule_with_warmup,
)

SCHEMA_VERSION = 1
DEFAULT_CHECKPOINT = "DeepPavlov/rubert-base-cased-conversational"
POSITIVE_LABEL = "competitive"


class RequestError(ValueError):
    """The incoming request line is not a usable train_request."""


def parse_request(raw: str) -> dict:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise RequestError(f"request is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise RequestError("request must be a JSON object")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise RequestError(f"unsupported schema_version: {obj.get('schema_version')!r}")
    if obj.get("kind") != "train_request":
        raise RequestError(f"unexpected kind: {obj.get('kind')!r}")
    for key in ("hyperparameters", "train", "validation", "evaluation"):
        if key not in obj:
            raise RequestError(f"missing field: {key}")
    if not obj["train"]:
        raise RequestError("train set is empty")
    return obj


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def encode_batch(tokenizer, examples: list[dict], max_length: int) -> dict:
    """Sequence-pair encoding; single-segment when segment_a is empty."""
    firsts = [x["segment_a"] for x in examples]
    seconds = [x["segment_b"] for x in examples]
    if all(not a for a in firsts):
        encoded = tokenizer(
            seconds, truncation=True, max_length=max_length,
            padding=True, return_tensors="pt",
        )
    else:
        encoded = tokenizer(
            firsts, seconds, truncation=True, max_length=max_length,
            padding=True, return_tensors="pt",
        )
    return encoded


def labels_tensor(examples: list[dict]) -> torch.Tensor:
    return torch.tensor(
        [1 if x["label"] == POSITIVE_LABEL else 0 for x in examples],
        dtype=torch.long,
    )


@torch.no_grad()
def score_examples(model, tokenizer, examples, max_length, batch_size, device):
    """Softmax probability of the competitive class, one per example."""
    model.eval()
    scores: list[float] = []
    for start in range(0, len(examples), batch_size):
        batch = examples[start : start + batch_size]
        encoded = encode_batch(tokenizer, batch, max_length)
        encoded = {k: v.to(device) for k, v in encoded.items()}
        logits = model(**encoded).logits
        probs = torch.softmax(logits, dim=-1)[:, 1]
        scores.extend(probs.cpu().tolist())
    return [min(1.0, max(0.0, s)) for s in scores]


@torch.no_grad()
def validation_metrics(model, tokenizer, examples, max_length, batch_size, device):
    """Mean cross-entropy loss and ROC AUC on the validation set.  AUC is
    0.5 when the set is empty or single-class (chance level)."""
    if not examples:
        return 0.0, 0.5
    model.eval()
    loss_fn = torch.nn.CrossEntropyLoss(reduction="sum")
    total_loss = 0.0
    all_scores: list[float] = []
    for start in range(0, len(examples), batch_size):
        batch = examples[start : start + batch_size]
        encoded = encode_batch(tokenizer, batch, max_length)
        encoded = {k: v.to(device) for k, v in encoded.items()}
        logits = model(**encoded).logits
        total_loss += loss_fn(logits, labels_tensor(batch).to(device)).item()
        all_scores.extend(torch.softmax(logits, dim=-1)[:, 1].cpu().tolist())
    labels = [1 if x["label"] == POSITIVE_LABEL else 0 for x in examples]
    if len(set(labels)) < 2:
        auc = 0.5
    else:
        auc = float(roc_auc_score(labels, all_scores))
    return total_loss / len(examples), auc


def fine_tune(request: dict, checkpoint: str, device_name: str) -> dict:
    hp = request["hyperparameters"]
    learning_rate = float(hp["learning_rate"])
    epochs = int(hp["epochs"])
    batch_size = int(hp["batch_size"])
    weight_decay = float(hp["weight_decay"])
    max_length = int(hp["max_length"])
    seed = int(hp.get("seed", 0))
    warmup_steps = int(hp.get("warmup_steps", 0))
    gradient_clip = hp.get("gradient_clip")

    seed_everything(seed)
    device = torch.device(device_name)
    tokenizer = AutoTokenizer.from_pretrained(checkpoint)
    model = AutoModelForSequenceClassification.from_pretrained(
        checkpoint, num_labels=2
    ).to(device)

    train = list(request["train"])
    total_steps = max(1, epochs * ((len(train) + batch_size - 1) // batch_size))
    optimizer = AdamW(model.parameters(), lr=learning_rate, weight_decay=weight_decay)
    scheduler = get_linear_schedule_with_warmup(optimizer, warmup_steps, total_steps)
    loss_fn = torch.nn.CrossEntropyLoss()
    shuffler = random.Random(seed)

    per_epoch = []
    for epoch in range(1, epochs + 1):
        model.train()
        order = list(range(len(train)))
        shuffler.shuffle(order)
        shuffled = [train[i] for i in order]
        for start in range(0, len(shuffled), batch_size):
            batch = shuffled[start : start + batch_size]
            encoded = encode_batch(tokenizer, batch, max_length)
            encoded = {k: v.to(device) for k, v in encoded.items()}
            logits = model(**encoded).logits
            loss = loss_fn(logits, labels_tensor(batch).to(device))
            optimizer.zero_grad()
            loss.backward()
            if gradient_clip is not None:
                torch.nn.utils.clip_grad_norm_(model.parameters(), float(gradient_clip))
            optimizer.step()
            scheduler.step()
        val_loss, val_auc = validation_metrics(
            model, tokenizer, request["validation"], max_length, batch_size, device
        )
        per_epoch.append({"epoch": epoch, "val_loss": val_loss, "val_roc_auc": val_auc})

    eval_scores = score_examples(
        model, tokenizer, request["evaluation"], max_length, batch_size, device
    )
    backend_info = (
        f"rubert_trainer checkpoint={checkpoint} device={device_name} "
        f"optimizer=AdamW schedule=linear warmup_steps={warmup_steps} "
        f"gradient_clip={gradient_clip} seed={seed}"
    )
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "train_response",
        "per_epoch": per_epoch,
        "eval_scores": eval_scores,
        "backend_info": backend_info,
        "hyperparameters": dict(hp),
    }


def serve_train_request(raw: str, checkpoint: str, device_name: str = "cpu") -> dict:
    return fine_tune(parse_request(raw), checkpoint, device_name)


def resolve_checkpoint(explicit: str | None = None) -> str:
    import os

    return explicit or os.environ.get("RUBERT_MODEL") or DEFAULT_CHECKPOINT


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default=None,
                        help="checkpoint id or path (default: $RUBERT_MODEL or "
                             f"{DEFAULT_CHECKPOINT})")
    parser.add_argument("--device", default="cpu",
                        help="torch device, e.g. cpu or cuda:0")
    args = parser.parse_args(argv)

    raw = sys.stdin.readline()
    if not raw.strip():
        print("error: no request line on stdin", file=sys.stderr)
        return 2
    try:
        response = serve_train_request(raw, resolve_checkpoint(args.model), args.device)
    except RequestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # checkpoint missing, OOM, ... -> backend error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(response, ensure_ascii=False))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
