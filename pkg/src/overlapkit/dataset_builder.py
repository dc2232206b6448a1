"""Dataset assembly: drop undefined labels, build model-input text pairs,
and assign stratified folds.

A model input is a two-segment text pair: segment_a holds the interrupted
speaker's context (empty in the interrupter-only variant) and segment_b the
interrupter's context.  Three context variants are supported:

* ``interrupter_only`` — segment_b = text of turn K+1, segment_a empty.
* ``both_speakers``    — segment_a = text of turn K, segment_b = text of K+1.
* ``extended``         — segment_a additionally prepends up to
  ``extension_width`` preceding turns, segment_b appends up to
  ``extension_width`` following turns; joined with single spaces, empty
  texts skipped, truncated at dialogue boundaries.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .overlap_engine import SwitchEvent
from .transcript_ingest import Dialogue

VARIANTS = ("interrupter_only", "both_speakers", "extended")
BINARY_LABELS = ("competitive", "non_competitive")


@dataclass(frozen=True)
class ContextVariant:
    name: str = "both_speakers"
    extension_width: int = 8

    def __post_init__(self):
        if self.name not in VARIANTS:
            raise ValueError(f"unknown context variant: {self.name!r}")
        if self.extension_width < 0:
            raise ValueError("extension_width must be >= 0")


@dataclass(frozen=True)
class ModelInput:
    event_id: str
    segment_a: str
    segment_b: str
    label: str  # competitive | non_competitive
    fold: int
    client_is_interrupter: bool

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "segment_a": self.segment_a,
            "segment_b": self.segment_b,
            "label": self.label,
            "fold": self.fold,
            "client_is_interrupter": self.client_is_interrupter,
        }


@dataclass
class FoldedDataset:
    inputs: list[ModelInput]
    n_folds: int = 10
    test_fold: int = 9
    seed: int = 0

    def __post_init__(self):
        if self.test_fold >= self.n_folds:
            raise ValueError("test_fold must be < n_folds")
        for item in self.inputs:
            if not 0 <= item.fold < self.n_folds:
                raise ValueError(f"fold {item.fold} out of range for {self.n_folds} folds")


def assemble_dataset(labeled: Iterable[Mapping]) -> list[dict]:
    """Drop undefined-labeled records, preserving input order.

    Each input record must carry ``label`` plus the joined event fields
    (at minimum ``event_id``); records pass through untouched.
    """
    return [dict(rec) for rec in labeled if rec["label"] != "undefined"]


def build_model_input(
    event: SwitchEvent, dialogue: Dialogue, variant: ContextVariant
) -> tuple[str, str]:
    """Build the (segment_a, segment_b) text pair for one overlap event."""
    if event.dialogue_id != dialogue.dialogue_id:
        raise ValueError(
            f"event {event.event_id} belongs to dialogue {event.dialogue_id!r}, "
            f"not {dialogue.dialogue_id!r}"
        )
    k = event.k_index
    turns = dialogue.turns
    if variant.name == "interrupter_only":
        return "", turns[k + 1].text
    if variant.name == "both_speakers":
        return turns[k].text, turns[k + 1].text
    # extended: turns K-w..K and K+1..K+1+w, truncated at dialogue bounds
    w = variant.extension_width
    lo = max(0, k - w)
    hi = min(len(turns), k + 2 + w)
    segment_a = " ".join(t.text for t in turns[lo : k + 1] if t.text)
    segment_b = " ".join(t.text for t in turns[k + 1 : hi] if t.text)
    return segment_a, segment_b


def assign_folds(
    records: Sequence[Mapping], n_folds: int = 10, seed: int = 0
) -> dict[str, int]:
    """Stratified fold assignment: within each label class, shuffle with the
    seeded generator, then deal round-robin to folds 0..n_folds-1.

    Returns event_id -> fold.  Per-class fold counts differ by at most 1;
    deterministic for a fixed seed.
    """
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    if n_folds > len(records):
        raise ValueError(f"n_folds ({n_folds}) exceeds dataset size ({len(records)})")
    rng = random.Random(seed)
    assignment: dict[str, int] = {}
    labels = sorted({rec["label"] for rec in records})
    for label in labels:
        ids = [rec["event_id"] for rec in records if rec["label"] == label]
        rng.shuffle(ids)
        for i, event_id in enumerate(ids):
            assignment[event_id] = i % n_folds
    return assignment


def build_dataset(
    labeled: Sequence[Mapping],
    dialogues: Iterable[Dialogue],
    events_by_id: Mapping[str, SwitchEvent],
    variant: ContextVariant,
    n_folds: int = 10,
    test_fold: int = 9,
    seed: int = 0,
) -> FoldedDataset:
    """End-to-end dataset construction from exported labels.

    Records whose segment_b comes out empty (empty ASR hypotheses) are
    dropped: a model input with no interrupter text is unusable.
    """
    dialogue_index = {d.dialogue_id: d for d in dialogues}
    binary = assemble_dataset(labeled)
    usable = []
    for rec in binary:
        event = events_by_id[rec["event_id"]]
        dialogue = dialogue_index[event.dialogue_id]
        segment_a, segment_b = build_model_input(event, dialogue, variant)
        if not segment_b:
            continue
        usable.append((rec, event, segment_a, segment_b))
    folds = assign_folds([rec for rec, *_ in usable], n_folds=n_folds, seed=seed)
    inputs = [
        ModelInput(
            event_id=rec["event_id"],
            segment_a=segment_a,
            segment_b=segment_b,
            label=rec["label"],
            fold=folds[rec["event_id"]],
            client_is_interrupter=bool(event.client_is_interrupter),
        )
        for rec, event, segment_a, segment_b in usable
    ]
    return FoldedDataset(inputs=inputs, n_folds=n_folds, test_fold=test_fold, seed=seed)


def model_input_from_dict(obj: Mapping) -> ModelInput:
    return ModelInput(
        event_id=str(obj["event_id"]),
        segment_a=str(obj["segment_a"]),
        segment_b=str(obj["segment_b"]),
        label=str(obj["label"]),
        fold=int(obj["fold"]),
        client_is_interrupter=bool(obj["client_is_interrupter"]),
    )


def write_dataset_jsonl(dataset: FoldedDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in dataset.inputs:
            fh.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")


def read_dataset_jsonl(
    path: str | Path, n_folds: int = 10, test_fold: int = 9
) -> FoldedDataset:
    inputs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                inputs.append(model_input_from_dict(json.loads(line)))
    return FoldedDataset(inputs=inputs, n_folds=n_folds, test_fold=test_fold)
