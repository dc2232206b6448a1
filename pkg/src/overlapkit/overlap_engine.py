"""Speaker-switch classification and overlap filtration.

Every consecutive turn pair (K, K+1) in a dialogue becomes one SwitchEvent
classified as gap, overlap, or continuation.  Overlap events carry three
derived features: successfulness (did the interrupter overtake the floor),
overlap duration, and whether the client was the interrupter.  Filtration
keeps successful overlaps of at least a configurable minimum duration for
the interrupter roles of interest.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .transcript_ingest import Dialogue, Turn, turn_from_dict, turn_to_dict

KIND_GAP = "gap"
KIND_OVERLAP = "overlap"
KIND_CONTINUATION = "continuation"


@dataclass(frozen=True)
class SwitchEvent:
    event_id: str
    dialogue_id: str
    k_index: int
    turn_k: Turn
    turn_k1: Turn
    kind: str  # gap | overlap | continuation
    successful: bool | None = None  # set iff kind == overlap
    overlap_duration_ms: int | None = None  # set iff kind == overlap
    client_is_interrupter: bool | None = None  # set iff kind == overlap


@dataclass(frozen=True)
class FilterConfig:
    min_overlap_ms: int = 1000
    require_successful: bool = True
    roles_kept: frozenset[str] = frozenset({"agent", "client"})

    def __post_init__(self):
        if self.min_overlap_ms < 1:
            raise ValueError("min_overlap_ms must be >= 1")
        if not self.roles_kept:
            raise ValueError("roles_kept must be non-empty")


def compute_event_id(dialogue_id: str, k_index: int) -> str:
    """Deterministic event id; stable across pipeline re-runs so stored
    labels are never orphaned."""
    digest = hashlib.sha1(f"{dialogue_id}\x1f{k_index}".encode("utf-8")).hexdigest()
    return digest[:16]


def classify_switch(turn_k: Turn, turn_k1: Turn) -> SwitchEvent:
    """Classify one speaker switch.

    Tie rules are fixed: start(K+1) == end(K) is a gap (overlap requires a
    strictly earlier start), and end(K) == end(K+1) is unsuccessful (the
    interrupter did not overtake the floor).
    """
    if turn_k1.turn_index != turn_k.turn_index + 1:
        raise ValueError(
            f"turns are not consecutive: indices {turn_k.turn_index}, {turn_k1.turn_index}"
        )
    event_id = compute_event_id(turn_k.dialogue_id, turn_k.turn_index)
    if turn_k.channel == turn_k1.channel:
        kind = KIND_CONTINUATION
    elif turn_k1.start_ms < turn_k.end_ms:
        kind = KIND_OVERLAP
    else:
        kind = KIND_GAP

    successful = duration = client_is_interrupter = None
    if kind == KIND_OVERLAP:
        successful = turn_k.end_ms < turn_k1.end_ms
        duration = min(turn_k.end_ms, turn_k1.end_ms) - turn_k1.start_ms
        client_is_interrupter = turn_k1.channel == "client"

    return SwitchEvent(
        event_id=event_id,
        dialogue_id=turn_k.dialogue_id,
        k_index=turn_k.turn_index,
        turn_k=turn_k,
        turn_k1=turn_k1,
        kind=kind,
        successful=successful,
        overlap_duration_ms=duration,
        client_is_interrupter=client_is_interrupter,
    )


def build_turn_pairs(dialogue: Dialogue) -> list[SwitchEvent]:
    """All consecutive turn-pair events of a dialogue (n-1 for n turns)."""
    turns = dialogue.turns
    return [classify_switch(turns[i], turns[i + 1]) for i in range(len(turns) - 1)]


def interrupter_role(event: SwitchEvent) -> str:
    return event.turn_k1.channel


def filter_overlaps(
    events: Iterable[SwitchEvent], config: FilterConfig | None = None
) -> list[SwitchEvent]:
    """Apply the three filtration rules, preserving relative order: keep
    overlaps only, drop unsuccessful ones (unless configured otherwise),
    drop overlaps shorter than the minimum, keep the configured roles."""
    config = config or FilterConfig()
    kept = []
    for event in events:
        if event.kind != KIND_OVERLAP:
            continue
        if config.require_successful and not event.successful:
            continue
        if event.overlap_duration_ms < config.min_overlap_ms:
            continue
        if interrupter_role(event) not in config.roles_kept:
            continue
        kept.append(event)
    return kept


# --- event file I/O ----------------------------------------------------------

def event_to_dict(event: SwitchEvent) -> dict:
    record = {
        "event_id": event.event_id,
        "dialogue_id": event.dialogue_id,
        "k_index": event.k_index,
        "kind": event.kind,
        "turn_k": turn_to_dict(event.turn_k),
        "turn_k1": turn_to_dict(event.turn_k1),
    }
    if event.kind == KIND_OVERLAP:
        record["successful"] = event.successful
        record["overlap_duration_ms"] = event.overlap_duration_ms
        record["client_is_interrupter"] = event.client_is_interrupter
    return record


def event_from_dict(obj: Mapping) -> SwitchEvent:
    return SwitchEvent(
        event_id=str(obj["event_id"]),
        dialogue_id=str(obj["dialogue_id"]),
        k_index=int(obj["k_index"]),
        turn_k=turn_from_dict(obj["turn_k"]),
        turn_k1=turn_from_dict(obj["turn_k1"]),
        kind=str(obj["kind"]),
        successful=obj.get("successful"),
        overlap_duration_ms=obj.get("overlap_duration_ms"),
        client_is_interrupter=obj.get("client_is_interrupter"),
    )


def write_events_jsonl(events: Iterable[SwitchEvent], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event_to_dict(event), ensure_ascii=False) + "\n")


def read_events_jsonl(path: str | Path) -> list[SwitchEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(event_from_dict(json.loads(line)))
    return events
