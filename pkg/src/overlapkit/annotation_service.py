"""Annotation queue, durable label log, and the HTTP API behind the
labeling UI.

Candidates (filtered overlap events) are queued in insertion order.  Labels
go to an append-only line-delimited log replayed at startup with
last-write-wins per event, so a restart reconstructs exactly the same
state.  All writes are serialized through one lock.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.staticfiles import StaticFiles

from .overlap_engine import SwitchEvent, event_to_dict
from .transcript_ingest import Dialogue, turn_to_dict

LABELS = ("competitive", "non_competitive", "undefined")
CONTEXT_WIDTH = 8


class UnknownEventError(KeyError):
    pass


class InvalidLabelError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledOverlap:
    event_id: str
    label: str
    annotator_id: str
    labeled_at: str

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "label": self.label,
            "annotator_id": self.annotator_id,
            "labeled_at": self.labeled_at,
        }


class LabelStore:
    """Event queue + label log.  Thread-safe; one writer lock."""

    def __init__(
        self,
        label_log_path: str | Path | None = None,
        dialogues: Iterable[Dialogue] = (),
    ):
        self._lock = threading.Lock()
        self._events: dict[str, SwitchEvent] = {}
        self._queue: list[str] = []  # insertion order
        self._labels: dict[str, LabeledOverlap] = {}
        self._dialogues = {d.dialogue_id: d for d in dialogues}
        self._log_path = Path(label_log_path) if label_log_path else None
        if self._log_path and self._log_path.exists():
            self._replay_log()

    def _replay_log(self) -> None:
        with open(self._log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                self._labels[obj["event_id"]] = LabeledOverlap(
                    event_id=obj["event_id"],
                    label=obj["label"],
                    annotator_id=obj["annotator_id"],
                    labeled_at=obj["labeled_at"],
                )

    def enqueue_candidates(self, events: Iterable[SwitchEvent]) -> int:
        """Queue unseen events; duplicates are ignored.  Returns new count."""
        added = 0
        with self._lock:
            for event in events:
                if event.event_id in self._events:
                    continue
                self._events[event.event_id] = event
                self._queue.append(event.event_id)
                added += 1
        return added

    def next_unlabeled(self) -> SwitchEvent | None:
        """Oldest unlabeled entry by insertion order, or None.  Pure read;
        concurrent annotators resolve by last write wins."""
        with self._lock:
            for event_id in self._queue:
                if event_id not in self._labels:
                    return self._events[event_id]
        return None

    def submit_label(
        self, event_id: str, label: str, annotator_id: str
    ) -> LabeledOverlap:
        if label not in LABELS:
            raise InvalidLabelError(f"label must be one of {LABELS}, got {label!r}")
        with self._lock:
            if event_id not in self._events:
                raise UnknownEventError(event_id)
            record = LabeledOverlap(
                event_id=event_id,
                label=label,
                annotator_id=annotator_id,
                labeled_at=datetime.now(timezone.utc).isoformat(),
            )
            if self._log_path:
                with open(self._log_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
                    fh.flush()
            self._labels[event_id] = record
        return record

    def export_labels(self) -> list[dict]:
        """Latest label per event joined with its event, ordered by event_id."""
        with self._lock:
            out = []
            for event_id in sorted(self._labels):
                record = self._labels[event_id].to_dict()
                if event_id in self._events:
                    record["event"] = event_to_dict(self._events[event_id])
                out.append(record)
            return out

    def progress(self) -> dict:
        with self._lock:
            counts = {label: 0 for label in LABELS}
            for record in self._labels.values():
                if record.event_id in self._events:
                    counts[record.label] += 1
            labeled = sum(counts.values())
            counts["unlabeled"] = len(self._queue) - labeled
            counts["total"] = len(self._queue)
            return counts

    def get_event(self, event_id: str) -> SwitchEvent:
        with self._lock:
            if event_id not in self._events:
                raise UnknownEventError(event_id)
            return self._events[event_id]

    def context_turns(self, event: SwitchEvent) -> tuple[list[dict], list[dict]]:
        """Up to CONTEXT_WIDTH turns before K and after K+1, when the source
        dialogue is available."""
        dialogue = self._dialogues.get(event.dialogue_id)
        if dialogue is None:
            return [], []
        k = event.k_index
        before = dialogue.turns[max(0, k - CONTEXT_WIDTH) : k]
        after = dialogue.turns[k + 2 : k + 2 + CONTEXT_WIDTH]
        return [turn_to_dict(t) for t in before], [turn_to_dict(t) for t in after]

    def audio_uri(self, event: SwitchEvent) -> str | None:
        dialogue = self._dialogues.get(event.dialogue_id)
        return dialogue.audio_uri if dialogue else None


def candidate_payload(store: LabelStore, event: SwitchEvent) -> dict:
    before, after = store.context_turns(event)
    return {
        "event": event_to_dict(event),
        "context_before": before,
        "context_after": after,
        "audio_clip_uri": store.audio_uri(event),
        "progress": store.progress(),
    }


def create_app(store: LabelStore, static_dir: str | Path | None = None):
    """FastAPI app exposing the labeling API and (optionally) the UI assets."""
    app = FastAPI(title="overlap annotation service")

    @app.get("/api/queue/next")
    def queue_next():
        event = store.next_unlabeled()
        if event is None:
            return Response(status_code=204)
        return candidate_payload(store, event)

    @app.post("/api/labels", status_code=201)
    async def post_label(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=422, detail="request body must be JSON")
        missing = [k for k in ("event_id", "label", "annotator_id")
                   if not isinstance(body.get(k), str)]
        if missing:
            raise HTTPException(status_code=422, detail=f"missing fields: {missing}")
        try:
            record = store.submit_label(
                body["event_id"], body["label"], body["annotator_id"]
            )
        except InvalidLabelError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except UnknownEventError:
            raise HTTPException(status_code=404, detail=f"unknown event: {body['event_id']}")
        return record.to_dict()

    @app.get("/api/progress")
    def get_progress():
        return store.progress()

    @app.get("/api/events/{event_id}")
    def get_event(event_id: str):
        try:
            event = store.get_event(event_id)
        except UnknownEventError:
            raise HTTPException(status_code=404, detail=f"unknown event: {event_id}")
        return candidate_payload(store, event)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app


def read_labels_jsonl(path: str | Path) -> list[dict]:
    """Read a label log / export file with last-write-wins per event_id,
    returned in event_id order."""
    latest: dict[str, dict] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                latest[obj["event_id"]] = obj
    return [latest[k] for k in sorted(latest)]


def export_labels_file(
    labels_path: str | Path,
    events: Mapping[str, SwitchEvent],
    out_path: str | Path,
) -> int:
    """Join a label log with stored events into a labeled.jsonl file."""
    records = read_labels_jsonl(labels_path)
    n = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for record in records:
            event = events.get(record["event_id"])
            if event is None:
                continue
            record = dict(record)
            record["event"] = event_to_dict(event)
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            n += 1
    return n
