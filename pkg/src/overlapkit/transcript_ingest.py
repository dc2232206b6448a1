"""Parsing and validation of dual-channel ASR transcript tables.

A transcript table is a delimited text file with one row per VAD-separated
turn.  Parsing groups rows into dialogues and orders each dialogue's turns
deterministically.  The canonical on-disk exchange format for parsed turns
is line-delimited JSON, one turn per line.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from decimal import Decimal, ROUND_HALF_UP
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

CHANNELS = ("agent", "client")

DEFAULT_COLUMNS = {
    "dialogue_id": "dialogue_id",
    "channel": "channel",
    "start_ms": "start_ms",
    "end_ms": "end_ms",
    "text": "text",
}
OPTIONAL_COLUMNS = {"audio_uri": "audio_uri"}


class TranscriptError(Exception):
    """Base class for transcript parsing failures."""


class SchemaError(TranscriptError):
    """A required column is missing from the header."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(f"missing required column: {column!r}")


class RowError(TranscriptError):
    """A data row failed to parse or violated a field invariant."""

    def __init__(self, row_number: int, message: str):
        self.row_number = row_number
        super().__init__(f"row {row_number}: {message}")


@dataclass(frozen=True)
class Turn:
    dialogue_id: str
    turn_index: int
    channel: str  # "agent" | "client"
    start_ms: int
    end_ms: int
    text: str


@dataclass(frozen=True)
class Dialogue:
    dialogue_id: str
    turns: tuple[Turn, ...]
    audio_uri: str | None = None


@dataclass(frozen=True)
class FormatConfig:
    """Column remapping and delimiter for source tables.

    ``columns`` maps canonical names (``dialogue_id``, ``channel``,
    ``start_ms``, ``end_ms``, ``text``, optionally ``audio_uri``) onto the
    header names used by the source file.  ``channel_map`` maps source
    channel strings (e.g. "0"/"1") onto the fixed {agent, client} vocabulary.
    """

    delimiter: str = ","
    columns: Mapping[str, str] = field(default_factory=dict)
    channel_map: Mapping[str, str] = field(default_factory=dict)

    def column(self, canonical: str) -> str:
        if canonical in self.columns:
            return self.columns[canonical]
        return {**DEFAULT_COLUMNS, **OPTIONAL_COLUMNS}[canonical]


def _parse_ms(raw: str) -> int:
    """Parse a millisecond value; fractional inputs round half-up."""
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return int(Decimal(raw).quantize(Decimal("1"), rounding=ROUND_HALF_UP))
    except Exception:
        raise ValueError(f"unparseable timestamp: {raw!r}") from None


def _parse_channel(raw: str, config: FormatConfig) -> str:
    value = config.channel_map.get(raw.strip(), raw.strip())
    if value not in CHANNELS:
        raise ValueError(f"unknown channel value: {raw!r}")
    return value


def order_turns(turns: Sequence[Turn]) -> list[Turn]:
    """Stable-sort turns by (start_ms, channel with agent < client) and
    reassign turn_index 0..n-1.  All turns must share one dialogue_id."""
    if not turns:
        return []
    dialogue_ids = {t.dialogue_id for t in turns}
    if len(dialogue_ids) > 1:
        raise ValueError(f"order_turns got mixed dialogue_ids: {sorted(dialogue_ids)}")
    ordered = sorted(turns, key=lambda t: (t.start_ms, CHANNELS.index(t.channel)))
    return [replace(t, turn_index=i) for i, t in enumerate(ordered)]


def parse_transcript(
    source: IO[bytes] | IO[str], config: FormatConfig | None = None
) -> list[Dialogue]:
    """Parse a delimited transcript table into ordered dialogues.

    Dialogues are returned in first-appearance order; within a dialogue,
    turns follow the ``order_turns`` ordering.  Two runs on the same bytes
    produce identical output.
    """
    config = config or FormatConfig()
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    raw = source.read()
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    reader = csv.DictReader(io.StringIO(text), delimiter=config.delimiter)
    header = reader.fieldnames or []
    for canonical in DEFAULT_COLUMNS:
        if config.column(canonical) not in header:
            raise SchemaError(config.column(canonical))
    audio_col = config.column("audio_uri")
    has_audio = audio_col in header

    by_dialogue: dict[str, list[Turn]] = {}
    audio_uris: dict[str, str] = {}
    for row_number, row in enumerate(reader, start=2):  # 1 = header
        try:
            dialogue_id = row[config.column("dialogue_id")]
            channel = _parse_channel(row[config.column("channel")], config)
            start_ms = _parse_ms(row[config.column("start_ms")])
            end_ms = _parse_ms(row[config.column("end_ms")])
        except ValueError as exc:
            raise RowError(row_number, str(exc)) from None
        if start_ms < 0:
            raise RowError(row_number, f"negative start timestamp: {start_ms}")
        if end_ms <= start_ms:
            raise RowError(row_number, f"end ({end_ms}) must be > start ({start_ms})")
        turn = Turn(
            dialogue_id=dialogue_id,
            turn_index=-1,  # assigned by order_turns
            channel=channel,
            start_ms=start_ms,
            end_ms=end_ms,
            text=row[config.column("text")] or "",
        )
        by_dialogue.setdefault(dialogue_id, []).append(turn)
        if has_audio and row.get(audio_col) and dialogue_id not in audio_uris:
            audio_uris[dialogue_id] = row[audio_col]

    return [
        Dialogue(
            dialogue_id=did,
            turns=tuple(order_turns(turns)),
            audio_uri=audio_uris.get(did),
        )
        for did, turns in by_dialogue.items()
    ]


# --- canonical line-delimited turn file -------------------------------------

def turn_to_dict(turn: Turn) -> dict:
    return {
        "dialogue_id": turn.dialogue_id,
        "turn_index": turn.turn_index,
        "channel": turn.channel,
        "start_ms": turn.start_ms,
        "end_ms": turn.end_ms,
        "text": turn.text,
    }


def turn_from_dict(obj: Mapping) -> Turn:
    return Turn(
        dialogue_id=str(obj["dialogue_id"]),
        turn_index=int(obj["turn_index"]),
        channel=str(obj["channel"]),
        start_ms=int(obj["start_ms"]),
        end_ms=int(obj["end_ms"]),
        text=str(obj["text"]),
    )


def write_turns_jsonl(dialogues: Iterable[Dialogue], path: str | Path) -> None:
    """Write dialogues as one turn object per line.

    A dialogue-level ``audio_uri``, when present, is carried on each of its
    turn lines so the file round-trips the full Dialogue.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for dialogue in dialogues:
            for turn in dialogue.turns:
                record = turn_to_dict(turn)
                if dialogue.audio_uri is not None:
                    record["audio_uri"] = dialogue.audio_uri
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_turns_jsonl(path: str | Path) -> list[Dialogue]:
    """Read a canonical turn file back into dialogues (first-appearance order)."""
    by_dialogue: dict[str, list[Turn]] = {}
    audio_uris: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            turn = turn_from_dict(obj)
            by_dialogue.setdefault(turn.dialogue_id, []).append(turn)
            if obj.get("audio_uri") and turn.dialogue_id not in audio_uris:
                audio_uris[turn.dialogue_id] = obj["audio_uri"]
    return [
        Dialogue(
            dialogue_id=did,
            turns=tuple(order_turns(turns)),
            audio_uri=audio_uris.get(did),
        )
        for did, turns in by_dialogue.items()
    ]


def iter_dialogue_turns(dialogues: Iterable[Dialogue]) -> Iterator[Turn]:
    for dialogue in dialogues:
        yield from dialogue.turns
