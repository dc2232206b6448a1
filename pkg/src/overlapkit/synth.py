"""Synthetic dual-channel corpus generator with hidden ground-truth labels.

Stands in for private call data: dialogues of filler turns where a
configurable fraction of speaker switches are successful overlaps of at
least one second.  Competitive overlaps plant tokens from a competitive
marker lexicon in the interrupter's turn, cooperative ones plant
backchannel-style tokens; a noise rate swaps tokens at random across the
two lexicons.  Output is deterministic per seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .overlap_engine import compute_event_id
from .transcript_ingest import Dialogue, Turn

GROUND_TRUTH_ANNOTATOR = "ground_truth"
_FIXED_TIMESTAMP = "1970-01-01T00:00:00Z"


def _load_lexicon(name: str) -> list[str]:
    text = resources.files("overlapkit.data").joinpath(name).read_text("utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def default_competitive_lexicon() -> list[str]:
    return _load_lexicon("competitive_lexicon.txt")


def default_cooperative_lexicon() -> list[str]:
    return _load_lexicon("cooperative_lexicon.txt")


def default_filler_lexicon() -> list[str]:
    return _load_lexicon("filler_lexicon.txt")


@dataclass
class SynthSpec:
    n_dialogues: int = 50
    turns_min: int = 8
    turns_max: int = 20
    overlap_rate: float = 0.3
    noise_rate: float = 0.0
    seed: int = 0
    competitive_lexicon: list[str] = field(default_factory=default_competitive_lexicon)
    cooperative_lexicon: list[str] = field(default_factory=default_cooperative_lexicon)
    filler_lexicon: list[str] = field(default_factory=default_filler_lexicon)

    def __post_init__(self):
        if not 0.0 <= self.overlap_rate <= 1.0:
            raise ValueError("overlap_rate must be in [0,1]")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ValueError("noise_rate must be in [0,1]")
        if set(self.competitive_lexicon) & set(self.cooperative_lexicon):
            raise ValueError("competitive and cooperative lexicons must be disjoint")


def _filler_text(rng: random.Random, fillers: list[str], n_min=3, n_max=6) -> list[str]:
    return [rng.choice(fillers) for _ in range(rng.randint(n_min, n_max))]


def generate_synthetic_corpus(spec: SynthSpec) -> tuple[list[Dialogue], list[dict]]:
    """Generate dialogues plus the hidden ground-truth label records.

    Label records use the annotation label-log shape
    {event_id, label, annotator_id, labeled_at} and cover exactly the
    switches constructed as qualifying overlaps (successful, >= 1 s).
    """
    rng = random.Random(spec.seed)
    dialogues: list[Dialogue] = []
    labels: list[dict] = []
    marker_pool = spec.competitive_lexicon + spec.cooperative_lexicon

    for d in range(spec.n_dialogues):
        dialogue_id = f"synth-{spec.seed}-{d:05d}"
        n_turns = rng.randint(spec.turns_min, spec.turns_max)
        turns: list[Turn] = []
        channel = rng.choice(("agent", "client"))
        start = rng.randint(0, 2000)
        end = start + rng.randint(2600, 5000)
        turns.append(Turn(dialogue_id, 0, channel, start, end, " ".join(_filler_text(rng, spec.filler_lexicon))))

        for k1 in range(1, n_turns):
            prev = turns[-1]
            r = rng.random()
            same_channel = rng.random() < 0.05
            next_channel = prev.channel if same_channel else ("client" if prev.channel == "agent" else "agent")
            # overlap starts are capped so every turn starts strictly after
            # the previous one; ingest ordering then matches generation order
            max_overlap = prev.end_ms - prev.start_ms - 100

            if not same_channel and r < spec.overlap_rate and max_overlap >= 1000:
                # qualifying overlap: successful, >= 1 s, carries a marker
                label = "competitive" if rng.random() < 0.5 else "non_competitive"
                overlap_ms = rng.randint(1000, min(2500, max_overlap))
                start = prev.end_ms - overlap_ms
                end = prev.end_ms + rng.randint(1000, 3000)  # outlasts turn K
                lexicon = (
                    spec.competitive_lexicon
                    if label == "competitive"
                    else spec.cooperative_lexicon
                )
                tokens = _filler_text(rng, spec.filler_lexicon, 2, 4)
                for _ in range(rng.randint(1, 2)):
                    tokens.insert(rng.randint(0, len(tokens)), rng.choice(lexicon))
                tokens = [
                    rng.choice(marker_pool) if rng.random() < spec.noise_rate else t
                    for t in tokens
                ]
                text = " ".join(tokens)
                labels.append(
                    {
                        "event_id": compute_event_id(dialogue_id, prev.turn_index),
                        "label": label,
                        "annotator_id": GROUND_TRUTH_ANNOTATOR,
                        "labeled_at": _FIXED_TIMESTAMP,
                    }
                )
            elif not same_channel and r < spec.overlap_rate * 1.3 and max_overlap >= 200:
                # decoy for the filters: unsuccessful or too-short overlap
                text = " ".join(_filler_text(rng, spec.filler_lexicon))
                if rng.random() < 0.5 and max_overlap >= 1400:
                    overlap_ms = rng.randint(1400, min(2000, max_overlap))
                    start = prev.end_ms - overlap_ms
                    end = start + rng.randint(1200, overlap_ms)  # ends within turn K
                else:
                    overlap_ms = rng.randint(200, min(900, max_overlap))
                    start = prev.end_ms - overlap_ms
                    end = prev.end_ms + rng.randint(1000, 2500)
            else:
                text = " ".join(_filler_text(rng, spec.filler_lexicon))
                start = prev.end_ms + rng.randint(200, 1500)
                end = start + rng.randint(2600, 5000)

            turns.append(Turn(dialogue_id, k1, next_channel, start, end, text))

        dialogues.append(Dialogue(dialogue_id=dialogue_id, turns=tuple(turns)))

    return dialogues, labels


def write_corpus_csv(dialogues: list[Dialogue], path: str | Path) -> None:
    """Write the generated corpus in the default ingest CSV schema."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dialogue_id", "channel", "start_ms", "end_ms", "text"])
        for dialogue in dialogues:
            for t in dialogue.turns:
                writer.writerow([t.dialogue_id, t.channel, t.start_ms, t.end_ms, t.text])
