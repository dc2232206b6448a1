import pytest

from overlapkit.transcript_ingest import Dialogue

from factories import make_turn


@pytest.fixture
def simple_dialogue():
    turns = (
        make_turn(turn_index=0, channel="agent", start_ms=0, end_ms=5000, text="алло"),
        make_turn(turn_index=1, channel="client", start_ms=4000, end_ms=8000, text="подождите"),
        make_turn(turn_index=2, channel="agent", start_ms=9000, end_ms=12000, text="слушаю вас"),
    )
    return Dialogue(dialogue_id="d1", turns=turns)
