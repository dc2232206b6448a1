from overlapkit.transcript_ingest import Turn


def make_turn(dialogue_id="d1", turn_index=0, channel="agent", start_ms=0,
              end_ms=1000, text="текст"):
    return Turn(dialogue_id=dialogue_id, turn_index=turn_index, channel=channel,
                start_ms=start_ms, end_ms=end_ms, text=text)
