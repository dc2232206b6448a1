"""Trainer backend for the overlap-classification wire protocol.

Reads one train_request JSON line from stdin, fine-tunes a pretrained
Russian conversational BERT encoder on (segment_a, segment_b) text pairs,
and writes one train_response JSON line to stdout.
"""

__version__ = "0.1.0"
