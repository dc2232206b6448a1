"""Toolkit for turn-taking analytics on dual-channel call transcripts.

Pipeline: ingest ASR transcript tables -> classify speaker switches ->
filter overlap candidates -> label them -> build train/test datasets ->
train/evaluate interruption classifiers.
"""

__version__ = "0.1.0"
