import pytest
import torch
from transformers import BertConfig, BertForSequenceClassification, BertTokenizer

from overlapkit.synth import (
    default_competitive_lexicon,
    default_cooperative_lexicon,
    default_filler_lexicon,
)

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A minimal random-weight BERT checkpoint with a vocabulary covering the
    synthetic lexicons, for contract and determinism tests that must run
    without network access."""
    path = tmp_path_factory.mktemp("tiny-bert")
    words = SPECIALS + sorted(
        set(default_competitive_lexicon())
        | set(default_cooperative_lexicon())
        | set(default_filler_lexicon())
    )
    (path / "vocab.txt").write_text("\n".join(words) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(path / "vocab.txt"))
    tokenizer.save_pretrained(str(path))
    config = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
        num_labels=2,
    )
    torch.manual_seed(0)
    BertForSequenceClassification(config).save_pretrained(str(path))
    return str(path)
