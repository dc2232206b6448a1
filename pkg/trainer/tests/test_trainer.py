import json
import os
import sys

import pytest

from overlapkit.synth import default_competitive_lexicon, default_cooperative_lexicon
from overlapkit.wire import call_trainer, validate_train_response

from rubert_trainer.trainer import (
    DEFAULT_CHECKPOINT,
    RequestError,
    parse_request,
    resolve_checkpoint,
    serve_train_request,
)

COMPETITIVE = default_competitive_lexicon()
COOPERATIVE = default_cooperative_lexicon()


def example(i, labeled=True, interrupter_only=False):
    if i % 2 == 0:
        label, word = "competitive", COMPETITIVE[i % len(COMPETITIVE)]
    else:
        label, word = "non_competitive", COOPERATIVE[i % len(COOPERATIVE)]
    record = {
        "segment_a": "" if interrupter_only else "вопрос по тарифу клиента",
        "segment_b": f"{word} оператор",
    }
    if labeled:
        record["label"] = label
    return record


def toy_request(n_train=16, n_val=8, n_eval=8, epochs=1, interrupter_only=False, **hp):
    hyperparameters = {
        "learning_rate": 7e-6,
        "epochs": epochs,
        "batch_size": 16,
        "weight_decay": 0.01,
        "max_length": 128,
        "seed": 0,
    }
    hyperparameters.update(hp)
    return {
        "schema_version": 1,
        "kind": "train_request",
        "hyperparameters": hyperparameters,
        "train": [example(i, interrupter_only=interrupter_only) for i in range(n_train)],
        "validation": [example(i, interrupter_only=interrupter_only) for i in range(n_val)],
        "evaluation": [example(i, labeled=False, interrupter_only=interrupter_only)
                       for i in range(n_eval)],
    }


def serve(request, checkpoint):
    return serve_train_request(json.dumps(request, ensure_ascii=False), checkpoint)


def test_contract_smoke(tiny_checkpoint):
    request = toy_request()
    response = serve(request, tiny_checkpoint)
    validate_train_response(response, n_eval=8, epochs=1)
    assert len(response["per_epoch"]) == 1
    assert all(0.0 <= s <= 1.0 for s in response["eval_scores"])
    print("PASS criterion 12 (contract half): toy request answered with a "
          "contract-valid response (8 eval scores in [0,1], per_epoch length 1)")


def test_deterministic_with_fixed_seed(tiny_checkpoint):
    request = toy_request()
    first = serve(request, tiny_checkpoint)["eval_scores"]
    second = serve(request, tiny_checkpoint)["eval_scores"]
    assert first == pytest.approx(second, abs=1e-6)


def test_hyperparameters_echoed(tiny_checkpoint):
    request = toy_request(epochs=5, batch_size=16, weight_decay=0.01, max_length=128)
    response = serve(request, tiny_checkpoint)
    assert response["hyperparameters"] == request["hyperparameters"]
    assert len(response["per_epoch"]) == 5
    assert [e["epoch"] for e in response["per_epoch"]] == [1, 2, 3, 4, 5]


def test_single_segment_encoding(tiny_checkpoint):
    response = serve(toy_request(interrupter_only=True), tiny_checkpoint)
    validate_train_response(response, n_eval=8, epochs=1)


def test_optional_hyperparameters_recorded(tiny_checkpoint):
    request = toy_request(warmup_steps=1, gradient_clip=1.0)
    response = serve(request, tiny_checkpoint)
    assert "warmup_steps=1" in response["backend_info"]
    assert "gradient_clip=1.0" in response["backend_info"]


def test_malformed_requests_rejected():
    with pytest.raises(RequestError):
        parse_request("{not json")
    with pytest.raises(RequestError):
        parse_request(json.dumps({"schema_version": 2, "kind": "train_request"}))
    with pytest.raises(RequestError):
        parse_request(json.dumps(dict(toy_request(), kind="train_response")))
    with pytest.raises(RequestError):
        parse_request(json.dumps(dict(toy_request(), train=[])))


def test_resolve_checkpoint_precedence(monkeypatch):
    monkeypatch.delenv("RUBERT_MODEL", raising=False)
    assert resolve_checkpoint() == DEFAULT_CHECKPOINT
    monkeypatch.setenv("RUBERT_MODEL", "/some/local/path")
    assert resolve_checkpoint() == "/some/local/path"
    assert resolve_checkpoint("explicit-id") == "explicit-id"


def test_subprocess_wire_round_trip(tiny_checkpoint, monkeypatch):
    monkeypatch.setenv("RUBERT_MODEL", tiny_checkpoint)
    response = call_trainer(
        toy_request(n_train=8, n_val=4, n_eval=4),
        f"{sys.executable} -m rubert_trainer --device cpu",
        timeout=300,
    )
    assert len(response["eval_scores"]) == 4


@pytest.mark.skipif(
    "RUBERT_PRETRAINED" not in os.environ,
    reason="pretrained checkpoint unavailable: this environment has no route "
    "to huggingface.co; set RUBERT_PRETRAINED to a local checkpoint path or "
    "hub id to run",
)
def test_pretrained_reaches_high_auc_on_separable_corpus():
    checkpoint = os.environ["RUBERT_PRETRAINED"]
    request = toy_request(n_train=64, n_val=32, n_eval=8, epochs=1)
    response = serve(request, checkpoint)
    validate_train_response(response, n_eval=8, epochs=1)
    assert response["per_epoch"][-1]["val_roc_auc"] > 0.9
    print("PASS criterion 12 (capacity half): pretrained encoder reaches "
          f"validation ROC AUC {response['per_epoch'][-1]['val_roc_auc']:.3f} > 0.9")
