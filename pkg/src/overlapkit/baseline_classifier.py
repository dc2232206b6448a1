"""Dependency-light text classifier: bag-of-n-grams tf-idf features plus
L2-regularized logistic regression trained by full-batch gradient descent.

The two input segments are featurized separately with a segment-role prefix
("a:" for the interrupted speaker, "b:" for the interrupter), so the same
token carries different features depending on who said it.  Training is
deterministic: full-batch descent from zero weights, fixed feature order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MODEL_FORMAT_VERSION = 1

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-letter/non-digit runs (Unicode-aware)."""
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens: Sequence[str], lo: int, hi: int) -> Iterable[str]:
    for n in range(lo, hi + 1):
        for i in range(len(tokens) - n + 1):
            yield " ".join(tokens[i : i + n])


def _doc_ngrams(segment_a: str, segment_b: str, lo: int, hi: int) -> list[str]:
    grams = ["a:" + g for g in _ngrams(tokenize(segment_a), lo, hi)]
    grams += ["b:" + g for g in _ngrams(tokenize(segment_b), lo, hi)]
    return grams


@dataclass
class Vocabulary:
    index: dict[str, int]
    doc_freq: list[int]  # per feature index
    n_documents: int
    ngram_range: tuple[int, int]
    min_df: int

    @property
    def size(self) -> int:
        return len(self.index)


def fit_vocabulary(
    corpus: Sequence[tuple[str, str]],
    ngram_range: tuple[int, int] = (1, 2),
    min_df: int = 2,
) -> Vocabulary:
    """Fit the n-gram vocabulary; features below min_df are dropped and
    indices are assigned in lexicographic order (deterministic)."""
    if not corpus:
        raise ValueError("empty corpus")
    lo, hi = ngram_range
    df: dict[str, int] = {}
    for segment_a, segment_b in corpus:
        for gram in set(_doc_ngrams(segment_a, segment_b, lo, hi)):
            df[gram] = df.get(gram, 0) + 1
    kept = sorted(g for g, c in df.items() if c >= min_df)
    index = {g: i for i, g in enumerate(kept)}
    return Vocabulary(
        index=index,
        doc_freq=[df[g] for g in kept],
        n_documents=len(corpus),
        ngram_range=(lo, hi),
        min_df=min_df,
    )


def featurize(segment_a: str, segment_b: str, vocab: Vocabulary) -> np.ndarray:
    """Tf-idf feature vector: term counts weighted by smoothed idf
    ln((1+N)/(1+df)) + 1, then L2-normalized.  OOV n-grams are ignored."""
    lo, hi = vocab.ngram_range
    vec = np.zeros(vocab.size)
    for gram in _doc_ngrams(segment_a, segment_b, lo, hi):
        i = vocab.index.get(gram)
        if i is not None:
            vec[i] += 1.0
    if not vec.any():
        return vec
    n = vocab.n_documents
    idf = np.log((1 + n) / (1 + np.asarray(vocab.doc_freq, dtype=float))) + 1.0
    vec *= idf
    return vec / np.linalg.norm(vec)


def featurize_matrix(
    corpus: Sequence[tuple[str, str]], vocab: Vocabulary
) -> np.ndarray:
    return np.stack([featurize(a, b, vocab) for a, b in corpus]) if corpus else np.zeros((0, vocab.size))


@dataclass
class LogRegModel:
    weights: np.ndarray  # length V+1, last entry is the bias
    l2_lambda: float
    training_log: list[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return len(self.weights) - 1


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logreg_loss_and_grad(
    weights: np.ndarray, X: np.ndarray, y: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood plus L2 penalty on the non-bias weights,
    and its gradient."""
    n = len(y)
    Xb = np.hstack([X, np.ones((n, 1))])
    z = Xb @ weights
    p = _sigmoid(z)
    eps = 1e-12
    nll = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    penalty = l2_lambda * np.sum(weights[:-1] ** 2)
    grad = Xb.T @ (p - y) / n
    grad[:-1] += 2 * l2_lambda * weights[:-1]
    return nll + penalty, grad


def train_logreg(
    X: np.ndarray,
    y: np.ndarray,
    l2_lambda: float = 1e-4,
    learning_rate: float = 0.1,
    max_epochs: int = 200,
    tol: float = 1e-7,
) -> LogRegModel:
    """Full-batch gradient descent from zero weights; stops at max_epochs or
    when the per-epoch loss improvement falls below tol.  Label 1 =
    competitive."""
    y = np.asarray(y, dtype=float)
    classes = set(np.unique(y))
    if not classes >= {0.0, 1.0}:
        raise ValueError(f"need at least one example of each class, got {sorted(classes)}")
    weights = np.zeros(X.shape[1] + 1)
    log: list[float] = []
    prev_loss = None
    for _ in range(max_epochs):
        loss, grad = logreg_loss_and_grad(weights, X, y, l2_lambda)
        log.append(loss)
        if prev_loss is not None and prev_loss - loss < tol:
            break
        weights = weights - learning_rate * grad
        prev_loss = loss
    return LogRegModel(weights=weights, l2_lambda=l2_lambda, training_log=log)


def predict_proba(model: LogRegModel, x: np.ndarray) -> float:
    """P(competitive) = sigmoid of the affine score."""
    if len(x) != model.n_features:
        raise ValueError(
            f"feature vector length {len(x)} != model features {model.n_features}"
        )
    z = float(np.dot(model.weights[:-1], x) + model.weights[-1])
    return float(_sigmoid(np.array([z]))[0])


def predict_proba_matrix(model: LogRegModel, X: np.ndarray) -> np.ndarray:
    if X.shape[1] != model.n_features:
        raise ValueError(
            f"feature matrix width {X.shape[1]} != model features {model.n_features}"
        )
    return _sigmoid(X @ model.weights[:-1] + model.weights[-1])


# --- persistence (versioned JSON with embedded vocabulary) -------------------

def save_model(model: LogRegModel, vocab: Vocabulary, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "l2_lambda": model.l2_lambda,
        "weights": model.weights.tolist(),
        "training_log": model.training_log,
        "vocabulary": {
            "ngrams": list(vocab.index.keys()),
            "doc_freq": vocab.doc_freq,
            "n_documents": vocab.n_documents,
            "ngram_range": list(vocab.ngram_range),
            "min_df": vocab.min_df,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)


def load_model(path: str | Path) -> tuple[LogRegModel, Vocabulary]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format: {payload.get('format_version')!r}")
    v = payload["vocabulary"]
    vocab = Vocabulary(
        index={g: i for i, g in enumerate(v["ngrams"])},
        doc_freq=list(v["doc_freq"]),
        n_documents=int(v["n_documents"]),
        ngram_range=tuple(v["ngram_range"]),
        min_df=int(v["min_df"]),
    )
    model = LogRegModel(
        weights=np.asarray(payload["weights"], dtype=float),
        l2_lambda=float(payload["l2_lambda"]),
        training_log=list(payload["training_log"]),
    )
    return model, vocab


def train_on_inputs(
    inputs: Sequence,
    ngram_range: tuple[int, int] = (1, 2),
    min_df: int = 2,
    l2_lambda: float = 1e-4,
    learning_rate: float = 0.1,
    max_epochs: int = 200,
    tol: float = 1e-7,
) -> tuple[LogRegModel, Vocabulary]:
    """Fit vocabulary + model on a sequence of ModelInput-like records."""
    corpus = [(x.segment_a, x.segment_b) for x in inputs]
    vocab = fit_vocabulary(corpus, ngram_range=ngram_range, min_df=min_df)
    X = featurize_matrix(corpus, vocab)
    y = np.array([1.0 if x.label == "competitive" else 0.0 for x in inputs])
    model = train_logreg(
        X, y, l2_lambda=l2_lambda, learning_rate=learning_rate,
        max_epochs=max_epochs, tol=tol,
    )
    return model, vocab


def score_inputs(inputs: Sequence, model: LogRegModel, vocab: Vocabulary) -> list[float]:
    if not inputs:
        return []
    X = featurize_matrix([(x.segment_a, x.segment_b) for x in inputs], vocab)
    return [float(p) for p in predict_proba_matrix(model, X)]
