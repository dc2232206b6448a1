"""Binary evaluation metrics and the cross-validation harness.

Positive class (label 1) = competitive.  ROC AUC is the Mann-Whitney
pairwise statistic with ties counted 0.5.  Threshold search maximizes a
pluggable criterion over midpoints of adjacent distinct scores plus the
0.0 / 1.0 sentinels, with decision rule "predict competitive iff
score >= threshold".  Balanced accuracy is assigned from macro recall,
so the two are bit-equal by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence


class UndefinedMetricError(ValueError):
    """Raised when a metric needs both classes but got only one."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    roc_auc: float
    best_threshold: float
    recall_macro: float
    precision_macro: float
    balanced_accuracy: float
    f1_macro: float
    zero_division_hit: bool = False

    def to_dict(self) -> dict:
        return {
            "roc_auc_binary": self.roc_auc,
            "best_threshold": self.best_threshold,
            "recall_macro": self.recall_macro,
            "precision_macro": self.precision_macro,
            "balanced_accuracy": self.balanced_accuracy,
            "f1_macro": self.f1_macro,
            "zero_division_hit": self.zero_division_hit,
        }


def _check_both_classes(labels: Sequence[int]) -> None:
    present = set(labels)
    if present != {0, 1}:
        raise UndefinedMetricError(f"need both classes, got labels {sorted(present)}")


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney ROC AUC: fraction of (positive, negative) pairs ranked
    correctly, ties counted 0.5.  Computed via average ranks, O(n log n)."""
    if len(scores) != len(labels):
        raise ValueError("scores and labels must have equal length")
    _check_both_classes(labels)
    n = len(scores)
    order = sorted(range(n), key=lambda i: scores[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        avg_rank = (i + j) / 2 + 1  # 1-based average rank of the tie group
        for k in range(i, j + 1):
            ranks[order[k]] = avg_rank
        i = j + 1
    n_pos = sum(labels)
    n_neg = n - n_pos
    rank_sum_pos = sum(r for r, y in zip(ranks, labels) if y == 1)
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def confusion(
    scores: Sequence[float], labels: Sequence[int], threshold: float
) -> ConfusionMatrix:
    """Counts under the rule: predict competitive iff score >= threshold."""
    if len(scores) != len(labels):
        raise ValueError("scores and labels must have equal length")
    tp = fp = fn = tn = 0
    for s, y in zip(scores, labels):
        pred = 1 if s >= threshold else 0
        if pred == 1 and y == 1:
            tp += 1
        elif pred == 1 and y == 0:
            fp += 1
        elif pred == 0 and y == 1:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _safe_div(num: float, den: float) -> tuple[float, bool]:
    if den == 0:
        return 0.0, True
    return num / den, False


def macro_metrics(cm: ConfusionMatrix) -> dict:
    """Unweighted two-class macro metrics; 0/0 is defined as 0 and flagged.

    balanced_accuracy is the mean of the two class recalls, i.e. it is the
    same value object as recall_macro.
    """
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    zero_hit = False
    # positive class = competitive (1), negative = non-competitive (0)
    prec_pos, z1 = _safe_div(cm.tp, cm.tp + cm.fp)
    rec_pos, z2 = _safe_div(cm.tp, cm.tp + cm.fn)
    prec_neg, z3 = _safe_div(cm.tn, cm.tn + cm.fn)
    rec_neg, z4 = _safe_div(cm.tn, cm.tn + cm.fp)
    f1_pos, z5 = _safe_div(2 * prec_pos * rec_pos, prec_pos + rec_pos)
    f1_neg, z6 = _safe_div(2 * prec_neg * rec_neg, prec_neg + rec_neg)
    zero_hit = any((z1, z2, z3, z4, z5, z6))
    recall_macro = (rec_pos + rec_neg) / 2
    return {
        "recall_macro": recall_macro,
        "precision_macro": (prec_pos + prec_neg) / 2,
        "balanced_accuracy": recall_macro,
        "f1_macro": (f1_pos + f1_neg) / 2,
        "zero_division_hit": zero_hit,
    }


def _criterion_at(
    scores: Sequence[float], labels: Sequence[int], threshold: float, criterion: str
) -> float:
    return macro_metrics(confusion(scores, labels, threshold))[criterion]


def candidate_thresholds(scores: Sequence[float]) -> list[float]:
    """Midpoints of adjacent distinct sorted scores, plus sentinels 0 and 1."""
    distinct = sorted(set(scores))
    candidates = {0.0, 1.0}
    for a, b in zip(distinct, distinct[1:]):
        candidates.add((a + b) / 2)
    return sorted(candidates)


def best_threshold(
    scores: Sequence[float],
    labels: Sequence[int],
    criterion: str = "f1_macro",
) -> tuple[float, float]:
    """Return (threshold, criterion value) maximizing the criterion; ties
    break toward the smaller threshold."""
    _check_both_classes(labels)
    if criterion not in ("f1_macro", "balanced_accuracy"):
        raise ValueError(f"unsupported criterion: {criterion!r}")
    best_t, best_v = None, None
    for t in candidate_thresholds(scores):
        v = _criterion_at(scores, labels, t, criterion)
        if best_v is None or v > best_v:
            best_t, best_v = t, v
    return best_t, best_v


def metrics_report(
    scores: Sequence[float],
    labels: Sequence[int],
    threshold: float | None = None,
    criterion: str = "f1_macro",
) -> MetricsReport:
    """Full metric row for one evaluation run.  When ``threshold`` is None
    the best threshold under ``criterion`` is searched on these scores."""
    auc = roc_auc(scores, labels)
    if threshold is None:
        threshold, _ = best_threshold(scores, labels, criterion)
    macros = macro_metrics(confusion(scores, labels, threshold))
    return MetricsReport(
        roc_auc=auc,
        best_threshold=threshold,
        recall_macro=macros["recall_macro"],
        precision_macro=macros["precision_macro"],
        balanced_accuracy=macros["balanced_accuracy"],
        f1_macro=macros["f1_macro"],
        zero_division_hit=macros["zero_division_hit"],
    )


# --- cross-validation --------------------------------------------------------

# A scoring backend trains on `train`, may use `validation` for per-epoch
# diagnostics, and returns one competitive-class probability per
# `evaluation` example.
ScoringBackend = Callable[[list, list, list], list[float]]


@dataclass
class CVReport:
    fold_reports: dict[int, MetricsReport]
    pooled_threshold: float
    pooled_criterion_value: float
    test_report: MetricsReport
    criterion: str

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "fold_reports": {
                str(k): v.to_dict() for k, v in sorted(self.fold_reports.items())
            },
            "pooled_threshold": self.pooled_threshold,
            "pooled_criterion_value": self.pooled_criterion_value,
            "test_report": self.test_report.to_dict(),
        }


class BackendError(RuntimeError):
    """A scoring backend failed; carries the fold it failed on."""

    def __init__(self, fold: int | str, cause: Exception):
        self.fold = fold
        self.cause = cause
        super().__init__(f"backend failed on fold {fold}: {cause}")


def _label_int(label: str) -> int:
    return 1 if label == "competitive" else 0


def cross_validate(
    folded,
    backend: ScoringBackend,
    criterion: str = "f1_macro",
) -> CVReport:
    """Leave-one-fold-out cross-validation over the non-test folds, then a
    final train-on-all-non-test run scored on the test fold.

    The test-fold metrics use the threshold selected on the pooled
    validation scores.  Aggregation is deterministic and independent of
    fold execution order.
    """
    if folded.n_folds < 2:
        raise ValueError("need at least 2 folds")
    by_fold: dict[int, list] = {f: [] for f in range(folded.n_folds)}
    for item in folded.inputs:
        by_fold[item.fold].append(item)
    test_fold = folded.test_fold
    val_folds = [f for f in range(folded.n_folds) if f != test_fold]

    fold_reports: dict[int, MetricsReport] = {}
    pooled_scores: list[float] = []
    pooled_labels: list[int] = []
    for v in val_folds:
        train = [x for f in val_folds if f != v for x in by_fold[f]]
        evaluation = by_fold[v]
        try:
            scores = backend(train, evaluation, evaluation)
        except Exception as exc:  # propagate with fold id
            raise BackendError(v, exc) from exc
        labels = [_label_int(x.label) for x in evaluation]
        fold_reports[v] = metrics_report(scores, labels, criterion=criterion)
        pooled_scores.extend(scores)
        pooled_labels.extend(labels)

    threshold, criterion_value = best_threshold(pooled_scores, pooled_labels, criterion)

    train_all = [x for f in val_folds for x in by_fold[f]]
    evaluation = by_fold[test_fold]
    try:
        test_scores = backend(train_all, evaluation, evaluation)
    except Exception as exc:
        raise BackendError("test", exc) from exc
    test_labels = [_label_int(x.label) for x in evaluation]
    test_report = metrics_report(
        test_scores, test_labels, threshold=threshold, criterion=criterion
    )
    return CVReport(
        fold_reports=fold_reports,
        pooled_threshold=threshold,
        pooled_criterion_value=criterion_value,
        test_report=test_report,
        criterion=criterion,
    )
