"""Evaluation harness: accuracy, fraction score, CV, grid search, curves.

The fraction score compares the reject/support ratio of the predictions
with the same ratio in the gold labels: f = r_pred / r_gold where
r = #rejects / #supports. "other" never enters r but does count toward
accuracy. A score of 1.0 means the predicted label distribution matches
the annotated one, which is the property the downstream time series
depend on.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..exceptions import InputError
from .data import LABEL_INDEX, LABELS, LabeledExample
from .model import Hyperparams, StanceModel, predict, train, with_seed

logger = logging.getLogger(__name__)

OBJECTIVES = ("accuracy", "fraction_score")


@dataclass(frozen=True)
class EvaluationReport:
    accuracy: float
    confusion: tuple[tuple[int, ...], ...]  # rows gold, cols predicted, LABELS order
    r_gold: float | None
    r_pred: float | None
    fraction_score: float | None
    n: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "confusion": [list(row) for row in self.confusion],
            "labels": list(LABELS),
            "r_gold": self.r_gold,
            "r_pred": self.r_pred,
            "fraction_score": self.fraction_score,
            "n": self.n,
        }


def _reject_support_ratio(rejects: int, supports: int) -> float | None:
    if supports > 0:
        return rejects / supports
    if rejects > 0:
        return math.inf
    return None


def _fraction_score(r_pred: float | None, r_gold: float | None) -> float | None:
    """r_pred / r_gold with the degenerate ratios pinned down.

    Undefined ratios make the score undefined. Matching extremes (both 0,
    both infinite) count as a perfect 1.0; an extreme on one side only is
    an infinite mismatch or a hard 0.
    """
    if r_pred is None or r_gold is None:
        return None
    if math.isinf(r_gold):
        return 1.0 if math.isinf(r_pred) else 0.0
    if r_gold == 0:
        return 1.0 if r_pred == 0 else math.inf
    if math.isinf(r_pred):
        return math.inf
    return r_pred / r_gold


def report_from_labels(gold: Sequence[str], predicted: Sequence[str]) -> EvaluationReport:
    """Build an EvaluationReport from parallel label sequences."""
    if len(gold) != len(predicted):
        raise ValueError(
            f"label sequences differ in length: {len(gold)} vs {len(predicted)}"
        )
    if not gold:
        raise ValueError("empty evaluation set")
    counts = np.zeros((len(LABELS), len(LABELS)), dtype=np.int64)
    for g, p in zip(gold, predicted):
        if g not in LABEL_INDEX:
            raise ValueError(f"unknown gold label {g!r}")
        if p not in LABEL_INDEX:
            raise ValueError(f"unknown predicted label {p!r}")
        counts[LABEL_INDEX[g], LABEL_INDEX[p]] += 1

    n = len(gold)
    accuracy = int(np.trace(counts)) / n
    s, r = LABEL_INDEX["supports"], LABEL_INDEX["rejects"]
    r_gold = _reject_support_ratio(int(counts[r].sum()), int(counts[s].sum()))
    r_pred = _reject_support_ratio(int(counts[:, r].sum()), int(counts[:, s].sum()))
    return EvaluationReport(
        accuracy=accuracy,
        confusion=tuple(tuple(int(v) for v in row) for row in counts),
        r_gold=r_gold,
        r_pred=r_pred,
        fraction_score=_fraction_score(r_pred, r_gold),
        n=n,
    )


def evaluate(model: StanceModel, test: Sequence[LabeledExample]) -> EvaluationReport:
    if not test:
        raise InputError("empty evaluation set")
    gold = [ex.label for ex in test]
    predicted = [predict(model, ex.text)[0] for ex in test]
    return report_from_labels(gold, predicted)


@dataclass(frozen=True)
class CrossValidationResult:
    fold_reports: tuple[EvaluationReport, ...]
    mean_accuracy: float
    std_accuracy: float
    mean_fraction_score: float | None
    std_fraction_score: float | None

    def to_dict(self) -> dict:
        return {
            "folds": [report.to_dict() for report in self.fold_reports],
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_fraction_score": self.mean_fraction_score,
            "std_fraction_score": self.std_fraction_score,
        }


def _mean_std(values: Sequence[float]) -> tuple[float | None, float | None]:
    finite = [v for v in values if v is not None and math.isfinite(v)]
    if not finite:
        return None, None
    return float(np.mean(finite)), float(np.std(finite))


def cross_validate(
    examples: Sequence[LabeledExample],
    hp: Hyperparams | None = None,
    folds: int = 10,
    seed: int = 42,
) -> CrossValidationResult:
    """Seeded k-fold CV with contiguous folds over one shuffled order.

    Fold sizes differ by at most one; fold i trains with seed hp.seed+i
    so repeated runs are reproducible end to end.
    """
    hp = hp or Hyperparams()
    examples = list(examples)
    n = len(examples)
    if folds < 2:
        raise InputError("folds must be at least 2")
    if n < folds:
        raise InputError(f"{n} examples cannot fill {folds} folds")

    order = np.random.default_rng(seed).permutation(n)
    shuffled = [examples[i] for i in order]
    base, extra = divmod(n, folds)
    reports = []
    start = 0
    for i in range(folds):
        size = base + (1 if i < extra else 0)
        test = shuffled[start : start + size]
        train_set = shuffled[:start] + shuffled[start + size :]
        start += size
        model = train(train_set, with_seed(hp, hp.seed + i))
        reports.append(evaluate(model, test))

    mean_acc, std_acc = _mean_std([rep.accuracy for rep in reports])
    mean_frac, std_frac = _mean_std([rep.fraction_score for rep in reports])
    return CrossValidationResult(
        fold_reports=tuple(reports),
        mean_accuracy=mean_acc,
        std_accuracy=std_acc,
        mean_fraction_score=mean_frac,
        std_fraction_score=std_frac,
    )


@dataclass(frozen=True)
class GridRow:
    hyperparams: Hyperparams
    validation: EvaluationReport
    score: float


@dataclass(frozen=True)
class GridSearchResult:
    best: Hyperparams
    validation: EvaluationReport
    test: EvaluationReport
    table: tuple[GridRow, ...]

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "validation": self.validation.to_dict(),
            "test": self.test.to_dict(),
            "table": [
                {
                    "hyperparams": row.hyperparams.to_dict(),
                    "validation": row.validation.to_dict(),
                    "score": row.score,
                }
                for row in self.table
            ],
        }


def _symmetric_fraction(f: float | None) -> float:
    # min(f, 1/f): over-predicting rejects scores as badly as under-predicting.
    if f is None:
        return -math.inf
    if f == 0:
        return 0.0
    return min(f, 1 / f)


def _objective_score(report: EvaluationReport, objective: str) -> float:
    if objective == "accuracy":
        return report.accuracy
    return _symmetric_fraction(report.fraction_score)


def grid_search(
    examples: Sequence[LabeledExample],
    grid: Sequence[Hyperparams],
    objective: str = "fraction_score",
    seed: int = 42,
) -> GridSearchResult:
    """Select hyperparameters on an 80/10/10 split of one shuffled order.

    Every config trains on the same 80% and is scored on the 10%
    validation slice; only the winner is evaluated on the final 10%.
    Ties go to the smaller dim, then fewer epochs, then smaller lr.
    """
    grid = list(grid)
    if not grid:
        raise InputError("empty hyperparameter grid")
    if objective not in OBJECTIVES:
        raise InputError(f"unknown objective {objective!r}, expected one of {OBJECTIVES}")

    examples = list(examples)
    n = len(examples)
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [examples[i] for i in order]
    i1, i2 = round(0.8 * n), round(0.9 * n)
    train_set, val_set, test_set = shuffled[:i1], shuffled[i1:i2], shuffled[i2:]
    if not train_set or not val_set or not test_set:
        raise InputError(f"{n} examples are too few for an 80/10/10 split")

    rows = []
    best_key = None
    best_hp = None
    for hp in grid:
        model = train(train_set, hp)
        report = evaluate(model, val_set)
        score = _objective_score(report, objective)
        rows.append(GridRow(hyperparams=hp, validation=report, score=score))
        key = (score, -hp.dim, -hp.epochs, -hp.lr)
        if best_key is None or key > best_key:
            best_key = key
            best_hp = hp
        logger.info(
            "grid config dim=%d epochs=%d lr=%g -> %s=%.4f",
            hp.dim, hp.epochs, hp.lr, objective, score,
        )

    # Retraining the winner is bit-identical to the run scored above, so
    # holding every candidate model in memory buys nothing.
    best_model = train(train_set, best_hp)
    best_row = next(row for row in rows if row.hyperparams == best_hp)
    return GridSearchResult(
        best=best_hp,
        validation=best_row.validation,
        test=evaluate(best_model, test_set),
        table=tuple(rows),
    )


@dataclass(frozen=True)
class LearningCurvePoint:
    size: int
    mean_accuracy: float
    mean_fraction_score: float | None

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "mean_accuracy": self.mean_accuracy,
            "mean_fraction_score": self.mean_fraction_score,
        }


def learning_curve(
    examples: Sequence[LabeledExample],
    hp: Hyperparams | None = None,
    train_sizes: Sequence[int] = (),
    repeats: int = 1,
    seed: int = 42,
    test_size: int | None = None,
) -> list[LearningCurvePoint]:
    """Accuracy and fraction score as functions of training-set size.

    One seeded shuffle fixes a held-out test tail shared by every size.
    Repeat r permutes the remaining pool with seed+1+r and trains on
    nested prefixes (each size extends the previous one) with model seed
    hp.seed+r; reported values are means over repeats.
    """
    hp = hp or Hyperparams()
    examples = list(examples)
    n = len(examples)
    sizes = list(train_sizes)
    if not sizes:
        raise InputError("train_sizes is empty")
    if any(s < 1 for s in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError("train_sizes must be positive and strictly increasing")
    if repeats < 1:
        raise InputError("repeats must be at least 1")
    if test_size is None:
        test_size = n - max(sizes)
    if test_size < 1:
        raise InputError("no examples left for the test set")
    if max(sizes) + test_size > n:
        raise InputError(
            f"train size {max(sizes)} plus test size {test_size} exceeds {n} examples"
        )

    order = np.random.default_rng(seed).permutation(n)
    shuffled = [examples[i] for i in order]
    test_set = shuffled[n - test_size :]
    pool = shuffled[: n - test_size]

    acc_sums = {size: 0.0 for size in sizes}
    frac_values: dict[int, list[float]] = {size: [] for size in sizes}
    for r in range(repeats):
        rep_order = np.random.default_rng(seed + 1 + r).permutation(len(pool))
        rep_pool = [pool[i] for i in rep_order]
        for size in sizes:
            model = train(rep_pool[:size], with_seed(hp, hp.seed + r))
            report = evaluate(model, test_set)
            acc_sums[size] += report.accuracy
            if report.fraction_score is not None and math.isfinite(report.fraction_score):
                frac_values[size].append(report.fraction_score)

    points = []
    for size in sizes:
        fracs = frac_values[size]
        points.append(
            LearningCurvePoint(
                size=size,
                mean_accuracy=acc_sums[size] / repeats,
                mean_fraction_score=float(np.mean(fracs)) if fracs else None,
            )
        )
    return points
