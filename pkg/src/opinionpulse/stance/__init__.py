"""Stance case-study engine: annotation, agreement, classifier, evaluation."""

from .agreement import AgreementReport, kappa
from .data import LABELS, LabeledExample, prepare_annotation_set, read_labeled_tsv, write_labeled_tsv
from .model import Hyperparams, StanceModel, grid_hyperparams, label_corpus, load_model, predict, save_model, train
from .evaluation import (
    CrossValidationResult,
    EvaluationReport,
    GridSearchResult,
    LearningCurvePoint,
    cross_validate,
    evaluate,
    grid_search,
    learning_curve,
    report_from_labels,
)

__all__ = [
    "AgreementReport",
    "kappa",
    "LABELS",
    "LabeledExample",
    "prepare_annotation_set",
    "read_labeled_tsv",
    "write_labeled_tsv",
    "Hyperparams",
    "StanceModel",
    "grid_hyperparams",
    "label_corpus",
    "load_model",
    "predict",
    "save_model",
    "train",
    "CrossValidationResult",
    "EvaluationReport",
    "GridSearchResult",
    "LearningCurvePoint",
    "cross_validate",
    "evaluate",
    "grid_search",
    "learning_curve",
    "report_from_labels",
]
