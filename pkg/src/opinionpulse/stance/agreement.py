"""Cohen's kappa for two annotators over the same items."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class AgreementReport:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    n: int


def kappa(labels_a: Sequence, labels_b: Sequence) -> AgreementReport:
    """Chance-corrected agreement between two aligned label sequences.

    Expected agreement is the marginal product over labels. When both
    marginals are concentrated on one identical label the statistic is
    0/0; that can only happen with perfect agreement, so it reports 1.0.
    """
    if len(labels_a) != len(labels_b):
        raise ValueError(
            f"label sequences differ in length: {len(labels_a)} vs {len(labels_b)}"
        )
    n = len(labels_a)
    if n == 0:
        raise ValueError("label sequences are empty")
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    marginal_a = Counter(labels_a)
    marginal_b = Counter(labels_b)
    # single integer division keeps small-n cases exact in float
    expected = sum(marginal_a[label] * marginal_b.get(label, 0) for label in marginal_a) / (n * n)
    if expected >= 1.0:
        value = 1.0
    else:
        value = (observed - expected) / (1.0 - expected)
    return AgreementReport(
        kappa=value,
        observed_agreement=observed,
        expected_agreement=expected,
        n=n,
    )
