"""Ranking quality metrics for labeled graphs: exact AUC-ROC and precision@k.

AUC is computed by the midrank formula, which equals brute-force counting of
correctly ordered (anomaly, normal) pairs with ties worth one half; no
trapezoidal approximation is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoders import rank_nodes
from .graph import ANOMALY_KINDS


def auc_roc(scores, labels) -> float:
    """Probability that a random anomaly outscores a random normal node."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError(
            f"scores and labels must be equal-length vectors, got "
            f"{scores.shape} and {labels.shape}"
        )
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: need at least one anomalous and one normal label")

    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # midrank, 1-based
        i = j + 1
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def precision_at_k(ranking, labels, k: int) -> float:
    """Fraction of the k highest-ranked nodes that are labeled anomalous."""
    ranking = np.asarray(ranking)
    labels = np.asarray(labels).astype(np.int64)
    if not 1 <= k <= ranking.size:
        raise ValueError(f"k out of range: {k} (n={ranking.size})")
    return float(labels[ranking[:k]].mean())


@dataclass
class EvalResult:
    auc_roc: float
    precision_at_k: dict[int, float]
    per_kind_top_k: dict[int, dict[str, int]]

    def to_dict(self) -> dict:
        return {
            "auc_roc": self.auc_roc,
            "precision_at_k": {str(k): v for k, v in self.precision_at_k.items()},
            "per_kind_top_k": {
                str(k): counts for k, counts in self.per_kind_top_k.items()
            },
        }


def evaluate(scores, kinds, ks) -> EvalResult:
    """All metrics for one score vector against per-node anomaly kinds."""
    kinds = np.asarray(kinds)
    flags = (kinds != "normal").astype(np.int64)
    ranking = rank_nodes(scores)
    precision = {}
    per_kind = {}
    for k in ks:
        precision[k] = precision_at_k(ranking, flags, k)
        top = kinds[ranking[:k]]
        per_kind[k] = {kind: int((top == kind).sum()) for kind in ANOMALY_KINDS}
    return EvalResult(
        auc_roc=auc_roc(scores, flags),
        precision_at_k=precision,
        per_kind_top_k=per_kind,
    )
