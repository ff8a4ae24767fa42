"""Reconstruction decoders, the joint objective, and anomaly scoring.

The fused representation is decoded back into an adjacency estimate (inner
products squashed through a sigmoid) and an attribute estimate (one dense
relu layer).  Nodes are scored by how badly their own row reconstructs,
mixing the structure and attribute errors with the same balance parameter
the objective uses; ranking is by descending score.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autodiff import Tensor, frobenius_sq, relu, scale, sigmoid

SCORES_HEADER = "node_id,score,structure_err,attr_err,rank"


@dataclass(frozen=True)
class LossConfig:
    """Balance between the structure and attribute terms (lam) and the
    weight of the modularity-autoencoder term (gamma)."""

    lam: float = 0.5
    gamma: float = 0.1

    def validate(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lam}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


def structure_decode(fused: Tensor) -> Tensor:
    """Adjacency estimate: sigmoid of all pairwise inner products."""
    return sigmoid(fused @ fused.T)


def attribute_decode(fused: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Attribute estimate: relu(fused @ weight + bias), bias broadcast
    across nodes."""
    return relu(fused @ weight + bias)


def joint_loss(
    adjacency: Tensor,
    structure_recon: Tensor,
    attributes: Tensor,
    attribute_recon: Tensor,
    cfg: LossConfig,
) -> Tensor:
    """(1 - lam) * ||A - A_rec||_F^2 + lam * ||X - X_rec||_F^2."""
    cfg.validate()
    if adjacency.shape != structure_recon.shape:
        raise ValueError(
            f"structure reconstruction shape {structure_recon.shape} does not "
            f"match adjacency {adjacency.shape}"
        )
    if attributes.shape != attribute_recon.shape:
        raise ValueError(
            f"attribute reconstruction shape {attribute_recon.shape} does not "
            f"match attributes {attributes.shape}"
        )
    structure_term = scale(frobenius_sq(adjacency - structure_recon), 1.0 - cfg.lam)
    attribute_term = scale(frobenius_sq(attributes - attribute_recon), cfg.lam)
    return structure_term + attribute_term


@dataclass
class AnomalyReport:
    """Per-node scores with the ranking and both error components."""

    scores: np.ndarray
    ranking: np.ndarray  # node ids, highest score first; ties by ascending id
    structure_err: np.ndarray
    attr_err: np.ndarray

    def write_csv(self, path) -> None:
        lines = [SCORES_HEADER]
        for rank, node in enumerate(self.ranking, start=1):
            lines.append(
                f"{node},{float(self.scores[node])!r},"
                f"{float(self.structure_err[node])!r},"
                f"{float(self.attr_err[node])!r},{rank}"
            )
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(line + "\n" for line in lines))

    @classmethod
    def read_csv(cls, path) -> "AnomalyReport":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != SCORES_HEADER:
            raise ValueError(f"{path}: expected header '{SCORES_HEADER}'")
        rows = [line.split(",") for line in lines[1:] if line.strip()]
        n = len(rows)
        scores = np.empty(n)
        structure_err = np.empty(n)
        attr_err = np.empty(n)
        for row in rows:
            if len(row) != 5:
                raise ValueError(f"{path}: malformed row {row!r}")
            node = int(row[0])
            if not 0 <= node < n:
                raise ValueError(f"{path}: node id out of range: {node}")
            scores[node] = float(row[1])
            structure_err[node] = float(row[2])
            attr_err[node] = float(row[3])
        return cls(
            scores=scores,
            ranking=rank_nodes(scores),
            structure_err=structure_err,
            attr_err=attr_err,
        )


def node_scores(
    adjacency: np.ndarray,
    structure_recon: np.ndarray,
    attributes: np.ndarray,
    attribute_recon: np.ndarray,
    cfg: LossConfig,
) -> AnomalyReport:
    """Score every node by its own reconstruction error.

    score(i) = (1 - lam) * ||A_i - A_rec_i||_2 + lam * ||X_i - X_rec_i||_2,
    using each node's adjacency row and attribute row.  Larger means more
    anomalous.
    """
    cfg.validate()
    structure_err = np.linalg.norm(adjacency - structure_recon, axis=1)
    attr_err = np.linalg.norm(attributes - attribute_recon, axis=1)
    scores = (1.0 - cfg.lam) * structure_err + cfg.lam * attr_err
    return AnomalyReport(
        scores=scores,
        ranking=rank_nodes(scores),
        structure_err=structure_err,
        attr_err=attr_err,
    )


def rank_nodes(scores: np.ndarray) -> np.ndarray:
    """Node ids sorted by descending score; ties broken by ascending id."""
    scores = np.asarray(scores, dtype=np.float64)
    if np.isnan(scores).any():
        raise ValueError("NaN anomaly score (upstream bug)")
    return np.lexsort((np.arange(scores.size), -scores))
