"""Multi-view attributed graph model, adjacency normalization and modularity.

A graph is a symmetric unweighted adjacency matrix plus one attribute matrix
per view, optionally carrying a per-node anomaly label.  All arrays are dense
float64; at desk scale (a few thousand nodes) dense wins on simplicity and is
what the downstream decoders produce anyway.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

ANOMALY_KINDS = ("normal", "global", "structural", "community")


@dataclass
class MultiViewGraph:
    """n nodes, symmetric binary adjacency, K attribute views, optional labels.

    Treated as immutable after construction: operations that would change a
    graph return a new instance instead.
    """

    adjacency: np.ndarray
    views: list[np.ndarray] = field(default_factory=list)
    labels: np.ndarray | None = None

    def __post_init__(self):
        adj = np.ascontiguousarray(np.asarray(self.adjacency, dtype=np.float64))
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if not np.all((adj == 0.0) | (adj == 1.0)):
            raise ValueError("adjacency must be binary (entries 0 or 1)")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj) != 0.0):
            raise ValueError(
                "adjacency diagonal must be zero (self-loops are added only "
                "during normalization)"
            )
        self.adjacency = adj
        n = adj.shape[0]

        if not self.views:
            raise ValueError("at least one attribute view is required")
        views = []
        for k, view in enumerate(self.views):
            v = np.ascontiguousarray(np.asarray(view, dtype=np.float64))
            if v.ndim != 2 or v.shape[0] != n:
                raise ValueError(
                    f"view {k} must have {n} rows, got shape {v.shape}"
                )
            views.append(v)
        self.views = views

        if self.labels is not None:
            # fixed width fits the longest kind, so later assignment into a
            # copy can never truncate
            labels = np.asarray(self.labels, dtype="<U10")
            if labels.shape != (n,):
                raise ValueError(
                    f"labels must have length {n}, got shape {labels.shape}"
                )
            bad = set(labels.tolist()) - set(ANOMALY_KINDS)
            if bad:
                raise ValueError(f"unknown anomaly kinds in labels: {sorted(bad)}")
            self.labels = labels

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_views(self) -> int:
        return len(self.views)

    @property
    def view_dims(self) -> list[int]:
        return [v.shape[1] for v in self.views]

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    @property
    def anomaly_flags(self) -> np.ndarray | None:
        """1 for anomalous nodes, 0 for normal; None if unlabeled."""
        if self.labels is None:
            return None
        return (self.labels != "normal").astype(np.int64)

    def concatenated_attributes(self) -> np.ndarray:
        """All views stacked column-wise into one n x sum(D_k) matrix."""
        return np.concatenate(self.views, axis=1)

    def normalized_adjacency(self) -> np.ndarray:
        return normalize_adjacency(self.adjacency)

    def modularity(self) -> np.ndarray:
        return modularity_matrix(self.adjacency)

    def with_labels(self, labels: np.ndarray) -> "MultiViewGraph":
        return replace(self, labels=labels)


def normalize_adjacency(adjacency: np.ndarray) -> np.ndarray:
    """Symmetrically normalized adjacency with self-loops.

    Adds the identity, then rescales by inverse square-root degrees:
    D^{-1/2} (A + I) D^{-1/2} with D the diagonal of (A + I) row sums.
    Isolated nodes pick up degree 1 from the self-loop, so the result is
    always finite.
    """
    adj = np.asarray(adjacency, dtype=np.float64)
    with_loops = adj + np.eye(adj.shape[0])
    inv_sqrt_deg = 1.0 / np.sqrt(with_loops.sum(axis=1))
    return with_loops * inv_sqrt_deg[:, None] * inv_sqrt_deg[None, :]


def modularity_matrix(adjacency: np.ndarray) -> np.ndarray:
    """Observed-minus-expected edge matrix: a_ij - k_i k_j / (2m).

    Rows sum to zero and the matrix is symmetric.  Undefined for an edgeless
    graph (the expected-edge term divides by 2m), which is rejected rather
    than silently zeroed.
    """
    adj = np.asarray(adjacency, dtype=np.float64)
    degrees = adj.sum(axis=1)
    two_m = degrees.sum()
    if two_m == 0:
        raise ValueError("modularity undefined for edgeless graph")
    return adj - np.outer(degrees, degrees) / two_m
