"""Seeded synthetic graphs: planted communities plus injected anomalies.

The base model is a planted partition (dense intra-community, sparse
inter-community edges) with per-view Gaussian attributes around a
community-specific mean.  Three anomaly types can then be injected into
disjoint node sets:

* global      -- attributes pushed far away from the whole network's mean
* structural  -- small cliques wired between randomly chosen nodes
* community   -- attributes resampled around a *different* community's mean

Community means are drawn well above zero so attributes stay mostly
non-negative, which a relu attribute decoder can actually reconstruct.

Everything is a pure function of (config, seed): the same config produces a
bit-identical dataset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import MultiViewGraph

_MEAN_LOW, _MEAN_HIGH = 0.5, 2.5


def _draw_means(rng: np.random.Generator, communities: int, dim: int) -> np.ndarray:
    """Community mean vectors: each entry sits at the low or high level.

    Two levels (rather than a continuous draw) keep the typical between-
    community distance large relative to the overall attribute magnitude,
    so community-mean structure stays learnable without inflating
    activations downstream.
    """
    levels = np.array([_MEAN_LOW, _MEAN_HIGH])
    return levels[rng.integers(2, size=(communities, dim))]


@dataclass
class GenConfig:
    n: int = 500
    communities: int = 5
    p_in: float = 0.1
    p_out: float = 0.005
    view_dims: tuple[int, ...] = (16, 16)
    anomaly_fraction: float = 0.01  # per anomaly type
    clique_size: int = 5
    attr_shift: float = 6.0  # global-anomaly displacement, in units of sigma
    seed: int = 42

    def validate(self) -> None:
        if not 0.0 <= self.p_out < self.p_in <= 1.0:
            raise ValueError(
                f"expected 0 <= p_out < p_in <= 1, got p_in={self.p_in}, "
                f"p_out={self.p_out}"
            )
        if self.communities < 1 or self.n < self.communities:
            raise ValueError(
                f"need 1 <= communities <= n, got communities={self.communities}, n={self.n}"
            )
        if not self.view_dims or any(d < 1 for d in self.view_dims):
            raise ValueError(f"view dimensions must all be >= 1, got {self.view_dims}")
        if self.anomaly_fraction < 0:
            raise ValueError(f"anomaly_fraction must be >= 0, got {self.anomaly_fraction}")
        if self.clique_size < 3:
            raise ValueError(f"clique_size must be >= 3, got {self.clique_size}")

    @property
    def anomalies_per_type(self) -> int:
        return int(round(self.anomaly_fraction * self.n))


@dataclass
class CommunityModel:
    """Ground-truth generator state needed by the injection steps."""

    assignments: np.ndarray  # community id per node
    means: list[np.ndarray]  # per view: communities x D_k mean vectors


def community_assignments(n: int, communities: int) -> np.ndarray:
    """Contiguous, nearly equal-sized community blocks."""
    sizes = [n // communities + (1 if i < n % communities else 0) for i in range(communities)]
    return np.repeat(np.arange(communities), sizes)


def generate_base(cfg: GenConfig, rng: np.random.Generator | None = None):
    """Planted-partition graph with Gaussian per-view attributes.

    Returns the all-normal graph together with the community model the
    injection steps need.
    """
    cfg.validate()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    assignments = community_assignments(cfg.n, cfg.communities)
    same = assignments[:, None] == assignments[None, :]
    probs = np.where(same, cfg.p_in, cfg.p_out)
    upper = np.triu(rng.random((cfg.n, cfg.n)) < probs, k=1)
    adjacency = (upper | upper.T).astype(np.float64)

    views, means = [], []
    for dim in cfg.view_dims:
        mu = _draw_means(rng, cfg.communities, dim)
        views.append(mu[assignments] + rng.standard_normal((cfg.n, dim)))
        means.append(mu)

    labels = np.asarray(["normal"] * cfg.n)
    graph = MultiViewGraph(adjacency=adjacency, views=views, labels=labels)
    return graph, CommunityModel(assignments=assignments, means=means)


def _pick_normal_nodes(graph: MultiViewGraph, count: int, rng: np.random.Generator):
    pool = np.flatnonzero(graph.labels == "normal")
    if count > pool.size:
        raise ValueError(
            f"not enough unlabeled nodes: need {count}, have {pool.size}"
        )
    return np.sort(rng.choice(pool, size=count, replace=False))


def inject_global(
    graph: MultiViewGraph, count: int, attr_shift: float, rng: np.random.Generator
):
    """Replace the attributes of ``count`` nodes with samples displaced
    ``attr_shift`` sigma from the network-wide mean, in every view.

    The displacement direction has non-negative components so the shifted
    attributes stay in reconstructable territory.  Returns the new graph and
    the injected node ids.
    """
    if count == 0:
        return graph, np.array([], dtype=np.int64)
    ids = _pick_normal_nodes(graph, count, rng)

    views = [view.copy() for view in graph.views]
    for view in views:
        mean = view.mean(axis=0)
        sigma = math.sqrt(view.var(axis=0).mean())
        for node in ids:
            direction = np.abs(rng.standard_normal(view.shape[1]))
            direction /= np.linalg.norm(direction)
            view[node] = mean + attr_shift * sigma * direction + rng.standard_normal(
                view.shape[1]
            )

    labels = graph.labels.copy()
    labels[ids] = "global"
    return MultiViewGraph(graph.adjacency, views, labels), ids


def inject_structural(
    graph: MultiViewGraph, count: int, clique_size: int, rng: np.random.Generator
):
    """Wire ``count`` nodes into cliques of about ``clique_size`` members.

    Members are drawn anywhere in the graph (cliques may span communities);
    attributes are untouched.  Returns the new graph and the injected ids.
    """
    if count == 0:
        return graph, np.array([], dtype=np.int64)
    ids = _pick_normal_nodes(graph, count, rng)

    adjacency = graph.adjacency.copy()
    n_cliques = math.ceil(count / clique_size)
    for group in np.array_split(ids, n_cliques):
        for i, u in enumerate(group):
            for v in group[i + 1 :]:
                adjacency[u, v] = 1.0
                adjacency[v, u] = 1.0

    labels = graph.labels.copy()
    labels[ids] = "structural"
    return MultiViewGraph(adjacency, graph.views, labels), ids


def inject_community(
    graph: MultiViewGraph, model: CommunityModel, count: int, rng: np.random.Generator
):
    """Resample ``count`` nodes' attributes around a different community's
    mean, leaving all edges alone.  Returns the new graph and injected ids."""
    communities = model.means[0].shape[0]
    if communities < 2:
        raise ValueError("community anomalies require >=2 communities")
    if count == 0:
        return graph, np.array([], dtype=np.int64)
    ids = _pick_normal_nodes(graph, count, rng)

    views = [view.copy() for view in graph.views]
    for node in ids:
        own = model.assignments[node]
        others = [c for c in range(communities) if c != own]
        donor = others[rng.integers(len(others))]
        for k, view in enumerate(views):
            view[node] = model.means[k][donor] + rng.standard_normal(view.shape[1])

    labels = graph.labels.copy()
    labels[ids] = "community"
    return MultiViewGraph(graph.adjacency, views, labels), ids


def generate(cfg: GenConfig) -> MultiViewGraph:
    """Full pipeline: base graph plus all three anomaly types."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    graph, model = generate_base(cfg, rng)
    count = cfg.anomalies_per_type
    graph, _ = inject_global(graph, count, cfg.attr_shift, rng)
    graph, _ = inject_structural(graph, count, cfg.clique_size, rng)
    graph, _ = inject_community(graph, model, count, rng)
    return graph
