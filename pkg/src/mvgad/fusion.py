"""Fusing the per-view embeddings and the community representation into one
shared matrix.

Two strategies: parameter-free column concatenation (the default, lossless)
and a weighted sum under simplex-constrained mixing weights, with an optional
trainable projection to reconcile widths and an optional learnable-weight
variant (softmax over trainable logits, which keeps the simplex constraint by
construction).
"""

from __future__ import annotations

from dataclasses import dataclass

from .autodiff import Tensor, col_slice, hconcat, scalar_mul, scale, softmax_row

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class AggregationWeights:
    """Per-view weights plus the community weight; a point on the simplex."""

    alphas: tuple[float, ...]
    beta: float

    def validate(self) -> None:
        values = (*self.alphas, self.beta)
        if any(v < 0 for v in values):
            raise ValueError(f"aggregation weights must be non-negative, got {values}")
        total = sum(values)
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(
                f"aggregation weights must sum to 1, got {values} (sum={total!r})"
            )

    @classmethod
    def uniform(cls, num_views: int) -> "AggregationWeights":
        w = 1.0 / (num_views + 1)
        return cls(alphas=(w,) * num_views, beta=w)


def aggregate_concat(view_embeddings: list[Tensor], community_combined: Tensor) -> Tensor:
    """All representations side by side: [U_1 || ... || U_K || community]."""
    return hconcat([*view_embeddings, community_combined])


def aggregate_weighted(
    view_embeddings: list[Tensor],
    community_combined: Tensor,
    weights: AggregationWeights,
    projection: Tensor | None = None,
) -> Tensor:
    """Convex combination of the views and the (projected) community block.

    All view embeddings must share one width; the community block is mapped
    onto that width by ``projection`` unless the widths already agree, in
    which case the projection may be omitted (identity).  Terms with weight
    exactly 0 are skipped, so a one-hot weighting returns its selected input
    bit-for-bit.
    """
    if len(weights.alphas) != len(view_embeddings):
        raise ValueError(
            f"got {len(view_embeddings)} view embeddings but "
            f"{len(weights.alphas)} alpha weights"
        )
    weights.validate()
    width = view_embeddings[0].shape[1]
    for k, emb in enumerate(view_embeddings):
        if emb.shape[1] != width:
            raise ValueError(
                f"weighted aggregation needs equal view widths: view 0 has "
                f"{width} columns, view {k} has {emb.shape[1]}"
            )

    total: Tensor | None = None
    for alpha, emb in zip(weights.alphas, view_embeddings):
        if alpha == 0.0:
            continue
        term = scale(emb, alpha)
        total = term if total is None else total + term
    if weights.beta != 0.0:
        community = _project_community(community_combined, projection, width)
        term = scale(community, weights.beta)
        total = term if total is None else total + term
    assert total is not None  # simplex weights cannot all be zero
    return total


def aggregate_learnable(
    view_embeddings: list[Tensor],
    community_combined: Tensor,
    logits: Tensor,
    projection: Tensor | None = None,
) -> Tensor:
    """Weighted aggregation with trainable weights: softmax(logits) yields a
    point on the simplex, entry k scaling view k and the last entry scaling
    the community block."""
    num_terms = len(view_embeddings) + 1
    if logits.shape != (1, num_terms):
        raise ValueError(
            f"fusion logits must have shape (1, {num_terms}), got {logits.shape}"
        )
    width = view_embeddings[0].shape[1]
    community = _project_community(community_combined, projection, width)

    mix = softmax_row(logits)
    total: Tensor | None = None
    for k, emb in enumerate([*view_embeddings, community]):
        term = scalar_mul(col_slice(mix, k, k + 1), emb)
        total = term if total is None else total + term
    return total


def _project_community(
    community_combined: Tensor, projection: Tensor | None, width: int
) -> Tensor:
    if projection is not None:
        return community_combined @ projection
    if community_combined.shape[1] != width:
        raise ValueError(
            f"community block width {community_combined.shape[1]} does not match "
            f"view width {width} and no projection was given"
        )
    return community_combined
