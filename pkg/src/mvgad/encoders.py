"""Representation learning: per-view graph convolutions and the community
branch (modularity autoencoder + community graph convolution).

All functions take and return autodiff tensors so gradients flow through the
whole pipeline.  Node layout is row-major throughout: row i of every matrix
belongs to node i, and weight matrices multiply from the right.
"""

from __future__ import annotations

from dataclasses import dataclass

from .autodiff import Tensor, frobenius_sq, hconcat, relu


@dataclass
class EmbeddingBundle:
    """Everything the encoders produce for one forward pass."""

    view_embeddings: list[Tensor]  # one n x d_U matrix per view
    community_embedding: Tensor    # community GCN output, n x d_Z
    modularity_code: Tensor        # autoencoder latent, n x d_H
    community_combined: Tensor     # [community_embedding || modularity_code]


def gcn_layer(adj_norm: Tensor, features: Tensor, weight: Tensor) -> Tensor:
    """One graph convolution: relu(adj_norm @ features @ weight).

    The matrix form of per-node aggregation over the node itself and its
    neighbors, weighted by the normalized adjacency.
    """
    return relu(adj_norm @ features @ weight)


def gcn_encode(adj_norm: Tensor, features: Tensor, weights: list[Tensor]) -> Tensor:
    """Stack of graph convolutions applied to one feature matrix."""
    hidden = features
    for weight in weights:
        hidden = gcn_layer(adj_norm, hidden, weight)
    return hidden


def encode_views(
    adj_norm: Tensor, views: list[Tensor], stacks: list[list[Tensor]]
) -> list[Tensor]:
    """Independent GCN encoder per view; views share no parameters."""
    if len(views) != len(stacks):
        raise ValueError(f"got {len(views)} views but {len(stacks)} encoder stacks")
    return [gcn_encode(adj_norm, view, stack) for view, stack in zip(views, stacks)]


def encode_modularity(
    modularity: Tensor, layers: list[tuple[Tensor, Tensor]]
) -> Tensor:
    """Autoencoder encoder half: each node's modularity row is compressed
    through relu(h @ W + b) layers down to the latent code."""
    hidden = modularity
    for weight, bias in layers:
        hidden = relu(hidden @ weight + bias)
    return hidden


def decode_modularity(code: Tensor, layers: list[tuple[Tensor, Tensor]]) -> Tensor:
    """Autoencoder decoder half: mirrored relu layers back to n columns."""
    hidden = code
    for weight, bias in layers:
        hidden = relu(hidden @ weight + bias)
    return hidden


def modularity_recon_loss(modularity: Tensor, reconstructed: Tensor) -> Tensor:
    """Squared Frobenius distance between the modularity matrix and its
    reconstruction."""
    if modularity.shape != reconstructed.shape:
        raise ValueError(
            f"reconstruction shape {reconstructed.shape} does not match "
            f"modularity shape {modularity.shape}"
        )
    return frobenius_sq(modularity - reconstructed)


def community_gcn(adj_norm: Tensor, attributes: Tensor, weights: list[Tensor]) -> Tensor:
    """GCN over the concatenation of all views, for the community branch."""
    return gcn_encode(adj_norm, attributes, weights)


def combine_community(community_embedding: Tensor, modularity_code: Tensor) -> Tensor:
    """Column-concatenate the community GCN output with the autoencoder code."""
    return hconcat([community_embedding, modularity_code])


def encode_all(
    adj_norm: Tensor,
    views: list[Tensor],
    attributes: Tensor,
    modularity: Tensor,
    view_stacks: list[list[Tensor]],
    encoder_layers: list[tuple[Tensor, Tensor]],
    community_stack: list[Tensor],
) -> EmbeddingBundle:
    """Run both branches and return all intermediate representations."""
    view_embeddings = encode_views(adj_norm, views, view_stacks)
    code = encode_modularity(modularity, encoder_layers)
    community = community_gcn(adj_norm, attributes, community_stack)
    return EmbeddingBundle(
        view_embeddings=view_embeddings,
        community_embedding=community,
        modularity_code=code,
        community_combined=combine_community(community, code),
    )
