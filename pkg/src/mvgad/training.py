"""Parameter initialization, joint training, and checkpointing.

Training is full-batch gradient descent over a single graph: every epoch
runs the whole pipeline forward, computes

    total = (1 - lam) * ||A - A_rec||_F^2 + lam * ||X - X_rec||_F^2
            + gamma * ||B_mod - B_mod_rec||_F^2

and takes one optimizer step.  With a fixed seed the run is bit-for-bit
reproducible.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import decoders, encoders, fusion
from .autodiff import Tensor, frobenius_sq, scale
from .decoders import LossConfig
from .graph import MultiViewGraph
from .optim import Adam, make_optimizer

CHECKPOINT_MAGIC = b"MVGADCKP"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    """Raised for unreadable, mismatched or tampered checkpoint files."""


@dataclass
class TrainConfig:
    # Hidden widths are deliberately narrow: the fused representation is a
    # concatenation of relu outputs (all non-negative), so a wide one drives
    # the inner-product structure decoder into flat sigmoid saturation and
    # leaves enough capacity to memorize anomalous attribute rows.
    epochs: int = 300
    lr: float = 1e-2
    optimizer: str = "adam"
    lam: float = 0.5
    gamma: float = 0.1
    seed: int = 42
    pretrain_ae_epochs: int = 0  # 0 = co-train the autoencoder from the start
    fusion_mode: str = "concat"
    fusion_alphas: tuple[float, ...] | None = None  # None = uniform
    fusion_beta: float | None = None
    fusion_learnable: bool = False
    view_hidden: tuple[int, ...] = (16, 8)
    ae_hidden: tuple[int, ...] = (32, 8)
    community_hidden: tuple[int, ...] = (16, 8)

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(
                f"unknown optimizer '{self.optimizer}' (expected 'adam' or 'sgd')"
            )
        if self.pretrain_ae_epochs < 0:
            raise ValueError(
                f"pretrain_ae_epochs must be >= 0, got {self.pretrain_ae_epochs}"
            )
        if self.fusion_mode not in ("concat", "weighted"):
            raise ValueError(
                f"unknown fusion mode '{self.fusion_mode}' "
                f"(expected 'concat' or 'weighted')"
            )
        for name, dims in (
            ("view_hidden", self.view_hidden),
            ("ae_hidden", self.ae_hidden),
            ("community_hidden", self.community_hidden),
        ):
            if not dims or any(d < 1 for d in dims):
                raise ValueError(f"{name} must be non-empty positive dims, got {dims}")
        self.loss_config().validate()

    def loss_config(self) -> LossConfig:
        return LossConfig(lam=self.lam, gamma=self.gamma)

    def aggregation_weights(self, num_views: int) -> fusion.AggregationWeights:
        if self.fusion_alphas is None and self.fusion_beta is None:
            return fusion.AggregationWeights.uniform(num_views)
        if self.fusion_alphas is None or self.fusion_beta is None:
            raise ValueError("fusion alphas and beta must be given together")
        return fusion.AggregationWeights(tuple(self.fusion_alphas), self.fusion_beta)


@dataclass
class ModelDims:
    """Every width the architecture needs, derived from graph + config."""

    n: int
    view_dims: tuple[int, ...]
    view_hidden: tuple[int, ...]
    ae_hidden: tuple[int, ...]
    community_hidden: tuple[int, ...]
    fusion_mode: str = "concat"
    fusion_learnable: bool = False

    @classmethod
    def for_graph(cls, graph: MultiViewGraph, cfg: TrainConfig) -> "ModelDims":
        return cls(
            n=graph.n,
            view_dims=tuple(graph.view_dims),
            view_hidden=tuple(cfg.view_hidden),
            ae_hidden=tuple(cfg.ae_hidden),
            community_hidden=tuple(cfg.community_hidden),
            fusion_mode=cfg.fusion_mode,
            fusion_learnable=cfg.fusion_learnable,
        )

    @property
    def num_views(self) -> int:
        return len(self.view_dims)

    @property
    def embed_width(self) -> int:
        return self.view_hidden[-1]

    @property
    def combined_width(self) -> int:
        return self.community_hidden[-1] + self.ae_hidden[-1]

    @property
    def attr_width(self) -> int:
        return sum(self.view_dims)

    @property
    def needs_projection(self) -> bool:
        return self.fusion_mode == "weighted" and self.combined_width != self.embed_width

    @property
    def fused_width(self) -> int:
        if self.fusion_mode == "concat":
            return self.num_views * self.embed_width + self.combined_width
        return self.embed_width


@dataclass
class ModelParams:
    """All trainable weights, addressable by name in a fixed order.

    Checkpoint order: per-view GCN weights (view order, then layer order),
    autoencoder encoder W/b pairs, decoder W/b pairs, community GCN weights,
    fusion projection and logits (when present), attribute decoder W and b.
    """

    dims: ModelDims
    view_stacks: list[list[Tensor]]
    encoder_layers: list[tuple[Tensor, Tensor]]
    decoder_layers: list[tuple[Tensor, Tensor]]
    community_stack: list[Tensor]
    attr_weight: Tensor
    attr_bias: Tensor
    fusion_projection: Tensor | None = None
    fusion_logits: Tensor | None = None

    def named_parameters(self) -> dict[str, Tensor]:
        named: dict[str, Tensor] = {}
        for k, stack in enumerate(self.view_stacks):
            for layer, weight in enumerate(stack):
                named[f"view{k}.layer{layer}.W"] = weight
        for layer, (weight, bias) in enumerate(self.encoder_layers):
            named[f"ae.enc{layer}.W"] = weight
            named[f"ae.enc{layer}.b"] = bias
        for layer, (weight, bias) in enumerate(self.decoder_layers):
            named[f"ae.dec{layer}.W"] = weight
            named[f"ae.dec{layer}.b"] = bias
        for layer, weight in enumerate(self.community_stack):
            named[f"community.layer{layer}.W"] = weight
        if self.fusion_projection is not None:
            named["fusion.P"] = self.fusion_projection
        if self.fusion_logits is not None:
            named["fusion.logits"] = self.fusion_logits
        named["attr.W"] = self.attr_weight
        named["attr.b"] = self.attr_bias
        return named

    def autoencoder_parameters(self) -> dict[str, Tensor]:
        return {
            name: p
            for name, p in self.named_parameters().items()
            if name.startswith("ae.")
        }

    def gradients(self) -> dict[str, np.ndarray]:
        return {
            name: p.grad
            for name, p in self.named_parameters().items()
            if p.grad is not None
        }

    def zero_grad(self) -> None:
        for p in self.named_parameters().values():
            p.grad = None


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_params(dims: ModelDims, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases; deterministic in the seed."""
    rng = np.random.default_rng(seed)

    def weight(fan_in: int, fan_out: int) -> Tensor:
        return Tensor(glorot(rng, fan_in, fan_out), requires_grad=True)

    def bias(width: int) -> Tensor:
        return Tensor(np.zeros((1, width)), requires_grad=True)

    view_stacks = []
    for d_in in dims.view_dims:
        stack, prev = [], d_in
        for d_out in dims.view_hidden:
            stack.append(weight(prev, d_out))
            prev = d_out
        view_stacks.append(stack)

    encoder_layers, prev = [], dims.n
    for d_out in dims.ae_hidden:
        encoder_layers.append((weight(prev, d_out), bias(d_out)))
        prev = d_out
    decoder_layers = []
    for d_out in (*reversed(dims.ae_hidden[:-1]), dims.n):
        decoder_layers.append((weight(prev, d_out), bias(d_out)))
        prev = d_out

    community_stack, prev = [], dims.attr_width
    for d_out in dims.community_hidden:
        community_stack.append(weight(prev, d_out))
        prev = d_out

    fusion_projection = (
        weight(dims.combined_width, dims.embed_width) if dims.needs_projection else None
    )
    fusion_logits = (
        Tensor(np.zeros((1, dims.num_views + 1)), requires_grad=True)
        if dims.fusion_mode == "weighted" and dims.fusion_learnable
        else None
    )

    return ModelParams(
        dims=dims,
        view_stacks=view_stacks,
        encoder_layers=encoder_layers,
        decoder_layers=decoder_layers,
        community_stack=community_stack,
        attr_weight=weight(dims.fused_width, dims.attr_width),
        attr_bias=bias(dims.attr_width),
        fusion_projection=fusion_projection,
        fusion_logits=fusion_logits,
    )


@dataclass
class GraphTensors:
    """Constant tensors derived from one graph, built once per run."""

    adjacency: Tensor
    adj_norm: Tensor
    modularity: Tensor
    views: list[Tensor]
    attributes: Tensor  # all views concatenated

    @classmethod
    def from_graph(cls, graph: MultiViewGraph) -> "GraphTensors":
        return cls(
            adjacency=Tensor(graph.adjacency),
            adj_norm=Tensor(graph.normalized_adjacency()),
            modularity=Tensor(graph.modularity()),
            views=[Tensor(v) for v in graph.views],
            attributes=Tensor(graph.concatenated_attributes()),
        )


@dataclass
class ForwardPass:
    bundle: encoders.EmbeddingBundle
    fused: Tensor
    structure_recon: Tensor
    attribute_recon: Tensor
    modularity_recon: Tensor


def forward(gt: GraphTensors, params: ModelParams, cfg: TrainConfig) -> ForwardPass:
    bundle = encoders.encode_all(
        gt.adj_norm,
        gt.views,
        gt.attributes,
        gt.modularity,
        params.view_stacks,
        params.encoder_layers,
        params.community_stack,
    )
    if cfg.fusion_mode == "concat":
        fused = fusion.aggregate_concat(bundle.view_embeddings, bundle.community_combined)
    elif cfg.fusion_learnable:
        fused = fusion.aggregate_learnable(
            bundle.view_embeddings,
            bundle.community_combined,
            params.fusion_logits,
            params.fusion_projection,
        )
    else:
        fused = fusion.aggregate_weighted(
            bundle.view_embeddings,
            bundle.community_combined,
            cfg.aggregation_weights(len(bundle.view_embeddings)),
            params.fusion_projection,
        )
    return ForwardPass(
        bundle=bundle,
        fused=fused,
        structure_recon=decoders.structure_decode(fused),
        attribute_recon=decoders.attribute_decode(
            fused, params.attr_weight, params.attr_bias
        ),
        modularity_recon=encoders.decode_modularity(
            bundle.modularity_code, params.decoder_layers
        ),
    )


@dataclass
class TrainHistory:
    """Per-epoch loss record; total equals the sum of the three components."""

    total: list[float] = field(default_factory=list)
    structure: list[float] = field(default_factory=list)
    attribute: list[float] = field(default_factory=list)
    autoencoder: list[float] = field(default_factory=list)

    def append(self, total: float, structure: float, attribute: float, ae: float):
        self.total.append(total)
        self.structure.append(structure)
        self.attribute.append(attribute)
        self.autoencoder.append(ae)

    def __len__(self) -> int:
        return len(self.total)

    def write_csv(self, path) -> None:
        lines = ["epoch,total,structure,attribute,autoencoder"]
        for i in range(len(self.total)):
            lines.append(
                f"{i + 1},{self.total[i]!r},{self.structure[i]!r},"
                f"{self.attribute[i]!r},{self.autoencoder[i]!r}"
            )
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(line + "\n" for line in lines))


def _loss_terms(gt: GraphTensors, fwd: ForwardPass, cfg: TrainConfig):
    structure = scale(
        frobenius_sq(gt.adjacency - fwd.structure_recon), 1.0 - cfg.lam
    )
    attribute = scale(frobenius_sq(gt.attributes - fwd.attribute_recon), cfg.lam)
    ae = scale(
        encoders.modularity_recon_loss(gt.modularity, fwd.modularity_recon), cfg.gamma
    )
    return structure, attribute, ae


def train(graph: MultiViewGraph, cfg: TrainConfig) -> tuple[ModelParams, TrainHistory]:
    """Optimize the full objective for cfg.epochs full-batch steps."""
    cfg.validate()
    dims = ModelDims.for_graph(graph, cfg)
    params = init_params(dims, cfg.seed)
    gt = GraphTensors.from_graph(graph)

    if cfg.pretrain_ae_epochs > 0:
        _pretrain_autoencoder(gt, params, cfg)

    optimizer = make_optimizer(cfg.optimizer, params.named_parameters(), cfg.lr)
    history = TrainHistory()
    last_finite = float("nan")
    for epoch in range(cfg.epochs):
        optimizer.zero_grad()
        fwd = forward(gt, params, cfg)
        structure, attribute, ae = _loss_terms(gt, fwd, cfg)
        total = structure + attribute + ae
        total_value = total.item()
        if not np.isfinite(total_value):
            raise RuntimeError(
                f"non-finite loss at epoch {epoch + 1}; "
                f"last finite total was {last_finite}"
            )
        last_finite = total_value
        history.append(total_value, structure.item(), attribute.item(), ae.item())
        total.backward()
        optimizer.step()
    return params, history


def _pretrain_autoencoder(gt: GraphTensors, params: ModelParams, cfg: TrainConfig):
    optimizer = Adam(params.autoencoder_parameters(), lr=cfg.lr)
    for _ in range(cfg.pretrain_ae_epochs):
        optimizer.zero_grad()
        code = encoders.encode_modularity(gt.modularity, params.encoder_layers)
        recon = encoders.decode_modularity(code, params.decoder_layers)
        loss = encoders.modularity_recon_loss(gt.modularity, recon)
        loss.backward()
        optimizer.step()


def reconstruct(
    graph: MultiViewGraph, params: ModelParams, cfg: TrainConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Structure and attribute reconstructions for scoring a trained model."""
    _check_graph_dims(graph, params.dims)
    fwd = forward(GraphTensors.from_graph(graph), params, cfg)
    return fwd.structure_recon.data, fwd.attribute_recon.data


def score(graph: MultiViewGraph, params: ModelParams, cfg: TrainConfig):
    """Anomaly report for a graph under a trained model."""
    structure_recon, attribute_recon = reconstruct(graph, params, cfg)
    return decoders.node_scores(
        graph.adjacency,
        structure_recon,
        graph.concatenated_attributes(),
        attribute_recon,
        cfg.loss_config(),
    )


def _check_graph_dims(graph: MultiViewGraph, dims: ModelDims) -> None:
    if graph.n != dims.n or tuple(graph.view_dims) != dims.view_dims:
        raise ValueError(
            f"graph (n={graph.n}, view dims {tuple(graph.view_dims)}) does not "
            f"match model (n={dims.n}, view dims {dims.view_dims})"
        )


def _config_echo(cfg: TrainConfig) -> dict:
    return {
        "epochs": cfg.epochs,
        "lr": cfg.lr,
        "optimizer": cfg.optimizer,
        "lambda": cfg.lam,
        "gamma": cfg.gamma,
        "seed": cfg.seed,
        "pretrain_ae_epochs": cfg.pretrain_ae_epochs,
        "fusion_mode": cfg.fusion_mode,
        "fusion_alphas": list(cfg.fusion_alphas) if cfg.fusion_alphas else None,
        "fusion_beta": cfg.fusion_beta,
        "fusion_learnable": cfg.fusion_learnable,
        "view_hidden": list(cfg.view_hidden),
        "ae_hidden": list(cfg.ae_hidden),
        "community_hidden": list(cfg.community_hidden),
    }


def _config_from_echo(echo: dict) -> TrainConfig:
    return TrainConfig(
        epochs=echo["epochs"],
        lr=echo["lr"],
        optimizer=echo["optimizer"],
        lam=echo["lambda"],
        gamma=echo["gamma"],
        seed=echo["seed"],
        pretrain_ae_epochs=echo["pretrain_ae_epochs"],
        fusion_mode=echo["fusion_mode"],
        fusion_alphas=tuple(echo["fusion_alphas"]) if echo["fusion_alphas"] else None,
        fusion_beta=echo["fusion_beta"],
        fusion_learnable=echo["fusion_learnable"],
        view_hidden=tuple(echo["view_hidden"]),
        ae_hidden=tuple(echo["ae_hidden"]),
        community_hidden=tuple(echo["community_hidden"]),
    )


def save_checkpoint(params: ModelParams, cfg: TrainConfig, path) -> None:
    """Binary container: magic, header length, JSON header, then every
    parameter as contiguous little-endian float64 in the documented order."""
    named = params.named_parameters()
    dims = params.dims
    header = {
        "format_version": CHECKPOINT_VERSION,
        "dims": {
            "n": dims.n,
            "view_dims": list(dims.view_dims),
            "view_hidden": list(dims.view_hidden),
            "ae_hidden": list(dims.ae_hidden),
            "community_hidden": list(dims.community_hidden),
            "fusion_mode": dims.fusion_mode,
            "fusion_learnable": dims.fusion_learnable,
        },
        "config": _config_echo(cfg),
        "params": [
            {"name": name, "shape": list(p.shape)} for name, p in named.items()
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for p in named.values():
            fh.write(np.ascontiguousarray(p.data, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[ModelParams, TrainConfig]:
    try:
        raw = open(path, "rb").read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file")
    offset = len(CHECKPOINT_MAGIC)
    (header_len,) = struct.unpack_from("<Q", raw, offset)
    offset += 8
    try:
        header = json.loads(raw[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"malformed checkpoint header: {exc}") from exc
    offset += header_len

    if header.get("format_version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format version {header.get('format_version')!r} "
            f"(expected {CHECKPOINT_VERSION})"
        )
    d = header["dims"]
    dims = ModelDims(
        n=d["n"],
        view_dims=tuple(d["view_dims"]),
        view_hidden=tuple(d["view_hidden"]),
        ae_hidden=tuple(d["ae_hidden"]),
        community_hidden=tuple(d["community_hidden"]),
        fusion_mode=d["fusion_mode"],
        fusion_learnable=d["fusion_learnable"],
    )
    cfg = _config_from_echo(header["config"])

    # Rebuild at the declared dims, then overwrite with the stored arrays;
    # any disagreement between manifest, dims and payload is a hard error.
    params = init_params(dims, seed=0)
    named = params.named_parameters()
    manifest = header["params"]
    if [m["name"] for m in manifest] != list(named.keys()):
        raise CheckpointError("checkpoint shape mismatch: parameter list differs")
    payload = len(raw) - offset
    expected = sum(int(m["shape"][0]) * int(m["shape"][1]) * 8 for m in manifest)
    for m in manifest:
        if tuple(m["shape"]) != named[m["name"]].shape:
            raise CheckpointError(
                f"checkpoint shape mismatch: {m['name']} has shape {m['shape']}, "
                f"expected {list(named[m['name']].shape)}"
            )
    if payload != expected:
        raise CheckpointError(
            f"checkpoint shape mismatch: payload is {payload} bytes, "
            f"manifest implies {expected}"
        )
    for m in manifest:
        rows, cols = m["shape"]
        nbytes = rows * cols * 8
        arr = np.frombuffer(raw[offset : offset + nbytes], dtype="<f8").reshape(
            rows, cols
        )
        named[m["name"]].data = np.ascontiguousarray(arr)
        offset += nbytes
    return params, cfg
