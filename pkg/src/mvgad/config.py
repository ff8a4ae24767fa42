"""TOML configuration files.

Every field has a default, so an empty (or absent) config is valid.  Sections:

    [generate]  synthetic dataset recipe        -> GenConfig
    [train]     optimization settings           -> TrainConfig
    [model]     layer widths                    -> TrainConfig.*_hidden
    [fusion]    aggregation mode and weights    -> TrainConfig.fusion_*

Unknown sections or keys are rejected rather than silently ignored.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .synthetic import GenConfig
from .training import TrainConfig

_GENERATE_KEYS = {
    "n",
    "communities",
    "p_in",
    "p_out",
    "view_dims",
    "anomaly_fraction",
    "clique_size",
    "attr_shift",
    "seed",
}
_TRAIN_KEYS = {"epochs", "lr", "optimizer", "lambda", "gamma", "seed", "pretrain_ae_epochs"}
_MODEL_KEYS = {"view_hidden", "ae_hidden", "community_hidden"}
_FUSION_KEYS = {"mode", "alphas", "beta", "learnable"}
_SECTIONS = {"generate", "train", "model", "fusion"}


@dataclass
class Config:
    gen: GenConfig
    train: TrainConfig


def load_config(path=None) -> Config:
    """Parse a TOML config file; ``None`` yields all defaults."""
    if path is None:
        raw = {}
    else:
        p = Path(path)
        if not p.is_file():
            raise ValueError(f"config file not found: {p}")
        try:
            raw = tomllib.loads(p.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"malformed config {p}: {exc}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> Config:
    unknown = set(raw) - _SECTIONS
    if unknown:
        raise ValueError(
            f"unknown config section(s) {sorted(unknown)}; expected {sorted(_SECTIONS)}"
        )
    gen_sec = _section(raw, "generate", _GENERATE_KEYS)
    train_sec = _section(raw, "train", _TRAIN_KEYS)
    model_sec = _section(raw, "model", _MODEL_KEYS)
    fusion_sec = _section(raw, "fusion", _FUSION_KEYS)

    gen = GenConfig()
    for key, value in gen_sec.items():
        if key == "view_dims":
            value = tuple(value)
        setattr(gen, key, value)

    train = TrainConfig()
    for key, value in train_sec.items():
        setattr(train, "lam" if key == "lambda" else key, value)
    for key, value in model_sec.items():
        setattr(train, key, tuple(value))
    if "mode" in fusion_sec:
        train.fusion_mode = fusion_sec["mode"]
    if "alphas" in fusion_sec:
        train.fusion_alphas = tuple(fusion_sec["alphas"])
    if "beta" in fusion_sec:
        train.fusion_beta = fusion_sec["beta"]
    if "learnable" in fusion_sec:
        train.fusion_learnable = bool(fusion_sec["learnable"])

    return Config(gen=gen, train=train)


def _section(raw: dict, name: str, allowed: set[str]) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ValueError(f"config section [{name}] must be a table")
    unknown = set(sec) - allowed
    if unknown:
        raise ValueError(
            f"unknown key(s) {sorted(unknown)} in [{name}]; expected {sorted(allowed)}"
        )
    return sec
