"""Parameter update rules: Adam (default) and plain gradient descent.

Both operate on a named mapping of trainable :class:`~mvgad.autodiff.Tensor`
parameters and read the ``grad`` slot left behind by ``backward()``.  A
``None`` grad is treated as zero, so parameters untouched by a loss still get
correct moment decay.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .autodiff import Tensor


class Adam:
    """Adam with bias-corrected first and second moments."""

    def __init__(
        self,
        params: Mapping[str, Tensor],
        lr: float = 5e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        self.params = dict(params)
        self.lr = float(lr)
        self.beta1, self.beta2 = betas
        self.eps = float(eps)
        self.step_count = 0
        self._m = {name: np.zeros_like(p.data) for name, p in self.params.items()}
        self._v = {name: np.zeros_like(p.data) for name, p in self.params.items()}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def step(self) -> None:
        self.step_count += 1
        bias1 = 1.0 - self.beta1**self.step_count
        bias2 = 1.0 - self.beta2**self.step_count
        for name, p in self.params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if g.shape != p.data.shape:
                raise ValueError(
                    f"gradient shape {g.shape} does not match parameter "
                    f"'{name}' of shape {p.data.shape}"
                )
            m = self._m[name]
            v = self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


class Sgd:
    """Plain full-batch gradient descent."""

    def __init__(self, params: Mapping[str, Tensor], lr: float = 5e-3):
        self.params = dict(params)
        self.lr = float(lr)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def step(self) -> None:
        for name, p in self.params.items():
            if p.grad is None:
                continue
            if p.grad.shape != p.data.shape:
                raise ValueError(
                    f"gradient shape {p.grad.shape} does not match parameter "
                    f"'{name}' of shape {p.data.shape}"
                )
            p.data -= self.lr * p.grad


def make_optimizer(kind: str, params: Mapping[str, Tensor], lr: float):
    if kind == "adam":
        return Adam(params, lr=lr)
    if kind == "sgd":
        return Sgd(params, lr=lr)
    raise ValueError(f"unknown optimizer '{kind}' (expected 'adam' or 'sgd')")
