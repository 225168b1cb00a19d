"""Contains the optimizers updating attention parameters."""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .attention import AttentionGrad, AttentionParams, Matrix


class Optimizers(Enum):
    """Names of the available optimizers."""

    ADAM = "adam"
    SGD = "sgd"


def clip_grad_norm(grad: AttentionGrad, max_norm: float = 1.0) -> AttentionGrad:
    """Rescale the gradient so its global norm does not exceed max_norm."""
    norm = grad.norm
    if norm <= max_norm or norm == 0.0:
        return grad
    return grad * (max_norm / norm)


class Optimizer(ABC):
    """Turns gradients into parameter updates."""

    def __init__(self, lr: float) -> None:
        """Initialize the optimizer."""
        if lr < 0:
            raise ValueError(f"Learning rate must not be negative, got {lr}.")
        self.lr = lr

    @abstractmethod
    def step(self, params: AttentionParams, grad: AttentionGrad) -> AttentionParams:
        """Return the parameters after one descent step along the gradient."""


class Sgd(Optimizer):
    """Plain gradient descent."""

    def step(self, params: AttentionParams, grad: AttentionGrad) -> AttentionParams:
        """Return the parameters after one descent step along the gradient."""
        return AttentionParams(params.w_q - self.lr * grad.w_q, params.w_k - self.lr * grad.w_k)


class Adam(Optimizer):
    """Gradient descent with bias-corrected first and second moment estimates."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        """Initialize the optimizer."""
        super().__init__(lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._t = 0
        self._moments: Optional[list[tuple[Matrix, Matrix]]] = None

    def step(self, params: AttentionParams, grad: AttentionGrad) -> AttentionParams:
        """Return the parameters after one descent step along the gradient."""
        if self._moments is None:
            self._moments = [(np.zeros_like(value), np.zeros_like(value)) for value in (params.w_q, params.w_k)]
        self._t += 1
        updated = []
        for index, (value, gradient) in enumerate(((params.w_q, grad.w_q), (params.w_k, grad.w_k))):
            first, second = self._moments[index]
            first = self.beta1 * first + (1 - self.beta1) * gradient
            second = self.beta2 * second + (1 - self.beta2) * gradient**2
            self._moments[index] = (first, second)
            first_hat = first / (1 - self.beta1**self._t)
            second_hat = second / (1 - self.beta2**self._t)
            updated.append(value - self.lr * first_hat / (np.sqrt(second_hat) + self.eps))
        return AttentionParams(updated[0], updated[1])


def create_optimizer(name: str, lr: float) -> Optimizer:
    """Create the optimizer with the given name."""
    optimizer = Optimizers(name)
    if optimizer is Optimizers.ADAM:
        return Adam(lr)
    return Sgd(lr)


@dataclass(frozen=True, eq=False)
class TrainingResult:
    """Trained parameters together with the per-step loss curve."""

    params: AttentionParams
    losses: tuple[float, ...]
    skipped: int = 0

    @property
    def steps(self) -> int:
        """Return the number of steps that produced an update."""
        return len(self.losses)
