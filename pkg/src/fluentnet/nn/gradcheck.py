"""Finite-difference verification of analytic gradients.

Central differences with a fixed step are compared against the gradients the
graph produces, on a random sample of coordinates per tensor. The error
metric is |fd - analytic| / max(|fd|, |analytic|, 1): relative for large
gradients, absolute for small ones, so a single threshold works across
layers. Loss builders must be deterministic (eval-mode dropout, fixed
masks); use float64 tensors, since float32 rounding already exceeds useful
thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .tensor import Tensor


@dataclass
class GradCheckReport:
    max_err: float
    worst_coord: str
    n_coords: int
    per_tensor: dict[str, float] = field(default_factory=dict)

    def ok(self, threshold: float = 1e-4) -> bool:
        return self.max_err < threshold


def finite_diff_check(
    build_loss: Callable[[], Tensor],
    tensors: dict[str, Tensor],
    rng: np.random.Generator,
    eps: float = 1e-5,
    samples_per_tensor: int = 4,
) -> GradCheckReport:
    """Compare analytic and finite-difference gradients of a scalar loss.

    ``build_loss`` re-runs the full forward pass and must return a scalar
    Tensor; ``tensors`` maps names to the leaf tensors to perturb (they must
    be the same objects the loss reads).
    """
    for t in tensors.values():
        if not t.requires_grad:
            raise ValueError("all checked tensors must require gradients")
        t.zero_grad()

    loss = build_loss()
    if loss.size != 1:
        raise ValueError("build_loss must return a scalar")
    loss.backward()
    analytic = {
        name: (t.grad.copy() if t.grad is not None else np.zeros_like(t.data))
        for name, t in tensors.items()
    }

    max_err = 0.0
    worst = ""
    n_coords = 0
    per_tensor: dict[str, float] = {}
    for name, t in tensors.items():
        flat = t.data.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        n = min(samples_per_tensor, flat.size)
        coords = rng.choice(flat.size, size=n, replace=False)
        tensor_err = 0.0
        for c in coords:
            c = int(c)
            orig = flat[c]
            flat[c] = orig + eps
            f_plus = float(build_loss().data)
            flat[c] = orig - eps
            f_minus = float(build_loss().data)
            flat[c] = orig
            fd = (f_plus - f_minus) / (2.0 * eps)
            an = float(grad_flat[c])
            err = abs(fd - an) / max(abs(fd), abs(an), 1.0)
            n_coords += 1
            if err > tensor_err:
                tensor_err = err
            if err > max_err:
                max_err = err
                worst = f"{name}[{c}]"
        per_tensor[name] = tensor_err
    return GradCheckReport(max_err=max_err, worst_coord=worst,
                           n_coords=n_coords, per_tensor=per_tensor)
