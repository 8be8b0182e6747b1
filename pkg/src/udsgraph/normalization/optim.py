"""Deterministic full-batch minimization with per-parameter adaptive steps.

The update is iRprop-: each parameter keeps its own step size, which
grows while the gradient sign is stable and shrinks when it flips.
Only gradient signs are used, so badly scaled problems (large
separated fixed effects next to small random effects) need no tuning.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
import json
from pathlib import Path
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 5000
    tolerance: float = 1e-6
    patience: int = 5
    initial_step: float = 0.05
    step_increase: float = 1.2
    step_decrease: float = 0.5
    max_step: float = 1.0
    min_step: float = 1e-12
    max_outer_iterations: int = 100
    variance_tolerance: float = 1e-4
    initial_variance: float = 1.0
    variance_floor: float = 1e-4
    reestimate_variance: bool = True
    # "sample": Var(u) of the fitted effects; "laplace": adds each effect's
    # approximate posterior variance (an EM step), which cannot collapse to 0
    variance_estimator: str = "sample"
    # optional N(0, v) penalty on fixed effects; None leaves them unpenalized
    fixed_effect_variance: float | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1 or self.max_outer_iterations < 1:
            raise ValueError("iteration limits must be at least 1")
        if not 0 < self.step_decrease < 1 < self.step_increase:
            raise ValueError("need 0 < step_decrease < 1 < step_increase")
        if self.variance_floor <= 0 or self.initial_variance <= 0:
            raise ValueError("variances must be positive")
        if self.variance_estimator not in ("sample", "laplace"):
            raise ValueError(f"unknown variance_estimator {self.variance_estimator!r}")
        if self.fixed_effect_variance is not None and self.fixed_effect_variance <= 0:
            raise ValueError("fixed_effect_variance must be positive")

    @classmethod
    def load(cls, path: str | Path) -> OptimizerConfig:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown optimizer config keys: {unknown}")
        return cls(**data)


@dataclass
class MinimizeResult:
    x: np.ndarray
    loss: float
    iterations: int
    converged: bool


def minimize(fun: Callable[[np.ndarray], tuple[float, np.ndarray]],
             x0: np.ndarray, cfg: OptimizerConfig) -> MinimizeResult:
    """Minimize ``fun`` (returning loss and gradient) from ``x0``.

    Stops once the relative loss change stays below ``cfg.tolerance`` for
    ``cfg.patience`` consecutive steps. The best iterate seen is returned.
    """
    x = np.array(x0, dtype=float)
    loss, grad = fun(x)
    best_x, best_loss = x.copy(), loss
    step = np.full_like(x, cfg.initial_step)
    prev_grad = np.zeros_like(x)
    quiet = 0
    converged = False
    it = 0
    if x.size == 0:
        return MinimizeResult(x, float(loss), 0, True)
    for it in range(1, cfg.max_iterations + 1):
        agree = grad * prev_grad
        step = np.where(agree > 0, np.minimum(step * cfg.step_increase, cfg.max_step), step)
        step = np.where(agree < 0, np.maximum(step * cfg.step_decrease, cfg.min_step), step)
        grad = np.where(agree < 0, 0.0, grad)
        x = x - np.sign(grad) * step
        prev_grad = grad
        new_loss, grad = fun(x)
        change = abs(new_loss - loss) / max(abs(loss), 1.0)
        loss = new_loss
        if loss < best_loss:
            best_x, best_loss = x.copy(), loss
        quiet = quiet + 1 if change < cfg.tolerance else 0
        if quiet >= cfg.patience:
            converged = True
            break
    return MinimizeResult(best_x, float(best_loss), it, converged)
