"""Alternating gradient descent for the two parameter blocks.

One iteration takes a gradient step in ``theta`` holding ``gamma``, then
a step in ``gamma`` at the *fresh* ``theta``. The loss is convex in each
block separately but not jointly, so this block order is part of the
contract and instrumented tests pin it down.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import FitDivergenceError, ValidationError
from .model import ModelParams, PreferenceDataset, sigmoid

__all__ = ["FitConfig", "FitResult", "alternating_fit", "loss_trace_monotone_check"]

_UNIFORM_RE = re.compile(r"^uniform\(\s*(-?[0-9.eE+-]+)\s*,\s*(-?[0-9.eE+-]+)\s*\)$")

# Init specs: either an explicit vector, or "uniform(lo,hi)" drawn with the
# config seed (theta first, then gamma, so traces are reproducible).
InitSpec = "np.ndarray | list[float] | str"


@dataclass(frozen=True)
class FitConfig:
    eta1: float = 0.1
    eta2: float = 0.08
    max_iters: int = 2000
    init_theta: object = "uniform(-1,1)"
    init_gamma: object = "uniform(-1,1)"
    seed: int = 0
    grad_tol: float = 0.0  # 0 disables early stopping
    box_theta: float | None = None  # clip theta to [-box, box] after each step
    box_gamma: float | None = None

    def __post_init__(self):
        if not (self.eta1 > 0 and self.eta2 > 0):
            raise ValidationError(f"step sizes must be positive, got eta1={self.eta1}, eta2={self.eta2}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.grad_tol < 0:
            raise ValidationError(f"grad_tol must be >= 0, got {self.grad_tol}")
        for name, box in (("box_theta", self.box_theta), ("box_gamma", self.box_gamma)):
            if box is not None and box <= 0:
                raise ValidationError(f"{name} must be positive when set, got {box}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValidationError(f"seed must fit in 64 unsigned bits, got {self.seed}")


@dataclass(frozen=True)
class FitResult:
    """Terminal parameters plus the per-iteration trace.

    ``trace`` has one row per executed iteration with columns
    (loss, ||grad_theta||_2, ||grad_gamma||_2); the loss is evaluated at
    the end of the iteration, the gradient norms are those of the steps
    actually taken.
    """

    params: ModelParams
    iterations_run: int
    trace: np.ndarray  # (iterations_run, 3)
    converged: bool

    @property
    def losses(self) -> np.ndarray:
        return self.trace[:, 0]


def _resolve_init(spec, length: int, rng: np.random.Generator, what: str) -> np.ndarray:
    if isinstance(spec, str):
        m = _UNIFORM_RE.match(spec.strip())
        if not m:
            raise ValidationError(f"{what}: unrecognized init spec {spec!r}; expected 'uniform(lo,hi)'")
        lo, hi = float(m.group(1)), float(m.group(2))
        if not lo < hi:
            raise ValidationError(f"{what}: uniform bounds must satisfy lo < hi, got ({lo}, {hi})")
        return rng.uniform(lo, hi, length)
    arr = np.asarray(spec, dtype=np.float64)
    if arr.shape != (length,):
        raise ValidationError(f"{what}: init vector has shape {arr.shape}, expected ({length},)")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what}: init vector contains non-finite entries")
    return arr.copy()


def alternating_fit(data: PreferenceDataset, config: FitConfig) -> FitResult:
    """Run the alternating descent for up to ``max_iters`` iterations.

    Deterministic given (data, config). Raises FitDivergenceError with
    the iteration index and a parameter snapshot if the loss goes
    non-finite (typically from oversized step sizes).
    """
    rng = np.random.default_rng(config.seed)
    theta = _resolve_init(config.init_theta, data.d1, rng, "init_theta")
    gamma = _resolve_init(config.init_gamma, data.d2, rng, "init_gamma")

    psi0, psi, z, y = data.psi0, data.psi, data.z, data.y
    n = data.n
    one_minus_2y = 1.0 - 2.0 * y

    trace = np.empty((config.max_iters, 3))
    converged = False
    iterations = 0
    # overflow on a divergent path is caught by the loss check below, so
    # numpy's warnings would only be noise
    with np.errstate(over="ignore", invalid="ignore"):
        sig = psi0 + psi @ gamma
        for t in range(config.max_iters):
            u = z @ theta
            mu = sigmoid(sig * u)
            g_theta = -(z.T @ ((y - mu) * sig)) / n
            theta = theta - config.eta1 * g_theta
            if config.box_theta is not None:
                np.clip(theta, -config.box_theta, config.box_theta, out=theta)

            u = z @ theta
            mu = sigmoid(sig * u)
            g_gamma = -(psi.T @ ((y - mu) * u)) / n
            gamma = gamma - config.eta2 * g_gamma
            if config.box_gamma is not None:
                np.clip(gamma, -config.box_gamma, config.box_gamma, out=gamma)

            sig = psi0 + psi @ gamma
            signed = one_minus_2y * (sig * u)
            loss = float(np.mean(np.maximum(signed, 0.0) + np.log1p(np.exp(-np.abs(signed)))))
            gt_norm = float(np.linalg.norm(g_theta))
            gg_norm = float(np.linalg.norm(g_gamma))
            trace[t] = (loss, gt_norm, gg_norm)
            iterations = t + 1
            if not np.isfinite(loss):
                raise FitDivergenceError(iteration=t, theta=theta, gamma=gamma)
            if config.grad_tol > 0 and max(gt_norm, gg_norm) < config.grad_tol:
                converged = True
                break

    return FitResult(
        params=ModelParams(theta=theta, gamma=gamma),
        iterations_run=iterations,
        trace=trace[:iterations].copy(),
        converged=converged,
    )


def loss_trace_monotone_check(result: FitResult, window: int) -> bool:
    """True iff the window-averaged loss never increases along the trace.

    The harness uses this to flag step sizes that make the loss bounce.
    """
    losses = result.losses
    if window < 1:
        raise ValidationError(f"window must be >= 1, got {window}")
    if window > len(losses):
        raise ValidationError(f"window {window} exceeds trace length {len(losses)}")
    kernel = np.ones(window) / window
    smoothed = np.convolve(losses, kernel, mode="valid")
    return bool(np.all(np.diff(smoothed) <= 0.0))
