"""Scale-heterogeneity pairwise preference model.

A comparison between two answers is labelled ``y = 1`` when the second
answer wins. The win probability is a logistic function of the reward
difference, multiplied by a per-context rationality scale:

    P(y = 1) = sigmoid( scale(x) * theta . z ),
    scale(x) = psi0(x) + gamma . psi(x),

where ``z`` is the feature difference between the two answers. Context
features arrive pre-encoded as numbers (``psi0``, ``psi``); this module
never sees raw prompts or answers. All functions here are pure and
reentrant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, ValidationError

__all__ = [
    "PreferenceSample",
    "PreferenceDataset",
    "ModelParams",
    "QueryFeatures",
    "sigmoid",
    "log_sigmoid",
    "scale_value",
    "preference_prob",
    "neg_log_likelihood",
    "grad_theta",
    "grad_gamma",
    "hessian_blocks",
]


def sigmoid(v):
    """Numerically stable logistic function, scalar or ndarray.

    Exponentials are only ever taken of non-positive values, so the
    result is meaningful for any finite logit (|v| > 700 included).
    """
    v = np.asarray(v, dtype=np.float64)
    e = np.exp(-np.abs(v))
    out = np.where(v >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return out if out.ndim else float(out)


def log_sigmoid(v):
    """log(sigmoid(v)) without intermediate underflow to -inf."""
    v = np.asarray(v, dtype=np.float64)
    out = np.minimum(v, 0.0) - np.log1p(np.exp(-np.abs(v)))
    return out if out.ndim else float(out)


def _as_vector(value, length: int, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{what} must be a 1-d vector, got shape {arr.shape}")
    if arr.shape[0] != length:
        raise DimensionMismatchError(what, expected=length, actual=arr.shape[0])
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class PreferenceSample:
    """One pairwise comparison.

    psi0: scalar anchor feature of the annotator context.
    psi:  remaining context features, length d2.
    z:    answer-feature difference (second minus first), length d1.
    y:    1 if the second answer was preferred, else 0.
    """

    psi0: float
    psi: np.ndarray
    z: np.ndarray
    y: int

    def __post_init__(self):
        object.__setattr__(self, "psi", np.asarray(self.psi, dtype=np.float64))
        object.__setattr__(self, "z", np.asarray(self.z, dtype=np.float64))
        if self.y not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {self.y!r}")
        if not (np.isfinite(self.psi0) and np.all(np.isfinite(self.psi)) and np.all(np.isfinite(self.z))):
            raise ValidationError("sample contains non-finite entries")


@dataclass(frozen=True)
class PreferenceDataset:
    """Array-backed collection of comparisons with fixed (d1, d2).

    Columns are stored as contiguous float arrays so the optimizer and
    the information-matrix code can stay fully vectorized; ``samples``
    materializes row views on demand.
    """

    psi0: np.ndarray  # (n,)
    psi: np.ndarray   # (n, d2)
    z: np.ndarray     # (n, d1)
    y: np.ndarray     # (n,) of {0.0, 1.0}

    def __post_init__(self):
        psi0 = np.ascontiguousarray(self.psi0, dtype=np.float64)
        psi = np.ascontiguousarray(self.psi, dtype=np.float64)
        z = np.ascontiguousarray(self.z, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        for name, arr, ndim in (("psi0", psi0, 1), ("psi", psi, 2), ("z", z, 2), ("y", y, 1)):
            if arr.ndim != ndim:
                raise ValidationError(f"{name} must be {ndim}-d, got shape {arr.shape}")
        n = psi0.shape[0]
        if n < 1:
            raise ValidationError("dataset must contain at least one sample")
        if not (psi.shape[0] == z.shape[0] == y.shape[0] == n):
            raise ValidationError(
                f"column lengths disagree: psi0={n}, psi={psi.shape[0]}, z={z.shape[0]}, y={y.shape[0]}"
            )
        if not all(np.all(np.isfinite(a)) for a in (psi0, psi, z)):
            raise ValidationError("dataset contains non-finite feature entries")
        if not np.all((y == 0.0) | (y == 1.0)):
            bad = int(np.flatnonzero((y != 0.0) & (y != 1.0))[0])
            raise ValidationError(f"labels must be 0 or 1; sample {bad} has y={float(y[bad])!r}")
        object.__setattr__(self, "psi0", psi0)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.psi0.shape[0]

    @property
    def d1(self) -> int:
        return self.z.shape[1]

    @property
    def d2(self) -> int:
        return self.psi.shape[1]

    def __len__(self) -> int:
        return self.n

    def sample(self, i: int) -> PreferenceSample:
        return PreferenceSample(
            psi0=float(self.psi0[i]), psi=self.psi[i].copy(), z=self.z[i].copy(), y=int(self.y[i])
        )

    @property
    def samples(self) -> list[PreferenceSample]:
        return [self.sample(i) for i in range(self.n)]

    @classmethod
    def from_samples(cls, samples, d1: int | None = None, d2: int | None = None) -> "PreferenceDataset":
        samples = list(samples)
        if not samples:
            raise ValidationError("dataset must contain at least one sample")
        if d1 is None:
            d1 = len(samples[0].z)
        if d2 is None:
            d2 = len(samples[0].psi)
        for i, s in enumerate(samples):
            if len(s.z) != d1:
                raise DimensionMismatchError(f"sample {i} z", expected=d1, actual=len(s.z))
            if len(s.psi) != d2:
                raise DimensionMismatchError(f"sample {i} psi", expected=d2, actual=len(s.psi))
        return cls(
            psi0=np.array([s.psi0 for s in samples]),
            psi=np.array([s.psi for s in samples]).reshape(len(samples), d2),
            z=np.array([s.z for s in samples]).reshape(len(samples), d1),
            y=np.array([s.y for s in samples], dtype=np.float64),
        )


@dataclass(frozen=True)
class ModelParams:
    """Reward weights ``theta`` (length d1) and scale weights ``gamma`` (length d2)."""

    theta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        gamma = np.asarray(self.gamma, dtype=np.float64)
        if theta.ndim != 1 or gamma.ndim != 1:
            raise ValidationError("theta and gamma must be 1-d vectors")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(gamma))):
            raise ValidationError("parameters contain non-finite entries")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def d1(self) -> int:
        return self.theta.shape[0]

    @property
    def d2(self) -> int:
        return self.gamma.shape[0]


@dataclass(frozen=True)
class QueryFeatures:
    """Feature vector of a single prompt-answer pair, length d1."""

    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        if phi.ndim != 1:
            raise ValidationError(f"phi must be a 1-d vector, got shape {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValidationError("phi contains non-finite entries")
        object.__setattr__(self, "phi", phi)


def _check_dims(params: ModelParams, data: PreferenceDataset) -> None:
    if params.d1 != data.d1:
        raise DimensionMismatchError("theta vs dataset z", expected=data.d1, actual=params.d1)
    if params.d2 != data.d2:
        raise DimensionMismatchError("gamma vs dataset psi", expected=data.d2, actual=params.d2)


def scales(params: ModelParams, data: PreferenceDataset) -> np.ndarray:
    """Rationality scale psi0 + gamma . psi for every row, shape (n,)."""
    _check_dims(params, data)
    return data.psi0 + data.psi @ params.gamma


def logits(params: ModelParams, data: PreferenceDataset) -> np.ndarray:
    """Per-row logit scale * (theta . z), shape (n,)."""
    return scales(params, data) * (data.z @ params.theta)


def scale_value(params: ModelParams, sample: PreferenceSample) -> float:
    """Rationality scale of one sample; negative means an adversarial annotator."""
    gamma = _as_vector(params.gamma, len(sample.psi), "gamma vs sample psi")
    return float(sample.psi0 + gamma @ sample.psi)


_PROB_LO = float(np.nextafter(0.0, 1.0))
_PROB_HI = float(np.nextafter(1.0, 0.0))


def preference_prob(params: ModelParams, sample: PreferenceSample) -> float:
    """P(second answer preferred); strictly inside (0, 1) for finite inputs.

    Logits past the float64 saturation point (~|37|) map to the nearest
    representable double inside the open interval.
    """
    theta = _as_vector(params.theta, len(sample.z), "theta vs sample z")
    p = float(sigmoid(scale_value(params, sample) * (theta @ sample.z)))
    return min(max(p, _PROB_LO), _PROB_HI)


def neg_log_likelihood(params: ModelParams, data: PreferenceDataset) -> float:
    """Mean negative log-likelihood of the dataset; always >= 0.

    Computed through a log-sum-exp-stable softplus of the signed logit,
    so extreme logits give a large finite penalty instead of -inf from
    log of an underflowed probability.
    """
    v = logits(params, data)
    signed = (1.0 - 2.0 * data.y) * v
    return float(np.mean(np.maximum(signed, 0.0) + np.log1p(np.exp(-np.abs(signed)))))


def grad_theta(params: ModelParams, data: PreferenceDataset) -> np.ndarray:
    """Gradient of the loss in theta: -(1/n) sum (y - mu) * scale * z."""
    sig = scales(params, data)
    mu = sigmoid(sig * (data.z @ params.theta))
    return -(data.z.T @ ((data.y - mu) * sig)) / data.n


def grad_gamma(params: ModelParams, data: PreferenceDataset) -> np.ndarray:
    """Gradient of the loss in gamma: -(1/n) sum (y - mu) * (theta . z) * psi."""
    sig = scales(params, data)
    u = data.z @ params.theta
    mu = sigmoid(sig * u)
    return -(data.psi.T @ ((data.y - mu) * u)) / data.n


def hessian_blocks(
    params: ModelParams, data: PreferenceDataset
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Second-derivative blocks of the loss.

    Returns ``(h_tt, h_gg, h_gt)`` where ``h_tt`` (d1 x d1) and ``h_gg``
    (d2 x d2) are the within-block Hessians, both positive semidefinite
    at every parameter point, and ``h_gt`` (d2 x d1) is the cross block,
    which keeps a residual term and is what breaks joint convexity.
    """
    sig = scales(params, data)
    u = data.z @ params.theta
    mu = sigmoid(sig * u)
    w = mu * (1.0 - mu)
    n = data.n
    h_tt = (data.z.T * (w * sig * sig)) @ data.z / n
    h_gg = (data.psi.T * (w * u * u)) @ data.psi / n
    resid = data.y - mu - w * sig * u
    h_gt = -(data.psi.T * resid) @ data.z / n
    h_tt = 0.5 * (h_tt + h_tt.T)
    h_gg = 0.5 * (h_gg + h_gg.T)
    return h_tt, h_gg, h_gt
