"""Plug-in covariance estimation and confidence intervals.

The information matrix of the model splits into within-block parts for
the reward and scale parameters plus a cross block. Profiling out the
scale block through a Schur complement yields the covariance ``s2_theta``
of the reward weights; the mirrored complement yields ``s2_gamma``. The
cross block uses the expectation form (residual term dropped), which is
what makes it differ from the cross Hessian block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, SingularInformationError, ValidationError
from .model import (
    ModelParams,
    PreferenceDataset,
    QueryFeatures,
    scales,
    sigmoid,
)

__all__ = [
    "InfoMatrices",
    "InferenceArtifact",
    "ConfidenceInterval",
    "empirical_info",
    "schur_covariances",
    "build_artifact",
    "normal_quantile",
    "reward_point",
    "reward_ci",
    "gamma_component_ci",
]

JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


def _check_symmetric(name: str, m: np.ndarray, atol: float = 1e-12) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.T)) > atol * scale:
        raise ValidationError(f"{name} is not symmetric within tolerance {atol}")


@dataclass(frozen=True)
class InfoMatrices:
    """Empirical information blocks: i_tt (d1,d1), i_gg (d2,d2), i_gt (d2,d1)."""

    i_tt: np.ndarray
    i_gg: np.ndarray
    i_gt: np.ndarray

    def __post_init__(self):
        i_tt = np.asarray(self.i_tt, dtype=np.float64)
        i_gg = np.asarray(self.i_gg, dtype=np.float64)
        i_gt = np.asarray(self.i_gt, dtype=np.float64)
        _check_symmetric("i_tt", i_tt)
        _check_symmetric("i_gg", i_gg)
        if i_gt.shape != (i_gg.shape[0], i_tt.shape[0]):
            raise ValidationError(
                f"i_gt shape {i_gt.shape} does not match (d2, d1)=({i_gg.shape[0]}, {i_tt.shape[0]})"
            )
        if not np.all(np.isfinite(i_gt)):
            raise ValidationError("i_gt contains non-finite entries")
        object.__setattr__(self, "i_tt", i_tt)
        object.__setattr__(self, "i_gg", i_gg)
        object.__setattr__(self, "i_gt", i_gt)


def empirical_info(params: ModelParams, data: PreferenceDataset) -> InfoMatrices:
    """Plug-in information blocks at the supplied parameters.

    The within blocks coincide with the loss Hessian blocks; the cross
    block keeps only the curvature term (no residual), so it vanishes
    identically at theta = 0.
    """
    sig = scales(params, data)
    u = data.z @ params.theta
    w = sigmoid(sig * u)
    w = w * (1.0 - w)
    n = data.n
    i_tt = (data.z.T * (w * sig * sig)) @ data.z / n
    i_gg = (data.psi.T * (w * u * u)) @ data.psi / n
    i_gt = (data.psi.T * (w * sig * u)) @ data.z / n
    return InfoMatrices(
        i_tt=0.5 * (i_tt + i_tt.T), i_gg=0.5 * (i_gg + i_gg.T), i_gt=i_gt
    )


def _spd_solve(a: np.ndarray, b: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    """Solve a @ x = b for symmetric positive-definite ``a``.

    Tries a Cholesky factorization, escalating an added diagonal jitter
    through JITTER_LADDER; returns the solution and the jitter actually
    used. Raises SingularInformationError once the ladder is exhausted.
    """
    eye = np.eye(a.shape[0])
    for eps in JITTER_LADDER:
        a_j = a + eps * eye if eps else a
        try:
            low = np.linalg.cholesky(a_j)
        except np.linalg.LinAlgError:
            continue
        x = np.linalg.solve(low.T, np.linalg.solve(low, b))
        if np.all(np.isfinite(x)):
            return x, eps
    raise SingularInformationError(
        f"{what} is singular even after jitter {JITTER_LADDER[-1]:g}; "
        "the dataset is likely too small or the model ill-posed at these parameters"
    )


def schur_covariances(info: InfoMatrices) -> tuple[np.ndarray, np.ndarray, float]:
    """Covariance estimates for both parameter blocks.

    ``s2_theta`` inverts the gamma-profiled complement
    i_tt - i_gt' i_gg^{-1} i_gt; ``s2_gamma`` mirrors it. Returns the
    two matrices and the largest jitter any factorization needed.
    """
    i_tt, i_gg, i_gt = info.i_tt, info.i_gg, info.i_gt
    d1 = i_tt.shape[0]
    d2 = i_gg.shape[0]

    x, jit1 = _spd_solve(i_gg, i_gt, "i_gg")
    schur_t = i_tt - i_gt.T @ x
    s2_theta, jit2 = _spd_solve(0.5 * (schur_t + schur_t.T), np.eye(d1), "theta Schur complement")

    y, jit3 = _spd_solve(i_tt, i_gt.T, "i_tt")
    schur_g = i_gg - i_gt @ y
    s2_gamma, jit4 = _spd_solve(0.5 * (schur_g + schur_g.T), np.eye(d2), "gamma Schur complement")

    s2_theta = 0.5 * (s2_theta + s2_theta.T)
    s2_gamma = 0.5 * (s2_gamma + s2_gamma.T)
    return s2_theta, s2_gamma, max(jit1, jit2, jit3, jit4)


@dataclass(frozen=True)
class InferenceArtifact:
    """Fitted parameters plus covariance estimates, ready for decisions.

    Everything downstream (intervals, reward comparisons, pessimistic
    selection) consumes this object; it round-trips through JSON via
    data_io so fitting and decision-making can run as separate steps.
    """

    params: ModelParams
    n: int
    s2_theta: np.ndarray
    s2_gamma: np.ndarray
    jitter_used: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"sample count must be >= 1, got {self.n}")
        if self.jitter_used < 0:
            raise ValidationError(f"jitter_used must be >= 0, got {self.jitter_used}")
        s2_theta = np.asarray(self.s2_theta, dtype=np.float64)
        s2_gamma = np.asarray(self.s2_gamma, dtype=np.float64)
        _check_symmetric("s2_theta", s2_theta)
        _check_symmetric("s2_gamma", s2_gamma)
        if s2_theta.shape[0] != self.params.d1:
            raise ValidationError(
                f"s2_theta is {s2_theta.shape[0]}x{s2_theta.shape[0]} but theta has length {self.params.d1}"
            )
        if s2_gamma.shape[0] != self.params.d2:
            raise ValidationError(
                f"s2_gamma is {s2_gamma.shape[0]}x{s2_gamma.shape[0]} but gamma has length {self.params.d2}"
            )
        for name, m in (("s2_theta", s2_theta), ("s2_gamma", s2_gamma)):
            try:
                np.linalg.cholesky(m)
            except np.linalg.LinAlgError:
                raise ValidationError(f"{name} must be positive definite") from None
        object.__setattr__(self, "s2_theta", s2_theta)
        object.__setattr__(self, "s2_gamma", s2_gamma)


def build_artifact(params: ModelParams, data: PreferenceDataset) -> InferenceArtifact:
    """Compute information blocks and covariances for a fitted model."""
    s2_theta, s2_gamma, jitter = schur_covariances(empirical_info(params, data))
    return InferenceArtifact(
        params=params, n=data.n, s2_theta=s2_theta, s2_gamma=s2_gamma, jitter_used=jitter
    )


# Rational approximation of the inverse standard-normal CDF (AS241-class,
# double-precision branch). Absolute error is far below the 1e-9 the
# interval code needs, with no dependency beyond math.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, r: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * r + c
    return acc


def normal_quantile(p: float) -> float:
    """Inverse standard-normal CDF for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValidationError(f"quantile probability must lie in (0, 1), got {p}")
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly(_A, r) / (_poly(_B, r) * r + 1.0)
    r = p if q < 0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        value = _poly(_C, r) / (_poly(_D, r) * r + 1.0)
    else:
        r -= 5.0
        value = _poly(_E, r) / (_poly(_F, r) * r + 1.0)
    return -value if q < 0 else value


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    alpha: float
    point: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.lower <= self.point <= self.upper:
            raise ValidationError(
                f"interval must satisfy lower <= point <= upper, got ({self.lower}, {self.point}, {self.upper})"
            )

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def reward_point(params: ModelParams, q: QueryFeatures) -> float:
    """Estimated reward theta . phi of one prompt-answer pair."""
    if len(q.phi) != params.d1:
        raise ValidationError(
            f"phi has length {len(q.phi)}, expected {params.d1}"
        )
    return float(params.theta @ q.phi)


def _quad_form(s2: np.ndarray, phi: np.ndarray, what: str) -> float:
    value = float(phi @ s2 @ phi)
    if value < -1e-12:
        raise NumericalError(f"{what} produced a negative variance {value}; covariance is not PSD")
    return max(value, 0.0)


def reward_ci(artifact: InferenceArtifact, q: QueryFeatures, alpha: float) -> ConfidenceInterval:
    """Symmetric interval for the reward of one prompt-answer pair."""
    point = reward_point(artifact.params, q)
    quad = _quad_form(artifact.s2_theta, q.phi, "reward variance")
    half = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(quad / artifact.n)
    return ConfidenceInterval(lower=point - half, upper=point + half, alpha=alpha, point=point)


def gamma_component_ci(artifact: InferenceArtifact, index: int, alpha: float) -> ConfidenceInterval:
    """Interval for one scale coefficient; excludes 0 when the effect is significant."""
    d2 = artifact.params.d2
    if not 0 <= index < d2:
        raise ValidationError(f"gamma index {index} out of range [0, {d2})")
    point = float(artifact.params.gamma[index])
    half = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(
        float(artifact.s2_gamma[index, index]) / artifact.n
    )
    return ConfidenceInterval(lower=point - half, upper=point + half, alpha=alpha, point=point)
