"""Reward-difference testing between two answers to the same prompt.

The interval for the difference uses the per-answer reward variances:
added when the answers come from unrelated generators (Independent), or
combined through the worst-case correlation bound
(sqrt(v0) + sqrt(v1))^2 when they may be dependent (DependentUpperBound).
A Win/Loss verdict requires the whole interval on one side of zero;
anything straddling zero is a Tie.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import NumericalError, ValidationError
from .inference import ConfidenceInterval, InferenceArtifact, normal_quantile, reward_point
from .model import QueryFeatures

__all__ = ["Verdict", "VarianceMode", "TestOutcome", "reward_diff_test", "win_rate"]


class Verdict(str, Enum):
    WIN = "win"
    LOSS = "loss"
    TIE = "tie"


class VarianceMode(str, Enum):
    INDEPENDENT = "independent"
    DEPENDENT_UPPER_BOUND = "dependent_upper_bound"


@dataclass(frozen=True)
class TestOutcome:
    diff_point: float
    ci: ConfidenceInterval
    verdict: Verdict
    variance_mode: VarianceMode


def _quad(artifact: InferenceArtifact, q: QueryFeatures) -> float:
    if len(q.phi) != artifact.params.d1:
        raise ValidationError(f"phi has length {len(q.phi)}, expected {artifact.params.d1}")
    value = float(q.phi @ artifact.s2_theta @ q.phi)
    if value < -1e-12:
        raise NumericalError(f"negative reward variance {value}; covariance is not PSD")
    return max(value, 0.0)


def reward_diff_test(
    artifact: InferenceArtifact,
    q0: QueryFeatures,
    q1: QueryFeatures,
    alpha: float,
    mode: VarianceMode = VarianceMode.INDEPENDENT,
) -> TestOutcome:
    """Test whether the first answer's reward exceeds the second's.

    Positive ``diff_point`` favors ``q0``. Win/Loss use strict
    inequalities, so an interval endpoint exactly at zero is a Tie.
    """
    mode = VarianceMode(mode)
    diff = reward_point(artifact.params, q0) - reward_point(artifact.params, q1)
    v0 = _quad(artifact, q0)
    v1 = _quad(artifact, q1)
    if mode is VarianceMode.INDEPENDENT:
        variance = (v0 + v1) / artifact.n
    else:
        variance = (math.sqrt(v0) + math.sqrt(v1)) ** 2 / artifact.n
    half = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(variance)
    ci = ConfidenceInterval(lower=diff - half, upper=diff + half, alpha=alpha, point=diff)
    if ci.lower > 0.0:
        verdict = Verdict.WIN
    elif ci.upper < 0.0:
        verdict = Verdict.LOSS
    else:
        verdict = Verdict.TIE
    return TestOutcome(diff_point=diff, ci=ci, verdict=verdict, variance_mode=mode)


def win_rate(outcomes: list[TestOutcome]) -> float:
    """Aggregate score: wins count 1, ties 0.5, losses 0."""
    if not outcomes:
        raise ValidationError("win_rate needs at least one outcome")
    score = 0.0
    for outcome in outcomes:
        if outcome.verdict is Verdict.WIN:
            score += 1.0
        elif outcome.verdict is Verdict.TIE:
            score += 0.5
    return score / len(outcomes)
