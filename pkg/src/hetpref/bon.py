"""Best-of-N answer selection, with and without pessimism.

The pessimistic variants score a candidate by the lower confidence bound
of its reward instead of the point estimate; this equals the minimum of
theta . phi over the covariance ellipsoid around the fitted theta, so
high-variance candidates get discounted. Regularized variants subtract
beta times a precomputed divergence penalty or an inverse-length term;
the divergences come from upstream tooling and are consumed here as
plain numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ValidationError
from .inference import InferenceArtifact, reward_ci, reward_point
from .model import QueryFeatures

__all__ = ["Variant", "Candidate", "CandidateScore", "BonSelection",
           "pessimistic_reward", "select", "suboptimality"]


class Variant(str, Enum):
    BON = "bon"
    PBON = "pbon"
    BON_KL = "bon_kl"
    PBON_KL = "pbon_kl"
    BON_WD = "bon_wd"
    PBON_WD = "pbon_wd"
    BON_LEN = "bon_len"
    PBON_LEN = "pbon_len"

    @property
    def pessimistic(self) -> bool:
        return self.value.startswith("p")

    @property
    def needs_penalty(self) -> bool:
        return self.value.endswith(("_kl", "_wd"))

    @property
    def needs_length(self) -> bool:
        return self.value.endswith("_len")


@dataclass(frozen=True)
class Candidate:
    """One candidate answer: features plus optional regularizer inputs."""

    id: str
    phi: QueryFeatures
    penalty: float | None = None  # precomputed divergence from the reference policy
    length: int | None = None     # answer length, for the 1/length regularizer

    def __post_init__(self):
        if self.penalty is not None and self.penalty < 0:
            raise ValidationError(f"candidate {self.id!r}: penalty must be >= 0, got {self.penalty}")
        if self.length is not None and self.length <= 0:
            raise ValidationError(f"candidate {self.id!r}: length must be positive, got {self.length}")


@dataclass(frozen=True)
class CandidateScore:
    point_reward: float
    lower_bound: float
    regularizer_term: float
    objective: float


@dataclass(frozen=True)
class BonSelection:
    chosen_id: str
    scores: dict[str, CandidateScore]
    variant: Variant
    beta: float
    alpha: float


def pessimistic_reward(artifact: InferenceArtifact, q: QueryFeatures, alpha: float) -> float:
    """Lower confidence bound of the reward; never above the point estimate."""
    return reward_ci(artifact, q, alpha).lower


def select(
    artifact: InferenceArtifact,
    candidates: list[Candidate],
    variant: Variant,
    beta: float = 0.0,
    alpha: float = 0.05,
) -> BonSelection:
    """Pick the candidate maximizing the variant's objective.

    Ties break toward the lexicographically smallest id so the result
    is independent of candidate order.
    """
    variant = Variant(variant)
    if not candidates:
        raise ValidationError("select needs at least one candidate")
    ids = [c.id for c in candidates]
    if len(set(ids)) != len(ids):
        raise ValidationError("candidate ids must be unique")

    scores: dict[str, CandidateScore] = {}
    best_id: str | None = None
    best_objective = -np.inf
    for cand in candidates:
        point = reward_point(artifact.params, cand.phi)
        lower = pessimistic_reward(artifact, cand.phi, alpha)
        if variant.needs_penalty:
            if cand.penalty is None:
                raise ValidationError(f"candidate {cand.id!r} lacks the penalty required by {variant.value}")
            reg = cand.penalty
        elif variant.needs_length:
            if cand.length is None:
                raise ValidationError(f"candidate {cand.id!r} lacks the length required by {variant.value}")
            reg = 1.0 / cand.length
        else:
            reg = 0.0
        base = lower if variant.pessimistic else point
        objective = base - beta * reg
        scores[cand.id] = CandidateScore(
            point_reward=point, lower_bound=lower, regularizer_term=reg, objective=objective
        )
        if objective > best_objective or (objective == best_objective and cand.id < best_id):
            best_objective = objective
            best_id = cand.id

    return BonSelection(chosen_id=best_id, scores=scores, variant=variant, beta=beta, alpha=alpha)


def suboptimality(
    true_theta: np.ndarray,
    candidates_per_prompt: list[list[Candidate]],
    selections: list[BonSelection],
) -> float:
    """Mean true-reward gap between the per-prompt best candidate and the chosen one.

    Only meaningful in simulation, where the true reward weights are
    known; always >= 0.
    """
    true_theta = np.asarray(true_theta, dtype=np.float64)
    if len(candidates_per_prompt) != len(selections):
        raise ValidationError(
            f"{len(candidates_per_prompt)} candidate sets vs {len(selections)} selections"
        )
    if not selections:
        raise ValidationError("suboptimality needs at least one prompt")
    total = 0.0
    for cands, selection in zip(candidates_per_prompt, selections):
        by_id = {c.id: c for c in cands}
        if selection.chosen_id not in by_id:
            raise ValidationError(f"chosen id {selection.chosen_id!r} not among the prompt's candidates")
        rewards = {cid: float(true_theta @ c.phi.phi) for cid, c in by_id.items()}
        total += max(rewards.values()) - rewards[selection.chosen_id]
    return total / len(selections)
