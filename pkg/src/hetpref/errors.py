"""Exception hierarchy shared across the package.

Two top-level families matter for callers: ``ValidationError`` for bad
inputs (malformed files, dimension mismatches, out-of-range options) and
``NumericalError`` for failures that arise during computation (divergent
fits, singular information matrices). The CLI maps them to exit codes 1
and 2 respectively.
"""

from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """Input failed validation before any numerical work started."""


class DimensionMismatchError(ValidationError):
    """Vector/matrix length does not match the declared dimensions."""

    def __init__(self, what: str, expected: int, actual: int):
        self.what = what
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what}: expected length {expected}, got {actual}")


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons."""


class FitDivergenceError(NumericalError):
    """The optimizer produced a non-finite loss."""

    def __init__(self, iteration: int, theta: np.ndarray, gamma: np.ndarray):
        self.iteration = iteration
        self.theta = np.array(theta, copy=True)
        self.gamma = np.array(gamma, copy=True)
        super().__init__(
            f"non-finite loss at iteration {iteration}; "
            f"theta={theta!r}, gamma={gamma!r}; "
            "reduce the step sizes or enable box projection"
        )


class SingularInformationError(NumericalError):
    """An information block stayed singular beyond the jitter ladder."""
