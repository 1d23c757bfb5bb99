"""Synthetic-data generator and Monte-Carlo studies.

The generator draws scalar prompts, answer pairs, and annotator contexts
from normal distributions and maps them through fixed polynomial
features: ``phi(s, a) = (s^2 a, a^2 s, a s)`` for answers and
``psi0(x) = x``, ``psi(x) = (x^3, x^2)`` for contexts. The second
answer's ``N(0, 2)`` is read as variance 2, i.e. standard deviation
sqrt(2). Labels are Bernoulli draws from the model's win probability at
the ground-truth parameters.

Studies derive one independent seed pair per trial from
``(master seed, trial index)`` through numpy's SeedSequence, so results
are identical no matter how many workers run the trials.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericalError, ValidationError
from .inference import build_artifact, gamma_component_ci, reward_ci
from .model import ModelParams, PreferenceDataset, QueryFeatures, sigmoid
from .optim import FitConfig, alternating_fit

__all__ = [
    "DEFAULT_THETA_STAR",
    "DEFAULT_GAMMA_STAR",
    "SimSpec",
    "ThetaVectorTarget",
    "RewardTarget",
    "CoverageReport",
    "ErrorCurve",
    "DiagnosticsReport",
    "answer_features",
    "generate",
    "coverage_study",
    "error_curves",
    "assumption_diagnostics",
]

DEFAULT_THETA_STAR = (0.25, 0.5, 1.0 / 3.0)
DEFAULT_GAMMA_STAR = (0.5, 1.0 / 3.0)


def answer_features(s: float, a: float) -> QueryFeatures:
    """Generator feature map for a single prompt-answer pair."""
    return QueryFeatures(phi=np.array([s * s * a, a * a * s, a * s]))


@dataclass(frozen=True)
class SimSpec:
    n: int
    seed: int = 0
    theta_star: tuple[float, ...] = DEFAULT_THETA_STAR
    gamma_star: tuple[float, ...] = DEFAULT_GAMMA_STAR

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValidationError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        object.__setattr__(self, "theta_star", tuple(float(v) for v in self.theta_star))
        object.__setattr__(self, "gamma_star", tuple(float(v) for v in self.gamma_star))
        if len(self.theta_star) != 3:
            raise ValidationError("theta_star must have length 3 (the generator features are fixed)")
        if len(self.gamma_star) != 2:
            raise ValidationError("gamma_star must have length 2 (the generator features are fixed)")

    @property
    def true_params(self) -> ModelParams:
        return ModelParams(theta=np.array(self.theta_star), gamma=np.array(self.gamma_star))


def generate(spec: SimSpec) -> PreferenceDataset:
    """Draw one dataset; deterministic in the spec's seed.

    Draw order is fixed (s, a0, a1, x, label uniforms), each as one
    vectorized draw of length n.
    """
    rng = np.random.default_rng(int(spec.seed))
    n = spec.n
    s = rng.normal(0.0, 1.0, n)
    a0 = rng.normal(0.0, 1.0, n)
    a1 = rng.normal(0.0, math.sqrt(2.0), n)
    x = rng.normal(0.0, 1.0, n)

    def phi(a):
        return np.stack([s * s * a, a * a * s, a * s], axis=1)

    z = phi(a1) - phi(a0)
    psi0 = x
    psi = np.stack([x**3, x**2], axis=1)
    theta = np.array(spec.theta_star)
    gamma = np.array(spec.gamma_star)
    prob = sigmoid((psi0 + psi @ gamma) * (z @ theta))
    y = (rng.random(n) < prob).astype(np.float64)
    return PreferenceDataset(psi0=psi0, psi=psi, z=z, y=y)


@dataclass(frozen=True)
class ThetaVectorTarget:
    """Per-component intervals for every entry of theta and gamma.

    A trial's coverage is the fraction of the d1+d2 component intervals
    containing their true value; its length is their mean length.
    """

    def label(self) -> str:
        return "theta_vector"


@dataclass(frozen=True)
class RewardTarget:
    """Interval for the reward at one (prompt, answer) evaluation point."""

    s: float
    a: float

    def label(self) -> str:
        return f"reward(s={self.s:g},a={self.a:g})"


CoverageTarget = "ThetaVectorTarget | RewardTarget"


@dataclass(frozen=True)
class CoverageReport:
    n: int
    trials: int
    alpha: float
    target: str
    coverage_rate: float
    coverage_se: float
    avg_length: float
    length_se: float
    failures: int = 0

    def __post_init__(self):
        if not 0.0 <= self.coverage_rate <= 1.0:
            raise ValidationError(f"coverage rate {self.coverage_rate} outside [0, 1]")
        if self.coverage_se < 0 or self.length_se < 0:
            raise ValidationError("standard errors must be >= 0")


@dataclass(frozen=True)
class ErrorCurve:
    grid: list  # [(n, iters), ...]
    errors: list  # mean ||theta-theta*||^2 + ||gamma-gamma*||^2 per grid point
    trials: int


@dataclass(frozen=True)
class DiagnosticsReport:
    """Empirical versions of the design-conditioning quantities.

    lambda_phi / lambda_psi are the smallest eigenvalues of the two
    design second-moment matrices; m_norm is the spectral norm of the
    cross-information matrix. Informational only.
    """

    lambda_phi: float
    lambda_psi: float
    m_norm: float


def trial_seeds(master_seed: int, *indices: int) -> tuple[int, int]:
    """Counter-derived (data seed, fit seed) for one trial.

    Indices key the trial within the study (for example trial number, or
    grid position plus trial number); the derived streams are independent
    of worker scheduling.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(i) for i in indices))
    data_seed, fit_seed = (int(v) for v in ss.generate_state(2, np.uint64))
    return data_seed, fit_seed


def _coverage_trial(args):
    spec, fit_cfg, alpha, targets, trial_index = args
    data_seed, fit_seed = trial_seeds(spec.seed, trial_index)
    data = generate(replace(spec, seed=data_seed))
    result = alternating_fit(data, replace(fit_cfg, seed=fit_seed))
    artifact = build_artifact(result.params, data)
    true = spec.true_params
    rows = []
    for target in targets:
        if isinstance(target, ThetaVectorTarget):
            covered = []
            lengths = []
            for i in range(data.d1):
                ci = _component_ci_theta(artifact, i, alpha)
                covered.append(ci.contains(true.theta[i]))
                lengths.append(ci.length)
            for i in range(data.d2):
                ci = gamma_component_ci(artifact, i, alpha)
                covered.append(ci.contains(true.gamma[i]))
                lengths.append(ci.length)
            rows.append((float(np.mean(covered)), float(np.mean(lengths))))
        else:
            q = answer_features(target.s, target.a)
            ci = reward_ci(artifact, q, alpha)
            truth = float(true.theta @ q.phi)
            rows.append((float(ci.contains(truth)), ci.length))
    return rows


def _component_ci_theta(artifact, index: int, alpha: float):
    from .inference import ConfidenceInterval, normal_quantile

    point = float(artifact.params.theta[index])
    half = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(
        float(artifact.s2_theta[index, index]) / artifact.n
    )
    return ConfidenceInterval(lower=point - half, upper=point + half, alpha=alpha, point=point)


def _run_trials(fn, args_list, workers: int):
    if workers <= 1:
        return [fn(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list, chunksize=max(1, len(args_list) // (4 * workers))))


def coverage_study(
    spec: SimSpec,
    fit: FitConfig,
    trials: int,
    alpha: float,
    targets: list,
    workers: int = 1,
    on_failure: str = "abort",
    trial_sink=None,
) -> list[CoverageReport]:
    """Monte-Carlo coverage of the intervals at the generator's truth.

    Each trial draws a fresh dataset, fits it, builds the inference
    artifact, and evaluates every requested target. ``on_failure``
    chooses between aborting on a failed trial (default) and skipping it
    while reporting the count. ``trial_sink``, if given, receives
    ``(trial_index, target_label, covered, length)`` per trial and target
    for debugging dumps.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if not targets:
        raise ValidationError("coverage_study needs at least one target")
    if on_failure not in ("abort", "skip"):
        raise ValidationError(f"on_failure must be 'abort' or 'skip', got {on_failure!r}")

    args_list = [(spec, fit, alpha, tuple(targets), k) for k in range(trials)]
    if on_failure == "abort":
        results = _run_trials(_coverage_trial, args_list, workers)
        failures = 0
    else:
        results = []
        failures = 0
        for a in args_list:
            try:
                results.append(_coverage_trial(a))
            except NumericalError:
                failures += 1
        if not results:
            raise NumericalError(f"all {trials} trials failed to fit")

    if trial_sink is not None:
        for k, rows in enumerate(results):
            for target, (covered, length) in zip(targets, rows):
                trial_sink(k, target.label(), covered, length)

    reports = []
    for j, target in enumerate(targets):
        covered = np.array([r[j][0] for r in results])
        lengths = np.array([r[j][1] for r in results])
        k = len(results)
        reports.append(
            CoverageReport(
                n=spec.n,
                trials=k,
                alpha=alpha,
                target=target.label(),
                coverage_rate=float(covered.mean()),
                coverage_se=float(covered.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0,
                avg_length=float(lengths.mean()),
                length_se=float(lengths.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0,
                failures=failures,
            )
        )
    return reports


def _error_trial(args):
    spec, fit_cfg, t_grid, trial_index = args
    data_seed, fit_seed = trial_seeds(spec.seed, trial_index)
    data = generate(replace(spec, seed=data_seed))
    true = spec.true_params
    errs = []
    for t in t_grid:
        result = alternating_fit(data, replace(fit_cfg, max_iters=int(t), seed=fit_seed))
        errs.append(
            float(
                np.sum((result.params.theta - true.theta) ** 2)
                + np.sum((result.params.gamma - true.gamma) ** 2)
            )
        )
    return errs


def error_curves(
    spec: SimSpec,
    fit: FitConfig,
    n_grid: list,
    t_grid: list,
    trials: int,
    workers: int = 1,
) -> ErrorCurve:
    """Mean squared parameter error over an (n, iterations) grid.

    Reruns of the same seed at increasing iteration counts retrace the
    same descent path, so the grid is consistent within a trial.
    """
    if not n_grid or not t_grid:
        raise ValidationError("n_grid and t_grid must be nonempty")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    grid = []
    errors = []
    for n in n_grid:
        spec_n = replace(spec, n=int(n))
        args_list = [(spec_n, fit, tuple(int(t) for t in t_grid), k) for k in range(trials)]
        per_trial = np.array(_run_trials(_error_trial, args_list, workers))
        for j, t in enumerate(t_grid):
            grid.append((int(n), int(t)))
            errors.append(float(per_trial[:, j].mean()))
    return ErrorCurve(grid=grid, errors=errors, trials=trials)


@dataclass(frozen=True)
class SweepPoint:
    """Mean suboptimality of both selection policies at one sample size."""

    n: int
    trials: int
    bon_mean: float
    bon_se: float
    pbon_mean: float
    pbon_se: float
    diff_mean: float  # pbon - bon, paired per trial
    diff_se: float


def _sweep_trial(args):
    spec, fit_cfg, prompts, alpha, trial_key = args
    from .bon import Variant, select, suboptimality

    data_seed, _ = trial_seeds(spec.seed, *trial_key)
    data = generate(replace(spec, seed=data_seed))
    result = alternating_fit(data, fit_cfg)
    artifact = build_artifact(result.params, data)
    truth = np.array(spec.theta_star)
    bon_sels = [select(artifact, cands, Variant.BON) for cands in prompts]
    pbon_sels = [select(artifact, cands, Variant.PBON, alpha=alpha) for cands in prompts]
    return (
        suboptimality(truth, prompts, bon_sels),
        suboptimality(truth, prompts, pbon_sels),
    )


def _solve_answer_for_reward(theta, s: float, value: float) -> tuple[float, ...]:
    """Invert the generator's reward in the answer: the reward is quadratic
    in ``a`` at fixed prompt, theta2*s*a^2 + (theta1*s^2 + theta3*s)*a.
    Returns all real solutions."""
    qa = theta[1] * s
    qb = theta[0] * s * s + theta[2] * s
    if abs(qa) < 1e-12:
        if abs(qb) < 1e-12:
            return ()
        return (value / qb,)
    disc = qb * qb + 4.0 * qa * value
    if disc < 0.0:
        return ()
    root = math.sqrt(disc)
    return ((-qb + root) / (2.0 * qa), (-qb - root) / (2.0 * qa))


def bon_suboptimality_sweep(
    n_values: list,
    trials: int,
    fit: FitConfig,
    alpha: float = 0.05,
    seed: int = 0,
    n_prompts: int = 128,
    gap_lo: float = 0.002,
    gap_hi: float = 1.0,
    wide_scale: float = 2.0,
    narrow_better_frac: float = 1.0,
    workers: int = 1,
) -> list:
    """True-reward gap of best-of-N selection as training data grows.

    Each evaluation prompt pairs a "wide" answer (large features, high
    reward uncertainty) against a "narrow" one whose true reward differs
    by a gap drawn log-uniformly from [gap_lo, gap_hi]; the log-uniform
    ladder keeps gaps comparable to the estimation noise across the whole
    sample-size range, which is what makes the decay exponent measurable.
    ``narrow_better_frac`` of the pairs put the narrow answer on top (the
    configuration where plain argmax suffers the winner's curse). The
    evaluation set is drawn once; fits use fresh data per trial and size.
    """
    from .bon import Candidate

    if trials < 1 or not n_values:
        raise ValidationError("sweep needs at least one n value and one trial")
    if not 0.0 < gap_lo < gap_hi:
        raise ValidationError("gaps must satisfy 0 < gap_lo < gap_hi")
    theta = np.array(DEFAULT_THETA_STAR)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(0xE,)))
    prompts = []
    while len(prompts) < n_prompts:
        s = float(rng.normal())
        a_wide = float(rng.normal(0.0, wide_scale * math.sqrt(2.0)))
        phi_wide = answer_features(s, a_wide)
        r_wide = float(theta @ phi_wide.phi)
        gap = math.exp(rng.uniform(math.log(gap_lo), math.log(gap_hi)))
        sign = 1.0 if rng.random() < narrow_better_frac else -1.0
        # keep pairs with a real feature-width contrast (else both policies
        # see identical uncertainty) but a bounded feature difference: with
        # a near-antipodal pair, the difference of the two estimated
        # rewards is noisier than the whole gap ladder at every n and the
        # prompt degrades into a constant coin flip
        chosen = None
        for a_narrow in _solve_answer_for_reward(theta, s, r_wide + sign * gap):
            if abs(a_narrow) > 0.6 * abs(a_wide):
                continue
            phi_narrow = answer_features(s, float(a_narrow))
            diff_norm = float(np.linalg.norm(phi_wide.phi - phi_narrow.phi))
            if not 1.5 <= diff_norm <= 6.0:
                continue
            chosen = phi_narrow
            break
        if chosen is None:
            continue
        prompts.append((
            Candidate(id="narrow", phi=chosen),
            Candidate(id="wide", phi=phi_wide),
        ))
    prompts = tuple(prompts)

    points = []
    for idx, n in enumerate(n_values):
        spec = SimSpec(n=int(n), seed=seed)
        args_list = [(spec, fit, prompts, alpha, (idx, k)) for k in range(trials)]
        rows = np.array(_run_trials(_sweep_trial, args_list, workers))
        bon = rows[:, 0]
        pbon = rows[:, 1]
        diff = pbon - bon
        root = math.sqrt(trials)
        points.append(SweepPoint(
            n=int(n),
            trials=trials,
            bon_mean=float(bon.mean()),
            bon_se=float(bon.std(ddof=1) / root) if trials > 1 else 0.0,
            pbon_mean=float(pbon.mean()),
            pbon_se=float(pbon.std(ddof=1) / root) if trials > 1 else 0.0,
            diff_mean=float(diff.mean()),
            diff_se=float(diff.std(ddof=1) / root) if trials > 1 else 0.0,
        ))
    return points


def assumption_diagnostics(data: PreferenceDataset, params: ModelParams) -> DiagnosticsReport:
    """Empirical design-conditioning summary at the given parameters."""
    from .model import scales

    sig = scales(params, data)
    u = data.z @ params.theta
    n = data.n
    design_phi = (data.z.T * (sig * sig)) @ data.z / n
    design_psi = (data.psi.T * (u * u)) @ data.psi / n
    w = sigmoid(sig * u)
    w = w * (1.0 - w)
    cross = (data.psi.T * (w * sig * u)) @ data.z / n
    return DiagnosticsReport(
        lambda_phi=float(np.linalg.eigvalsh(0.5 * (design_phi + design_phi.T))[0]),
        lambda_psi=float(np.linalg.eigvalsh(0.5 * (design_psi + design_psi.T))[0]),
        m_norm=float(np.linalg.norm(cross, 2)),
    )
