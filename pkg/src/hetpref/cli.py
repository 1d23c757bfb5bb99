"""Command-line pipeline: simulate -> fit -> infer -> test / bon.

Every subcommand reads an optional flat key=value config file; flags
override config keys, and unknown config keys are rejected. Results are
deterministic JSON given the same config and seed. Each run also writes
``<output>.manifest.json`` (config echo, seed, versions; deterministic)
and ``<output>.timing.json`` (wall time; the only place timestamps go).
Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bon import BonSelection, Candidate, Variant, select
from .compare import VarianceMode, reward_diff_test, win_rate
from .data_io import (
    read_artifact,
    read_dataset,
    read_fit_result,
    write_artifact,
    write_dataset,
    write_fit_result,
)
from .errors import NumericalError, ValidationError
from .inference import build_artifact
from .model import QueryFeatures
from .optim import FitConfig, alternating_fit
from .simulate import (
    RewardTarget,
    SimSpec,
    ThetaVectorTarget,
    coverage_study,
    error_curves,
    generate,
)

SEED_ENV_VAR = "HETPREF_SEED"


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; route through the
    # validation-error path instead so exit codes stay meaningful.
    def error(self, message):
        raise ValidationError(message)


def _read_config(path) -> dict[str, str]:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"config file not found: {path}")
    config = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    return config


class Options:
    """Merged view of config-file keys and CLI flags (flags win)."""

    def __init__(self, config: dict[str, str], flags: dict, allowed: set[str], subcommand: str):
        unknown = set(config) - allowed
        if unknown:
            raise ValidationError(
                f"unknown config key(s) for {subcommand}: {', '.join(sorted(unknown))}"
            )
        self._config = config
        self._flags = flags
        self.resolved: dict[str, object] = {}

    def get(self, key: str, default=None, convert=str):
        flag = self._flags.get(key)
        if flag is not None:
            # typed flags arrive converted from argparse; list-like ones are
            # raw strings and take the same parser as config values
            if isinstance(flag, str) and convert is not str:
                try:
                    value = convert(flag)
                except (TypeError, ValueError) as exc:
                    raise ValidationError(f"flag {key!r}: {exc}") from None
            else:
                value = flag
        elif key in self._config:
            try:
                value = convert(self._config[key])
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"config key {key!r}: {exc}") from None
        else:
            value = default
        self.resolved[key] = value
        return value


def _parse_bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _parse_float_list(v: str) -> list[float]:
    return [float(tok) for tok in v.replace(";", ",").split(",") if tok.strip()]


def _parse_int_list(v: str) -> list[int]:
    return [int(tok) for tok in v.replace(";", ",").split(",") if tok.strip()]


def _resolve_seed(options: Options) -> int:
    seed = options.get("seed", default=None, convert=int)
    if seed is None:
        env = os.environ.get(SEED_ENV_VAR)
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise ValidationError(f"{SEED_ENV_VAR}={env!r} is not an integer") from None
        else:
            seed = 0
    options.resolved["seed"] = seed
    return seed


def _parse_init(value, length: int):
    if value is None:
        return None
    text = str(value).strip()
    if text.startswith("uniform"):
        return text
    if text == "zeros":
        return [0.0] * length
    return _parse_float_list(text)


def _fit_config_from(options: Options, seed: int, d1: int, d2: int) -> FitConfig:
    kwargs = {
        "eta1": options.get("eta1", 0.1, float),
        "eta2": options.get("eta2", 0.08, float),
        "max_iters": options.get("iters", 2000, int),
        "seed": seed,
        "grad_tol": options.get("grad_tol", 0.0, float),
    }
    init_theta = _parse_init(options.get("init_theta", None, str), d1)
    init_gamma = _parse_init(options.get("init_gamma", None, str), d2)
    if init_theta is not None:
        kwargs["init_theta"] = init_theta
    if init_gamma is not None:
        kwargs["init_gamma"] = init_gamma
    box_theta = options.get("box_theta", None, float)
    box_gamma = options.get("box_gamma", None, float)
    if box_theta is not None:
        kwargs["box_theta"] = box_theta
    if box_gamma is not None:
        kwargs["box_gamma"] = box_gamma
    return FitConfig(**kwargs)


def _parse_targets(text: str):
    targets = []
    for token in text.split(";"):
        token = token.strip()
        if not token:
            continue
        if token == "theta":
            targets.append(ThetaVectorTarget())
        elif token.startswith("reward:"):
            values = _parse_float_list(token[len("reward:"):])
            if len(values) != 2:
                raise ValidationError(f"reward target needs 's,a', got {token!r}")
            targets.append(RewardTarget(s=values[0], a=values[1]))
        else:
            raise ValidationError(f"unknown target {token!r}; use 'theta' or 'reward:s,a'")
    if not targets:
        raise ValidationError("no targets given")
    return targets


def _write_manifest(output: str, subcommand: str, options: Options, started: float) -> None:
    resolved = {
        k: (v if isinstance(v, (int, float, str, bool, type(None))) else str(v))
        for k, v in sorted(options.resolved.items())
    }
    manifest = {
        "subcommand": subcommand,
        "config": resolved,
        "versions": {
            "hetpref": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    Path(f"{output}.manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    timing = {
        "wall_time_s": time.time() - started,
        "completed_at": datetime.now(timezone.utc).isoformat(),
    }
    Path(f"{output}.timing.json").write_text(
        json.dumps(timing, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_result(payload: dict, output: str) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


# --------------------------------------------------------------- simulate

_SIMULATE_KEYS = {
    "mode", "n", "trials", "alpha", "seed", "workers", "targets", "output",
    "eta1", "eta2", "iters", "init_theta", "init_gamma", "grad_tol",
    "box_theta", "box_gamma", "n_grid", "t_grid", "theta_star", "gamma_star",
    "on_failure",
}


def _cmd_simulate(args) -> int:
    config = _read_config(args.config) if args.config else {}
    flags = {
        "mode": args.mode, "n": args.n, "trials": args.trials, "alpha": args.alpha,
        "seed": args.seed, "workers": args.workers, "targets": args.targets,
        "output": args.output, "eta1": args.eta1, "eta2": args.eta2,
        "iters": args.iters, "init_theta": args.init_theta, "init_gamma": args.init_gamma,
        "grad_tol": args.grad_tol, "box_theta": args.box_theta, "box_gamma": args.box_gamma,
        "n_grid": args.n_grid, "t_grid": args.t_grid,
        "theta_star": args.theta_star, "gamma_star": args.gamma_star,
        "on_failure": args.on_failure,
    }
    options = Options(config, flags, _SIMULATE_KEYS, "simulate")
    started = time.time()

    mode = options.get("mode", "coverage", str)
    if mode not in ("coverage", "curves", "dataset"):
        raise ValidationError(f"mode must be coverage, curves, or dataset, got {mode!r}")
    seed = _resolve_seed(options)
    output = options.get("output", None, str) or args.output
    if output is None:
        raise ValidationError("an output path is required (--output or config key 'output')")

    theta_star = options.get("theta_star", None, _parse_float_list)
    gamma_star = options.get("gamma_star", None, _parse_float_list)
    spec_kwargs = {"seed": seed}
    if theta_star is not None:
        spec_kwargs["theta_star"] = tuple(theta_star)
    if gamma_star is not None:
        spec_kwargs["gamma_star"] = tuple(gamma_star)

    if mode == "dataset":
        n = options.get("n", None, int)
        if n is None:
            raise ValidationError("dataset mode requires n")
        spec = SimSpec(n=n, **spec_kwargs)
        data = generate(spec)
        write_dataset(data, output)
        if output != "-":
            _write_manifest(output, "simulate", options, started)
        return 0

    fit_cfg = _fit_config_from(options, seed=seed, d1=3, d2=2)
    workers = options.get("workers", 1, int)

    if mode == "coverage":
        n = options.get("n", None, int)
        if n is None:
            raise ValidationError("coverage mode requires n")
        trials = options.get("trials", 100, int)
        alpha = options.get("alpha", 0.05, float)
        targets = _parse_targets(options.get("targets", "theta", str))
        on_failure = options.get("on_failure", "abort", str)
        spec = SimSpec(n=n, **spec_kwargs)
        dump_rows = [] if args.dump_trials else None
        sink = (lambda k, label, covered, length: dump_rows.append((k, label, covered, length))) \
            if dump_rows is not None else None
        reports = coverage_study(
            spec, fit_cfg, trials=trials, alpha=alpha, targets=targets,
            workers=workers, on_failure=on_failure, trial_sink=sink,
        )
        if dump_rows is not None:
            with open(args.dump_trials, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["trial", "target", "covered", "length"])
                writer.writerows(dump_rows)
        payload = {
            "kind": "coverage_study",
            "reports": [
                {
                    "n": r.n, "trials": r.trials, "alpha": r.alpha, "target": r.target,
                    "coverage_rate": r.coverage_rate, "coverage_se": r.coverage_se,
                    "avg_length": r.avg_length, "length_se": r.length_se,
                    "failures": r.failures,
                }
                for r in reports
            ],
        }
        _write_result(payload, output)
        if args.emit_plot_data and output != "-":
            _emit_coverage_csv(payload["reports"], Path(output).with_suffix(".plot.csv"))
    else:
        n_grid = options.get("n_grid", None, _parse_int_list)
        t_grid = options.get("t_grid", None, _parse_int_list)
        if not n_grid or not t_grid:
            raise ValidationError("curves mode requires n_grid and t_grid")
        trials = options.get("trials", 100, int)
        spec = SimSpec(n=n_grid[0], **spec_kwargs)
        curve = error_curves(spec, fit_cfg, n_grid=n_grid, t_grid=t_grid,
                             trials=trials, workers=workers)
        payload = {
            "kind": "error_curves",
            "trials": curve.trials,
            "points": [
                {"n": n, "iters": t, "mean_sq_error": e}
                for (n, t), e in zip(curve.grid, curve.errors)
            ],
        }
        _write_result(payload, output)
        if args.emit_plot_data and output != "-":
            _emit_curve_csv(payload["points"], Path(output).with_suffix(".plot.csv"))

    if output != "-":
        _write_manifest(output, "simulate", options, started)
    return 0


def _emit_coverage_csv(reports, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "series"])
        for r in reports:
            writer.writerow([r["n"], r["coverage_rate"], f"coverage:{r['target']}"])
            writer.writerow([r["n"], r["avg_length"], f"length:{r['target']}"])


def _emit_curve_csv(points, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "series"])
        for p in points:
            writer.writerow([p["iters"], p["mean_sq_error"], f"n={p['n']}"])


# -------------------------------------------------------------------- fit

_FIT_KEYS = {"dataset", "output", "seed", "eta1", "eta2", "iters", "init_theta",
             "init_gamma", "grad_tol", "box_theta", "box_gamma"}


def _cmd_fit(args) -> int:
    config = _read_config(args.config) if args.config else {}
    flags = {
        "dataset": args.dataset, "output": args.output, "seed": args.seed,
        "eta1": args.eta1, "eta2": args.eta2, "iters": args.iters,
        "init_theta": args.init_theta, "init_gamma": args.init_gamma,
        "grad_tol": args.grad_tol, "box_theta": args.box_theta, "box_gamma": args.box_gamma,
    }
    options = Options(config, flags, _FIT_KEYS, "fit")
    started = time.time()
    dataset_path = options.get("dataset", None, str)
    if dataset_path is None:
        raise ValidationError("fit requires a dataset path (--dataset or config key 'dataset')")
    output = options.get("output", None, str)
    if output is None:
        raise ValidationError("an output path is required")
    seed = _resolve_seed(options)
    data = read_dataset(dataset_path)
    fit_cfg = _fit_config_from(options, seed=seed, d1=data.d1, d2=data.d2)
    result = alternating_fit(data, fit_cfg)
    write_fit_result(result, output)
    if output != "-":
        _write_manifest(output, "fit", options, started)
    return 0


# ------------------------------------------------------------------ infer

_INFER_KEYS = {"dataset", "fit", "output", "seed"}


def _cmd_infer(args) -> int:
    config = _read_config(args.config) if args.config else {}
    flags = {"dataset": args.dataset, "fit": args.fit, "output": args.output, "seed": args.seed}
    options = Options(config, flags, _INFER_KEYS, "infer")
    started = time.time()
    dataset_path = options.get("dataset", None, str)
    fit_path = options.get("fit", None, str)
    output = options.get("output", None, str)
    if dataset_path is None or fit_path is None or output is None:
        raise ValidationError("infer requires dataset, fit, and output paths")
    _resolve_seed(options)
    data = read_dataset(dataset_path)
    result = read_fit_result(fit_path)
    artifact = build_artifact(result.params, data)
    write_artifact(artifact, output)
    if output != "-":
        _write_manifest(output, "infer", options, started)
    return 0


# ------------------------------------------------------------------- test

_TEST_KEYS = {"artifact", "pairs", "alpha", "mode", "output", "seed"}


def _read_pairs_csv(path, d1: int):
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"pairs file not found: {path}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise ValidationError(f"{path}: empty pairs file")
    expected = (
        ["pair_id"]
        + [f"phi0_{j}" for j in range(1, d1 + 1)]
        + [f"phi1_{j}" for j in range(1, d1 + 1)]
    )
    if rows[0] != expected:
        raise ValidationError(f"{path}: expected columns {expected!r}, got {rows[0]!r}")
    pairs = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(expected):
            raise ValidationError(f"{path}: row {i} has {len(row)} fields, expected {len(expected)}")
        try:
            phi0 = [float(v) for v in row[1 : 1 + d1]]
            phi1 = [float(v) for v in row[1 + d1 :]]
        except ValueError as exc:
            raise ValidationError(f"{path}: row {i}: {exc}") from None
        pairs.append((row[0], QueryFeatures(np.array(phi0)), QueryFeatures(np.array(phi1))))
    return pairs


def _cmd_test(args) -> int:
    config = _read_config(args.config) if args.config else {}
    flags = {"artifact": args.artifact, "pairs": args.pairs, "alpha": args.alpha,
             "mode": args.mode, "output": args.output, "seed": args.seed}
    options = Options(config, flags, _TEST_KEYS, "test")
    started = time.time()
    artifact_path = options.get("artifact", None, str)
    pairs_path = options.get("pairs", None, str)
    output = options.get("output", None, str)
    if artifact_path is None or pairs_path is None or output is None:
        raise ValidationError("test requires artifact, pairs, and output paths")
    alpha = options.get("alpha", 0.05, float)
    mode_text = options.get("mode", "independent", str)
    try:
        mode = VarianceMode(mode_text)
    except ValueError:
        raise ValidationError(
            f"mode must be 'independent' or 'dependent_upper_bound', got {mode_text!r}"
        ) from None
    _resolve_seed(options)
    artifact = read_artifact(artifact_path)
    pairs = _read_pairs_csv(pairs_path, artifact.params.d1)
    outcomes = []
    results = []
    for pair_id, q0, q1 in pairs:
        outcome = reward_diff_test(artifact, q0, q1, alpha=alpha, mode=mode)
        outcomes.append(outcome)
        results.append({
            "pair_id": pair_id,
            "diff_point": outcome.diff_point,
            "ci_lower": outcome.ci.lower,
            "ci_upper": outcome.ci.upper,
            "verdict": outcome.verdict.value,
        })
    payload = {
        "kind": "reward_diff_tests",
        "alpha": alpha,
        "variance_mode": mode.value,
        "results": results,
        "win_rate": win_rate(outcomes),
    }
    _write_result(payload, output)
    if output != "-":
        _write_manifest(output, "test", options, started)
    return 0


# -------------------------------------------------------------------- bon

_BON_KEYS = {"artifact", "candidates", "variant", "beta", "alpha", "output", "seed"}


def _read_candidates_csv(path, d1: int):
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"candidates file not found: {path}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise ValidationError(f"{path}: empty candidates file")
    base = ["prompt_id", "candidate_id"] + [f"phi_{j}" for j in range(1, d1 + 1)]
    header = rows[0]
    extras = header[len(base):]
    if header[: len(base)] != base or any(col not in ("penalty", "length") for col in extras):
        raise ValidationError(
            f"{path}: expected columns {base + ['[penalty]', '[length]']!r}, got {header!r}"
        )
    has_penalty = "penalty" in extras
    has_length = "length" in extras
    prompts: dict[str, list[Candidate]] = {}
    order: list[str] = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValidationError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        try:
            phi = [float(v) for v in row[2 : 2 + d1]]
            rest = row[2 + d1 :]
            penalty = None
            length = None
            for col, value in zip(extras, rest):
                if value == "":
                    continue
                if col == "penalty":
                    penalty = float(value)
                else:
                    length = int(value)
        except ValueError as exc:
            raise ValidationError(f"{path}: row {i}: {exc}") from None
        cand = Candidate(id=row[1], phi=QueryFeatures(np.array(phi)), penalty=penalty, length=length)
        if row[0] not in prompts:
            prompts[row[0]] = []
            order.append(row[0])
        prompts[row[0]].append(cand)
    return [(pid, prompts[pid]) for pid in order]


def _cmd_bon(args) -> int:
    config = _read_config(args.config) if args.config else {}
    flags = {"artifact": args.artifact, "candidates": args.candidates, "variant": args.variant,
             "beta": args.beta, "alpha": args.alpha, "output": args.output, "seed": args.seed}
    options = Options(config, flags, _BON_KEYS, "bon")
    started = time.time()
    artifact_path = options.get("artifact", None, str)
    candidates_path = options.get("candidates", None, str)
    output = options.get("output", None, str)
    if artifact_path is None or candidates_path is None or output is None:
        raise ValidationError("bon requires artifact, candidates, and output paths")
    variant_text = options.get("variant", "bon", str)
    try:
        variant = Variant(variant_text)
    except ValueError:
        raise ValidationError(
            f"variant must be one of {[v.value for v in Variant]}, got {variant_text!r}"
        ) from None
    beta = options.get("beta", 0.0, float)
    alpha = options.get("alpha", 0.05, float)
    _resolve_seed(options)
    artifact = read_artifact(artifact_path)
    groups = _read_candidates_csv(candidates_path, artifact.params.d1)
    selections = []
    for prompt_id, cands in groups:
        sel = select(artifact, cands, variant=variant, beta=beta, alpha=alpha)
        selections.append({
            "prompt_id": prompt_id,
            "chosen_id": sel.chosen_id,
            "scores": {
                cid: {
                    "point_reward": sc.point_reward,
                    "lower_bound": sc.lower_bound,
                    "regularizer_term": sc.regularizer_term,
                    "objective": sc.objective,
                }
                for cid, sc in sorted(sel.scores.items())
            },
        })
    payload = {
        "kind": "bon_selections",
        "variant": variant.value,
        "beta": beta,
        "alpha": alpha,
        "selections": selections,
    }
    _write_result(payload, output)
    if output != "-":
        _write_manifest(output, "bon", options, started)
    return 0


# ------------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hetpref", description=__doc__)
    parser.add_argument("--verbose", "-v", action="count", default=0)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--output", "-o", help="result path ('-' for stdout)")
        p.add_argument("--seed", type=int, help=f"global seed (fallback: ${SEED_ENV_VAR}, then 0)")

    p_sim = sub.add_parser("simulate", help="synthetic data and Monte-Carlo studies")
    common(p_sim)
    p_sim.add_argument("--mode", choices=["coverage", "curves", "dataset"])
    p_sim.add_argument("--n", type=int)
    p_sim.add_argument("--trials", type=int)
    p_sim.add_argument("--alpha", type=float)
    p_sim.add_argument("--workers", type=int)
    p_sim.add_argument("--targets", help="e.g. 'theta;reward:0.5,0.25'")
    p_sim.add_argument("--eta1", type=float)
    p_sim.add_argument("--eta2", type=float)
    p_sim.add_argument("--iters", type=int)
    p_sim.add_argument("--init-theta", dest="init_theta")
    p_sim.add_argument("--init-gamma", dest="init_gamma")
    p_sim.add_argument("--grad-tol", dest="grad_tol", type=float)
    p_sim.add_argument("--box-theta", dest="box_theta", type=float)
    p_sim.add_argument("--box-gamma", dest="box_gamma", type=float)
    p_sim.add_argument("--n-grid", dest="n_grid", help="e.g. '200,400,600'")
    p_sim.add_argument("--t-grid", dest="t_grid", help="e.g. '10,100,1000'")
    p_sim.add_argument("--theta-star", dest="theta_star")
    p_sim.add_argument("--gamma-star", dest="gamma_star")
    p_sim.add_argument("--on-failure", dest="on_failure", choices=["abort", "skip"])
    p_sim.add_argument("--emit-plot-data", action="store_true",
                       help="also write tidy (x,y,series) CSV next to the result")
    p_sim.add_argument("--dump-trials", metavar="PATH",
                       help="coverage mode: write per-trial (covered, length) CSV for debugging")
    p_sim.set_defaults(func=_cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit model parameters to a dataset")
    common(p_fit)
    p_fit.add_argument("--dataset")
    p_fit.add_argument("--eta1", type=float)
    p_fit.add_argument("--eta2", type=float)
    p_fit.add_argument("--iters", type=int)
    p_fit.add_argument("--init-theta", dest="init_theta")
    p_fit.add_argument("--init-gamma", dest="init_gamma")
    p_fit.add_argument("--grad-tol", dest="grad_tol", type=float)
    p_fit.add_argument("--box-theta", dest="box_theta", type=float)
    p_fit.add_argument("--box-gamma", dest="box_gamma", type=float)
    p_fit.set_defaults(func=_cmd_fit)

    p_inf = sub.add_parser("infer", help="covariance artifact from a dataset and fit result")
    common(p_inf)
    p_inf.add_argument("--dataset")
    p_inf.add_argument("--fit")
    p_inf.set_defaults(func=_cmd_infer)

    p_test = sub.add_parser("test", help="reward-difference verdicts for feature pairs")
    common(p_test)
    p_test.add_argument("--artifact")
    p_test.add_argument("--pairs")
    p_test.add_argument("--alpha", type=float)
    p_test.add_argument("--mode", choices=[m.value for m in VarianceMode])
    p_test.set_defaults(func=_cmd_test)

    p_bon = sub.add_parser("bon", help="best-of-N selection over candidate answers")
    common(p_bon)
    p_bon.add_argument("--artifact")
    p_bon.add_argument("--candidates")
    p_bon.add_argument("--variant", choices=[v.value for v in Variant])
    p_bon.add_argument("--beta", type=float)
    p_bon.add_argument("--alpha", type=float)
    p_bon.set_defaults(func=_cmd_bon)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
