"""File formats: dataset CSV and artifact/fit-result JSON.

Dataset files are flat CSV with a single comment header line carrying
the format version, dimensions, row count, and a 64-bit content hash of
the data rows, e.g.::

    # hetpref-dataset format_version=1 d1=3 d2=2 n=2 checksum=0011223344556677
    psi0,psi_1,psi_2,z_1,z_2,z_3,y
    ...

Floats are written with 17 significant digits so a write/read round trip
reproduces every double bit-for-bit. ``-`` as a path means stdin/stdout.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .inference import InferenceArtifact
from .model import ModelParams, PreferenceDataset
from .optim import FitResult

__all__ = [
    "DATASET_FORMAT_VERSION",
    "ARTIFACT_FORMAT_VERSION",
    "read_dataset",
    "write_dataset",
    "read_artifact",
    "write_artifact",
    "read_fit_result",
    "write_fit_result",
]

DATASET_FORMAT_VERSION = 1
ARTIFACT_FORMAT_VERSION = 1
FIT_RESULT_FORMAT_VERSION = 1

_MAGIC = "# hetpref-dataset"


def _f(x: float) -> str:
    return format(float(x), ".17g")


def _body_checksum(body: str) -> str:
    return hashlib.blake2b(body.encode("utf-8"), digest_size=8).hexdigest()


def _columns(d1: int, d2: int) -> list[str]:
    return (
        ["psi0"]
        + [f"psi_{j}" for j in range(1, d2 + 1)]
        + [f"z_{j}" for j in range(1, d1 + 1)]
        + ["y"]
    )


def write_dataset(data: PreferenceDataset, path) -> None:
    lines = []
    for i in range(data.n):
        fields = [_f(data.psi0[i])]
        fields += [_f(v) for v in data.psi[i]]
        fields += [_f(v) for v in data.z[i]]
        fields.append(str(int(data.y[i])))
        lines.append(",".join(fields))
    body = "\n".join(lines) + "\n"
    header = (
        f"{_MAGIC} format_version={DATASET_FORMAT_VERSION} "
        f"d1={data.d1} d2={data.d2} n={data.n} checksum={_body_checksum(body)}\n"
    )
    text = header + ",".join(_columns(data.d1, data.d2)) + "\n" + body
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _parse_header(line: str, path) -> dict:
    if not line.startswith(_MAGIC):
        raise ValidationError(f"{path}: not a dataset file (missing '{_MAGIC}' header)")
    fields = {}
    for token in line[len(_MAGIC):].split():
        if "=" not in token:
            raise ValidationError(f"{path}: malformed header token {token!r}")
        key, value = token.split("=", 1)
        fields[key] = value
    for key in ("format_version", "d1", "d2", "n", "checksum"):
        if key not in fields:
            raise ValidationError(f"{path}: header is missing {key!r}")
    try:
        version = int(fields["format_version"])
        d1 = int(fields["d1"])
        d2 = int(fields["d2"])
        n = int(fields["n"])
    except ValueError as exc:
        raise ValidationError(f"{path}: non-integer header field ({exc})") from None
    if version != DATASET_FORMAT_VERSION:
        raise ValidationError(
            f"{path}: unsupported dataset format_version={version}; this build reads version {DATASET_FORMAT_VERSION}"
        )
    return {"d1": d1, "d2": d2, "n": n, "checksum": fields["checksum"]}


def read_dataset(path) -> PreferenceDataset:
    """Parse and fully validate a dataset file.

    Errors name the offending row and column; the checksum guards
    against truncated or hand-edited bodies.
    """
    if path == "-":
        text = sys.stdin.read()
    else:
        p = Path(path)
        if not p.exists():
            raise ValidationError(f"dataset file not found: {path}")
        text = p.read_text(encoding="utf-8")
    lines = text.splitlines(keepends=False)
    if len(lines) < 3:
        raise ValidationError(f"{path}: file too short to be a dataset")
    header = _parse_header(lines[0], path)
    d1, d2, n = header["d1"], header["d2"], header["n"]
    expected_cols = _columns(d1, d2)
    got_cols = lines[1].split(",")
    if got_cols != expected_cols:
        raise ValidationError(
            f"{path}: column header {got_cols!r} does not match the declared dimensions "
            f"(expected {expected_cols!r})"
        )
    rows = lines[2:]
    while rows and rows[-1] == "":
        rows.pop()
    if len(rows) != n:
        raise ValidationError(f"{path}: header declares n={n} but the body has {len(rows)} rows")
    body = "\n".join(rows) + "\n"
    if _body_checksum(body) != header["checksum"]:
        raise ValidationError(f"{path}: body checksum mismatch; the file was modified or truncated")

    psi0 = np.empty(n)
    psi = np.empty((n, d2))
    z = np.empty((n, d1))
    y = np.empty(n)
    width = 1 + d2 + d1 + 1
    for i, row in enumerate(rows, start=1):
        parts = row.split(",")
        if len(parts) != width:
            raise ValidationError(f"{path}: row {i} has {len(parts)} fields, expected {width}")
        try:
            values = [float(v) for v in parts[:-1]]
        except ValueError:
            bad = next(j for j, v in enumerate(parts[:-1]) if not _is_float(v))
            raise ValidationError(
                f"{path}: row {i}, column {expected_cols[bad]!r}: cannot parse {parts[bad]!r} as a number"
            ) from None
        if not all(np.isfinite(values)):
            bad = next(j for j, v in enumerate(values) if not np.isfinite(v))
            raise ValidationError(f"{path}: row {i}, column {expected_cols[bad]!r}: non-finite value")
        if parts[-1] not in ("0", "1"):
            raise ValidationError(f"{path}: row {i}, column 'y': label must be 0 or 1, got {parts[-1]!r}")
        psi0[i - 1] = values[0]
        psi[i - 1] = values[1 : 1 + d2]
        z[i - 1] = values[1 + d2 : 1 + d2 + d1]
        y[i - 1] = float(parts[-1])
    return PreferenceDataset(psi0=psi0, psi=psi, z=z, y=y)


def _is_float(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def _matrix_to_lists(m: np.ndarray) -> list:
    return [[float(v) for v in row] for row in m]


def write_artifact(artifact: InferenceArtifact, path) -> None:
    """Serialize an artifact; refuses matrices that lost symmetry."""
    for name, m in (("s2_theta", artifact.s2_theta), ("s2_gamma", artifact.s2_gamma)):
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise ValidationError(f"refusing to write artifact: {name} is not symmetric")
    payload = {
        "format_version": ARTIFACT_FORMAT_VERSION,
        "kind": "inference_artifact",
        "n": artifact.n,
        "theta": [float(v) for v in artifact.params.theta],
        "gamma": [float(v) for v in artifact.params.gamma],
        "s2_theta": _matrix_to_lists(artifact.s2_theta),
        "s2_gamma": _matrix_to_lists(artifact.s2_gamma),
        "jitter_used": float(artifact.jitter_used),
    }
    _write_json(payload, path)


def read_artifact(path) -> InferenceArtifact:
    payload = _read_json(path, kind="inference_artifact", version=ARTIFACT_FORMAT_VERSION)
    try:
        return InferenceArtifact(
            params=ModelParams(theta=np.array(payload["theta"]), gamma=np.array(payload["gamma"])),
            n=int(payload["n"]),
            s2_theta=np.array(payload["s2_theta"], dtype=np.float64),
            s2_gamma=np.array(payload["s2_gamma"], dtype=np.float64),
            jitter_used=float(payload["jitter_used"]),
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: artifact is missing field {exc}") from None


def write_fit_result(result: FitResult, path) -> None:
    payload = {
        "format_version": FIT_RESULT_FORMAT_VERSION,
        "kind": "fit_result",
        "theta": [float(v) for v in result.params.theta],
        "gamma": [float(v) for v in result.params.gamma],
        "iterations_run": result.iterations_run,
        "converged": result.converged,
        "trace": _matrix_to_lists(result.trace),
    }
    _write_json(payload, path)


def read_fit_result(path) -> FitResult:
    payload = _read_json(path, kind="fit_result", version=FIT_RESULT_FORMAT_VERSION)
    try:
        trace = np.array(payload["trace"], dtype=np.float64).reshape(-1, 3)
        return FitResult(
            params=ModelParams(theta=np.array(payload["theta"]), gamma=np.array(payload["gamma"])),
            iterations_run=int(payload["iterations_run"]),
            trace=trace,
            converged=bool(payload["converged"]),
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: fit result is missing field {exc}") from None


def _write_json(payload: dict, path) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_json(path, kind: str, version: int) -> dict:
    if path == "-":
        text = sys.stdin.read()
    else:
        p = Path(path)
        if not p.exists():
            raise ValidationError(f"file not found: {path}")
        text = p.read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(payload, dict) or payload.get("kind") != kind:
        raise ValidationError(f"{path}: expected a {kind!r} JSON document")
    got = payload.get("format_version")
    if got != version:
        raise ValidationError(
            f"{path}: unsupported {kind} format_version={got}; this build reads version {version}"
        )
    return payload
