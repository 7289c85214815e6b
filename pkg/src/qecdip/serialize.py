"""JSON interchange.

Complex matrices are ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` in
row-major order. Python floats round-trip exactly through ``json`` so the
format is bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dip import OperatorSpan
from .errors import ValidationError
from .linalg import DEFAULT_TOL, Subspace, Tolerance
from .qecc import CorrectingCode, QuantumChannel
from .reducing import Partition
from .wold import WoldDecomposition

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "subspace_to_json",
    "subspace_from_json",
    "span_to_json",
    "span_from_json",
    "channel_to_json",
    "channel_from_json",
    "bundle_to_json",
    "bundle_from_json",
    "partition_to_json",
    "partition_from_json",
    "wold_to_json",
    "load_json",
    "dump_json",
]


def _need(obj, *keys):
    if not isinstance(obj, dict):
        raise ValidationError(f"expected a JSON object, got {type(obj).__name__}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ValidationError(f"missing field(s): {', '.join(missing)}")


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValidationError(f"expected a matrix, got shape {a.shape}")
    flat = a.ravel()
    return {
        "rows": a.shape[0],
        "cols": a.shape[1],
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj) -> np.ndarray:
    _need(obj, "rows", "cols", "data")
    r, c = obj["rows"], obj["cols"]
    if not (isinstance(r, int) and isinstance(c, int)) or r < 0 or c < 0:
        raise ValidationError("rows and cols must be non-negative integers")
    try:
        data = np.asarray(obj["data"], dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"matrix data is not a list of [re, im] pairs: {e}") from None
    if r * c == 0:
        return np.zeros((r, c), dtype=complex)
    if data.shape != (r * c, 2):
        raise ValidationError(f"matrix data has shape {data.shape}, expected ({r * c}, 2)")
    if not np.all(np.isfinite(data)):
        raise ValidationError("matrix has non-finite entries")
    return (data[:, 0] + 1j * data[:, 1]).reshape(r, c)


def subspace_to_json(s: Subspace) -> dict:
    return {"ambient": s.ambient, "frame": matrix_to_json(s.frame)}


def subspace_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    _need(obj, "ambient", "frame")
    s = Subspace(int(obj["ambient"]), matrix_from_json(obj["frame"]))
    r = s.orthonormality_residual()
    if r > tol.check_eps:
        raise ValidationError(f"frame columns are not orthonormal (residual {r:.3e})")
    return s


def span_to_json(n: OperatorSpan) -> dict:
    return {"ambient": n.ambient, "basis": [matrix_to_json(b) for b in n.basis]}


def span_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> OperatorSpan:
    _need(obj, "ambient", "basis")
    ops = [matrix_from_json(b) for b in obj["basis"]]
    if not ops:
        raise ValidationError("operator span has an empty basis")
    return OperatorSpan(int(obj["ambient"]), np.stack(ops), tol)


def channel_to_json(ch: QuantumChannel) -> dict:
    return {"kraus": [matrix_to_json(k) for k in ch.kraus]}


def channel_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    _need(obj, "kraus")
    ks = [matrix_from_json(k) for k in obj["kraus"]]
    if not ks:
        raise ValidationError("channel has no Kraus operators")
    return QuantumChannel.of(ks, tol)


def bundle_to_json(cc: CorrectingCode) -> dict:
    return {
        "code": subspace_to_json(cc.code),
        "noise": span_to_json(cc.noise),
        "decoding_basis": span_to_json(cc.decoding_basis),
        "kraus": channel_to_json(cc.channel)["kraus"],
    }


def bundle_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> CorrectingCode:
    _need(obj, "code", "noise", "decoding_basis", "kraus")
    code = subspace_from_json(obj["code"], tol)
    noise = span_from_json(obj["noise"], tol)
    basis = span_from_json(obj["decoding_basis"], tol)
    channel = channel_from_json({"kraus": obj["kraus"]}, tol)
    if len({code.ambient, noise.ambient, basis.ambient, channel.dim}) != 1:
        raise ValidationError("bundle parts act on different spaces")
    return CorrectingCode(code, noise, basis, channel)


def partition_to_json(p: Partition) -> dict:
    return {"ambient": p.ambient, "blocks": [subspace_to_json(b) for b in p.blocks]}


def partition_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> Partition:
    _need(obj, "ambient", "blocks")
    return Partition(int(obj["ambient"]), tuple(subspace_from_json(b, tol) for b in obj["blocks"]), tol)


def wold_to_json(w: WoldDecomposition) -> dict:
    return {
        "wandering": subspace_to_json(w.wandering),
        "multiplicity": w.multiplicity,
        "shift_part": subspace_to_json(w.shift_part),
        "unitary_part": subspace_to_json(w.unitary_part),
        "v_shift": matrix_to_json(w.v_shift),
        "v_unitary": matrix_to_json(w.v_unitary),
        "residual": w.residual,
    }


def load_json(path):
    """Read a JSON file; OSError and decoding problems surface as ValidationError."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror or e}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}") from None


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=1)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
