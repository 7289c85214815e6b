"""Cyclic shift and clock operators on C^m and the codes they correct.

Conventions: ``zeta = exp(2 pi i / m)``, ``U e_j = e_{j+1}``,
``V = diag(zeta^j)``, ``F[r, j] = zeta^{rj} / sqrt(m)`` and the entangled basis
``phi_j = F^* e_j``. Then ``U = F^* V F`` and ``V phi_j = phi_{j-1}``.

Decoders emit exactly ``m`` Kraus operators. Completeness is checked in the
``sum K^* K = I`` form; ``sum K K^*`` is ``m`` times the code projector.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .dip import OperatorSpan
from .errors import ValidationError
from .linalg import DEFAULT_TOL, Subspace, Tolerance, direct_sum
from .qecc import QuantumChannel

__all__ = [
    "CyclicFrame",
    "CodeTest",
    "cyclic_frame",
    "shift_operator",
    "clock_operator",
    "fourier_operator",
    "entangled_basis",
    "shift_powers",
    "clock_powers",
    "make_shift_code",
    "is_shift_code",
    "make_clock_code",
    "is_clock_code",
    "shift_decoder",
    "clock_decoder",
    "weyl_operator",
    "weyl_family",
    "tensor_weyl_operator",
    "tensor_weyl_family",
    "hs_gram_of",
]


def _check_dim(m) -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValidationError(f"dimension must be a positive integer, got {m!r}")
    return int(m)


@dataclass(frozen=True, eq=False)
class CyclicFrame:
    """Roots of unity and the entangled basis for one dimension ``m``."""

    dim: int
    roots: np.ndarray = field(repr=False)  # zeta^k for k in Z_m
    entangled: np.ndarray = field(repr=False)  # columns phi_j

    @property
    def root(self) -> complex:
        return complex(self.roots[1 % self.dim])

    def power(self, k) -> np.ndarray:
        """``zeta^k`` by index arithmetic mod m (works elementwise)."""
        return self.roots[np.mod(k, self.dim)]


@lru_cache(maxsize=128)
def cyclic_frame(m: int) -> CyclicFrame:
    m = _check_dim(m)
    roots = np.exp(2j * np.pi * np.arange(m) / m)
    roots[0] = 1.0
    roots.flags.writeable = False
    idx = np.arange(m)
    f = roots[np.outer(idx, idx) % m] / np.sqrt(m)
    ent = f.conj().T.copy()
    ent.flags.writeable = False
    return CyclicFrame(m, roots, ent)


def shift_operator(m: int, power: int = 1) -> np.ndarray:
    """``U^power`` with ``U = sum_j |e_{j+1}><e_j|``."""
    m = _check_dim(m)
    u = np.zeros((m, m), dtype=complex)
    j = np.arange(m)
    u[(j + power) % m, j] = 1
    return u


def clock_operator(m: int, power: int = 1) -> np.ndarray:
    """``V^power`` with ``V = diag(1, zeta, ..., zeta^(m-1))``."""
    fr = cyclic_frame(m)
    return np.diag(fr.power(power * np.arange(fr.dim)))


def fourier_operator(m: int) -> np.ndarray:
    return cyclic_frame(m).entangled.conj().T.copy()


def entangled_basis(m: int) -> np.ndarray:
    """Columns ``phi_j = F^* e_j``."""
    return cyclic_frame(m).entangled.copy()


def shift_powers(m: int, count: int | None = None, tol: Tolerance = DEFAULT_TOL) -> OperatorSpan:
    """span{U^r : 0 <= r < count}, all of Z_m by default."""
    m = _check_dim(m)
    count = m if count is None else count
    return OperatorSpan(m, np.stack([shift_operator(m, r) for r in range(count)]), tol)


def clock_powers(m: int, count: int | None = None, tol: Tolerance = DEFAULT_TOL) -> OperatorSpan:
    m = _check_dim(m)
    count = m if count is None else count
    return OperatorSpan(m, np.stack([clock_operator(m, r) for r in range(count)]), tol)


@dataclass(frozen=True)
class CodeTest:
    """Outcome of a flat-coefficient code test. Truthy iff the test passed."""

    passed: bool
    reason: str
    spread: float = float("nan")  # max - min of the squared coefficient moduli

    def __bool__(self):
        return self.passed


def _phases(m: int, thetas) -> np.ndarray:
    th = np.asarray(thetas, dtype=float).ravel()
    if th.size != m:
        raise ValidationError(f"expected {m} phases, got {th.size}")
    return np.exp(1j * th) / np.sqrt(m)


def make_shift_code(m: int, thetas: Sequence[float]) -> Subspace:
    """span{f} with ``f = m^(-1/2) sum_j exp(i theta_j) phi_j``; corrected by {U^r}."""
    fr = cyclic_frame(m)
    f = fr.entangled @ _phases(fr.dim, thetas)
    return Subspace(fr.dim, f[:, None])


def make_clock_code(m: int, thetas: Sequence[float]) -> Subspace:
    """span{g} with ``g = m^(-1/2) sum_j exp(i theta_j) e_j``; corrected by {V^r}."""
    m = _check_dim(m)
    return Subspace(m, _phases(m, thetas)[:, None])


def _flat_test(code: Subspace, basis: np.ndarray, tol: Tolerance) -> CodeTest:
    if code.ambient != basis.shape[0]:
        raise ValidationError(f"code lives in C^{code.ambient}, operators in C^{basis.shape[0]}")
    if code.dim != 1:
        return CodeTest(False, f"code has dimension {code.dim}; only one-dimensional codes are corrected")
    c = basis.conj().T @ code.frame[:, 0]
    w = np.abs(c) ** 2
    spread = float(w.max() - w.min())
    if spread <= tol.check_eps:
        return CodeTest(True, "coefficients have constant modulus", spread)
    return CodeTest(False, f"coefficient moduli vary by {spread:.3e}", spread)


def is_shift_code(code: Subspace, tol: Tolerance = DEFAULT_TOL) -> CodeTest:
    """True iff ``code = span{f}`` with ``|<phi_j, f>|`` constant in ``j``."""
    return _flat_test(code, cyclic_frame(code.ambient).entangled, tol)


def is_clock_code(code: Subspace, tol: Tolerance = DEFAULT_TOL) -> CodeTest:
    """True iff ``code = span{g}`` with ``|<e_j, g>|`` constant in ``j``."""
    return _flat_test(code, np.eye(code.ambient), tol)


def _check_index(j, m):
    if isinstance(j, bool) or int(j) != j or not 0 <= j < m:
        raise ValidationError(f"index {j!r} outside Z_{m}")
    return int(j)


def shift_decoder(j: int, m: int, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """Decoder of span{e_j} against {U^r}: ``K_r = |e_j><e_{j+r}|``."""
    m = _check_dim(m)
    j = _check_index(j, m)
    ks = np.zeros((m, m, m), dtype=complex)
    for r in range(m):
        ks[r, j, (j + r) % m] = 1
    return QuantumChannel(ks, tol)


def clock_decoder(j: int, m: int, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """Decoder of span{phi_j} against {V^r}: ``K_r = |phi_j><phi_{j-r}|``."""
    m = _check_dim(m)
    j = _check_index(j, m)
    ent = cyclic_frame(m).entangled
    ks = np.stack([np.outer(ent[:, j], ent[:, (j - r) % m].conj()) for r in range(m)])
    return QuantumChannel(ks, tol)


def _weyl_args(dims, r, t):
    dims = [_check_dim(m) for m in dims]
    r = [int(x) for x in np.atleast_1d(r)]
    t = [int(x) for x in np.atleast_1d(t)]
    if not dims or len(r) != len(dims) or len(t) != len(dims):
        raise ValidationError(f"need one (r, t) pair per block: dims {len(dims)}, r {len(r)}, t {len(t)}")
    return dims, r, t


def _weyl_block(m, r, t):
    return shift_operator(m, r % m) @ clock_operator(m, t % m)


def weyl_operator(dims: Sequence[int], r, t) -> np.ndarray:
    """Block-diagonal ``W_(r,t) = ⊕_s U_s^{r_s} V_s^{t_s}``."""
    dims, r, t = _weyl_args(dims, r, t)
    return direct_sum([_weyl_block(m, a, b) for m, a, b in zip(dims, r, t)])


def tensor_weyl_operator(dims: Sequence[int], r, t) -> np.ndarray:
    """Tensor-product ``⊗_s U_s^{r_s} V_s^{t_s}`` on the product space."""
    dims, r, t = _weyl_args(dims, r, t)
    out = np.ones((1, 1), dtype=complex)
    for m, a, b in zip(dims, r, t):
        out = np.kron(out, _weyl_block(m, a, b))
    return out


def _labels(dims):
    ranges = [range(m) for m in dims]
    for r in itertools.product(*ranges):
        for t in itertools.product(*ranges):
            yield r, t


def weyl_family(dims: Sequence[int]) -> tuple[list, np.ndarray]:
    """All ``prod m_s^2`` direct-sum Weyl operators with their ``(r, t)`` labels."""
    dims = [_check_dim(m) for m in dims]
    labels = list(_labels(dims))
    return labels, np.stack([weyl_operator(dims, r, t) for r, t in labels])


def tensor_weyl_family(dims: Sequence[int]) -> tuple[list, np.ndarray]:
    dims = [_check_dim(m) for m in dims]
    labels = list(_labels(dims))
    return labels, np.stack([tensor_weyl_operator(dims, r, t) for r, t in labels])


def hs_gram_of(ops: np.ndarray) -> np.ndarray:
    """All Hilbert-Schmidt inner products ``tr(A_a^* A_b)``."""
    flat = ops.reshape(ops.shape[0], -1)
    return flat.conj() @ flat.T
