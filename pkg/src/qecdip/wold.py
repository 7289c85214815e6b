"""Wold decomposition of partial isometries and shift-power codes.

For a partial isometry ``V`` on ``H`` the wandering space is
``L = H ⊖ ran V`` with multiplicity ``m = max{n : V^n L != 0}``.
The shift part ``K = L ⊕ VL ⊕ ... ⊕ V^m L`` reduces ``V``, ``V`` is a
unilateral shift on ``K`` and unitary on ``K^perp = ran V^(m+1)``.

The finite iteration only terminates when every power of ``V`` is again a
partial isometry (a power partial isometry, e.g. unitary ⊕ truncated shifts).
For other partial isometries ``V^n L`` never vanishes and
:class:`NotPowerPartialIsometry` is raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dip import OperatorSpan
from .errors import EmptyCode, InternalMismatch, NotPartialIsometry, NotPowerPartialIsometry, NotShift, ValidationError
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    as_matrix,
    complement,
    frobenius,
    is_partial_isometry,
    join,
    kernel,
    ominus,
    orthonormalize,
    projector,
    range_space,
    subspace_distance,
)
from .qecc import decoding_noise_basis

__all__ = [
    "WoldDecomposition",
    "wandering_space",
    "wold_decompose",
    "is_unilateral_shift",
    "shift_power_code",
    "code_bound",
    "example_v15",
    "truncated_shift",
    "power_span",
    "wold_cross_check",
]


@dataclass(frozen=True, eq=False)
class WoldDecomposition:
    wandering: Subspace
    multiplicity: int
    shift_part: Subspace
    unitary_part: Subspace
    v_shift: np.ndarray = field(repr=False)
    v_unitary: np.ndarray = field(repr=False)
    residual: float = 0.0

    @property
    def is_shift(self) -> bool:
        return self.unitary_part.dim == 0

    @property
    def is_unitary(self) -> bool:
        return self.shift_part.dim == 0


def _require_pi(v, tol: Tolerance) -> np.ndarray:
    v = as_matrix(v, square=True)
    chk = is_partial_isometry(v, tol)
    if not chk:
        raise NotPartialIsometry(f"V^*V differs from the support projection by {chk.residual:.3e}", chk.residual)
    return v


def _wandering(v: np.ndarray, tol: Tolerance) -> tuple[Subspace, int, list[np.ndarray]]:
    d = v.shape[0]
    lsp = complement(range_space(v, tol, scale=1.0), tol)
    if lsp.dim == 0:
        return lsp, 0, []
    iterates = [lsp.frame.copy()]
    x = lsp.frame
    m = 0
    for n in range(1, d + 1):
        x = v @ x
        if np.linalg.norm(x, 2) <= tol.rank_eps:
            break
        if n == d:
            raise NotPowerPartialIsometry(
                "V^n L does not vanish for n = dim H; the powers of V are not partial isometries"
            )
        m = n
        iterates.append(x.copy())
    return lsp, m, iterates


def wandering_space(v, tol: Tolerance = DEFAULT_TOL) -> tuple[Subspace, int]:
    """(L, m) with ``L = H ⊖ ran V``; unitary ``V`` gives ``({0}, 0)``."""
    v = _require_pi(v, tol)
    lsp, m, _ = _wandering(v, tol)
    return lsp, m


def wold_decompose(v, tol: Tolerance = DEFAULT_TOL) -> WoldDecomposition:
    """Split ``V = V_K ⊕ V_{K^perp}`` into its shift and unitary parts.

    ``K`` is assembled from the iterated wandering frames (in increasing power
    order, re-orthonormalized once) while ``K^perp`` is computed independently
    as ``ran V^(m+1)``; the two must be complementary within ``check_eps``.
    """
    v = _require_pi(v, tol)
    d = v.shape[0]
    lsp, m, iterates = _wandering(v, tol)
    if iterates:
        k_space = orthonormalize(np.concatenate(iterates, axis=1).T, tol, ambient=d)
    else:
        k_space = Subspace.zero(d)
    vp = np.linalg.matrix_power(v, m + 1)
    k_perp = range_space(vp, tol, scale=1.0)
    resid = frobenius(projector(k_space) + projector(k_perp) - np.eye(d))
    if resid > tol.check_eps:
        raise InternalMismatch(f"span of V^j L and ran V^(m+1) are not complementary ({resid:.3e})", resid)
    pk = projector(k_space)
    return WoldDecomposition(lsp, m, k_space, k_perp, v @ pk, v @ (np.eye(d) - pk), resid)


def is_unilateral_shift(v, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the unitary part is absent (equivalently V is completely non-unitary)."""
    return wold_decompose(v, tol).is_shift


def power_span(v, t: int, tol: Tolerance = DEFAULT_TOL) -> OperatorSpan:
    """span{V^0, ..., V^t}."""
    v = as_matrix(v, square=True)
    return OperatorSpan(v.shape[0], np.stack([np.linalg.matrix_power(v, j) for j in range(t + 1)]), tol)


def shift_power_code(v, t: int, tol: Tolerance = DEFAULT_TOL) -> tuple[Subspace, OperatorSpan]:
    """Code ``C_t = L ⊖ ker V^t`` decoded by the powers ``{V^0, ..., V^t}`` of a unilateral shift.

    Raises EmptyCode if ``C_t`` collapses to zero numerically.
    """
    v = as_matrix(v, square=True)
    w = wold_decompose(v, tol)
    if not w.is_shift:
        raise NotShift(f"V has a unitary part of dimension {w.unitary_part.dim}")
    if not 0 <= t <= w.multiplicity:
        raise ValidationError(f"t = {t} outside [0, {w.multiplicity}]")
    code = ominus(w.wandering, kernel(np.linalg.matrix_power(v, t), tol, scale=1.0), tol)
    if code.dim == 0:
        raise EmptyCode(f"L ⊖ ker V^{t} is zero")
    noise = power_span(v, t, tol)
    decoding_noise_basis(code, noise, tol)
    return code, noise


def code_bound(v, t: int, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Subspace containing every code corrected by ``span{V^0, ..., V^t}``.

    ``(⊕_{j<=m-t} V^j L) ⊖ ker V^t`` for a unilateral shift; otherwise the
    unitary part ``ran V^(m+1)`` is added in front.
    """
    v = as_matrix(v, square=True)
    w = wold_decompose(v, tol)
    m = w.multiplicity
    if not 0 <= t <= m:
        raise ValidationError(f"t = {t} outside [0, {m}]")
    d = v.shape[0]
    lower = join(
        [Subspace(d, np.linalg.matrix_power(v, j) @ w.wandering.frame) if w.wandering.dim else Subspace.zero(d)
         for j in range(m - t + 1)],
        tol,
        ambient=d,
    )
    bound = ominus(lower, kernel(np.linalg.matrix_power(v, t), tol, scale=1.0), tol)
    if w.is_shift:
        return bound
    return join([w.unitary_part, bound], tol)


def example_v15() -> np.ndarray:
    """Power partial isometry on C^15: a 4-cycle on e0..e3 plus e_k -> e_{k+3} for k = 4..11."""
    v = np.zeros((15, 15), dtype=complex)
    for j in range(4):
        v[(j + 1) % 4, j] = 1
    for k in range(4, 12):
        v[k + 3, k] = 1
    return v


def truncated_shift(n: int) -> np.ndarray:
    """sum_{k<n-1} |e_{k+1}><e_k| on C^n."""
    v = np.zeros((n, n), dtype=complex)
    for k in range(n - 1):
        v[k + 1, k] = 1
    return v


def wold_cross_check(w: WoldDecomposition, v, tol: Tolerance = DEFAULT_TOL) -> dict[str, float]:
    """Residuals of the structural invariants of a decomposition."""
    v = np.asarray(v, dtype=complex)
    d = v.shape[0]
    out = {}
    frames = []
    x = w.wandering.frame
    for _ in range(w.multiplicity + 1):
        frames.append(x)
        x = v @ x
    orth = 0.0
    for a in range(len(frames)):
        for b in range(a + 1, len(frames)):
            orth = max(orth, frobenius(frames[a].conj().T @ frames[b]))
    out["orthogonal_iterates"] = orth
    out["vanishing_power"] = frobenius(x) if w.wandering.dim else 0.0
    pk = projector(w.shift_part)
    pu = projector(w.unitary_part)
    out["shift_invariant"] = frobenius((np.eye(d) - pk) @ v @ pk)
    out["unitary_invariant"] = frobenius((np.eye(d) - pu) @ v @ pu)
    vu = v @ pu
    out["unitary_on_complement"] = frobenius(vu.conj().T @ vu - pu)
    out["split_uniqueness"] = subspace_distance(w.shift_part, complement(range_space(np.linalg.matrix_power(v, w.multiplicity + 1), tol, scale=1.0), tol))
    return out
