"""Dense complex matrix and subspace substrate.

Subspaces are carried as orthonormal frames (``d x k`` matrices with
orthonormal columns). The zero subspace is an honest value with ``k = 0``.
Rank decisions use a singular-value cutoff ``rank_eps * scale`` where ``scale``
defaults to the largest singular value of the matrix at hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Subspace",
    "PartialIsometryCheck",
    "as_matrix",
    "hs_inner",
    "support",
    "kernel",
    "range_space",
    "projector",
    "ominus",
    "complement",
    "intersect",
    "join",
    "subspace_distance",
    "contains",
    "orthonormalize",
    "direct_sum",
    "is_partial_isometry",
    "random_unitary",
    "frobenius",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerances.

    rank_eps is a relative singular-value cutoff; check_eps is the Frobenius
    residual threshold used to accept every operator identity.
    """

    rank_eps: float = 1e-10
    check_eps: float = 1e-9

    def __post_init__(self):
        if not (self.rank_eps > 0 and self.check_eps > 0):
            raise ValidationError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


def as_matrix(a, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-d complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def frobenius(a) -> float:
    return float(np.linalg.norm(a))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^ambient given by an orthonormal frame."""

    ambient: int
    frame: np.ndarray = field(repr=False)

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=complex)
        if f.size == 0:
            f = np.zeros((self.ambient, 0), dtype=complex)
        if f.ndim != 2 or f.shape[0] != self.ambient:
            raise ValidationError(f"frame shape {f.shape} incompatible with ambient {self.ambient}")
        if f.shape[1] > self.ambient:
            raise ValidationError("frame has more columns than the ambient dimension")
        object.__setattr__(self, "frame", _freeze(f))

    @classmethod
    def zero(cls, ambient: int) -> Subspace:
        return cls(ambient, np.zeros((ambient, 0), dtype=complex))

    @classmethod
    def full(cls, ambient: int) -> Subspace:
        return cls(ambient, np.eye(ambient, dtype=complex))

    @classmethod
    def coordinate(cls, ambient: int, indices: Iterable[int]) -> Subspace:
        """span{e_i : i in indices}."""
        idx = sorted(set(int(i) for i in indices))
        return cls(ambient, np.eye(ambient, dtype=complex)[:, idx])

    @classmethod
    def span(cls, vectors, tol: Tolerance = DEFAULT_TOL, ambient: int | None = None) -> Subspace:
        return orthonormalize(vectors, tol, ambient=ambient)

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return projector(self)

    def orthonormality_residual(self) -> float:
        return frobenius(self.frame.conj().T @ self.frame - np.eye(self.dim))

    def __repr__(self):
        return f"Subspace(ambient={self.ambient}, dim={self.dim})"


@dataclass(frozen=True)
class PartialIsometryCheck:
    """Outcome of :func:`is_partial_isometry`. Truthy iff the operator is one."""

    is_partial_isometry: bool
    kind: str | None  # "unitary", "partial_unitary", "general" or None
    residual: float
    rank: int

    def __bool__(self):
        return self.is_partial_isometry


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr(a^* b), conjugate-linear in ``a``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def _svd_split(t: np.ndarray, tol: Tolerance, scale: float | None):
    u, s, vh = np.linalg.svd(t)
    ref = s[0] if (scale is None and s.size) else (scale or 0.0)
    rank = int(np.count_nonzero(s > tol.rank_eps * ref)) if s.size else 0
    return u, s, vh, rank


def support(t, tol: Tolerance = DEFAULT_TOL, *, scale: float | None = None) -> Subspace:
    """supp t = (ker t)^perp = ran t^*."""
    t = as_matrix(t, square=True)
    _, _, vh, r = _svd_split(t, tol, scale)
    return Subspace(t.shape[1], vh[:r].conj().T)


def kernel(t, tol: Tolerance = DEFAULT_TOL, *, scale: float | None = None) -> Subspace:
    """Right null space of a square matrix."""
    t = as_matrix(t, square=True)
    _, _, vh, r = _svd_split(t, tol, scale)
    return Subspace(t.shape[1], vh[r:].conj().T)


def range_space(t, tol: Tolerance = DEFAULT_TOL, *, scale: float | None = None) -> Subspace:
    t = as_matrix(t, square=True)
    u, _, _, r = _svd_split(t, tol, scale)
    return Subspace(t.shape[0], u[:, :r])


def projector(s: Subspace) -> np.ndarray:
    return s.frame @ s.frame.conj().T


def _check_ambient(a: Subspace, b: Subspace):
    if a.ambient != b.ambient:
        raise ValidationError(f"ambient mismatch: {a.ambient} vs {b.ambient}")


def ominus(a: Subspace, b: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """a ⊖ b := a ∩ b^perp.

    Solved exactly as the null space of ``B^* A`` pulled back through ``A``;
    this agrees with projecting ``a`` onto ``b^perp`` whenever ``b`` is
    compatible with ``a`` and stays correct when it is not.
    """
    _check_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return a
    overlap = b.frame.conj().T @ a.frame  # (dim b) x (dim a)
    _, s, vh = np.linalg.svd(overlap)
    # singular values of B^*A are cosines of principal angles to b
    r = int(np.count_nonzero(s > tol.rank_eps))
    null = vh[r:].conj().T
    return Subspace(a.ambient, _reorthonormalize(a.frame @ null))


def complement(a: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    return ominus(Subspace.full(a.ambient), a, tol)


def intersect(a: Subspace, b: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    return ominus(a, complement(b, tol), tol)


def join(subspaces: Sequence[Subspace], tol: Tolerance = DEFAULT_TOL, ambient: int | None = None) -> Subspace:
    """Smallest subspace containing all of ``subspaces`` (orthogonal sum when they are orthogonal)."""
    if not subspaces:
        if ambient is None:
            raise ValidationError("cannot join an empty list without an ambient dimension")
        return Subspace.zero(ambient)
    d = subspaces[0].ambient
    for s in subspaces:
        if s.ambient != d:
            raise ValidationError("ambient mismatch in join")
    cols = np.concatenate([s.frame for s in subspaces], axis=1)
    return orthonormalize(cols.T, tol, ambient=d)


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Frobenius distance between the orthogonal projectors."""
    _check_ambient(a, b)
    return frobenius(projector(a) - projector(b))


def contains(big: Subspace, small: Subspace) -> float:
    """Residual ``||(I - P_big) frame(small)||_F``; zero iff ``small <= big``."""
    _check_ambient(big, small)
    f = small.frame
    return frobenius(f - big.frame @ (big.frame.conj().T @ f))


def _reorthonormalize(cols: np.ndarray) -> np.ndarray:
    if cols.shape[1] == 0:
        return cols
    q, _ = np.linalg.qr(cols)
    return q


def orthonormalize(vectors, tol: Tolerance = DEFAULT_TOL, *, ambient: int | None = None) -> Subspace:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    ``vectors`` is an iterable of length-``d`` vectors (or a ``n x d`` array).
    A vector is dropped when its residual after projection falls below
    ``rank_eps`` times the largest input norm, so earlier vectors win ties.
    """
    vecs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if not vecs:
        if ambient is None:
            raise ValidationError("empty input needs an explicit ambient dimension")
        return Subspace.zero(ambient)
    d = vecs[0].size
    if ambient is not None and ambient != d:
        raise ValidationError(f"vectors have length {d}, expected {ambient}")
    if d == 0:
        raise ValidationError("empty ambient space")
    if any(v.size != d for v in vecs):
        raise ValidationError("vectors do not share an ambient dimension")
    ref = max(np.linalg.norm(v) for v in vecs)
    basis: list[np.ndarray] = []
    if ref == 0:
        return Subspace.zero(d)
    for v in vecs:
        w = v.copy()
        for _ in range(2):
            for q in basis:
                w -= np.vdot(q, w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol.rank_eps * ref:
            basis.append(w / nrm)
        if len(basis) == d:
            break
    frame = np.stack(basis, axis=1) if basis else np.zeros((d, 0), dtype=complex)
    return Subspace(d, frame)


def direct_sum(blocks: Sequence) -> np.ndarray:
    """Block-diagonal matrix from square blocks."""
    if len(blocks) == 0:
        raise ValidationError("direct_sum needs at least one block")
    mats = [as_matrix(b, square=True, name="block") for b in blocks]
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    o = 0
    for m in mats:
        k = m.shape[0]
        out[o:o + k, o:o + k] = m
        o += k
    return out


def is_partial_isometry(v, tol: Tolerance = DEFAULT_TOL) -> PartialIsometryCheck:
    """Test ``v^* v == P_{supp v}`` and classify.

    The classification is the most specific of ``unitary`` (support is the
    whole space), ``partial_unitary`` (support equals range) and ``general``.
    The rank cutoff is absolute since the singular values of a partial
    isometry are 0 or 1; a relative cutoff would read round-off as rank.
    """
    v = as_matrix(v, square=True)
    d = v.shape[0]
    u, s, vh = np.linalg.svd(v)
    r = int(np.count_nonzero(s > tol.rank_eps))
    p_supp = vh[:r].conj().T @ vh[:r]
    residual = frobenius(v.conj().T @ v - p_supp)
    ok = residual <= tol.check_eps
    kind = None
    if ok:
        if r == d:
            kind = "unitary"
        else:
            p_ran = u[:, :r] @ u[:, :r].conj().T
            kind = "partial_unitary" if frobenius(p_supp - p_ran) <= tol.check_eps else "general"
    return PartialIsometryCheck(ok, kind, residual, r)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
