"""The code-decoding inner product on a noise span.

For a code ``C`` and a span of noise operators ``N``, the decoding inner product
is the unique inner product ``phi`` on ``N`` with

    P_C N^* M P_C = phi(N, M) P_C        for all N, M in N.

It exists exactly when ``C`` corrects ``N``. Here ``phi`` is carried as its Gram
matrix in a chosen basis of ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateGram, EquivalenceFailure, NotDecodable, ValidationError
from .linalg import DEFAULT_TOL, Subspace, Tolerance, as_matrix, frobenius, projector
from .sampling import complex_gaussian, random_state_in, random_subspace_of, random_vector_in, rng_from

__all__ = [
    "OperatorSpan",
    "DecodingGram",
    "NoiseSplit",
    "PhiBasis",
    "EquivalenceReport",
    "split_negligible",
    "compute_gram",
    "verify_equivalences",
    "phi_onb",
    "inner_product_from_positive",
    "dimension_bound",
]


@dataclass(frozen=True, eq=False)
class OperatorSpan:
    """A linearly independent list of ``d x d`` operators spanning a noise subspace."""

    ambient: int
    basis: np.ndarray = field(repr=False)  # shape (t, d, d)
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        ops = np.asarray(self.basis, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise ValidationError("an operator span needs a non-empty list of matrices")
        if ops.shape[1:] != (self.ambient, self.ambient):
            raise ValidationError(f"operators of shape {ops.shape[1:]} do not act on C^{self.ambient}")
        if not np.all(np.isfinite(ops)):
            raise ValidationError("operator entries must be finite")
        ev = np.linalg.eigvalsh(_hs_gram(ops))
        if ev[-1] <= 0 or ev[0] <= self.tol.rank_eps * ev[-1]:
            raise ValidationError("basis operators are linearly dependent")
        ops = ops.copy()
        ops.flags.writeable = False
        object.__setattr__(self, "basis", ops)

    @classmethod
    def of(cls, ops: Sequence, tol: Tolerance = DEFAULT_TOL) -> OperatorSpan:
        mats = [as_matrix(o, square=True, name="noise operator") for o in ops]
        if not mats:
            raise ValidationError("an operator span needs a non-empty list of matrices")
        return cls(mats[0].shape[0], np.stack(mats), tol)

    @property
    def count(self) -> int:
        return self.basis.shape[0]

    def __len__(self):
        return self.count

    def __iter__(self):
        return iter(self.basis)

    def __getitem__(self, i):
        return self.basis[i]

    def combine(self, coeffs) -> np.ndarray:
        """sum_j c_j N_j."""
        return np.tensordot(np.asarray(coeffs, dtype=complex), self.basis, axes=1)

    def hs_gram(self) -> np.ndarray:
        return _hs_gram(self.basis)

    def coordinates(self, op) -> np.ndarray:
        """Coefficients of ``op`` in this basis (least squares in the HS metric)."""
        a = self.basis.reshape(self.count, -1).T
        c, *_ = np.linalg.lstsq(a, np.asarray(op, dtype=complex).ravel(), rcond=None)
        return c

    def truncate(self, n: int) -> OperatorSpan:
        return OperatorSpan(self.ambient, self.basis[:n], self.tol)


def _hs_gram(ops: np.ndarray) -> np.ndarray:
    flat = ops.reshape(ops.shape[0], -1)
    return flat.conj() @ flat.T


@dataclass(frozen=True, eq=False)
class DecodingGram:
    """Gram matrix ``G[j, k] = phi(N_j, N_k)`` of an inner product on a span."""

    gram: np.ndarray
    basis: OperatorSpan = field(repr=False)
    max_residual: float = 0.0
    worst_pair: tuple[int, int] | None = None

    def inner(self, a, b) -> complex:
        """phi(a, b) for operators a, b in the span."""
        ca = self.basis.coordinates(a)
        cb = self.basis.coordinates(b)
        return complex(ca.conj() @ self.gram @ cb)

    def matrix_for(self, ops: Sequence) -> np.ndarray:
        """Gram matrix of ``phi`` re-evaluated on another list of operators."""
        c = np.stack([self.basis.coordinates(o) for o in ops], axis=1)
        return c.conj().T @ self.gram @ c


@dataclass(frozen=True)
class NoiseSplit:
    """``N = effective (+) negligible`` with the negligible part killing the code."""

    effective: OperatorSpan | None
    negligible: OperatorSpan | None

    @property
    def has_negligible(self) -> bool:
        return self.negligible is not None


def _code_images(code: Subspace, noise: OperatorSpan) -> np.ndarray:
    # A[j] = N_j Q, with Q the code frame
    return noise.basis @ code.frame


def _check_shared(code: Subspace, noise: OperatorSpan):
    if code.ambient != noise.ambient:
        raise ValidationError(f"code lives in C^{code.ambient}, noise acts on C^{noise.ambient}")


def split_negligible(code: Subspace, noise: OperatorSpan, tol: Tolerance = DEFAULT_TOL) -> NoiseSplit:
    """Split off the operators ``n`` with ``n P_C = 0``.

    The negligible part is the null space of ``c -> sum_j c_j N_j P_C`` taken in
    an HS-orthonormal coordinate system of ``N``; the effective part is its
    HS-orthogonal complement. When nothing is negligible the input span is
    returned unchanged as the effective part.
    """
    _check_shared(code, noise)
    t, d = noise.count, noise.ambient
    if code.dim == 0:
        return NoiseSplit(None, noise)
    # HS-orthonormal coordinates for N
    flat = noise.basis.reshape(t, -1).T  # d^2 x t
    q, _ = np.linalg.qr(flat)
    w_ops = q.T.reshape(t, d, d)
    images = (w_ops @ code.frame).reshape(t, -1).T  # (d*k) x t
    _, s, vh = np.linalg.svd(images)
    # the w_ops are HS-orthonormal and the code frame is orthonormal, so the
    # images have natural scale 1 and the cutoff is absolute
    r = int(np.count_nonzero(s > tol.rank_eps))
    if r == t:
        return NoiseSplit(noise, None)
    null = vh[r:].conj().T  # t x (t - r)
    keep = vh[:r].conj().T
    negligible = OperatorSpan(d, np.tensordot(null.T, w_ops, axes=1), noise.tol)
    effective = OperatorSpan(d, np.tensordot(keep.T, w_ops, axes=1), noise.tol) if r else None
    return NoiseSplit(effective, negligible)


def compute_gram(code: Subspace, noise: OperatorSpan, tol: Tolerance = DEFAULT_TOL) -> DecodingGram:
    """Gram matrix of the decoding inner product, or raise.

    Each entry is estimated as ``tr(P N_j^* N_k P) / dim C`` and then validated
    by the residual ``||P N_j^* N_k P - lambda_jk P||_F <= check_eps``.

    Raises
    ------
    NotDecodable
        Some residual exceeds ``check_eps``; carries the worst pair.
    DegenerateGram
        The span contains negligible noise or the Gram is not positive definite.
    """
    _check_shared(code, noise)
    if code.dim == 0:
        raise ValidationError("the code must be a nonzero subspace")
    split = split_negligible(code, noise, tol)
    if split.has_negligible:
        raise DegenerateGram(
            f"noise span has {split.negligible.count} negligible direction(s) with N P_C = 0; "
            "call split_negligible and use the effective part"
        )
    k = code.dim
    a = _code_images(code, noise)  # t x d x k
    # B[j, k] = A_j^* A_k = Q^* N_j^* N_k Q  (k x k blocks)
    blocks = np.einsum("jab,lac->jlbc", a.conj(), a)
    lam = np.trace(blocks, axis1=2, axis2=3) / k
    resid = np.linalg.norm(blocks - lam[:, :, None, None] * np.eye(k), axis=(2, 3))
    j, l = np.unravel_index(int(np.argmax(resid)), resid.shape)
    worst = float(resid[j, l])
    if worst > tol.check_eps:
        raise NotDecodable(
            f"no decoding inner product: pair ({j}, {l}) has residual {worst:.3e}",
            pair=(int(j), int(l)),
            residual=worst,
        )
    gram = 0.5 * (lam + lam.conj().T)
    ev = np.linalg.eigvalsh(gram)
    if ev[-1] <= 0 or ev[0] <= tol.rank_eps * ev[-1]:
        raise DegenerateGram("decoding Gram matrix is not positive definite", float(ev[0]))
    return DecodingGram(gram, noise, worst, (int(j), int(l)))


@dataclass
class EquivalenceReport:
    """Max residual observed for each characterization of the decoding inner product."""

    residuals: dict[str, float]
    n_samples: int

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def passed(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.max_residual <= tol.check_eps


def verify_equivalences(
    code: Subspace,
    noise: OperatorSpan,
    gram: DecodingGram,
    tol: Tolerance = DEFAULT_TOL,
    n_samples: int = 20,
    seed=0,
    strict: bool = True,
) -> EquivalenceReport:
    """Sample the equivalent characterizations of ``phi`` and report residuals.

    Conditions checked on random ``u, v in C``, states ``rho`` in ``C``,
    subspaces ``F <= C`` and ``N, M`` in the span:

    * ``ii``:  <N u, M v> = phi(N, M) <u, v>
    * ``iii``: tr(rho N^* M) = phi(N, M)
    * ``iv``:  P_F N^* M P_F = phi(N, M) P_F
    * ``v``:   phi(N, N)^(-1/2) N P_F is a partial isometry onto F

    With ``strict`` the first failing condition raises :class:`EquivalenceFailure`.
    """
    rng = rng_from(seed)
    g = gram.gram
    res = {"ii": 0.0, "iii": 0.0, "iv": 0.0, "v": 0.0}
    for _ in range(n_samples):
        cn = complex_gaussian(rng, noise.count)
        cm = complex_gaussian(rng, noise.count)
        cn /= np.linalg.norm(cn)
        cm /= np.linalg.norm(cm)
        n_op, m_op = noise.combine(cn), noise.combine(cm)
        phi_nm = cn.conj() @ g @ cm
        phi_nn = float((cn.conj() @ g @ cn).real)

        u, v = random_vector_in(code, rng), random_vector_in(code, rng)
        res["ii"] = max(res["ii"], abs(np.vdot(n_op @ u, m_op @ v) - phi_nm * np.vdot(u, v)))

        rho = random_state_in(code, rng)
        res["iii"] = max(res["iii"], abs(np.trace(rho @ n_op.conj().T @ m_op) - phi_nm))

        f = random_subspace_of(code, rng)
        pf = projector(f)
        res["iv"] = max(res["iv"], frobenius(pf @ n_op.conj().T @ m_op @ pf - phi_nm * pf))

        x = n_op @ pf / np.sqrt(phi_nn)
        res["v"] = max(res["v"], frobenius(x.conj().T @ x - pf))
    report = EquivalenceReport(res, n_samples)
    if strict:
        for label, r in res.items():
            if r > tol.check_eps:
                raise EquivalenceFailure(label, r)
    return report


@dataclass(frozen=True)
class PhiBasis:
    """Bases of a span adapted to an inner product ``phi``.

    ``orthonormal`` is phi-orthonormal (basis @ G^{-1/2}). ``hs_basis`` is
    HS-orthonormal and phi-orthogonal, with ``weights[a] = phi(U_a, U_a)`` so
    that ``phi(N, M) = sum_a weights[a] <N, U_a>_2 <U_a, M>_2``.
    """

    orthonormal: OperatorSpan
    hs_basis: OperatorSpan
    weights: np.ndarray
    code_residual: float | None = None


def _inv_sqrt_psd(g: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(g)
    return (v / np.sqrt(w)) @ v.conj().T


def phi_onb(
    noise: OperatorSpan,
    gram: DecodingGram,
    code: Subspace | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> PhiBasis:
    """Orthonormalize a span with respect to ``phi``.

    When ``code`` is given, also checks that the normalized restrictions
    ``w_a^{-1/2} U_a P_C`` satisfy ``X_a^* X_b = delta_ab P_C`` and records the
    largest deviation as ``code_residual``.
    """
    g = 0.5 * (gram.gram + gram.gram.conj().T)
    ev = np.linalg.eigvalsh(g)
    if ev[-1] <= 0 or ev[0] <= tol.rank_eps * ev[-1]:
        raise DegenerateGram("Gram matrix is not positive definite", float(ev[0]))
    if g.shape != (noise.count, noise.count):
        raise ValidationError("Gram matrix does not match the size of the basis")
    x = _inv_sqrt_psd(g)
    ortho = OperatorSpan(noise.ambient, np.tensordot(x.T, noise.basis, axes=1), noise.tol)

    h = noise.hs_gram()
    w, vecs = scipy.linalg.eigh(g, h)  # vecs^* h vecs = I, vecs^* g vecs = diag(w)
    hs_ops = np.tensordot(vecs.T, noise.basis, axes=1)
    hs = OperatorSpan(noise.ambient, hs_ops, noise.tol)

    code_res = None
    if code is not None:
        pc = projector(code)
        xs = hs_ops @ pc / np.sqrt(w)[:, None, None]
        code_res = 0.0
        for a in range(len(w)):
            for b in range(len(w)):
                target = pc if a == b else 0.0
                code_res = max(code_res, frobenius(xs[a].conj().T @ xs[b] - target))
    return PhiBasis(ortho, hs, w, code_res)


def inner_product_from_positive(base_onb: OperatorSpan, weights, tol: Tolerance = DEFAULT_TOL) -> DecodingGram:
    """Inner product ``phi(f, g) = sum_j w_j <f, u_j>_2 <u_j, g>_2`` on an HS-orthonormal basis.

    Its Gram matrix in ``base_onb`` is ``diag(weights)``.
    """
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != base_onb.count:
        raise ValidationError(f"{w.size} weights for {base_onb.count} basis operators")
    if np.any(w <= 0):
        raise ValidationError("weights must be strictly positive")
    if frobenius(base_onb.hs_gram() - np.eye(base_onb.count)) > tol.check_eps:
        raise ValidationError("base operators are not Hilbert-Schmidt orthonormal")
    return DecodingGram(np.diag(w).astype(complex), base_onb)


def dimension_bound(code: Subspace, noise: OperatorSpan) -> bool:
    """Necessary condition ``dim N * dim C <= dim H`` for a decoding inner product."""
    _check_shared(code, noise)
    return noise.count * code.dim <= code.ambient
