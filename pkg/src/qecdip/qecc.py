"""Knill-Laflamme checking, decoding noise bases and decoding channels.

Index convention: for a decoding basis ``N_1, ..., N_t`` the synthesized
channel has ``t + 1`` Kraus operators, ``K_j = P_C N_j^*`` followed by the
complementary projection ``I - sum_j K_j^* K_j``. The complementary operator is
always emitted, even when it is numerically zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .dip import DecodingGram, OperatorSpan, compute_gram, dimension_bound, phi_onb
from .errors import CompletenessViolation, NotDecodable, ValidationError
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    as_matrix,
    frobenius,
    projector,
    random_unitary,
)
from .sampling import complex_gaussian, random_state_in, rng_from

__all__ = [
    "QuantumChannel",
    "DensityState",
    "CorrectingCode",
    "LimitingCases",
    "kl_check",
    "decoding_noise_basis",
    "decoding_basis_residual",
    "synthesize_channel",
    "kraus_projection_residual",
    "apply_channel",
    "verify_decoding",
    "decoding_residual",
    "limiting_cases",
    "random_instance",
    "perturb_channel",
    "choi_matrix",
]


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Kraus representation ``rho -> sum_j K_j rho K_j^*``."""

    kraus: np.ndarray = field(repr=False)  # (n, d, d)
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        ks = np.asarray(self.kraus, dtype=complex)
        if ks.ndim == 2:
            ks = ks[None]
        if ks.ndim != 3 or ks.shape[0] == 0 or ks.shape[1] != ks.shape[2]:
            raise ValidationError(f"bad Kraus array of shape {ks.shape}")
        ks = ks.copy()
        ks.flags.writeable = False
        object.__setattr__(self, "kraus", ks)
        if self.check:
            r = self.completeness_residual()
            if r > self.tol.check_eps:
                raise CompletenessViolation(f"sum K^* K differs from I by {r:.3e}", r)

    @classmethod
    def of(cls, kraus: Sequence, tol: Tolerance = DEFAULT_TOL, check: bool = True) -> QuantumChannel:
        return cls(np.stack([as_matrix(k, square=True, name="Kraus operator") for k in kraus]), tol, check)

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    def __len__(self):
        return self.kraus.shape[0]

    def completeness_residual(self) -> float:
        s = np.einsum("kba,kbc->ac", self.kraus.conj(), self.kraus, optimize=True)
        return frobenius(s - np.eye(self.dim))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim, self.dim):
            raise ValidationError(f"channel acts on {self.dim}x{self.dim} operators, got {x.shape}")
        k = self.kraus
        return (k @ x @ k.conj().transpose(0, 2, 1)).sum(axis=0)


@dataclass(frozen=True, eq=False)
class DensityState:
    """Self-adjoint, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = as_matrix(self.matrix, square=True, name="state")
        eps = self.tol.check_eps
        if frobenius(m - m.conj().T) > eps:
            raise ValidationError("state is not self-adjoint")
        if abs(np.trace(m) - 1) > eps:
            raise ValidationError(f"state has trace {np.trace(m).real:.6g}")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] < -eps:
            raise ValidationError("state is not positive semidefinite")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True, eq=False)
class CorrectingCode:
    """A code together with its noise span, decoding basis and decoding channel."""

    code: Subspace
    noise: OperatorSpan
    decoding_basis: OperatorSpan
    channel: QuantumChannel
    gram: DecodingGram | None = field(default=None, repr=False)


def kl_check(code: Subspace, noise: OperatorSpan, tol: Tolerance = DEFAULT_TOL) -> DecodingGram:
    """Knill-Laflamme test ``P_C N^* M P_C = lambda(N, M) P_C``; returns the lambda matrix.

    Same contract as :func:`qecdip.dip.compute_gram`. As a cross-check, the
    basis form ``<u_i, N^* M u_j> = delta_ij lambda(N, M)`` is re-evaluated on a
    second orthonormal basis of the code (the frame rotated by a DFT matrix).
    """
    gram = compute_gram(code, noise, tol)
    k = code.dim
    dft = np.exp(2j * np.pi * np.outer(np.arange(k), np.arange(k)) / k) / np.sqrt(k)
    u = code.frame @ dft
    a = noise.basis @ u
    m = np.einsum("jab,lac->jlbc", a.conj(), a)
    target = gram.gram[:, :, None, None] * np.eye(k)
    worst = float(np.max(np.abs(m - target)))
    if worst > tol.check_eps:
        j, l = np.unravel_index(int(np.argmax(np.abs(m - target).max(axis=(2, 3)))), gram.gram.shape)
        raise NotDecodable(
            f"orthonormal-basis form fails on pair ({j}, {l}) with residual {worst:.3e}",
            pair=(int(j), int(l)),
            residual=worst,
        )
    return gram


def decoding_noise_basis(code: Subspace, noise: OperatorSpan, tol: Tolerance = DEFAULT_TOL) -> OperatorSpan:
    """phi-orthonormal basis ``{N_j}`` with each ``N_j P_C`` a partial isometry onto C
    and mutually orthogonal images ``N_j C``."""
    gram = kl_check(code, noise, tol)
    basis = phi_onb(noise, gram, tol=tol).orthonormal
    worst = decoding_basis_residual(code, basis)
    if worst > tol.check_eps:
        raise NotDecodable(f"extracted basis is not code-decoding (residual {worst:.3e})", residual=worst)
    return basis


def decoding_basis_residual(code: Subspace, basis: OperatorSpan) -> float:
    """max_{j, l} ||(N_j Q)^* (N_l Q) - delta_jl I||_F for a code frame ``Q``.

    Zero iff every ``N_j P_C`` is a partial isometry with support C and the
    images ``N_j C`` are mutually orthogonal.
    """
    if code.ambient != basis.ambient:
        raise ValidationError("code and basis act on different spaces")
    a = basis.basis @ code.frame
    overlaps = np.einsum("jab,lac->jlbc", a.conj(), a)
    target = np.eye(basis.count)[:, :, None, None] * np.eye(code.dim)
    return float(np.max(np.linalg.norm(overlaps - target, axis=(2, 3))))


def kraus_projection_residual(kraus: np.ndarray, count: int) -> float:
    """max_{j, r} ||P_j P_r - delta_jr P_j||_F over the first ``count`` Kraus operators."""
    p = np.einsum("kba,kbc->kac", kraus[:count].conj(), kraus[:count])
    prod = np.einsum("jab,rbc->jrac", p, p)
    target = np.eye(count)[:, :, None, None] * p[:, None]
    return float(np.max(np.linalg.norm(prod - target, axis=(2, 3)))) if count else 0.0


def synthesize_channel(code: Subspace, decoding_basis: OperatorSpan, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """Decoding channel ``K_j = P_C N_j^*`` plus ``K_{t+1} = I - sum_j K_j^* K_j``.

    Raises CompletenessViolation when the ``K_j^* K_j`` are not mutually
    orthogonal projections, which means the basis was not code-decoding.
    """
    if code.ambient != decoding_basis.ambient:
        raise ValidationError("code and decoding basis act on different spaces")
    pc = projector(code)
    t = decoding_basis.count
    ks = pc[None] @ np.conj(np.swapaxes(decoding_basis.basis, 1, 2))
    proj_res = kraus_projection_residual(ks, t)
    if proj_res > tol.check_eps:
        raise CompletenessViolation(f"K_j^* K_j are not orthogonal projections (residual {proj_res:.3e})", proj_res)
    rest = np.eye(code.ambient) - np.einsum("kba,kbc->ac", ks.conj(), ks)
    return QuantumChannel(np.concatenate([ks, rest[None]]), tol)


def apply_channel(channel: QuantumChannel, state: DensityState) -> DensityState:
    out = channel(state.matrix)
    return DensityState(0.5 * (out + out.conj().T), state.tol)


def _decoding_residual(channel: QuantumChannel, noise: OperatorSpan, code: Subspace, rng, n_samples: int) -> float:
    worst = 0.0
    for _ in range(n_samples):
        rho = random_state_in(code, rng)
        c = complex_gaussian(rng, noise.count)
        c /= np.linalg.norm(c)
        n_op = noise.combine(c)
        lhs = channel(n_op @ rho @ n_op.conj().T)
        rhs = np.trace(rho @ n_op.conj().T @ n_op) * rho
        worst = max(worst, frobenius(lhs - rhs))
    return worst


def verify_decoding(cc: CorrectingCode, n_samples: int = 100, seed=0) -> float:
    """Max of ``||Phi(N rho N^*) - tr(rho N^* N) rho||_F`` over random code states and noise.

    ``N`` is a random combination of the noise basis with unit-norm coefficients.
    """
    return _decoding_residual(cc.channel, cc.noise, cc.code, rng_from(seed), n_samples)


def decoding_residual(channel: QuantumChannel, code: Subspace, noise: OperatorSpan, n_samples: int = 100, seed=0) -> float:
    """As :func:`verify_decoding` for an arbitrary (channel, code, noise) triple."""
    return _decoding_residual(channel, noise, code, rng_from(seed), n_samples)


@dataclass(frozen=True)
class LimitingCases:
    whole_space_correctable: bool
    whole_space_decoder: QuantumChannel | None
    noise_is_full_algebra: bool
    full_algebra_code_exists: bool
    full_algebra_decoder: QuantumChannel | None


def limiting_cases(space_dim: int, noise: OperatorSpan, tol: Tolerance = DEFAULT_TOL) -> LimitingCases:
    """The two extreme cases: C = H, and N = B(H).

    ``H`` corrects ``N`` iff ``N`` is spanned by one operator proportional to a
    unitary ``W``; the decoder is ``rho -> W^* rho W``. A code correcting all of
    ``B(H)`` exists iff ``dim H = 1``, with the identity channel.
    """
    if noise.ambient != space_dim:
        raise ValidationError("noise does not act on the given space")
    whole, dec = False, None
    if noise.count == 1:
        n = noise.basis[0]
        g = n.conj().T @ n
        lam = np.trace(g).real / space_dim
        if lam > 0 and frobenius(g - lam * np.eye(space_dim)) <= tol.check_eps * max(1.0, lam):
            whole = True
            w = n / np.sqrt(lam)
            dec = QuantumChannel(w.conj().T[None], tol)
    full = noise.count == space_dim ** 2
    exists = space_dim == 1
    return LimitingCases(whole, dec, full, exists, QuantumChannel(np.eye(1)[None], tol) if exists else None)


def random_instance(ambient_dim: int, code_dim: int, noise_count: int, seed=0, tol: Tolerance = DEFAULT_TOL) -> CorrectingCode:
    """A guaranteed-correctable instance built backwards from a decoding basis.

    A Haar-random code frame ``Q`` and ``noise_count`` mutually orthogonal image
    frames ``R_j`` give partial isometries ``E_j = R_j Q^* + X_j (I - P_C)``
    (``X_j`` arbitrary off the code); the noise basis is a random unitary
    mixture of the ``E_j``.
    """
    if min(ambient_dim, code_dim, noise_count) < 1:
        raise ValidationError("dimensions and counts must be positive")
    if noise_count * code_dim > ambient_dim:
        raise ValidationError(
            f"dimension bound violated: {noise_count} * {code_dim} > {ambient_dim}"
        )
    rng = rng_from(seed)
    d, k, t = ambient_dim, code_dim, noise_count
    q = random_unitary(d, rng)[:, :k]
    images = random_unitary(d, rng)[:, : t * k]
    off = np.eye(d) - q @ q.conj().T
    e = np.stack([
        images[:, j * k:(j + 1) * k] @ q.conj().T + complex_gaussian(rng, (d, d)) @ off
        for j in range(t)
    ])
    mix = random_unitary(t, rng)
    noise = OperatorSpan(d, np.tensordot(mix, e, axes=1), tol)
    code = Subspace(d, q)
    gram = kl_check(code, noise, tol)
    basis = phi_onb(noise, gram, tol=tol).orthonormal
    channel = synthesize_channel(code, basis, tol)
    return CorrectingCode(code, noise, basis, channel, gram)


def perturb_channel(channel: QuantumChannel, magnitude: float = 1e-2, seed=0) -> QuantumChannel:
    """Rotate the output by ``exp(i * magnitude * H)`` for a random unit-norm Hermitian ``H``.

    The result is still a channel, just not a decoder.
    """
    rng = rng_from(seed)
    z = complex_gaussian(rng, (channel.dim, channel.dim))
    h = z + z.conj().T
    h /= np.linalg.norm(h, 2)
    w = scipy.linalg.expm(1j * magnitude * h)
    return QuantumChannel(w[None] @ channel.kraus, channel.tol)


def choi_matrix(channel: QuantumChannel) -> np.ndarray:
    """Choi matrix ``sum_k vec(K_k) vec(K_k)^*``; equal channels have equal Choi matrices."""
    v = channel.kraus.reshape(len(channel), -1)
    return v.T @ v.conj()
