"""Shared random generators and independent oracles for the tests."""

import numpy as np

from qecdip.linalg import direct_sum, random_unitary


def shift_block(n):
    v = np.zeros((n, n), dtype=complex)
    v[np.arange(1, n), np.arange(n - 1)] = 1
    return v


def power_partial_isometry(rng, d, *, unitary_dim=None, rotate=True):
    """W (unitary ⊕ truncated shifts) W^* with random block sizes summing to d.

    Returns the operator together with the unitary dimension and the shift lengths.
    """
    if unitary_dim is None:
        unitary_dim = int(rng.integers(0, d + 1))
    rest = d - unitary_dim
    lengths = []
    while rest > 0:
        n = int(rng.integers(1, rest + 1))
        lengths.append(n)
        rest -= n
    blocks = ([random_unitary(unitary_dim, rng)] if unitary_dim else []) + [shift_block(n) for n in lengths]
    v = direct_sum(blocks)
    if rotate:
        w = random_unitary(d, rng)
        v = w @ v @ w.conj().T
    return v, unitary_dim, lengths


def truncated_unitary_pi(rng, d, r):
    """Partial isometry of rank r with random support and range."""
    a = random_unitary(d, rng)[:, :r]
    b = random_unitary(d, rng)[:, :r]
    return a @ b.conj().T


def coordinate_indices(frame, tol=1e-9):
    """Indices i with e_i in the span, for subspaces known to be coordinate."""
    p = frame @ frame.conj().T
    return sorted(int(i) for i in np.flatnonzero(np.abs(np.diag(p)) > 1 - tol))


def brute_orth_projector(frame):
    """Projector through the pseudo-inverse, independent of the package's SVD code."""
    if frame.shape[1] == 0:
        return np.zeros((frame.shape[0], frame.shape[0]), dtype=complex)
    return frame @ np.linalg.pinv(frame)
